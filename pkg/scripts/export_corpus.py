"""Regenerate the ``.casl`` fixture corpus from the Python fixtures.

    python3 scripts/export_corpus.py [--check]

With ``--check`` nothing is written; the exit status is 1 when a file differs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from casl import fixtures as F
from casl.abstraction import quotient_high_model
from casl.dsl import (
    AuditDecl,
    Document,
    NormCompareDecl,
    PopulationDecl,
    ProjectionDecl,
    alignment_decl,
    model_decl,
    serialize,
)

HEADERS = {
    "bird": "Four shades of colour coarsened to red/blue; the bird pecks at red.",
    "bird_perturbed": "The same bird, except it ignores scarlet objects.",
    "audit": "Resume audit: Greg is called back 3/20 of the time, Jamal 2/20.",
    "ambiguity": "Race constituted by name and education; Jamal's callback depends on education.",
    "atypical": "No Jamal attended EliteU, so that resume has no population behind it.",
    "skewed": "Jamals at EliteU are rare and all live North.",
    "coins": "Three fair coins; the actual and ideal bases of Race disagree about V1 and V3.",
    "dress": "Hiring penalises skirts; the actual gender basis includes dress.",
    "ambiguity_min": "The ambiguity scenario with a pessimistic (min) quotient.",
}


def _audit_study(low, tau, resumes, name="main", anchor=None, aggregator=None):
    (r1, r2) = resumes
    pop = PopulationDecl("applicants", low.name, "Callback", "yes")
    proj = ProjectionDecl("resume", tuple(r1))
    audit = AuditDecl(
        name, "applicants", "resume", tau.name, tuple(r1.items()), tuple(r2.items()),
        rule="modal", aggregator=aggregator, anchor=anchor,
    )  # fmt: skip
    return [pop, proj, audit]


def documents() -> dict[str, Document]:
    docs = {}

    low, high = F.bird_low(), F.bird_high()
    docs["bird"] = [model_decl(low), model_decl(high), alignment_decl(F.tau_color(), low.name, high.name)]
    low = F.bird_low(perturbed=True)
    docs["bird_perturbed"] = [
        model_decl(low),
        model_decl(high),
        alignment_decl(F.tau_color(perturbed=True), low.name, high.name, name="tau_color"),
    ]

    low, high, tau = F.audit_low(), F.race_high(), F.tau_sc()
    docs["audit"] = [
        model_decl(low),
        model_decl(high),
        alignment_decl(tau, low.name, high.name),
        *_audit_study(low, tau, ({"Name": "Greg"}, {"Name": "Jamal"})),
    ]

    low, tau = F.ambiguity_low(), F.tau_ambiguity()
    greg, jamal = {"Name": "Greg", "Edu": "StateU"}, {"Name": "Jamal", "Edu": "StateU"}
    docs["ambiguity"] = [
        model_decl(low),
        alignment_decl(tau, low.name, quotient="mean", name="tau_sc"),
        *_audit_study(low, alignment_decl(tau, low.name, quotient="mean", name="tau_sc"), (greg, jamal)),
    ]
    docs["ambiguity_min"] = [
        model_decl(low),
        alignment_decl(tau, low.name, quotient="min", name="tau_sc"),
        *_audit_study(low, alignment_decl(tau, low.name, quotient="min", name="tau_sc"), (greg, jamal), aggregator="min"),
    ]

    for key, low in (("atypical", F.atypical_low()), ("skewed", F.skewed_low())):
        tau = quotient_high_model(low, F.name_edu_race_spec(), name="tau_sc").alignment
        decl = alignment_decl(tau, low.name, quotient="mean", name="tau_sc")
        elite = ({"Name": "Greg", "Edu": "EliteU"}, {"Name": "Jamal", "Edu": "EliteU"})
        docs[key] = [model_decl(low), decl, *_audit_study(low, decl, elite, anchor="Name")]

    low = F.coins_low()
    actual, ideal = F.coins_alignments()
    docs["coins"] = [
        model_decl(low),
        alignment_decl(actual, low.name, quotient="mean", name="tau_actual"),
        alignment_decl(ideal, low.name, quotient="mean", name="tau_ideal"),
        NormCompareDecl("main", low.name, "tau_actual", "tau_ideal", "Race", "r0", "r1", "Effect", "1"),
    ]

    low = F.dress_low()
    actual, ideal = F.dress_alignments()
    docs["dress"] = [
        model_decl(low),
        alignment_decl(actual, low.name, quotient="mean", name="gender_actual"),
        alignment_decl(ideal, low.name, quotient="mean", name="gender_ideal"),
        NormCompareDecl("main", low.name, "gender_actual", "gender_ideal", "Gender", "man", "woman", "Hire", "yes"),
    ]
    return {k: Document(tuple(v)) for k, v in docs.items()}


def render(key: str, doc: Document) -> str:
    return f"# {HEADERS[key]}\n\n" + serialize(doc)


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true")
    ap.add_argument("--out", type=Path, default=Path(F.corpus_dir()))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    stale = []
    for key, doc in documents().items():
        path = args.out / f"{key}.casl"
        text = render(key, doc)
        if args.check:
            if not path.exists() or path.read_text(encoding="utf-8") != text:
                stale.append(path.name)
        else:
            path.write_text(text, encoding="utf-8")
            print(f"wrote {path}")
    if stale:
        print("out of date: " + ", ".join(stale), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
