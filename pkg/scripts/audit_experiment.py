"""Run every audit declared in the fixture corpus under both race rules.

    python3 scripts/audit_experiment.py [--csv]

One row per (file, audit, rule): the resume-level audit effect, the race-level
effect, their deviation and the consistency verdict (blank when withheld).
"""

from __future__ import annotations

import argparse

from casl import fixtures as F
from casl.audit import RaceRule, audit_validity_check
from casl.dsl import load_files

from _table import emit

COLUMNS = ("file", "audit", "rule", "masses", "audit_effect", "race_effect", "deviation", "ratio", "verdict")


def _fmt(x) -> str:
    return "" if x is None else str(x)


def rows():
    for path in sorted(F.corpus_dir().glob("*.casl")):
        ws = load_files([path])
        for name, spec in sorted(ws.audits.items()):
            for rule in RaceRule:
                r = audit_validity_check(
                    spec.population, spec.projection, spec.construction, spec.resume1, spec.resume2,
                    rule=rule, agg=spec.aggregator, race=spec.race, anchor=spec.anchor,
                )  # fmt: skip
                yield {
                    "file": path.stem,
                    "audit": name,
                    "rule": rule.value,
                    "masses": " / ".join(map(str, r.masses)),
                    "audit_effect": _fmt(r.audit_effect),
                    "race_effect": _fmt(r.race_effect),
                    "deviation": _fmt(r.deviation),
                    "ratio": _fmt(r.callback_ratio),
                    "verdict": _fmt(r.verdict),
                }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--csv", action="store_true", help="emit CSV instead of an aligned table")
    args = ap.parse_args()
    emit(list(rows()), COLUMNS, args.csv)

if __name__ == "__main__":
    main()
