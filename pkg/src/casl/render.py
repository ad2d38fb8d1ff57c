"""Report payloads and their table, JSON and CSV renderings.

Every report is first turned into a JSON-ready payload; the three output
formats are views of that payload, so they never disagree. Rationals appear
as ``{"value": "p/q", "decimal": float}`` in JSON and as ``p/q (decimal)`` in
tables. Output carries no colour.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .abstraction import AmbiguityReport, ConsistencyReport, QuotientResult
from .audit import AuditReport
from .norms import EffectBreakdown, NormReport
from .scm import Distribution, Intervention, SampledDistribution

FORMATS = ("table", "json", "csv")


def rational(p: Fraction | None) -> dict[str, Any] | None:
    if p is None:
        return None
    p = Fraction(p)
    text = str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"
    return {"value": text, "decimal": float(p)}


def show(r: Mapping[str, Any] | None) -> str:
    """Table text for a rational payload: exact first, decimal second."""
    if r is None:
        return "n/a"
    return f"{r['value']} ({r['decimal']:.6g})"


def _flag(b: bool | None) -> str:
    return "n/a" if b is None else ("yes" if b else "no")


def _iv(iv: Intervention | None) -> str | None:
    return None if iv is None else str(iv)


@dataclass
class Rendered:
    """A payload plus the flat rows its CSV view uses."""

    payload: dict[str, Any]
    title: str
    header: Sequence[str] = ()
    rows: list[list[Any]] = field(default_factory=list)
    summary: list[tuple[str, str]] = field(default_factory=list)
    csv_header: Sequence[str] = ()
    csv_rows: list[list[Any]] = field(default_factory=list)
    text: str | None = None

    def as_table(self) -> str:
        out = [self.title]
        if self.header:
            cells = [list(map(str, self.header))] + [[str(c) for c in r] for r in self.rows]
            widths = [max(len(r[i]) for r in cells) for i in range(len(self.header))]
            for r in cells:
                out.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        if self.text:
            out.append(self.text.rstrip("\n"))
        if self.summary:
            width = max(len(k) for k, _ in self.summary)
            out.extend(f"{k.ljust(width)}  {v}" for k, v in self.summary)
        return "\n".join(out) + "\n"

    def as_json(self) -> str:
        return json.dumps(self.payload, indent=2) + "\n"

    def as_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.csv_header or self.header)
        w.writerows(self.csv_rows if self.csv_header else self.rows)
        return buf.getvalue()

    def format(self, fmt: str) -> str:
        if fmt not in FORMATS:
            raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
        return {"table": self.as_table, "json": self.as_json, "csv": self.as_csv}[fmt]()


# ---------------------------------------------------------------- reports


def consistency(report: ConsistencyReport, alignment: str = "") -> Rendered:
    entries = [
        {
            "intervention": str(e.low),
            "induced": str(e.high),
            "distance": rational(e.distance),
            "pass": e.passed,
        }
        for e in report.entries
    ]
    payload = {
        "command": "consistency",
        "alignment": alignment,
        "mode": report.mode,
        "threshold": rational(report.threshold),
        "passed": report.passed,
        "epsilon": rational(report.epsilon),
        "entries": entries,
    }
    return Rendered(
        payload,
        f"consistency of {alignment} ({report.mode}, threshold {show(payload['threshold'])})",
        ("intervention", "induced", "distance", "pass"),
        [[e["intervention"], e["induced"], show(e["distance"]), _flag(e["pass"])] for e in entries],
        [("result", "PASS" if report.passed else "FAIL"), ("max distance", show(payload["epsilon"]))],
        ("intervention", "induced", "distance", "distance_decimal", "pass"),
        [[e["intervention"], e["induced"], e["distance"]["value"], e["distance"]["decimal"], e["pass"]] for e in entries],
    )


def ambiguity(report: AmbiguityReport, alignment: str = "") -> Rendered:
    pre = [
        {
            "intervention": str(p.low),
            "probability": rational(p.probability),
            "weight": rational(p.weight),
            "mass": rational(p.mass),
        }
        for p in report.preimages
    ]
    payload = {
        "command": "ambiguity",
        "alignment": alignment,
        "intervention": str(report.high),
        "outcome": f"{report.outcome}={report.value}",
        "aggregator": report.aggregator,
        "preimages": pre,
        "min": rational(report.minimum),
        "max": rational(report.maximum),
        "spread": rational(report.spread),
        "aggregate": rational(report.aggregate),
    }
    high = str(report.high)
    return Rendered(
        payload,
        f"ambiguity of {high} on P({payload['outcome']}) under {alignment} ({report.aggregator})",
        ("low intervention", "P(outcome)", "weight", "mass"),
        [[p["intervention"], show(p["probability"]), show(p["weight"]), show(p["mass"])] for p in pre],
        [(k, show(payload[k])) for k in ("min", "max", "spread", "aggregate")],
        ("high_iv", "low_iv", "outcome_prob", "weight"),
        [[high, p["intervention"], p["probability"]["value"], p["weight"]["value"]] for p in pre],
    )


def _race(ra) -> dict[str, Any] | None:
    if ra is None:
        return None
    return {
        "race": ra.race,
        "distribution": {v: rational(w) for v, w in ra.distribution.items()},
        "tie": ra.tie,
    }


def audit(report: AuditReport, name: str = "") -> Rendered:
    atyp = [
        {
            "resume": dict(a.resume),
            "anchor": a.anchor,
            "resume_mass": rational(a.resume_mass),
            "anchor_mass": rational(a.anchor_mass),
            "distance": rational(a.distance),
            "resume_empty": a.resume_empty,
            "anchor_empty": a.anchor_empty,
        }
        for a in report.atypicality
    ]
    positivity = None
    if report.positivity is not None:
        positivity = {"passed": report.positivity.passed, "masses": [rational(m) for m in report.positivity.masses]}
    payload = {
        "command": "audit",
        "audit": name,
        "resume1": dict(report.resume1),
        "resume2": dict(report.resume2),
        "rule": report.rule.value,
        "aggregator": report.aggregator,
        "masses": [rational(m) for m in report.masses],
        "races": [_race(r) for r in report.races],
        "outcome_probabilities": [rational(p) for p in report.outcome_probabilities],
        "callback_ratio": rational(report.callback_ratio),
        "audit_effect": rational(report.audit_effect),
        "race_effect": rational(report.race_effect),
        "deviation": rational(report.deviation),
        "effects_equal": report.effects_equal,
        "verdict": report.verdict,
        "positivity": positivity,
        "atypicality": atyp,
        "notes": list(report.notes),
    }

    def resume(r: Mapping[str, str]) -> str:
        return ", ".join(f"{k}={v}" for k, v in r.items())

    races = [r["race"] if r and r["race"] else ("mix" if r else "n/a") for r in payload["races"]]
    rows = [
        ["resume", resume(report.resume1), resume(report.resume2)],
        ["population mass", *map(show, payload["masses"])],
        ["race", *races],
        ["P(outcome | do(resume))", *map(show, payload["outcome_probabilities"])],
    ]
    for a in atyp[:1]:
        rows.append([f"atypicality vs {a['anchor']}", show(atyp[0]["distance"]), show(atyp[1]["distance"])])
    summary = [
        ("callback ratio", show(payload["callback_ratio"])),
        ("audit effect", show(payload["audit_effect"])),
        ("race effect", show(payload["race_effect"])),
        ("deviation", show(payload["deviation"])),
        ("consistency verdict", {True: "PASS", False: "FAIL", None: "withheld"}[report.verdict]),
        ("positivity", "n/a" if positivity is None else ("PASS" if positivity["passed"] else "FAIL")),
    ]
    summary += [("note", n) for n in report.notes]
    metrics = [
        ("audit_effect", report.audit_effect),
        ("race_effect", report.race_effect),
        ("deviation", report.deviation),
        ("callback_ratio", report.callback_ratio),
        ("mass_resume1", report.masses[0]),
        ("mass_resume2", report.masses[1]),
        ("outcome_prob_resume1", report.outcome_probabilities[0]),
        ("outcome_prob_resume2", report.outcome_probabilities[1]),
    ]
    csv_rows = [[k, (rational(v) or {}).get("value", ""), (rational(v) or {}).get("decimal", "")] for k, v in metrics]
    return Rendered(
        payload,
        f"audit {name} ({report.rule.value} race, {report.aggregator})",
        ("", "resume 1", "resume 2"),
        rows,
        summary,
        ("metric", "value", "decimal"),
        csv_rows,
    )


def _breakdown(b: EffectBreakdown) -> dict[str, Any]:
    def side(rows):
        return [
            {"intervention": str(p.low), "probability": rational(p.probability), "weight": rational(p.weight)}
            for p in rows
        ]

    return {
        "from": side(b.from_preimages),
        "to": side(b.to_preimages),
        "from_aggregate": rational(b.from_aggregate),
        "to_aggregate": rational(b.to_aggregate),
        "effect": rational(b.effect),
    }


def norms(report: NormReport, name: str = "") -> Rendered:
    c = report.contrast
    rec = report.reclassification
    payload = {
        "command": "norms",
        "compare": name,
        "contrast": {"variable": c.variable, "from": c.from_value, "to": c.to_value},
        "outcome": f"{report.outcome}={report.value}",
        "aggregator": report.aggregator,
        "attribute_effect": rational(report.attribute_effect),
        "norm_effect": rational(report.norm_effect),
        "delta": rational(report.delta),
        "reclassification": {
            "total": rational(rec.total),
            "by_variable": {h: rational(m) for h, m in rec.by_variable.items()},
            "by_value": [{"variable": h, "value": v, "mass": rational(m)} for (h, v), m in rec.by_value.items()],
        },
        "breakdown": {"actual": _breakdown(report.actual), "ideal": _breakdown(report.ideal)},
    }
    csv_rows = []
    for which in ("actual", "ideal"):
        for side in ("from", "to"):
            for p in payload["breakdown"][which][side]:
                csv_rows.append([which, side, p["intervention"], p["probability"]["value"], p["weight"]["value"]])
    return Rendered(
        payload,
        f"norm comparison {name}: {c.variable} {c.from_value} -> {c.to_value} on P({payload['outcome']})",
        ("quantity", "value"),
        [
            ["attribute", show(payload["attribute_effect"])],
            ["norm", show(payload["norm_effect"])],
            ["delta", show(payload["delta"])],
        ],
        [("reclassified mass", show(payload["reclassification"]["total"]))],
        ("alignment", "side", "low_iv", "outcome_prob", "weight"),
        csv_rows,
    )


def distribution(d: Distribution, model: str, iv: Intervention) -> Rendered:
    rows = [{"assignment": a, "probability": rational(p)} for a, p in d.assignments()]
    payload = {"command": "intervene", "model": model, "intervention": str(iv), "exact": True,
               "scope": list(d.scope), "rows": rows}  # fmt: skip
    return Rendered(
        payload,
        f"P({', '.join(d.scope)} | {iv}) in {model}",
        (*d.scope, "probability"),
        [[*(r["assignment"][v] for v in d.scope), show(r["probability"])] for r in rows],
        [],
        (*d.scope, "probability", "decimal"),
        [[*(r["assignment"][v] for v in d.scope), r["probability"]["value"], r["probability"]["decimal"]] for r in rows],
    )


def sampled(d: SampledDistribution, model: str, iv: Intervention, scope: Sequence[str]) -> Rendered:
    idx = [d.scope.index(v) for v in scope]
    counts: dict[tuple[str, ...], int] = {}
    for row, c in d.counts.items():
        key = tuple(row[i] for i in idx)
        counts[key] = counts.get(key, 0) + c
    rows = []
    for key in sorted(counts):
        est = d.probability(dict(zip(scope, key)))
        rows.append({"assignment": dict(zip(scope, key)), "estimate": est.value, "stderr": est.stderr})
    payload = {"command": "intervene", "model": model, "intervention": str(iv), "exact": False,
               "samples": d.n, "seed": d.seed, "scope": list(scope), "rows": rows}  # fmt: skip
    table_rows = [[*(r["assignment"][v] for v in scope), f"{r['estimate']:.6g}", f"{r['stderr']:.2g}"] for r in rows]
    return Rendered(
        payload,
        f"Monte Carlo P({', '.join(scope)} | {iv}) in {model} (n={d.n}, seed={d.seed})",
        (*scope, "estimate", "stderr"),
        table_rows,
    )


def quotient(result: QuotientResult, alignment: str, text: str) -> Rendered:
    payload = {
        "command": "quotient",
        "alignment": alignment,
        "aggregator": result.aggregator,
        "exact": result.exact,
        "epsilon": rational(result.report.epsilon),
        "model": text,
    }
    return Rendered(
        payload,
        f"quotient of {alignment} ({result.aggregator})",
        summary=[("exact", "yes" if result.exact else "no"), ("max distance", show(payload["epsilon"]))],
        csv_header=("alignment", "aggregator", "exact", "epsilon"),
        csv_rows=[[alignment, result.aggregator, result.exact, payload["epsilon"]["value"]]],
        text=text,
    )


def diagnostics(files: Sequence[tuple[str, int, Sequence[Any]]]) -> Rendered:
    """``files`` holds (path, declaration count, diagnostics)."""
    out = []
    flat = []
    for path, count, diags in files:
        ds = [
            {
                "severity": d.severity,
                "message": d.message,
                "line": d.span.line,
                "column": d.span.column,
                "length": d.span.length,
                "context": d.context,
            }
            for d in diags
        ]
        out.append({"path": path, "declarations": count, "diagnostics": ds})
        flat += [[path, d["line"], d["column"], d["length"], d["severity"], d["message"], d["context"]] for d in ds]
    valid = not flat
    payload = {"command": "validate", "valid": valid, "files": out}
    summary = [(f["path"], f"ok ({f['declarations']} declaration{'' if f['declarations'] == 1 else 's'})") for f in out if not f["diagnostics"]]
    columns = ("file", "line", "column", "length", "severity", "message", "context")
    return Rendered(
        payload,
        "validation " + ("passed" if valid else "failed"),
        columns if flat else (),
        flat,
        summary,
        columns,
        flat,
    )
