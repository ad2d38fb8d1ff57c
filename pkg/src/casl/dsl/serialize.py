"""Canonical text form of a document.

Table and cluster rows are sorted, whitespace is normalised, probabilities
are written as ``p/q`` (integers plain) and lines end in LF.
"""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

from .syntax import (
    AlignmentDecl,
    AuditDecl,
    ClusterStmt,
    CopyFn,
    Document,
    DropStmt,
    ExogenousStmt,
    IdentityStmt,
    ModelDecl,
    NormCompareDecl,
    PopulationDecl,
    ProjectionDecl,
    TableRow,
)

INDENT = "  "


def format_rational(p: Fraction) -> str:
    p = Fraction(p)
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def _rows(rows: tuple[TableRow, ...], depth: int) -> list[str]:
    pad = INDENT * depth
    ordered = sorted(rows, key=lambda r: (r.values, r.output))
    lines = [f"{pad}({', '.join(r.values)}) -> {r.output}," for r in ordered]
    if lines:
        lines[-1] = lines[-1][:-1]
    return lines


def _block(head: str, rows: tuple[TableRow, ...], depth: int) -> list[str]:
    if not rows:
        return [f"{INDENT * depth}{head} {{ }}"]
    return [f"{INDENT * depth}{head} {{", *_rows(rows, depth + 1), f"{INDENT * depth}}}"]


def _model(d: ModelDecl) -> list[str]:
    lines = [f"model {d.name} {{"]
    for s in d.body:
        if isinstance(s, ExogenousStmt):
            entries = ", ".join(f"{v}: {format_rational(p)}" for v, p in s.distribution)
            lines.append(f"{INDENT}exogenous {s.name} {{ {entries} }}" if entries else f"{INDENT}exogenous {s.name} {{ }}")
        else:
            head = f"var {s.name} : {{{', '.join(s.domain)}}} ="
            if isinstance(s.function, CopyFn):
                lines.append(f"{INDENT}{head} {s.function.source}")
            else:
                lines.extend(_block(f"{head} table({', '.join(s.function.parents)})", s.function.rows, 1))
    lines.append("}")
    return lines


def _alignment(d: AlignmentDecl) -> list[str]:
    high = f"quotient({d.quotient})" if d.quotient is not None else d.high
    lines = [f"alignment {d.name} : {d.low} -> {high} {{"]
    for s in d.body:
        if isinstance(s, ClusterStmt):
            dom = f" : {{{', '.join(s.domain)}}}" if s.domain is not None else ""
            lines.extend(_block(f"cluster {s.high}{dom} from ({', '.join(s.members)})", s.rows, 1))
        elif isinstance(s, IdentityStmt):
            lines.append(f"{INDENT}identity {', '.join(s.variables)}")
        elif isinstance(s, DropStmt):
            lines.append(f"{INDENT}drop {', '.join(s.variables)}")
    lines.append("}")
    return lines


def _fields(kind: str, name: str, fields: list[tuple[str, str | None]]) -> list[str]:
    return [f"{kind} {name} {{", *(f"{INDENT}{k} {v}" for k, v in fields if v is not None), "}"]


def _resume(pairs: tuple[tuple[str, str], ...]) -> str:
    return "(" + ", ".join(f"{k}={v}" for k, v in pairs) + ")"


def _decl(d) -> list[str]:
    if isinstance(d, ModelDecl):
        return _model(d)
    if isinstance(d, AlignmentDecl):
        return _alignment(d)
    if isinstance(d, PopulationDecl):
        return _fields("population", d.name, [("model", d.model), ("outcome", f"{d.outcome}={d.value}")])
    if isinstance(d, ProjectionDecl):
        return _fields("projection", d.name, [("keep", ", ".join(d.keep))])
    if isinstance(d, AuditDecl):
        return _fields(
            "audit",
            d.name,
            [
                ("population", d.population),
                ("projection", d.projection),
                ("construction", d.construction),
                ("resume1", _resume(d.resume1)),
                ("resume2", _resume(d.resume2)),
                ("rule", d.rule),
                ("aggregator", d.aggregator),
                ("anchor", d.anchor),
                ("race", d.race),
            ],
        )
    if isinstance(d, NormCompareDecl):
        return _fields(
            "normcompare",
            d.name,
            [
                ("model", d.model),
                ("actual", d.actual),
                ("ideal", d.ideal),
                ("contrast", f"{d.variable}: {d.from_value} -> {d.to_value}"),
                ("outcome", f"{d.outcome}={d.value}"),
                ("aggregator", d.aggregator),
            ],
        )
    raise TypeError(f"cannot serialize {type(d).__name__}")


def canonicalize(doc: Document) -> Document:
    """The document with rows sorted, i.e. what a serialize/parse round trip yields."""

    def sort(rows):
        return tuple(sorted(rows, key=lambda r: (r.values, r.output)))

    out = []
    for d in doc.declarations:
        if isinstance(d, ModelDecl):
            body = tuple(
                replace(s, function=replace(s.function, rows=sort(s.function.rows)))
                if not isinstance(s, ExogenousStmt) and not isinstance(s.function, CopyFn)
                else s
                for s in d.body
            )
            d = replace(d, body=body)
        elif isinstance(d, AlignmentDecl):
            d = replace(d, body=tuple(replace(s, rows=sort(s.rows)) if isinstance(s, ClusterStmt) else s for s in d.body))
        out.append(d)
    return Document(tuple(out))


def serialize(doc: Document) -> str:
    if not doc.declarations:
        return ""
    return "\n\n".join("\n".join(_decl(d)) for d in doc.declarations) + "\n"
