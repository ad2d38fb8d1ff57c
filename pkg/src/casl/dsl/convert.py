"""Document nodes from built models and alignments (used for export and for ``quotient`` output)."""

from __future__ import annotations

from ..abstraction import Alignment
from ..scm import SCM
from .syntax import AlignmentDecl, ClusterStmt, CopyFn, DropStmt, ExogenousStmt, IdentityStmt, ModelDecl, TableFn, TableRow, VarStmt


def model_decl(scm: SCM, name: str | None = None) -> ModelDecl:
    body: list = [ExogenousStmt(e.name, e.distribution) for e in scm.exogenous]
    for var in scm.order:
        f = scm.function(var)
        dom = scm.domain(var)
        src = f.parents[0] if len(f.parents) == 1 else None
        is_copy = (
            src is not None
            and src in scm.exogenous_names
            and scm.domain(src) == dom
            and all(row == (out,) for row, out in f.rows)
        )
        fn = CopyFn(src) if is_copy else TableFn(f.parents, tuple(TableRow(r, o) for r, o in f.rows))
        body.append(VarStmt(var, dom, fn))
    return ModelDecl(name or scm.name, tuple(body))


def alignment_decl(
    a: Alignment, low: str, high: str | None = None, quotient: str | None = None, name: str | None = None
) -> AlignmentDecl:
    """Identity singletons become ``identity`` statements; ``quotient`` names an aggregator."""
    body: list = []
    identities = []
    for h in sorted(a.clusters):
        members = a.clusters[h]
        rows = a.value_maps[h]
        if members == (h,) and all(k == (v,) for k, v in rows.items()) and a.high.domain(h) == a.low.domain(h):
            identities.append(h)
            continue
        domain = a.high.domain(h) if quotient is not None else None
        body.append(ClusterStmt(h, domain, members, tuple(TableRow(k, v) for k, v in rows.items())))
    if identities:
        body.append(IdentityStmt(tuple(identities)))
    if a.dropped:
        body.append(DropStmt(tuple(sorted(a.dropped))))
    return AlignmentDecl(name or a.name, low, None if quotient else high, quotient, tuple(body))
