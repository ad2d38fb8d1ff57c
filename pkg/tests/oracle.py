"""Brute-force reference semantics, written independently of ``casl.scm`` inference.

Worlds are enumerated over *every* exogenous variable and endogenous values
are found by repeated sweeps until a fixed point, with no topological sort.
Distributions are plain dicts from sorted ``(var, value)`` tuples to Fractions.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from fractions import Fraction
from typing import Mapping

Table = dict[tuple[tuple[str, str], ...], Fraction]


def worlds(scm, iv: Mapping[str, str] | None = None):
    """Yield (weight, full assignment) for every exogenous world."""
    iv = dict(iv or {})
    exo = [(d.name, d.distribution) for d in scm.exogenous]
    endo = [d.name for d in scm.endogenous]
    tables = {f.target: (f.parents, dict(f.rows)) for f in scm.functions}
    for combo in itertools.product(*(dist for _, dist in exo)):
        weight = Fraction(1)
        values: dict[str, str] = {}
        for (name, _), (value, p) in zip(exo, combo):
            weight *= p
            values[name] = value
        values.update(iv)
        pending = [v for v in endo if v not in iv]
        while pending:
            ready = [v for v in pending if all(p in values for p in tables[v][0])]
            assert ready, "cyclic model"
            for v in ready:
                parents, table = tables[v]
                values[v] = table[tuple(values[p] for p in parents)]
            pending = [v for v in pending if v not in ready]
        yield weight, {v: values[v] for v in endo}


def distribution(scm, iv: Mapping[str, str] | None = None) -> Table:
    out: Table = defaultdict(Fraction)
    for w, world in worlds(scm, iv):
        if w:
            out[tuple(sorted(world.items()))] += w
    return {k: v for k, v in out.items() if v}


def as_table(d) -> Table:
    """A ``casl`` Distribution in oracle form."""
    return {tuple(sorted(a.items())): p for a, p in d.assignments()}


def marginal(t: Table, keep) -> Table:
    out: Table = defaultdict(Fraction)
    for k, p in t.items():
        out[tuple(kv for kv in k if kv[0] in keep)] += p
    return dict(out)


def push(alignment, t: Table) -> Table:
    out: Table = defaultdict(Fraction)
    for k, p in t.items():
        world = dict(k)
        high = {
            h: alignment.value_maps[h][tuple(world[m] for m in members)] for h, members in alignment.clusters.items()
        }
        out[tuple(sorted(high.items()))] += p
    return dict(out)


def complete_cluster_interventions(alignment) -> list[dict[str, str]]:
    out = [{}]
    for h, members in sorted(alignment.clusters.items()):
        doms = [alignment.low.domain(m) for m in members]
        out += [dict(zip(members, row)) for row in itertools.product(*doms)]
    return out


def induced(alignment, iv: Mapping[str, str]) -> dict[str, str]:
    out = {}
    for h, members in alignment.clusters.items():
        if all(m in iv for m in members):
            out[h] = alignment.value_maps[h][tuple(iv[m] for m in members)]
    return out


def consistent(alignment) -> bool:
    high_vars = set(alignment.clusters)
    for iv in complete_cluster_interventions(alignment):
        pushed = push(alignment, distribution(alignment.low, iv))
        target = marginal(distribution(alignment.high, induced(alignment, iv)), high_vars)
        if pushed != target:
            return False
    return True


def tv(p: Table, q: Table) -> Fraction:
    keys = set(p) | set(q)
    return sum((abs(p.get(k, Fraction(0)) - q.get(k, Fraction(0))) for k in keys), Fraction(0)) / 2
