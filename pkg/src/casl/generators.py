"""Random models, interventions and alignments for property tests and sweeps.

Every generator takes a :class:`random.Random` so callers control
reproducibility (hypothesis supplies shrinkable instances via
``st.randoms()``).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .abstraction import ClusterSpec
from .scm import SCM, Intervention, build_scm, evaluate_world

BITS = ("0", "1")


def random_probability(rng: random.Random, denominators: Sequence[int] = (2, 3, 4, 5, 8)) -> Fraction:
    d = rng.choice(denominators)
    return Fraction(rng.randint(1, d - 1), d)


def random_scm(
    rng: random.Random,
    n_endo: int = 4,
    n_exo: int | None = None,
    max_parents: int = 2,
    name: str = "random",
) -> SCM:
    """Binary model over ``V0..`` with binary noise ``U0..``; every noise feeds some variable."""
    n_exo = n_endo if n_exo is None else n_exo
    endo = [f"V{i}" for i in range(n_endo)]
    exo = [f"U{i}" for i in range(n_exo)]
    owner = {u: endo[i % n_endo] if i < n_endo else rng.choice(endo) for i, u in enumerate(exo)}
    exogenous = {}
    for u in exo:
        p = random_probability(rng)
        exogenous[u] = {"0": p, "1": 1 - p}
    functions = {}
    for i, v in enumerate(endo):
        parents = rng.sample(endo[:i], rng.randint(0, min(i, max_parents)))
        parents += [u for u in exo if owner[u] == v]
        table = {row: rng.choice(BITS) for row in itertools.product(BITS, repeat=len(parents))}
        functions[v] = (tuple(parents), table)
    return build_scm(exogenous, {v: BITS for v in endo}, functions, name=name)


def random_intervention(rng: random.Random, scm: SCM, max_size: int = 2) -> Intervention:
    k = rng.randint(0, min(max_size, len(scm.endogenous_names)))
    chosen = rng.sample(list(scm.endogenous_names), k)
    return Intervention({v: rng.choice(scm.domain(v)) for v in chosen})


def _surjective_map(rng: random.Random, rows: list[tuple[str, ...]], k: int) -> dict[tuple[str, ...], str]:
    """Random onto map from ``rows`` to ``h0..h{k-1}``."""
    values = [f"h{i}" for i in range(k)]
    labels = values + [rng.choice(values) for _ in range(len(rows) - k)]
    rng.shuffle(labels)
    return dict(zip(rows, labels))


def random_cluster_spec(
    rng: random.Random,
    low: SCM,
    max_cluster: int = 2,
    drop_probability: float = 0.2,
    keep: Sequence[str] = (),
) -> ClusterSpec:
    """Random partition into clusters ``H0..`` with onto value maps; variables in ``keep`` are never dropped."""
    # Clusters are contiguous runs of the evaluation order, so the cluster graph stays acyclic.
    variables = list(low.endogenous_names)
    dropped = [v for v in variables if v not in keep and rng.random() < drop_probability]
    if len(dropped) == len(variables):
        dropped.pop()
    remaining = [v for v in variables if v not in dropped]
    clusters, maps, domains = {}, {}, {}
    while remaining:
        size = rng.randint(1, min(max_cluster, len(remaining)))
        members, remaining = tuple(remaining[:size]), remaining[size:]
        h = f"H{len(clusters)}"
        rows = list(itertools.product(*(low.domain(v) for v in members)))
        k = rng.randint(min(2, len(rows)), min(3, len(rows)))
        clusters[h] = members
        maps[h] = _surjective_map(rng, rows, k)
        domains[h] = tuple(f"h{i}" for i in range(k))
    return ClusterSpec(clusters, maps, tuple(dropped), domains)


@dataclass(frozen=True, eq=False)
class RefinedPair:
    """A high model and a low refinement that is consistent with it by construction."""

    low: SCM
    high: SCM
    spec: ClusterSpec


def refined_pair(rng: random.Random, n_high: int = 3, max_cluster: int = 2, max_parents: int = 2) -> RefinedPair:
    """Refine each binary high variable into a cluster of binary low variables.

    A cluster first draws its high value from the high mechanism applied to
    the parent clusters' images, then a private noise picks which preimage
    row realises it. Low behaviour therefore depends on parents only through
    their images, which makes the alignment exactly consistent.
    """
    high_vars = [f"H{i}" for i in range(n_high)]
    parents: dict[str, list[str]] = {}
    noise: dict[str, dict[str, Fraction]] = {}
    mech: dict[str, dict[tuple[str, ...], str]] = {}
    for i, h in enumerate(high_vars):
        parents[h] = sorted(rng.sample(high_vars[:i], rng.randint(0, min(i, max_parents))))
        m = rng.randint(2, 3)
        cuts = sorted(rng.sample(range(1, 12), m - 1))
        bounds = [0, *cuts, 12]
        noise[f"U_{h}"] = {f"u{j}": Fraction(bounds[j + 1] - bounds[j], 12) for j in range(m)}
        mech[h] = {
            row: rng.choice(BITS) for row in itertools.product(*([BITS] * len(parents[h]) + [list(noise[f"U_{h}"])]))
        }
        # keep the high variable non-degenerate so both values can occur
        outs = set(mech[h].values())
        if len(outs) == 1:
            key = rng.choice(list(mech[h]))
            mech[h][key] = "1" if outs == {"0"} else "0"

    members: dict[str, tuple[str, ...]] = {}
    vmaps: dict[str, dict[tuple[str, ...], str]] = {}
    preimages: dict[str, dict[str, list[tuple[str, ...]]]] = {}
    for i, h in enumerate(high_vars):
        size = rng.randint(1, max_cluster)
        members[h] = tuple(f"L{i}{chr(ord('a') + j)}" for j in range(size))
        rows = list(itertools.product(BITS, repeat=size))
        vmaps[h] = {(b,): b for (b,) in rows} if size == 1 else _surjective_map(rng, rows, 2)
        if size > 1:
            vmaps[h] = {r: str(int(v[1:])) for r, v in vmaps[h].items()}
        preimages[h] = {b: [r for r in rows if vmaps[h][r] == b] for b in BITS}

    exogenous = dict(noise)
    for h in high_vars:
        width = max(len(rs) for rs in preimages[h].values())
        exogenous[f"P_{h}"] = {f"p{j}": Fraction(1, width) for j in range(width)}
    functions = {}
    for h in high_vars:
        low_parents = tuple(v for p in parents[h] for v in members[p])
        args = low_parents + (f"U_{h}", f"P_{h}")
        doms = [BITS] * len(low_parents) + [list(exogenous[f"U_{h}"]), list(exogenous[f"P_{h}"])]
        for j, var in enumerate(members[h]):
            table = {}
            for row in itertools.product(*doms):
                world = dict(zip(args, row))
                images = tuple(vmaps[p][tuple(world[v] for v in members[p])] for p in parents[h])
                value = mech[h][images + (world[f"U_{h}"],)]
                options = preimages[h][value]
                pick = options[int(world[f"P_{h}"][1:]) % len(options)]
                table[row] = pick[j]
            functions[var] = (args, table)
    low = build_scm(exogenous, {v: BITS for h in high_vars for v in members[h]}, functions, name="refined_low")
    high = build_scm(
        noise,
        {h: BITS for h in high_vars},
        {h: (tuple(parents[h]) + (f"U_{h}",), mech[h]) for h in high_vars},
        name="refined_high",
    )
    spec = ClusterSpec(members, vmaps, (), {h: BITS for h in high_vars})
    return RefinedPair(low, high, spec)


def reachable_rows(scm: SCM, var: str) -> dict[tuple[str, ...], Fraction]:
    """Observational probability of each row (parent configuration) of ``var``'s table."""
    parents = scm.parents(var)
    out: dict[tuple[str, ...], Fraction] = {}
    decls = scm.exogenous
    for combo in itertools.product(*(d.distribution for d in decls)):
        w = Fraction(1)
        for _, p in combo:
            w *= p
        if w == 0:
            continue
        exo = {d.name: v for d, (v, _) in zip(decls, combo)}
        world = {**exo, **evaluate_world(scm, exo)}
        row = tuple(world[p] for p in parents)
        out[row] = out.get(row, Fraction(0)) + w
    return out


def perturb_table(rng: random.Random, scm: SCM, var: str | None = None) -> tuple[SCM, str, tuple[str, ...]]:
    """Change one output of one table at a row with positive observational probability.

    Returns the new model plus the variable and row that changed.
    """
    candidates = [v for v in scm.endogenous_names if len(scm.domain(v)) > 1] if var is None else [var]
    if not candidates:
        raise ValueError("no variable with more than one value to perturb")
    var = rng.choice(candidates)
    rows = sorted(r for r, p in reachable_rows(scm, var).items() if p > 0)
    row = rng.choice(rows)
    f = scm.function(var)
    old = f.table[row]
    new = rng.choice([v for v in scm.domain(var) if v != old])
    functions = {}
    for g in scm.functions:
        table = dict(g.table)
        if g.target == var:
            table[row] = new
        functions[g.target] = (g.parents, table)
    exogenous = {d.name: dict(d.distribution) for d in scm.exogenous}
    variables = {d.name: d.domain for d in scm.endogenous}
    return build_scm(exogenous, variables, functions, name=f"{scm.name}_perturbed"), var, row
