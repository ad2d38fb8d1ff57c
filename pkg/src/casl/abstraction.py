"""Alignments between low- and high-level models and causal-consistency checks."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence, Union

from .scm import (
    EMPTY,
    SCM,
    Distribution,
    Intervention,
    Row,
    _find_cycle,
    build_scm,
    interventional_distribution,
    observational_distribution,
    total_variation,
)

# ---------------------------------------------------------------- errors


class AlignmentError(ValueError):
    def __init__(self, message: str, subject: str | None = None) -> None:
        super().__init__(message)
        self.subject = subject


class OverlappingClusters(AlignmentError):
    pass


class NonSurjectiveValueMap(AlignmentError):
    pass


class NonTotalValueMap(AlignmentError):
    pass


class DomainMismatch(AlignmentError):
    pass


class IncompleteCoverage(AlignmentError):
    pass


class AlignmentBuildError(AlignmentError):
    def __init__(self, errors: Sequence[AlignmentError]) -> None:
        self.errors = list(errors)
        lines = "\n".join(f"  - {type(e).__name__}: {e}" for e in self.errors)
        super().__init__(f"alignment is invalid:\n{lines}")

    def kinds(self) -> set[type]:
        return {type(e) for e in self.errors}


class ScopeMismatch(AlignmentError):
    pass


class UndefinedInducedIntervention(AlignmentError):
    def __init__(self, iv: Intervention) -> None:
        self.intervention = iv
        super().__init__(f"{iv} assigns part of a cluster or a dropped variable; no high-level counterpart")


class UnmappedHighVariable(AlignmentError):
    pass


class EmptyPreimage(AlignmentError):
    pass


class ModelMismatch(AlignmentError):
    pass


class CyclicQuotient(AlignmentError):
    pass


class AggregationError(AlignmentError):
    pass


# ---------------------------------------------------------------- aggregation


class AggregatorKind(str, enum.Enum):
    POPULATION_WEIGHTED_MEAN = "population_weighted_mean"
    UNIFORM_MEAN = "uniform_mean"
    MIN = "min"
    MAX = "max"


_AGG_ALIASES = {
    "mean": AggregatorKind.POPULATION_WEIGHTED_MEAN,
    "weighted": AggregatorKind.POPULATION_WEIGHTED_MEAN,
    "population_weighted_mean": AggregatorKind.POPULATION_WEIGHTED_MEAN,
    "uniform": AggregatorKind.UNIFORM_MEAN,
    "uniform_mean": AggregatorKind.UNIFORM_MEAN,
    "min": AggregatorKind.MIN,
    "max": AggregatorKind.MAX,
}


@dataclass(frozen=True, eq=False)
class Aggregator:
    """How per-preimage quantities combine into one high-level quantity.

    ``population_weighted_mean`` weighs each preimage by the mass of its
    cluster values under ``reference`` (the low observational distribution
    when ``reference`` is None), renormalised over the preimage.
    """

    kind: AggregatorKind = AggregatorKind.POPULATION_WEIGHTED_MEAN
    reference: Distribution | None = None

    @classmethod
    def parse(cls, name: str) -> Aggregator:
        try:
            return cls(_AGG_ALIASES[name.strip().lower()])
        except KeyError:
            raise ValueError(f"unknown aggregator {name!r}; expected one of {sorted(_AGG_ALIASES)}") from None

    @property
    def is_mean(self) -> bool:
        return self.kind in (AggregatorKind.POPULATION_WEIGHTED_MEAN, AggregatorKind.UNIFORM_MEAN)

    def weights(self, values: Sequence[Fraction], masses: Sequence[Fraction]) -> list[Fraction]:
        """Aggregation weights; the aggregate is ``sum(w * v)``."""
        n = len(values)
        if n == 0:
            raise EmptyPreimage("nothing to aggregate")
        if self.kind is AggregatorKind.UNIFORM_MEAN:
            return [Fraction(1, n)] * n
        if self.kind is AggregatorKind.POPULATION_WEIGHTED_MEAN:
            total = sum(masses, Fraction(0))
            if total == 0:
                raise AggregationError("reference distribution puts no mass on the preimage")
            return [m / total for m in masses]
        target = min(values) if self.kind is AggregatorKind.MIN else max(values)
        pick = values.index(target)
        return [Fraction(int(i == pick)) for i in range(n)]

    def aggregate(self, values: Sequence[Fraction], masses: Sequence[Fraction]) -> Fraction:
        return sum((w * v for w, v in zip(self.weights(values, masses), values)), Fraction(0))

    def __str__(self) -> str:
        return self.kind.value


DEFAULT_AGGREGATOR = Aggregator()


# ---------------------------------------------------------------- alignments


@dataclass(frozen=True)
class ClusterSpec:
    """Raw alignment shape: clusters, value maps and dropped variables.

    ``value_maps[h]`` maps joint values of ``clusters[h]`` (in the listed
    order) to a value of ``h``; it may also be a callable over those values.
    ``domains`` optionally fixes the high-level domain order.
    """

    clusters: Mapping[str, Sequence[str]]
    value_maps: Mapping[str, Any]
    dropped: Sequence[str] = ()
    domains: Mapping[str, Sequence[str]] | None = None

    @classmethod
    def identity(cls, low: SCM, variables: Iterable[str] | None = None) -> ClusterSpec:
        """One singleton cluster per variable with identity value maps."""
        keep = list(low.endogenous_names if variables is None else variables)
        clusters = {v: (v,) for v in keep}
        maps = {v: {(x,): x for x in low.domain(v)} for v in keep}
        dropped = [v for v in low.endogenous_names if v not in keep]
        domains = {v: low.domain(v) for v in keep}
        return cls(clusters, maps, dropped, domains)


@dataclass(frozen=True, eq=False)
class Alignment:
    """A validated value-level map from low-level worlds to high-level worlds.

    Cluster variables are stored sorted by name; value-map keys follow that
    order.
    """

    low: SCM
    high: SCM
    clusters: Mapping[str, tuple[str, ...]]
    dropped: frozenset[str]
    value_maps: Mapping[str, Mapping[Row, str]]
    name: str = ""
    _owner: dict[str, str] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        owner = {v: h for h, vs in self.clusters.items() for v in vs}
        object.__setattr__(self, "_owner", owner)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Alignment):
            return NotImplemented
        return (
            self.low == other.low
            and self.high == other.high
            and dict(self.clusters) == dict(other.clusters)
            and self.dropped == other.dropped
            and {h: dict(m) for h, m in self.value_maps.items()} == {h: dict(m) for h, m in other.value_maps.items()}
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def high_vars(self) -> tuple[str, ...]:
        """Mapped high variables in the high model's evaluation order."""
        return tuple(v for v in self.high.order if v in self.clusters)

    def cluster_of(self, low_var: str) -> str | None:
        return self._owner.get(low_var)

    def map_world(self, world: Mapping[str, str]) -> dict[str, str]:
        """Apply the value maps pointwise to one low-level assignment."""
        return {h: self.value_maps[h][tuple(world[v] for v in self.clusters[h])] for h in self.high_vars}

    def spec(self) -> ClusterSpec:
        return ClusterSpec(
            dict(self.clusters),
            {h: dict(m) for h, m in self.value_maps.items()},
            sorted(self.dropped),
            {h: self.high.domain(h) for h in self.clusters},
        )


def _normalise_map(cluster: Sequence[str], raw: Any, low: SCM) -> dict[Row, str]:
    if callable(raw):
        return {r: str(raw(*r)) for r in itertools.product(*(low.domain(v) for v in cluster))}
    out = {}
    for k, v in raw.items():
        key = tuple(str(x) for x in k) if isinstance(k, tuple) else (str(k),)
        out[key] = str(v)
    return out


def build_alignment(low: SCM, high: SCM, spec: ClusterSpec, name: str = "") -> Alignment:
    """Validate ``spec`` against the two models.

    Raises :class:`AlignmentBuildError` carrying every failure found.
    """
    errors: list[AlignmentError] = []
    low_vars = set(low.endogenous_names)
    owner: dict[str, str] = {}
    clusters: dict[str, tuple[str, ...]] = {}
    maps: dict[str, dict[Row, str]] = {}

    for hvar, members in spec.clusters.items():
        members = (members,) if isinstance(members, str) else tuple(members)
        if not high.is_endogenous(hvar):
            errors.append(DomainMismatch(f"{hvar} is not a variable of the high model", subject=hvar))
            continue
        if not members:
            errors.append(DomainMismatch(f"cluster for {hvar} is empty", subject=hvar))
            continue
        unknown = [v for v in members if v not in low_vars]
        if unknown:
            errors.append(DomainMismatch(f"cluster for {hvar} names unknown low variables {unknown}", subject=hvar))
            continue
        if len(set(members)) != len(members):
            errors.append(OverlappingClusters(f"cluster for {hvar} repeats a variable", subject=hvar))
            continue
        for v in members:
            if v in owner:
                errors.append(OverlappingClusters(f"{v} is in the clusters of both {owner[v]} and {hvar}", subject=hvar))
            owner[v] = hvar
        if hvar not in spec.value_maps:
            errors.append(NonTotalValueMap(f"no value map for {hvar}", subject=hvar))
            continue
        raw = _normalise_map(members, spec.value_maps[hvar], low)
        order = sorted(range(len(members)), key=lambda i: members[i])
        sorted_members = tuple(members[i] for i in order)
        product = list(itertools.product(*(low.domain(v) for v in members)))
        bad_keys = [k for k in raw if k not in set(product)]
        if bad_keys:
            errors.append(DomainMismatch(f"value map for {hvar} has rows outside the cluster domain: {bad_keys[:3]}", subject=hvar))
        missing = [r for r in product if r not in raw]
        if missing:
            errors.append(NonTotalValueMap(f"value map for {hvar} misses {missing[:3]}", subject=hvar))
        hdom = high.domain(hvar)
        outside = sorted({v for v in raw.values() if v not in hdom})
        if outside:
            errors.append(DomainMismatch(f"value map for {hvar} produces values outside its domain: {outside}", subject=hvar))
        unhit = [v for v in hdom if v not in set(raw.values())]
        if unhit and not missing:
            errors.append(NonSurjectiveValueMap(f"value map for {hvar} never produces {unhit}", subject=hvar))
        clusters[hvar] = sorted_members
        maps[hvar] = {tuple(k[i] for i in order): v for k, v in raw.items() if k in set(product)}

    dropped = frozenset(spec.dropped)
    for v in sorted(dropped):
        if v not in low_vars:
            errors.append(DomainMismatch(f"dropped variable {v} is not in the low model", subject=v))
        elif v in owner:
            errors.append(OverlappingClusters(f"{v} is both dropped and in the cluster of {owner[v]}", subject=v))
    uncovered = sorted(low_vars - set(owner) - dropped)
    if uncovered:
        errors.append(IncompleteCoverage(f"low variables neither clustered nor dropped: {uncovered}"))
    if errors:
        raise AlignmentBuildError(errors)
    return Alignment(low, high, clusters, dropped, maps, name=name)


def identity_alignment(model: SCM) -> Alignment:
    return build_alignment(model, model, ClusterSpec.identity(model))


def push_distribution(a: Alignment, d: Distribution) -> Distribution:
    """Marginalise dropped variables and map surviving rows through the value maps."""
    needed = [v for vs in a.clusters.values() for v in vs]
    missing = [v for v in needed if v not in d.scope]
    if missing:
        raise ScopeMismatch(f"distribution lacks clustered variables {missing}")
    scope = a.high_vars
    return d.map_rows(scope, lambda w: tuple(a.map_world(w)[h] for h in scope))


# ---------------------------------------------------------------- interventions


class InterventionFamily(enum.Enum):
    """Symbolic intervention sets.

    ``ALL_COMPLETE_CLUSTERS``: the empty do plus every joint setting of each
    single cluster. ``ALL_JOINT_CLUSTERS``: every joint setting of every
    subset of clusters.
    """

    ALL_COMPLETE_CLUSTERS = "all_complete_clusters"
    ALL_JOINT_CLUSTERS = "all_joint_clusters"


ALL_COMPLETE_CLUSTERS = InterventionFamily.ALL_COMPLETE_CLUSTERS
ALL_JOINT_CLUSTERS = InterventionFamily.ALL_JOINT_CLUSTERS

InterventionSet = Union[InterventionFamily, Sequence[Intervention]]


def _cluster_settings(a: Alignment, hvar: str) -> list[Intervention]:
    members = a.clusters[hvar]
    return [Intervention(zip(members, r)) for r in itertools.product(*(a.low.domain(v) for v in members))]


def resolve_interventions(a: Alignment, family: InterventionSet) -> list[Intervention]:
    """Expand an intervention set into a sorted, duplicate-free list."""
    if family is ALL_COMPLETE_CLUSTERS:
        out = {EMPTY}
        for h in a.clusters:
            out.update(_cluster_settings(a, h))
    elif family is ALL_JOINT_CLUSTERS:
        options = [[EMPTY] + _cluster_settings(a, h) for h in sorted(a.clusters)]
        out = set()
        for combo in itertools.product(*options):
            iv = EMPTY
            for part in combo:
                iv = iv.merge(part)
            out.add(iv)
    else:
        out = {iv if isinstance(iv, Intervention) else Intervention(iv) for iv in family}
    return sorted(out)


def induced_high_intervention(a: Alignment, iv_low: Intervention) -> Intervention | None:
    """High-level counterpart of a low intervention, or None when undefined.

    Undefined when ``iv_low`` sets only part of some cluster or sets a
    dropped variable.
    """
    assigned = iv_low.as_dict()
    if any(a.cluster_of(v) is None for v in assigned):
        return None
    out = {}
    for h, members in a.clusters.items():
        hit = [v for v in members if v in assigned]
        if not hit:
            continue
        if len(hit) != len(members):
            return None
        out[h] = a.value_maps[h][tuple(assigned[v] for v in members)]
    return Intervention(out)


def preimage_interventions(a: Alignment, iv_high: Intervention) -> list[Intervention]:
    """Complete-cluster low interventions inducing exactly ``iv_high``."""
    per_var = []
    for h, value in iv_high.items:
        if h not in a.clusters:
            raise UnmappedHighVariable(f"{h} is not mapped by the alignment", subject=h)
        members = a.clusters[h]
        rows = [r for r, v in a.value_maps[h].items() if v == value]
        per_var.append([tuple(zip(members, r)) for r in rows])
    out = [Intervention(itertools.chain.from_iterable(combo)) for combo in itertools.product(*per_var)]
    return sorted(out)


# ---------------------------------------------------------------- consistency


@dataclass(frozen=True, eq=False)
class ConsistencyEntry:
    low: Intervention
    high: Intervention
    pushed: Distribution
    target: Distribution
    distance: Fraction
    passed: bool


@dataclass(frozen=True, eq=False)
class ConsistencyReport:
    mode: str  # "exact" or "tv"
    threshold: Fraction
    entries: tuple[ConsistencyEntry, ...]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def epsilon(self) -> Fraction:
        return max((e.distance for e in self.entries), default=Fraction(0))

    @property
    def failures(self) -> list[ConsistencyEntry]:
        return [e for e in self.entries if not e.passed]


def high_distribution(a: Alignment, iv_high: Intervention) -> Distribution:
    """High-model interventional distribution restricted to the mapped variables."""
    return interventional_distribution(a.high, iv_high).marginal(a.high_vars)


def _consistency(a: Alignment, S: InterventionSet, threshold: Fraction, mode: str) -> ConsistencyReport:
    ivs = resolve_interventions(a, S)
    induced = []
    for iv in ivs:
        hi = induced_high_intervention(a, iv)
        if hi is None:
            raise UndefinedInducedIntervention(iv)
        induced.append(hi)
    entries = []
    for iv, hi in zip(ivs, induced):
        pushed = push_distribution(a, interventional_distribution(a.low, iv))
        target = high_distribution(a, hi)
        dist = total_variation(pushed, target)
        entries.append(ConsistencyEntry(iv, hi, pushed, target, dist, dist <= threshold))
    return ConsistencyReport(mode, threshold, tuple(entries))


def check_exact_consistency(a: Alignment, S: InterventionSet = ALL_COMPLETE_CLUSTERS) -> ConsistencyReport:
    """Compare pushed low and high interventional tables for exact equality."""
    return _consistency(a, S, Fraction(0), "exact")


def approx_consistency_tv(a: Alignment, S: InterventionSet, threshold: Fraction | int | str) -> ConsistencyReport:
    """Total-variation consistency; entries pass when their distance is within ``threshold``.

    There is deliberately no default threshold.
    """
    threshold = Fraction(threshold)
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    return _consistency(a, S, threshold, "tv")


# ---------------------------------------------------------------- ambiguity


def _outcome_probability(a: Alignment, iv_low: Intervention, outcome: str, value: str) -> Fraction:
    return push_distribution(a, interventional_distribution(a.low, iv_low)).probability({outcome: value})


def preimage_masses(a: Alignment, preimages: Sequence[Intervention], agg: Aggregator) -> list[Fraction]:
    ref = agg.reference if agg.reference is not None else observational_distribution(a.low)
    return [ref.probability(iv.as_dict()) for iv in preimages]


@dataclass(frozen=True)
class PreimageEffect:
    low: Intervention
    probability: Fraction
    weight: Fraction
    mass: Fraction


@dataclass(frozen=True, eq=False)
class AmbiguityReport:
    high: Intervention
    outcome: str
    value: str
    aggregator: str
    preimages: tuple[PreimageEffect, ...]
    minimum: Fraction
    maximum: Fraction
    aggregate: Fraction

    @property
    def spread(self) -> Fraction:
        return self.maximum - self.minimum


def ambiguity_report(
    a: Alignment,
    iv_high: Intervention,
    outcome: str,
    value: str,
    agg: Aggregator = DEFAULT_AGGREGATOR,
) -> AmbiguityReport:
    """Outcome probability under each preimage of ``iv_high`` and their spread."""
    if outcome not in a.clusters:
        raise UnmappedHighVariable(f"outcome {outcome} is not mapped by the alignment", subject=outcome)
    preimages = preimage_interventions(a, iv_high)
    if not preimages:
        raise EmptyPreimage(f"{iv_high} has no low-level preimage")
    probs = [_outcome_probability(a, iv, outcome, value) for iv in preimages]
    masses = preimage_masses(a, preimages, agg)
    weights = agg.weights(probs, masses)
    rows = tuple(PreimageEffect(iv, p, w, m) for iv, p, w, m in zip(preimages, probs, weights, masses))
    return AmbiguityReport(
        iv_high,
        outcome,
        value,
        str(agg),
        rows,
        min(probs),
        max(probs),
        sum((w * p for w, p in zip(weights, probs)), Fraction(0)),
    )


@dataclass(frozen=True)
class IndividualEffect:
    low_from: Intervention
    low_to: Intervention
    effect: Fraction


@dataclass(frozen=True, eq=False)
class AverageEffectEntry:
    variable: str
    from_value: str
    to_value: str
    effects: tuple[IndividualEffect, ...]
    average: Fraction
    offenders: tuple[IndividualEffect, ...]


@dataclass(frozen=True, eq=False)
class AverageEffectReport:
    outcome: str
    value: str
    tolerance: Fraction
    fraction: Fraction
    entries: tuple[AverageEffectEntry, ...]

    @property
    def passed(self) -> bool:
        for e in self.entries:
            close = len(e.effects) - len(e.offenders)
            if Fraction(close, len(e.effects)) < self.fraction:
                return False
        return True


def approx_consistency_average_effects(
    a: Alignment,
    outcome: str,
    value: str,
    tolerance: Fraction | int | str,
    fraction: Fraction | int | str,
) -> AverageEffectReport:
    """Check that almost all individual low-level effects sit near their average.

    For every high variable other than ``outcome`` and each pair of its
    values, the individual effects are the outcome contrasts between every
    preimage of one value and every preimage of the other.
    """
    tolerance, fraction = Fraction(tolerance), Fraction(fraction)
    if outcome not in a.clusters:
        raise UnmappedHighVariable(f"outcome {outcome} is not mapped by the alignment", subject=outcome)
    entries = []
    for h in a.high_vars:
        if h == outcome:
            continue
        dom = a.high.domain(h)
        probs = {
            x: [(iv, _outcome_probability(a, iv, outcome, value)) for iv in preimage_interventions(a, Intervention({h: x}))]
            for x in dom
        }
        for x1, x2 in itertools.combinations(dom, 2):
            effects = tuple(
                IndividualEffect(iv1, iv2, p2 - p1) for (iv1, p1), (iv2, p2) in itertools.product(probs[x1], probs[x2])
            )
            avg = sum((e.effect for e in effects), Fraction(0)) / len(effects)
            offenders = tuple(e for e in effects if abs(e.effect - avg) > tolerance)
            entries.append(AverageEffectEntry(h, x1, x2, effects, avg, offenders))
    return AverageEffectReport(outcome, value, tolerance, fraction, tuple(entries))


# ---------------------------------------------------------------- composition


def compose_alignments(a1: Alignment, a2: Alignment) -> Alignment:
    """Alignment from ``a1.low`` to ``a2.high`` through the shared middle model."""
    if a1.high != a2.low:
        raise ModelMismatch("a1's high model is not a2's low model")
    unmapped = [v for vs in a2.clusters.values() for v in vs if v not in a1.clusters]
    if unmapped:
        raise ModelMismatch(f"middle variables {unmapped} are not produced by the first alignment")
    clusters = {}
    maps = {}
    for h, mids in a2.clusters.items():
        members = tuple(v for m in mids for v in a1.clusters[m])
        clusters[h] = members

        def fn(*vals: str, mids: tuple[str, ...] = mids, h: str = h) -> str:
            world = dict(zip(clusters[h], vals))
            mid_vals = tuple(a1.value_maps[m][tuple(world[v] for v in a1.clusters[m])] for m in mids)
            return a2.value_maps[h][mid_vals]

        maps[h] = fn
    dropped = set(a1.dropped)
    for m in a2.dropped:
        dropped.update(a1.clusters.get(m, ()))
    spec = ClusterSpec(clusters, maps, sorted(dropped))
    return build_alignment(a1.low, a2.high, spec)


# ---------------------------------------------------------------- quotients


@dataclass(frozen=True, eq=False)
class QuotientResult:
    model: SCM
    alignment: Alignment
    report: ConsistencyReport
    aggregator: str

    @property
    def exact(self) -> bool:
        return self.report.passed


def _unique_name(base: str, taken: set[str]) -> str:
    name = base
    while name in taken:
        name = "_" + name
    taken.add(name)
    return name


def _coupled_noise(
    domain: Sequence[str], conditionals: Mapping[Row, Mapping[str, Fraction]]
) -> tuple[dict[str, Fraction], Callable[[Row, str], str]]:
    """Encode a family of conditionals as one noise variable via inverse-CDF coupling.

    Every conditional's cumulative breakpoints become shared cut points;
    noise value ``u<i>`` covers the i-th interval between consecutive cuts.
    """
    cuts: set[Fraction] = set()
    cdfs: dict[Row, list[Fraction]] = {}
    for cfg, probs in conditionals.items():
        acc, cdf = Fraction(0), []
        for v in domain:
            acc += probs.get(v, Fraction(0))
            cdf.append(acc)
        cdfs[cfg] = cdf
        cuts.update(c for c in cdf if c > 0)
    points = sorted(cuts)
    noise = {}
    prev = Fraction(0)
    for i, t in enumerate(points):
        noise[f"u{i}"] = t - prev
        prev = t
    upper = {f"u{i}": t for i, t in enumerate(points)}

    def pick(cfg: Row, u: str) -> str:
        t = upper[u]
        for v, c in zip(domain, cdfs[cfg]):
            if c >= t:
                return v
        return domain[-1]

    return noise, pick


def quotient_high_model(
    low: SCM, spec: ClusterSpec, agg: Aggregator = DEFAULT_AGGREGATOR, name: str = ""
) -> QuotientResult:
    """Construct the high model whose mechanisms aggregate pushed preimage behaviour.

    Each high variable's parents are the other clusters holding low parents
    of its members. Its conditional under ``do(parents = c)`` is the
    aggregate, over preimages of ``c``, of the pushed low distribution of the
    variable; min/max aggregates are renormalised. A weighted mean over a
    preimage with no observational mass weighs its members equally. The result is then
    checked for exact consistency on every complete-cluster intervention.
    """
    owner = {v: h for h, vs in spec.clusters.items() for v in ((vs,) if isinstance(vs, str) else vs)}
    domains: dict[str, tuple[str, ...]] = {}
    for h, members in spec.clusters.items():
        members = (members,) if isinstance(members, str) else tuple(members)
        if spec.domains and h in spec.domains:
            domains[h] = tuple(spec.domains[h])
        else:
            raw = _normalise_map(members, spec.value_maps[h], low)
            seen: dict[str, None] = {}
            for r in itertools.product(*(low.domain(v) for v in members)):
                if r in raw:
                    seen.setdefault(raw[r])
            domains[h] = tuple(seen)

    taken = set(domains)
    noise_names = {h: _unique_name(f"U_{h}", taken) for h in domains}
    # Provisional high model with the right variables and domains, used only to
    # validate the shape and enumerate preimages.
    scaffold = build_scm(
        {noise_names[h]: {v: Fraction(1, len(d)) for v in d} for h, d in domains.items()},
        domains,
        {h: noise_names[h] for h in domains},
        name=name or "quotient",
    )
    shape = build_alignment(low, scaffold, spec)

    high_parents: dict[str, tuple[str, ...]] = {}
    for h, members in shape.clusters.items():
        ps: set[str] = set()
        stack = [p for v in members for p in low.parents(v)]
        seen: set[str] = set()
        while stack:
            p = stack.pop()
            if p in seen or not low.is_endogenous(p):
                continue
            seen.add(p)
            o = owner.get(p)
            if o is None:  # dropped mediator: look through it
                stack.extend(low.parents(p))
            elif o != h:
                ps.add(o)
        high_parents[h] = tuple(sorted(ps))
    cycle = _find_cycle(high_parents)
    if cycle:
        raise CyclicQuotient(f"clusters depend on each other cyclically: {' -> '.join(cycle)}", subject=cycle[0])

    obs = observational_distribution(low)
    ref = agg.reference if agg.reference is not None else obs
    exogenous, functions = {}, {}
    for h in sorted(domains):
        parents = high_parents[h]
        conditionals: dict[Row, dict[str, Fraction]] = {}
        for cfg in itertools.product(*(domains[p] for p in parents)):
            iv_high = Intervention(zip(parents, cfg))
            pre = preimage_interventions(shape, iv_high) if parents else [EMPTY]
            pushed = [push_distribution(shape, interventional_distribution(low, iv)).marginal((h,)) for iv in pre]
            masses = [ref.probability(iv.as_dict()) for iv in pre]
            if agg.kind is AggregatorKind.POPULATION_WEIGHTED_MEAN and sum(masses, Fraction(0)) == 0:
                # Unreachable observationally but reachable by intervention: weigh preimages equally.
                masses = [Fraction(1)] * len(pre)
            probs = {}
            for v in domains[h]:
                probs[v] = agg.aggregate([d.probability({h: v}) for d in pushed], masses)
            total = sum(probs.values(), Fraction(0))
            if total == 0:
                raise AggregationError(f"aggregated conditional for {h} at {iv_high} has no mass")
            conditionals[cfg] = {v: p / total for v, p in probs.items()}
        noise, pick = _coupled_noise(domains[h], conditionals)
        exogenous[noise_names[h]] = noise
        functions[h] = (
            parents + (noise_names[h],),
            {cfg + (u,): pick(cfg, u) for cfg in conditionals for u in noise},
        )
    model = build_scm(exogenous, domains, functions, name=name)
    alignment = build_alignment(low, model, spec, name=name)
    return QuotientResult(model, alignment, check_exact_consistency(alignment), str(agg))
