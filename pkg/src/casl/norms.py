"""Attribute-level versus norm-level effects of a social kind.

The attribute effect moves an individual across the partition drawn by the
actual alignment. The norm effect asks the same question after swapping in a
counterfactual alignment over the unchanged low-level model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .abstraction import (
    DEFAULT_AGGREGATOR,
    Aggregator,
    Alignment,
    AlignmentError,
    EmptyPreimage,
    PreimageEffect,
    preimage_interventions,
    preimage_masses,
)
from .scm import SCM, Intervention, interventional_distribution, observational_distribution


class PairMismatch(AlignmentError):
    pass


@dataclass(frozen=True, eq=False)
class AlignmentPair:
    actual: Alignment
    ideal: Alignment

    def __post_init__(self) -> None:
        if self.actual.low != self.ideal.low:
            raise PairMismatch("the two alignments must share one low-level model")
        if set(self.actual.clusters) != set(self.ideal.clusters):
            raise PairMismatch(
                f"high variables differ: {sorted(self.actual.clusters)} vs {sorted(self.ideal.clusters)}"
            )
        for h in self.actual.clusters:
            if self.actual.high.domain(h) != self.ideal.high.domain(h):
                raise PairMismatch(f"domains of {h} differ between the alignments", subject=h)

    @property
    def low(self) -> SCM:
        return self.actual.low


@dataclass(frozen=True)
class HighContrast:
    variable: str
    from_value: str
    to_value: str

    def __post_init__(self) -> None:
        if self.from_value == self.to_value:
            raise ValueError("a contrast needs two distinct values")


@dataclass(frozen=True, eq=False)
class EffectBreakdown:
    from_aggregate: Fraction
    to_aggregate: Fraction
    from_preimages: tuple[PreimageEffect, ...]
    to_preimages: tuple[PreimageEffect, ...]

    @property
    def effect(self) -> Fraction:
        return self.to_aggregate - self.from_aggregate


def _side(low: SCM, tau: Alignment, variable: str, value: str, outcome: str, target: str, agg: Aggregator):
    pre = preimage_interventions(tau, Intervention({variable: value}))
    if not pre:
        raise EmptyPreimage(f"do({variable}={value}) has no preimage under {tau.name or 'the alignment'}")
    probs = [interventional_distribution(low, iv).probability({outcome: target}) for iv in pre]
    masses = preimage_masses(tau, pre, agg)
    weights = agg.weights(probs, masses)
    rows = tuple(PreimageEffect(iv, p, w, m) for iv, p, w, m in zip(pre, probs, weights, masses))
    return sum((w * p for w, p in zip(weights, probs)), Fraction(0)), rows


def effect_breakdown(
    low: SCM, tau: Alignment, c: HighContrast, outcome: str, value: str, agg: Aggregator = DEFAULT_AGGREGATOR
) -> EffectBreakdown:
    if c.variable not in tau.clusters:
        raise AlignmentError(f"{c.variable} is not mapped by the alignment", subject=c.variable)
    if outcome in tau.clusters[c.variable]:
        raise AlignmentError(f"outcome {outcome} belongs to the basis of {c.variable}", subject=outcome)
    lo, lo_rows = _side(low, tau, c.variable, c.from_value, outcome, value, agg)
    hi, hi_rows = _side(low, tau, c.variable, c.to_value, outcome, value, agg)
    return EffectBreakdown(lo, hi, lo_rows, hi_rows)


def attribute_effect(
    low: SCM, tau: Alignment, c: HighContrast, outcome: str, value: str, agg: Aggregator = DEFAULT_AGGREGATOR
) -> Fraction:
    """Aggregate outcome under ``do(to)`` preimages minus under ``do(from)`` preimages."""
    return effect_breakdown(low, tau, c, outcome, value, agg).effect


@dataclass(frozen=True, eq=False)
class ReclassificationSummary:
    """Observational mass whose high value changes between the two alignments.

    ``by_value[(h, v)]`` is the mass classified ``v`` under the actual
    alignment and differently under the ideal one.
    """

    by_value: Mapping[tuple[str, str], Fraction]
    by_variable: Mapping[str, Fraction]
    total: Fraction


@dataclass(frozen=True, eq=False)
class NormReport:
    contrast: HighContrast
    outcome: str
    value: str
    aggregator: str
    actual: EffectBreakdown
    ideal: EffectBreakdown
    reclassification: ReclassificationSummary

    @property
    def attribute_effect(self) -> Fraction:
        return self.actual.effect

    @property
    def norm_effect(self) -> Fraction:
        return self.ideal.effect

    @property
    def delta(self) -> Fraction:
        return self.attribute_effect - self.norm_effect


def norm_effect(
    low: SCM,
    pair: AlignmentPair,
    c: HighContrast,
    outcome: str,
    value: str,
    agg: Aggregator = DEFAULT_AGGREGATOR,
) -> NormReport:
    """The attribute effect under the actual alignment against the same contrast under the ideal one."""
    if low != pair.low:
        raise PairMismatch("low model differs from the alignments' low model")
    actual = effect_breakdown(low, pair.actual, c, outcome, value, agg)
    ideal = effect_breakdown(low, pair.ideal, c, outcome, value, agg)
    return NormReport(c, outcome, value, str(agg), actual, ideal, reclassification_summary(pair))


def classification_delta(pair: AlignmentPair, world: Mapping[str, str]) -> tuple[dict[str, str], dict[str, str], bool]:
    """High-level classification of one low world under both alignments."""
    pair.low.check_assignment(world, pair.low.endogenous_names)
    actual = pair.actual.map_world(world)
    ideal = pair.ideal.map_world(world)
    changed = any(actual[h] != ideal[h] for h in actual)
    return actual, ideal, changed


def reclassification_summary(pair: AlignmentPair) -> ReclassificationSummary:
    by_value: dict[tuple[str, str], Fraction] = {}
    for h in pair.actual.high_vars:
        for v in pair.actual.high.domain(h):
            by_value[(h, v)] = Fraction(0)
    by_variable = {h: Fraction(0) for h in pair.actual.high_vars}
    total = Fraction(0)
    for world, w in observational_distribution(pair.low).assignments():
        actual, ideal, changed = classification_delta(pair, world)
        if not changed:
            continue
        total += w
        for h in actual:
            if actual[h] != ideal[h]:
                by_value[(h, actual[h])] += w
                by_variable[h] += w
    return ReclassificationSummary(by_value, by_variable, total)
