"""Audit studies over an all-attributes population model.

A resume projection keeps the attributes printed on a resume and drops the
rest. A social-construction alignment maps constituents onto race. The
module computes the resume-level audit effect, the race-level effect, and
whether the two agree, plus positivity and atypicality diagnostics. It
reports findings and never renders a normative verdict about which
populations matter.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .abstraction import (
    DEFAULT_AGGREGATOR,
    Aggregator,
    Alignment,
    AlignmentError,
    AmbiguityReport,
    ClusterSpec,
    ConsistencyReport,
    ambiguity_report,
    build_alignment,
    check_exact_consistency,
    preimage_interventions,
    push_distribution,
    quotient_high_model,
)
from .scm import (
    SCM,
    Distribution,
    Intervention,
    ModelError,
    UnknownVariable,
    interventional_distribution,
    observational_distribution,
    total_variation,
)


class OutcomeInConstitutiveBasis(AlignmentError):
    pass


class EmptyPopulation(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PopulationModel:
    """An all-attributes model plus the audited outcome and its positive value."""

    scm: SCM
    outcome: str
    positive: str

    def __post_init__(self) -> None:
        if not self.scm.is_endogenous(self.outcome):
            raise UnknownVariable(f"outcome {self.outcome} is not an endogenous variable", subject=self.outcome)
        if self.positive not in self.scm.domain(self.outcome):
            raise ModelError(f"{self.positive!r} is not a value of {self.outcome}", subject=self.outcome)

    @property
    def attributes(self) -> tuple[str, ...]:
        return tuple(v for v in self.scm.order if v != self.outcome)


@dataclass(frozen=True)
class ResumeProjection:
    """Attributes printed on the resume; everything else is discarded."""

    kept: tuple[str, ...]

    def __init__(self, kept: Sequence[str]) -> None:
        kept = (kept,) if isinstance(kept, str) else tuple(kept)
        if not kept:
            raise ValueError("a resume must keep at least one attribute")
        if len(set(kept)) != len(kept):
            raise ValueError(f"resume repeats an attribute: {kept}")
        object.__setattr__(self, "kept", kept)

    def check(self, pop: PopulationModel) -> None:
        for v in self.kept:
            if v == pop.outcome:
                raise OutcomeInConstitutiveBasis(f"the outcome {v} cannot appear on the resume", subject=v)
            if v not in pop.attributes:
                raise UnknownVariable(f"{v} is not an attribute of the population", subject=v)

    def dropped(self, pop: PopulationModel) -> tuple[str, ...]:
        return tuple(v for v in pop.attributes if v not in self.kept)

    def spec(self, pop: PopulationModel) -> ClusterSpec:
        self.check(pop)
        return ClusterSpec.identity(pop.scm, list(self.kept) + [pop.outcome])

    def alignment(self, pop: PopulationModel) -> Alignment:
        """The projection as an alignment onto its identity quotient model."""
        return quotient_high_model(pop.scm, self.spec(pop), name="resume").alignment

    def resume(self, pop: PopulationModel, values: Mapping[str, str]) -> dict[str, str]:
        self.check(pop)
        pop.scm.check_assignment(values, self.kept)
        return {v: values[v] for v in self.kept}


class RaceRule(str, enum.Enum):
    MODAL = "modal"
    PROBABILISTIC = "probabilistic"


# ---------------------------------------------------------------- construction


def check_outcome_excluded(pop: PopulationModel, a: Alignment) -> None:
    """The outcome may only be carried by its own singleton identity cluster."""
    if pop.outcome in a.dropped:
        raise OutcomeInConstitutiveBasis(f"alignment drops the outcome {pop.outcome}", subject=pop.outcome)
    h = a.cluster_of(pop.outcome)
    if h is None:
        return
    members = a.clusters[h]
    identity = all(k == (v,) for k, v in a.value_maps[h].items())
    if members != (pop.outcome,) or not identity:
        raise OutcomeInConstitutiveBasis(
            f"outcome {pop.outcome} is part of the constitutive basis of {h}", subject=pop.outcome
        )


def build_social_construction(
    pop: PopulationModel,
    spec: ClusterSpec,
    high: SCM | None = None,
    agg: Aggregator = DEFAULT_AGGREGATOR,
    name: str = "tau_sc",
) -> Alignment:
    """Validate a social-construction alignment (constituents onto race).

    Without ``high`` the high model is the ``agg`` quotient of the population.
    """
    for h, members in spec.clusters.items():
        members = (members,) if isinstance(members, str) else tuple(members)
        if pop.outcome in members and tuple(members) != (pop.outcome,):
            raise OutcomeInConstitutiveBasis(f"outcome {pop.outcome} is clustered into {h}", subject=pop.outcome)
    if pop.outcome in spec.dropped:
        raise OutcomeInConstitutiveBasis(f"alignment drops the outcome {pop.outcome}", subject=pop.outcome)
    if high is None:
        a = quotient_high_model(pop.scm, spec, agg, name=f"{name}_high").alignment
    else:
        a = build_alignment(pop.scm, high, spec, name=name)
    check_outcome_excluded(pop, a)
    return a


def race_variable(pop: PopulationModel, a: Alignment) -> str:
    """The single high variable other than the outcome's counterpart."""
    carrier = a.cluster_of(pop.outcome)
    others = [h for h in a.high_vars if h != carrier]
    if len(others) != 1:
        raise ValueError(f"cannot infer the race variable among {others}; pass it explicitly")
    return others[0]


# ---------------------------------------------------------------- populations


@dataclass(frozen=True, eq=False)
class Population:
    """Worlds whose resume matches; ``dist`` is None when the mass is zero."""

    resume: Mapping[str, str]
    dist: Distribution | None
    mass: Fraction

    @property
    def empty(self) -> bool:
        return self.mass == 0


def population_for_resume(pop: PopulationModel, proj: ResumeProjection, r: Mapping[str, str]) -> Population:
    r = proj.resume(pop, r)
    dist, mass = observational_distribution(pop.scm).condition(r)
    return Population(r, dist, mass)


@dataclass(frozen=True, eq=False)
class RaceAssignment:
    rule: RaceRule
    race: str | None
    distribution: Mapping[str, Fraction]
    tie: bool


def assign_race(
    pop: PopulationModel,
    tau_sc: Alignment,
    population: Population | Distribution,
    rule: RaceRule | str = RaceRule.MODAL,
    race: str | None = None,
) -> RaceAssignment:
    """Race of a resume's population: the most common race, or the race mix.

    Modal ties go to the lexicographically first race and set ``tie``.
    """
    rule = RaceRule(rule)
    dist = population.dist if isinstance(population, Population) else population
    if dist is None:
        raise EmptyPopulation("cannot assign a race to an empty population")
    race = race or race_variable(pop, tau_sc)
    pushed = push_distribution(tau_sc, dist).marginal((race,))
    mix = {row[0]: w for row, w in pushed.weights.items()}
    if rule is RaceRule.PROBABILISTIC:
        return RaceAssignment(rule, None, mix, False)
    top = max(mix.values())
    winners = sorted(v for v, w in mix.items() if w == top)
    return RaceAssignment(rule, winners[0], mix, len(winners) > 1)


# ---------------------------------------------------------------- effects


def outcome_probability(pop: PopulationModel, iv: Intervention | Mapping[str, str]) -> Fraction:
    return interventional_distribution(pop.scm, iv).probability({pop.outcome: pop.positive})


def audit_effect(pop: PopulationModel, proj: ResumeProjection, r1: Mapping[str, str], r2: Mapping[str, str]) -> Fraction:
    """Outcome contrast between setting the whole resume to ``r1`` and to ``r2``."""
    r1, r2 = proj.resume(pop, r1), proj.resume(pop, r2)
    return outcome_probability(pop, r1) - outcome_probability(pop, r2)


def race_outcome(
    pop: PopulationModel, tau_sc: Alignment, race_value: str, agg: Aggregator = DEFAULT_AGGREGATOR, race: str | None = None
) -> AmbiguityReport:
    """Aggregated outcome probability over the preimages of ``do(race=value)``."""
    race = race or race_variable(pop, tau_sc)
    carrier = tau_sc.cluster_of(pop.outcome)
    if carrier is None:
        raise OutcomeInConstitutiveBasis(f"outcome {pop.outcome} is not carried by the alignment")
    return ambiguity_report(tau_sc, Intervention({race: race_value}), carrier, pop.positive, agg)


def race_effect(
    pop: PopulationModel,
    tau_sc: Alignment,
    race1: str,
    race2: str,
    agg: Aggregator = DEFAULT_AGGREGATOR,
    race: str | None = None,
) -> Fraction:
    return race_outcome(pop, tau_sc, race1, agg, race).aggregate - race_outcome(pop, tau_sc, race2, agg, race).aggregate


# ---------------------------------------------------------------- diagnostics


@dataclass(frozen=True, eq=False)
class PositivityReport:
    resumes: tuple[Mapping[str, str], ...]
    masses: tuple[Fraction, ...]

    @property
    def passed(self) -> bool:
        return all(m > 0 for m in self.masses)


def positivity_check(
    pop: PopulationModel, proj: ResumeProjection, resumes: Sequence[Mapping[str, str]]
) -> PositivityReport:
    masses = tuple(population_for_resume(pop, proj, r).mass for r in resumes)
    return PositivityReport(tuple(proj.resume(pop, r) for r in resumes), masses)


@dataclass(frozen=True, eq=False)
class AtypicalityReport:
    resume: Mapping[str, str]
    anchor: str
    resume_mass: Fraction
    anchor_mass: Fraction
    distance: Fraction | None
    compared: tuple[str, ...]

    @property
    def resume_empty(self) -> bool:
        return self.resume_mass == 0

    @property
    def anchor_empty(self) -> bool:
        return self.anchor_mass == 0


def atypicality_report(
    pop: PopulationModel, proj: ResumeProjection, r: Mapping[str, str], anchor: str
) -> AtypicalityReport:
    """Distance between the resume's population and the anchor-value population.

    Both are compared over the attributes not printed on the resume.
    """
    r = proj.resume(pop, r)
    if anchor not in proj.kept:
        raise ValueError(f"anchor {anchor} is not on the resume")
    others = proj.dropped(pop)
    obs = observational_distribution(pop.scm)
    narrow, narrow_mass = obs.condition(r)
    broad, broad_mass = obs.condition({anchor: r[anchor]})
    distance = None
    if narrow is not None and broad is not None:
        distance = total_variation(narrow.marginal(others), broad.marginal(others))
    return AtypicalityReport(r, anchor, narrow_mass, broad_mass, distance, others)


# ---------------------------------------------------------------- reports


@dataclass(frozen=True, eq=False)
class AuditReport:
    resume1: Mapping[str, str]
    resume2: Mapping[str, str]
    rule: RaceRule
    aggregator: str
    masses: tuple[Fraction, Fraction]
    races: tuple[RaceAssignment | None, RaceAssignment | None]
    outcome_probabilities: tuple[Fraction, Fraction]
    audit_effect: Fraction
    race_effect: Fraction | None
    race_breakdown: tuple[AmbiguityReport, ...]
    consistency: ConsistencyReport | None
    positivity: PositivityReport | None
    atypicality: tuple[AtypicalityReport, ...]
    notes: tuple[str, ...]

    @property
    def callback_ratio(self) -> Fraction | None:
        p1, p2 = self.outcome_probabilities
        return p1 / p2 if p2 else None

    @property
    def deviation(self) -> Fraction | None:
        return None if self.race_effect is None else self.audit_effect - self.race_effect

    @property
    def effects_equal(self) -> bool | None:
        dev = self.deviation
        return None if dev is None else dev == 0

    @property
    def verdict(self) -> bool | None:
        """Whether the alignment is consistent on the relevant preimages; None when withheld."""
        return None if self.consistency is None else self.consistency.passed


def _default_anchor(proj: ResumeProjection, r1: Mapping[str, str], r2: Mapping[str, str]) -> str | None:
    differing = [v for v in proj.kept if r1[v] != r2[v]]
    return differing[0] if len(differing) == 1 else None


def audit_validity_check(
    pop: PopulationModel,
    proj: ResumeProjection,
    tau_sc: Alignment,
    r1: Mapping[str, str],
    r2: Mapping[str, str],
    rule: RaceRule | str = RaceRule.MODAL,
    agg: Aggregator = DEFAULT_AGGREGATOR,
    race: str | None = None,
    anchor: str | None = None,
    diagnostics: bool = True,
) -> AuditReport:
    """Compare the resume-level audit effect with the race-level effect.

    Empty resume populations are reported; the race effect and the
    consistency verdict are then withheld.
    """
    rule = RaceRule(rule)
    check_outcome_excluded(pop, tau_sc)
    race = race or race_variable(pop, tau_sc)
    r1, r2 = proj.resume(pop, r1), proj.resume(pop, r2)
    notes = [f"outcome {pop.outcome} is excluded from the constitutive basis of {race}"]

    p1, p2 = outcome_probability(pop, r1), outcome_probability(pop, r2)
    a1, a2 = population_for_resume(pop, proj, r1), population_for_resume(pop, proj, r2)

    races: tuple[RaceAssignment | None, RaceAssignment | None] = (None, None)
    race_eff = None
    breakdown: tuple[AmbiguityReport, ...] = ()
    consistency = None
    if a1.empty or a2.empty:
        empty = [str(i + 1) for i, p in enumerate((a1, a2)) if p.empty]
        notes.append(f"verdict withheld: resume population {', '.join(empty)} is empty")
    else:
        races = (assign_race(pop, tau_sc, a1, rule, race), assign_race(pop, tau_sc, a2, rule, race))
        for ra in races:
            if ra.tie:
                notes.append(f"modal race tie broken lexicographically in favour of {ra.race}")
        values = sorted({v for ra in races for v, w in ra.distribution.items() if w > 0})
        if rule is RaceRule.MODAL:
            values = sorted({ra.race for ra in races})
        per_race = {v: race_outcome(pop, tau_sc, v, agg, race) for v in values}
        breakdown = tuple(per_race[v] for v in values)

        def expected(ra: RaceAssignment) -> Fraction:
            if rule is RaceRule.MODAL:
                return per_race[ra.race].aggregate
            return sum((w * per_race[v].aggregate for v, w in ra.distribution.items() if w), Fraction(0))

        race_eff = expected(races[0]) - expected(races[1])
        relevant = sorted({iv for v in values for iv in preimage_interventions(tau_sc, Intervention({race: v}))})
        consistency = check_exact_consistency(tau_sc, relevant)

    positivity = None
    atyp: tuple[AtypicalityReport, ...] = ()
    if diagnostics:
        positivity = positivity_check(pop, proj, [r1, r2])
        anchor = anchor or _default_anchor(proj, r1, r2)
        if anchor is not None:
            atyp = (atypicality_report(pop, proj, r1, anchor), atypicality_report(pop, proj, r2, anchor))
    return AuditReport(
        r1,
        r2,
        rule,
        str(agg),
        (a1.mass, a2.mass),
        races,
        (p1, p2),
        p1 - p2,
        race_eff,
        breakdown,
        consistency,
        positivity,
        atyp,
        tuple(notes),
    )
