from __future__ import annotations

import random
from fractions import Fraction

import oracle
import pytest
from hypothesis import given
from hypothesis import strategies as st

from casl import fixtures as F
from casl.abstraction import (
    ALL_COMPLETE_CLUSTERS,
    ALL_JOINT_CLUSTERS,
    Aggregator,
    AggregatorKind,
    AlignmentBuildError,
    ClusterSpec,
    DomainMismatch,
    EmptyPreimage,
    IncompleteCoverage,
    ModelMismatch,
    NonSurjectiveValueMap,
    NonTotalValueMap,
    OverlappingClusters,
    ScopeMismatch,
    UndefinedInducedIntervention,
    UnmappedHighVariable,
    ambiguity_report,
    approx_consistency_average_effects,
    approx_consistency_tv,
    build_alignment,
    check_exact_consistency,
    compose_alignments,
    identity_alignment,
    induced_high_intervention,
    preimage_interventions,
    push_distribution,
    quotient_high_model,
    resolve_interventions,
)
from casl.generators import perturb_table, random_cluster_spec, random_scm, refined_pair
from casl.scm import EMPTY, Distribution, Intervention, build_scm, interventional_distribution, observational_distribution

rngs = st.randoms(use_true_random=False)
I = Intervention


# ---------------------------------------------------------------- building


def test_color_alignment_is_valid():
    a = F.tau_color()
    assert a.clusters == {"Coarse": ("Fine",), "Pecking": ("Pecking",)}
    assert a.value_maps["Coarse"][("scarlet",)] == "red"
    assert a.value_maps["Coarse"][("turquoise",)] == "blue"


def _build_errors(spec: ClusterSpec) -> set[type]:
    with pytest.raises(AlignmentBuildError) as exc:
        build_alignment(F.bird_low(), F.bird_high(), spec)
    return exc.value.kinds()


def test_non_surjective_map():
    spec = ClusterSpec({"Coarse": ("Fine",), "Pecking": ("Pecking",)},
                       {"Coarse": lambda s: "red", "Pecking": lambda p: p})  # fmt: skip
    assert _build_errors(spec) == {NonSurjectiveValueMap}


def test_overlapping_clusters():
    spec = ClusterSpec({"Coarse": ("Fine",), "Pecking": ("Fine", "Pecking")},
                       {"Coarse": F.color_spec().value_maps["Coarse"], "Pecking": lambda f, p: p})  # fmt: skip
    assert OverlappingClusters in _build_errors(spec)


def test_partial_map_and_bad_domain():
    spec = ClusterSpec({"Coarse": ("Fine",), "Pecking": ("Pecking",)},
                       {"Coarse": {"crimson": "red"}, "Pecking": {"yes": "maybe", "no": "no"}})  # fmt: skip
    assert {NonTotalValueMap, DomainMismatch} <= _build_errors(spec)


def test_uncovered_variables():
    spec = ClusterSpec({"Coarse": ("Fine",)}, {"Coarse": F.color_spec().value_maps["Coarse"]})
    assert _build_errors(spec) == {IncompleteCoverage}


# ---------------------------------------------------------------- push-forward


def test_push_uniform_shades():
    d = push_distribution(F.tau_color(), observational_distribution(F.bird_low()))
    assert d.marginal(["Coarse"]) == Distribution(("Coarse",), {("red",): Fraction(1, 2), ("blue",): Fraction(1, 2)})


def test_push_point_mass():
    world = {"Fine": "cyan", "Pecking": "no"}
    assert push_distribution(F.tau_color(), Distribution.point_mass(world)) == Distribution.point_mass(
        {"Coarse": "blue", "Pecking": "no"}
    )


def test_push_audit_race_prior():
    d = push_distribution(F.tau_sc(), observational_distribution(F.audit_low()))
    assert d.probability(Race="white") == Fraction(1, 2)


def test_push_needs_clustered_scope():
    with pytest.raises(ScopeMismatch):
        push_distribution(F.tau_color(), Distribution.point_mass({"Fine": "cyan"}))


# ---------------------------------------------------------------- interventions


def test_induced_interventions():
    a = F.tau_color()
    assert induced_high_intervention(a, I(Fine="crimson")) == I(Coarse="red")
    assert induced_high_intervention(a, EMPTY) == EMPTY
    amb = F.tau_ambiguity()
    assert induced_high_intervention(amb, I(Name="Jamal")) is None
    assert induced_high_intervention(F.tau_sc(), I(Hometown="t1")) is None


def test_preimages():
    assert preimage_interventions(F.tau_color(), I(Coarse="red")) == [I(Fine="crimson"), I(Fine="scarlet")]
    assert preimage_interventions(F.tau_sc(), I(Race="Black")) == [I(Name="Jamal")]
    assert preimage_interventions(F.tau_ambiguity(), I(Race="Black")) == [
        I(Edu="HowardU", Name="Jamal"),
        I(Edu="StateU", Name="Jamal"),
    ]
    with pytest.raises(UnmappedHighVariable):
        preimage_interventions(F.tau_sc(), I(Hometown="t1"))


def test_default_family_contents():
    ivs = resolve_interventions(F.tau_color(), ALL_COMPLETE_CLUSTERS)
    assert len(ivs) == 1 + 4 + 2 and EMPTY in ivs
    assert len(resolve_interventions(F.tau_color(), ALL_JOINT_CLUSTERS)) == 5 * 3


# ---------------------------------------------------------------- consistency


def test_bird_is_exactly_consistent():
    report = check_exact_consistency(F.tau_color())
    assert report.passed and report.epsilon == 0


def test_perturbed_bird_fails_at_scarlet():
    report = check_exact_consistency(F.tau_color(perturbed=True))
    assert not report.passed
    distances = {e.low: e.distance for e in report.failures}
    assert distances == {I(Fine="scarlet"): 1, EMPTY: Fraction(1, 4)}
    assert approx_consistency_tv(F.tau_color(perturbed=True), ALL_COMPLETE_CLUSTERS, 0).epsilon == 1


def test_identity_alignment_passes():
    a = identity_alignment(F.audit_low())
    assert check_exact_consistency(a, ALL_JOINT_CLUSTERS).passed


def test_undefined_intervention_is_named():
    with pytest.raises(UndefinedInducedIntervention) as exc:
        check_exact_consistency(F.tau_ambiguity(), [I(Name="Jamal")])
    assert exc.value.intervention == I(Name="Jamal")


def test_ambiguity_quotient_epsilon_matches_oracle():
    a = F.tau_ambiguity()
    report = approx_consistency_tv(a, ALL_COMPLETE_CLUSTERS, Fraction(1, 20))
    worst = Fraction(0)
    for iv in oracle.complete_cluster_interventions(a):
        pushed = oracle.push(a, oracle.distribution(a.low, iv))
        target = oracle.marginal(oracle.distribution(a.high, oracle.induced(a, iv)), set(a.clusters))
        worst = max(worst, oracle.tv(pushed, target))
    assert report.epsilon == worst == Fraction(1, 20)
    assert report.passed
    assert not approx_consistency_tv(a, ALL_COMPLETE_CLUSTERS, Fraction(1, 21)).passed


def test_negative_threshold_rejected():
    with pytest.raises(ValueError):
        approx_consistency_tv(F.tau_color(), ALL_COMPLETE_CLUSTERS, -1)


# ---------------------------------------------------------------- average effects and ambiguity


def test_average_effects_on_exact_alignment():
    r = approx_consistency_average_effects(F.tau_color(), "Pecking", "yes", 0, 1)
    assert r.passed
    assert all(e.effect == e_avg for entry in r.entries for e, e_avg in ((x, entry.average) for x in entry.effects))


def test_average_effects_on_ambiguity():
    r = approx_consistency_average_effects(F.tau_ambiguity(), "Callback", "yes", 0, 1)
    (entry,) = r.entries
    assert sorted(e.effect for e in entry.effects) == [0, 0, Fraction(1, 10), Fraction(1, 10)]
    assert all(abs(e.effect - entry.average) == Fraction(1, 20) for e in entry.effects)
    assert not r.passed
    assert approx_consistency_average_effects(F.tau_ambiguity(), "Callback", "yes", Fraction(1, 20), 1).passed


def test_single_preimage_average_effects():
    assert approx_consistency_average_effects(F.tau_sc(), "Callback", "yes", 0, 1).passed


def test_ambiguity_spread():
    r = ambiguity_report(F.tau_ambiguity(), I(Race="Black"), "Callback", "yes")
    assert (r.minimum, r.maximum, r.spread) == (Fraction(1, 20), Fraction(3, 20), Fraction(1, 10))
    assert r.aggregate == Fraction(1, 10)
    assert [p.weight for p in r.preimages] == [Fraction(1, 2)] * 2


@pytest.mark.parametrize(
    "kind, expected",
    [("min", Fraction(1, 20)), ("max", Fraction(3, 20)), ("uniform_mean", Fraction(1, 10))],
)
def test_ambiguity_aggregators(kind, expected):
    r = ambiguity_report(F.tau_ambiguity(), I(Race="Black"), "Callback", "yes", Aggregator.parse(kind))
    assert r.aggregate == expected


def test_weighted_mean_uses_reference():
    ref = interventional_distribution(F.ambiguity_low(), I(Edu="HowardU"))
    agg = Aggregator(AggregatorKind.POPULATION_WEIGHTED_MEAN, ref)
    r = ambiguity_report(F.tau_ambiguity(), I(Race="Black"), "Callback", "yes", agg)
    assert r.aggregate == Fraction(1, 20)


def test_singleton_preimage_collapses():
    r = ambiguity_report(F.tau_sc(), I(Race="Black"), "Callback", "yes")
    assert r.minimum == r.maximum == r.aggregate == Fraction(1, 10)


def test_exact_alignment_has_no_spread():
    for coarse in ("red", "blue"):
        assert ambiguity_report(F.tau_color(), I(Coarse=coarse), "Pecking", "yes").spread == 0


def test_unknown_aggregator():
    with pytest.raises(ValueError):
        Aggregator.parse("median")


def test_empty_preimage_when_value_unused():
    with pytest.raises(EmptyPreimage):
        ambiguity_report(F.tau_color(), I(Coarse="green"), "Pecking", "yes")


# ---------------------------------------------------------------- composition


def _warmth() -> tuple:
    high = build_scm(
        {"U_w": {"warm": Fraction(1, 2), "cool": Fraction(1, 2)}},
        {"Warmth": ("warm", "cool"), "Pecking": ("yes", "no")},
        {"Warmth": "U_w", "Pecking": (("Warmth",), {"warm": "yes", "cool": "no"})},
    )
    spec = ClusterSpec(
        {"Warmth": ("Coarse",), "Pecking": ("Pecking",)},
        {"Warmth": {"red": "warm", "blue": "cool"}, "Pecking": {"yes": "yes", "no": "no"}},
    )
    return high, build_alignment(F.bird_high(), high, spec)


def test_two_stage_composition():
    _, second = _warmth()
    c = compose_alignments(F.tau_color(), second)
    assert c.value_maps["Warmth"][("crimson",)] == "warm"
    assert c.value_maps["Warmth"][("cyan",)] == "cool"
    assert check_exact_consistency(c).passed


def test_compose_with_identity():
    a = F.tau_color()
    assert compose_alignments(a, identity_alignment(a.high)) == a
    assert compose_alignments(identity_alignment(a.low), a) == a


def test_compose_mismatch():
    with pytest.raises(ModelMismatch):
        compose_alignments(F.tau_color(), F.tau_sc())


# ---------------------------------------------------------------- quotients


def test_bird_quotient_reproduces_high_model():
    q = quotient_high_model(F.bird_low(), F.color_spec())
    assert q.exact
    pushed = interventional_distribution(q.model, EMPTY).marginal(["Coarse", "Pecking"])
    assert pushed == interventional_distribution(F.bird_high(), EMPTY).marginal(["Coarse", "Pecking"])
    for iv in ({"Coarse": "red"}, {"Coarse": "blue"}):
        assert interventional_distribution(q.model, iv).marginal(["Pecking"]) == interventional_distribution(
            F.bird_high(), iv
        ).marginal(["Pecking"])


def test_ambiguity_quotient_is_aggregate_only():
    q = quotient_high_model(F.ambiguity_low(), F.ambiguity_spec())
    assert not q.exact and q.report.epsilon == Fraction(1, 20)
    assert interventional_distribution(q.model, {"Race": "Black"}).probability(Callback="yes") == Fraction(1, 10)


def test_identity_quotient_clones_behaviour():
    low = F.audit_low()
    q = quotient_high_model(low, ClusterSpec.identity(low))
    assert q.exact
    for iv in resolve_interventions(q.alignment, ALL_COMPLETE_CLUSTERS):
        assert interventional_distribution(q.model, iv).marginal(low.endogenous_names) == interventional_distribution(
            low, iv
        )


# ---------------------------------------------------------------- properties


@given(rngs)
def test_push_preserves_mass_and_is_pointwise(rng: random.Random):
    low = random_scm(rng, n_endo=rng.randint(2, 5))
    spec = random_cluster_spec(rng, low)
    a = quotient_high_model(low, spec).alignment
    d = interventional_distribution(low, random_intervention_of(rng, low))
    assert push_distribution(a, d).total() == 1
    for world, _ in d.assignments():
        assert push_distribution(a, Distribution.point_mass(world)) == Distribution.point_mass(a.map_world(world))


def random_intervention_of(rng: random.Random, scm) -> Intervention:
    chosen = rng.sample(list(scm.endogenous_names), rng.randint(0, 2))
    return Intervention({v: rng.choice(scm.domain(v)) for v in chosen})


@given(rngs)
def test_preimages_partition_cluster_settings(rng: random.Random):
    low = random_scm(rng, n_endo=rng.randint(2, 5))
    a = quotient_high_model(low, random_cluster_spec(rng, low)).alignment
    for h in a.high_vars:
        settings = [iv for iv in resolve_interventions(a, ALL_COMPLETE_CLUSTERS) if set(iv.as_dict()) == set(a.clusters[h])]
        covered = [p for x in a.high.domain(h) for p in preimage_interventions(a, I({h: x}))]
        assert sorted(covered) == sorted(settings)
        assert len(set(covered)) == len(covered)


@given(rngs)
def test_verdicts_match_oracle(rng: random.Random):
    if rng.random() < 0.5:
        pair = refined_pair(rng, n_high=rng.randint(2, 3))
        low, spec = pair.low, pair.spec
    else:
        low = random_scm(rng, n_endo=rng.randint(2, 5))
        spec = random_cluster_spec(rng, low)
    a = quotient_high_model(low, spec).alignment
    report = check_exact_consistency(a)
    assert report.passed == oracle.consistent(a)
    assert all((e.distance == 0) == e.passed for e in report.entries)


@given(rngs)
def test_refinements_are_consistent_and_break_under_perturbation(rng: random.Random):
    pair = refined_pair(rng, n_high=rng.randint(2, 3))
    a = build_alignment(pair.low, pair.high, pair.spec)
    assert check_exact_consistency(a).passed
    for h in a.high_vars:
        for x in a.high.domain(h):
            assert ambiguity_report(a, I({h: x}), a.high_vars[-1], "1").spread == 0
    broken, _, _ = perturb_table(rng, pair.high)
    assert not check_exact_consistency(build_alignment(pair.low, broken, pair.spec)).passed


@given(rngs)
def test_composition_is_sound(rng: random.Random):
    pair = refined_pair(rng, n_high=rng.randint(2, 3))
    first = build_alignment(pair.low, pair.high, pair.spec)
    second = quotient_high_model(pair.high, random_cluster_spec(rng, pair.high, drop_probability=0)).alignment
    if not check_exact_consistency(second).passed:
        return
    composed = compose_alignments(first, second)
    assert check_exact_consistency(composed).passed
    assert oracle.consistent(composed)

