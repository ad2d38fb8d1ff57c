from __future__ import annotations

import itertools
import random
from fractions import Fraction

import oracle
import pytest
from hypothesis import given
from hypothesis import strategies as st

from casl import fixtures as F
from casl.abstraction import ClusterSpec, quotient_high_model
from casl.audit import (
    EmptyPopulation,
    OutcomeInConstitutiveBasis,
    PopulationModel,
    RaceRule,
    ResumeProjection,
    assign_race,
    atypicality_report,
    audit_effect,
    audit_validity_check,
    build_social_construction,
    population_for_resume,
    positivity_check,
    race_effect,
)
from casl.generators import random_scm
from casl.scm import build_scm

rngs = st.randoms(use_true_random=False)
IDENT = {"yes": "yes", "no": "no"}


def audit_pop() -> PopulationModel:
    return PopulationModel(F.audit_low(), "Callback", "yes")


def ambiguity_pop() -> PopulationModel:
    return PopulationModel(F.ambiguity_low(), "Callback", "yes")


def name_edu() -> ResumeProjection:
    return ResumeProjection(("Name", "Edu"))


# ---------------------------------------------------------------- construction


def test_social_construction_for_names():
    a = build_social_construction(audit_pop(), F.sc_spec(), F.race_high())
    assert a.value_maps["Race"] == {("Greg",): "white", ("Jamal",): "Black"}


def test_outcome_cannot_constitute_race():
    spec = ClusterSpec(
        {"Race": ("Name", "Callback")},
        {"Race": lambda n, c: "white" if n == "Greg" else "Black"},
        dropped=("Hometown",),
    )
    with pytest.raises(OutcomeInConstitutiveBasis):
        build_social_construction(audit_pop(), spec)
    dropping = ClusterSpec({"Race": ("Name",)}, {"Race": {"Greg": "white", "Jamal": "Black"}}, ("Hometown", "Callback"))
    with pytest.raises(OutcomeInConstitutiveBasis):
        build_social_construction(audit_pop(), dropping)


def _many_attributes() -> PopulationModel:
    bits = ("0", "1")
    attrs = ("Name", "Edu", "Work", "Family", "Appear", "Age")
    exo = {f"U_{v}": {"0": Fraction(1, 2), "1": Fraction(1, 2)} for v in attrs}
    exo["U_i"] = {"i0": Fraction(3, 4), "i1": Fraction(1, 4)}
    fns = {v: f"U_{v}" for v in attrs}
    fns["Interview"] = (("Name", "Edu", "U_i"), lambda n, e, u: "yes" if (u == "i1") != (n == e == "1") else "no")
    return PopulationModel(build_scm(exo, {**{v: bits for v in attrs}, "Interview": ("yes", "no")}, fns), "Interview", "yes")


def test_many_constituents_with_a_discarded_attribute():
    pop = _many_attributes()
    members = ("Name", "Edu", "Work", "Family", "Appear")
    spec = ClusterSpec(
        {"Race": members, "Interview": ("Interview",)},
        {"Race": lambda n, *rest: "r1" if n == "1" else "r0", "Interview": IDENT},
        dropped=("Age",),
    )
    a = build_social_construction(pop, spec)
    assert a.clusters["Race"] == tuple(sorted(members)) and a.dropped == {"Age"}


def test_projection_validation():
    with pytest.raises(ValueError):
        ResumeProjection(())
    with pytest.raises(OutcomeInConstitutiveBasis):
        ResumeProjection(("Callback",)).check(audit_pop())


# ---------------------------------------------------------------- populations


def test_population_masses():
    pop, proj = audit_pop(), ResumeProjection(("Name",))
    assert population_for_resume(pop, proj, {"Name": "Greg"}).mass == Fraction(1, 2)
    empty = population_for_resume(PopulationModel(F.atypical_low(), "Callback", "yes"), name_edu(),
                                  {"Name": "Jamal", "Edu": "EliteU"})  # fmt: skip
    assert empty.empty and empty.dist is None


def test_zero_prior_value_gives_empty_population():
    scm = build_scm(
        {"U": {"a": 1, "b": 0}},
        {"A": ("a", "b"), "Y": ("yes", "no")},
        {"A": "U", "Y": (("A",), {"a": "yes", "b": "no"})},
    )
    assert population_for_resume(PopulationModel(scm, "Y", "yes"), ResumeProjection(("A",)), {"A": "b"}).empty


# ---------------------------------------------------------------- race assignment


def test_modal_race_for_greg():
    pop = audit_pop()
    a = F.tau_sc()
    ra = assign_race(pop, a, population_for_resume(pop, ResumeProjection(("Name",)), {"Name": "Greg"}))
    assert ra.race == "white" and not ra.tie and ra.distribution == {"white": 1}


def test_modal_tie_is_flagged():
    pop = audit_pop()
    a = F.tau_sc()
    ra = assign_race(pop, a, population_for_resume(pop, ResumeProjection(("Hometown",)), {"Hometown": "t1"}))
    assert ra.race == "Black" and ra.tie
    mix = assign_race(pop, a, population_for_resume(pop, ResumeProjection(("Hometown",)), {"Hometown": "t1"}),
                      RaceRule.PROBABILISTIC)  # fmt: skip
    assert mix.race is None and mix.distribution == {"Black": Fraction(1, 2), "white": Fraction(1, 2)}


def test_empty_population_has_no_race():
    pop = PopulationModel(F.atypical_low(), "Callback", "yes")
    a = build_social_construction(pop, F.name_edu_race_spec())
    empty = population_for_resume(pop, name_edu(), {"Name": "Jamal", "Edu": "EliteU"})
    with pytest.raises(EmptyPopulation):
        assign_race(pop, a, empty)


# ---------------------------------------------------------------- effects


def test_audit_effect_and_ratio():
    pop, proj = audit_pop(), ResumeProjection(("Name",))
    assert audit_effect(pop, proj, {"Name": "Greg"}, {"Name": "Jamal"}) == Fraction(1, 20)
    assert audit_effect(pop, proj, {"Name": "Greg"}, {"Name": "Greg"}) == 0
    report = audit_validity_check(pop, proj, F.tau_sc(), {"Name": "Greg"}, {"Name": "Jamal"})
    assert report.callback_ratio == Fraction(3, 2)


def test_race_effect_on_names():
    pop = audit_pop()
    assert race_effect(pop, F.tau_sc(), "white", "Black") == Fraction(1, 20)
    assert race_effect(pop, F.tau_sc(), "white", "white") == 0


def test_ambiguity_effects_against_oracle():
    pop = ambiguity_pop()
    a = build_social_construction(pop, F.ambiguity_spec())
    greg, jamal = {"Name": "Greg", "Edu": "StateU"}, {"Name": "Jamal", "Edu": "StateU"}
    assert audit_effect(pop, name_edu(), greg, jamal) == 0

    def rate(iv):
        return oracle.marginal(oracle.distribution(pop.scm, iv), {"Callback"})[(("Callback", "yes"),)]

    def weighted(name):
        obs = oracle.distribution(pop.scm)
        rows = [{"Name": name, "Edu": e} for e in ("HowardU", "StateU")]
        masses = [sum(p for k, p in obs.items() if set(r.items()) <= set(k)) for r in rows]
        return sum(m * rate(r) for m, r in zip(masses, rows)) / sum(masses)

    expected = weighted("Greg") - weighted("Jamal")
    assert race_effect(pop, a, "white", "Black") == expected == Fraction(1, 20)


def test_audit_fixture_report_passes():
    report = audit_validity_check(audit_pop(), ResumeProjection(("Name",)), F.tau_sc(), {"Name": "Greg"}, {"Name": "Jamal"})
    assert report.audit_effect == report.race_effect == Fraction(1, 20)
    assert report.deviation == 0 and report.effects_equal and report.verdict is True
    assert report.positivity.passed and report.positivity.masses == (Fraction(1, 2), Fraction(1, 2))
    assert [x.distance for x in report.atypicality] == [0, 0]


def test_ambiguity_report_deviates():
    pop = ambiguity_pop()
    a = build_social_construction(pop, F.ambiguity_spec())
    report = audit_validity_check(pop, name_edu(), a, {"Name": "Greg", "Edu": "StateU"}, {"Name": "Jamal", "Edu": "StateU"})
    assert report.deviation == Fraction(-1, 20) and report.verdict is False
    black = next(b for b in report.race_breakdown if b.high.as_dict() == {"Race": "Black"})
    assert [p.probability for p in black.preimages] == [Fraction(1, 20), Fraction(3, 20)]
    assert any("excluded from the constitutive basis" in n for n in report.notes)


def test_atypical_report_withholds_verdict():
    pop = PopulationModel(F.atypical_low(), "Callback", "yes")
    a = build_social_construction(pop, F.name_edu_race_spec())
    report = audit_validity_check(pop, name_edu(), a, {"Name": "Greg", "Edu": "EliteU"}, {"Name": "Jamal", "Edu": "EliteU"})
    assert report.masses == (Fraction(1, 4), 0)
    assert report.verdict is None and report.race_effect is None and report.deviation is None
    assert not report.positivity.passed
    assert report.atypicality[1].resume_empty and report.atypicality[1].distance is None
    assert any("withheld" in n for n in report.notes)


# ---------------------------------------------------------------- diagnostics


def test_positivity():
    pop, proj = audit_pop(), ResumeProjection(("Name",))
    r = positivity_check(pop, proj, [{"Name": "Greg"}, {"Name": "Jamal"}])
    assert r.passed and r.masses == (Fraction(1, 2), Fraction(1, 2))
    bad = positivity_check(PopulationModel(F.atypical_low(), "Callback", "yes"), name_edu(),
                           [{"Name": "Greg", "Edu": "StateU"}, {"Name": "Jamal", "Edu": "EliteU"}])  # fmt: skip
    assert not bad.passed and bad.masses == (Fraction(1, 4), 0)


def test_atypicality_same_event_is_zero():
    r = atypicality_report(audit_pop(), ResumeProjection(("Name",)), {"Name": "Greg"}, "Name")
    assert r.distance == 0 and r.resume_mass == r.anchor_mass == Fraction(1, 2)


def test_skewed_atypicality_against_oracle():
    pop = PopulationModel(F.skewed_low(), "Callback", "yes")
    r = atypicality_report(pop, name_edu(), {"Name": "Jamal", "Edu": "EliteU"}, "Name")
    obs = oracle.distribution(pop.scm)

    def conditional(event):
        rows = {k: p for k, p in obs.items() if set(event.items()) <= set(k)}
        mass = sum(rows.values())
        return oracle.marginal({k: p / mass for k, p in rows.items()}, {"Neighborhood"}), mass

    narrow, narrow_mass = conditional({"Name": "Jamal", "Edu": "EliteU"})
    broad, broad_mass = conditional({"Name": "Jamal"})
    assert r.compared == ("Neighborhood",)
    assert (r.resume_mass, r.anchor_mass) == (narrow_mass, broad_mass) == (Fraction(1, 20), Fraction(1, 2))
    assert r.distance == oracle.tv(narrow, broad) == Fraction(27, 40)


def test_anchor_must_be_on_resume():
    with pytest.raises(ValueError):
        atypicality_report(audit_pop(), ResumeProjection(("Name",)), {"Name": "Greg"}, "Hometown")


# ---------------------------------------------------------------- properties


def _random_population(rng: random.Random) -> PopulationModel:
    scm = random_scm(rng, n_endo=rng.randint(2, 5))
    return PopulationModel(scm, scm.order[-1], "1")


@given(rngs)
def test_resume_masses_sum_to_one(rng: random.Random):
    pop = _random_population(rng)
    kept = rng.sample(list(pop.attributes), rng.randint(1, len(pop.attributes)))
    proj = ResumeProjection(kept)
    total = sum(
        population_for_resume(pop, proj, dict(zip(kept, vals))).mass
        for vals in itertools.product(*(pop.scm.domain(v) for v in kept))
    )
    assert total == 1


@given(rngs)
def test_audit_effect_is_antisymmetric(rng: random.Random):
    pop = _random_population(rng)
    kept = rng.sample(list(pop.attributes), rng.randint(1, len(pop.attributes)))
    proj = ResumeProjection(kept)
    r1 = {v: rng.choice(pop.scm.domain(v)) for v in kept}
    r2 = {v: rng.choice(pop.scm.domain(v)) for v in kept}
    assert audit_effect(pop, proj, r1, r2) == -audit_effect(pop, proj, r2, r1)


def _race_setup(rng: random.Random):
    pop = _random_population(rng)
    attrs = list(pop.attributes)
    size = rng.randint(1, min(2, len(attrs)))
    start = rng.randint(0, len(attrs) - size)
    members = tuple(attrs[start : start + size])
    rows = list(itertools.product(*(pop.scm.domain(v) for v in members)))
    labels = ["r0", "r1"] + [rng.choice(["r0", "r1"]) for _ in rows[2:]]
    rng.shuffle(labels)
    spec = ClusterSpec(
        {"Race": members, pop.outcome: (pop.outcome,)},
        {"Race": dict(zip(rows, labels)), pop.outcome: {"0": "0", "1": "1"}},
        dropped=[v for v in attrs if v not in members],
        domains={"Race": ("r0", "r1"), pop.outcome: ("0", "1")},
    )
    q = quotient_high_model(pop.scm, spec)
    return pop, members, q


@given(rngs)
def test_probabilistic_race_is_the_pushed_mix(rng: random.Random):
    pop, members, q = _race_setup(rng)
    proj = ResumeProjection(rng.sample(list(pop.attributes), 1))
    r = {v: rng.choice(pop.scm.domain(v)) for v in proj.kept}
    population = population_for_resume(pop, proj, r)
    if population.empty:
        return
    ra = assign_race(pop, q.alignment, population, RaceRule.PROBABILISTIC)
    table = {tuple(sorted(a.items())): p for a, p in population.dist.assignments()}
    pushed = oracle.marginal(oracle.push(q.alignment, table), {"Race"})
    assert ra.distribution == {k[0][1]: p for k, p in pushed.items() if p}


@given(rngs)
def test_consistent_construction_equates_effects(rng: random.Random):
    pop, members, q = _race_setup(rng)
    if not q.exact:
        return
    proj = ResumeProjection(members)
    r1 = {v: rng.choice(pop.scm.domain(v)) for v in members}
    r2 = {v: rng.choice(pop.scm.domain(v)) for v in members}
    report = audit_validity_check(pop, proj, q.alignment, r1, r2, diagnostics=False)
    if report.race_effect is None:
        return
    assert report.verdict is True
    assert report.audit_effect == report.race_effect


@given(rngs)
def test_diagnostics_do_not_change_effects(rng: random.Random):
    pop, members, q = _race_setup(rng)
    proj = ResumeProjection(members)
    r1 = {v: rng.choice(pop.scm.domain(v)) for v in members}
    r2 = {v: rng.choice(pop.scm.domain(v)) for v in members}
    with_diag = audit_validity_check(pop, proj, q.alignment, r1, r2)
    without = audit_validity_check(pop, proj, q.alignment, r1, r2, diagnostics=False)
    assert without.positivity is None and without.atypicality == ()
    for field in ("audit_effect", "race_effect", "outcome_probabilities", "masses", "notes"):
        assert getattr(with_diag, field) == getattr(without, field)
