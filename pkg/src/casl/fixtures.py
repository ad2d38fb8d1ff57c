"""Small reference models: the bird colours, audit studies and norm comparisons.

The same scenarios ship as ``.casl`` documents under ``casl/corpus``; the
test-suite checks that both routes produce identical models.
"""

from __future__ import annotations

from fractions import Fraction
from importlib import resources
from pathlib import Path

from .abstraction import Alignment, ClusterSpec, build_alignment, quotient_high_model
from .scm import SCM, build_scm

SHADES = ("crimson", "scarlet", "cyan", "turquoise")
RED = {"crimson", "scarlet"}
# Callback noise: c1..c4 each 1/20, "none" the remaining 16/20.
CALLBACK_NOISE = {**{f"c{i}": Fraction(1, 20) for i in range(1, 5)}, "none": Fraction(4, 5)}


def _uniform(values) -> dict[str, Fraction]:
    values = list(values)
    return {v: Fraction(1, len(values)) for v in values}


def _called(cb: str, cut: int) -> str:
    """Yes for the first ``cut`` callback draws, i.e. with probability cut/20."""
    return "yes" if cb != "none" and int(cb[1:]) <= cut else "no"


def corpus_dir() -> Path:
    return Path(str(resources.files("casl") / "corpus"))


# ---------------------------------------------------------------- bird


def bird_low(perturbed: bool = False) -> SCM:
    """Fine-grained colour model. Pecking is deterministic (no noise).

    ``perturbed`` makes the bird ignore scarlet objects.
    """
    red = RED - {"scarlet"} if perturbed else RED
    return build_scm(
        {"U_fine": _uniform(SHADES)},
        {"Fine": SHADES, "Pecking": ("yes", "no")},
        {
            "Fine": "U_fine",
            "Pecking": (("Fine",), lambda f: "yes" if f in red else "no"),
        },
        name="bird_low_perturbed" if perturbed else "bird_low",
    )


def bird_high() -> SCM:
    return build_scm(
        {"U_coarse": _uniform(("red", "blue"))},
        {"Coarse": ("red", "blue"), "Pecking": ("yes", "no")},
        {
            "Coarse": "U_coarse",
            "Pecking": (("Coarse",), {"red": "yes", "blue": "no"}),
        },
        name="bird_high",
    )


def color_spec() -> ClusterSpec:
    return ClusterSpec(
        {"Coarse": ("Fine",), "Pecking": ("Pecking",)},
        {
            "Coarse": {s: ("red" if s in RED else "blue") for s in SHADES},
            "Pecking": {"yes": "yes", "no": "no"},
        },
    )


def tau_color(perturbed: bool = False) -> Alignment:
    return build_alignment(bird_low(perturbed), bird_high(), color_spec(), name="tau_color")


# ---------------------------------------------------------------- audit


def audit_low() -> SCM:
    """All-attributes model: Greg is called back for 3 of 20 draws, Jamal for 2."""
    return build_scm(
        {
            "U_name": _uniform(("Greg", "Jamal")),
            "U_town": _uniform(("t1", "t2", "t3", "t4")),
            "U_cb": dict(CALLBACK_NOISE),
        },
        {
            "Name": ("Greg", "Jamal"),
            "Hometown": ("t1", "t2", "t3", "t4"),
            "Callback": ("yes", "no"),
        },
        {
            "Name": "U_name",
            "Hometown": "U_town",
            "Callback": (
                ("Name", "U_cb"),
                lambda name, cb: _called(cb, 3 if name == "Greg" else 2),
            ),
        },
        name="audit_low",
    )


def race_high() -> SCM:
    return build_scm(
        {"U_race": _uniform(("Black", "white")), "U_cb": dict(CALLBACK_NOISE)},
        {"Race": ("Black", "white"), "Callback": ("yes", "no")},
        {
            "Race": "U_race",
            "Callback": (
                ("Race", "U_cb"),
                lambda race, cb: _called(cb, 3 if race == "white" else 2),
            ),
        },
        name="race_high",
    )


def sc_spec() -> ClusterSpec:
    return ClusterSpec(
        {"Race": ("Name",), "Callback": ("Callback",)},
        {"Race": {"Greg": "white", "Jamal": "Black"}, "Callback": {"yes": "yes", "no": "no"}},
        dropped=("Hometown",),
    )


def tau_sc() -> Alignment:
    return build_alignment(audit_low(), race_high(), sc_spec(), name="tau_sc")


# ---------------------------------------------------------------- ambiguity


def ambiguity_low() -> SCM:
    """Callback depends on education for Jamal: 3/20 at StateU, 1/20 at HowardU."""

    def callback(name: str, edu: str, cb: str) -> str:
        cut = 1 if (name, edu) == ("Jamal", "HowardU") else 3
        return _called(cb, cut)

    return build_scm(
        {
            "U_name": _uniform(("Greg", "Jamal")),
            "U_edu": _uniform(("StateU", "HowardU")),
            "U_cb": dict(CALLBACK_NOISE),
        },
        {"Name": ("Greg", "Jamal"), "Edu": ("StateU", "HowardU"), "Callback": ("yes", "no")},
        {"Name": "U_name", "Edu": "U_edu", "Callback": (("Name", "Edu", "U_cb"), callback)},
        name="ambiguity_low",
    )


def ambiguity_spec() -> ClusterSpec:
    return ClusterSpec(
        {"Race": ("Name", "Edu"), "Callback": ("Callback",)},
        {
            "Race": lambda name, edu: "white" if name == "Greg" else "Black",
            "Callback": {"yes": "yes", "no": "no"},
        },
        domains={"Race": ("Black", "white"), "Callback": ("yes", "no")},
    )


def tau_ambiguity() -> Alignment:
    """Social-construction alignment onto the mean-aggregated quotient model."""
    return quotient_high_model(ambiguity_low(), ambiguity_spec(), name="ambiguity_high").alignment


# ---------------------------------------------------------------- atypicality


def atypical_low() -> SCM:
    """Nobody named Jamal attended EliteU, so that resume has zero mass."""

    def callback(name: str, edu: str, cb: str) -> str:
        cut = 4 if edu == "EliteU" else (3 if name == "Greg" else 2)
        return _called(cb, cut)

    return build_scm(
        {
            "U_name": _uniform(("Greg", "Jamal")),
            "U_edu": _uniform(("EliteU", "StateU")),
            "U_nb": _uniform(("North", "South")),
            "U_cb": dict(CALLBACK_NOISE),
        },
        {
            "Name": ("Greg", "Jamal"),
            "Edu": ("EliteU", "StateU"),
            "Neighborhood": ("North", "South"),
            "Callback": ("yes", "no"),
        },
        {
            "Name": "U_name",
            "Edu": (("Name", "U_edu"), lambda name, u: u if name == "Greg" else "StateU"),
            "Neighborhood": "U_nb",
            "Callback": (("Name", "Edu", "U_cb"), callback),
        },
        name="atypical_low",
    )


def skewed_low() -> SCM:
    """Jamal at EliteU is a tenth of all Jamals and all live North."""
    draws = tuple(f"e{i}" for i in range(1, 11))

    def edu(name: str, u: str) -> str:
        elite = {"e1"} if name == "Jamal" else {f"e{i}" for i in range(1, 6)}
        return "EliteU" if u in elite else "StateU"

    def neighborhood(name: str, edu_: str, u: str) -> str:
        return "North" if (name, edu_) == ("Jamal", "EliteU") else u

    def callback(name: str, edu_: str, cb: str) -> str:
        cut = 4 if edu_ == "EliteU" else (3 if name == "Greg" else 2)
        return _called(cb, cut)

    return build_scm(
        {
            "U_name": _uniform(("Greg", "Jamal")),
            "U_edu": _uniform(draws),
            "U_nb": {"North": Fraction(1, 4), "South": Fraction(3, 4)},
            "U_cb": dict(CALLBACK_NOISE),
        },
        {
            "Name": ("Greg", "Jamal"),
            "Edu": ("EliteU", "StateU"),
            "Neighborhood": ("North", "South"),
            "Callback": ("yes", "no"),
        },
        {
            "Name": "U_name",
            "Edu": (("Name", "U_edu"), edu),
            "Neighborhood": (("Name", "Edu", "U_nb"), neighborhood),
            "Callback": (("Name", "Edu", "U_cb"), callback),
        },
        name="skewed_low",
    )


def name_edu_race_spec(dropped=("Neighborhood",)) -> ClusterSpec:
    return ClusterSpec(
        {"Race": ("Name", "Edu"), "Callback": ("Callback",)},
        {
            "Race": lambda name, edu: "white" if name == "Greg" else "Black",
            "Callback": {"yes": "yes", "no": "no"},
        },
        dropped=dropped,
        domains={"Race": ("Black", "white"), "Callback": ("yes", "no")},
    )


# ---------------------------------------------------------------- norms


def coins_low() -> SCM:
    """Three independent fair coins; Effect copies V3."""
    bits = ("0", "1")
    return build_scm(
        {"U1": _uniform(bits), "U2": _uniform(bits), "U3": _uniform(bits)},
        {"V1": bits, "V2": bits, "V3": bits, "Effect": bits},
        {"V1": "U1", "V2": "U2", "V3": "U3", "Effect": (("V3",), lambda v: v)},
        name="coins_low",
    )


def coins_spec(ideal: bool) -> ClusterSpec:
    members, dropped = (("V1", "V2"), ("V3",)) if ideal else (("V2", "V3"), ("V1",))
    # race follows the second member: V2 under the ideal basis, V3 under the actual one
    return ClusterSpec(
        {"Race": members, "Effect": ("Effect",)},
        {"Race": lambda first, second: f"r{second}", "Effect": {"0": "0", "1": "1"}},
        dropped=dropped,
        domains={"Race": ("r0", "r1"), "Effect": ("0", "1")},
    )


def coins_alignments() -> tuple[Alignment, Alignment]:
    low = coins_low()
    actual = quotient_high_model(low, coins_spec(ideal=False), name="coins_actual").alignment
    ideal = quotient_high_model(low, coins_spec(ideal=True), name="coins_ideal").alignment
    return actual, ideal


def dress_low() -> SCM:
    """Hiring penalises skirts: 1/4 hire chance in a skirt, 3/4 otherwise."""
    return build_scm(
        {
            "U_body": _uniform(("f", "m")),
            "U_df": _uniform(("skirt", "trousers")),
            "U_dm": {"skirt": Fraction(1, 10), "trousers": Fraction(9, 10)},
            "U_h": _uniform(("h1", "h2", "h3", "h4")),
        },
        {"Body": ("f", "m"), "Dress": ("skirt", "trousers"), "Hire": ("yes", "no")},
        {
            "Body": "U_body",
            "Dress": (("Body", "U_df", "U_dm"), lambda b, df, dm: df if b == "f" else dm),
            "Hire": (
                ("Dress", "U_h"),
                lambda d, h: "yes" if h in ({"h1"} if d == "skirt" else {"h1", "h2", "h3"}) else "no",
            ),
        },
        name="dress_low",
    )


def dress_alignments() -> tuple[Alignment, Alignment]:
    """Actual gender basis includes dress; the ideal basis is body alone."""
    low = dress_low()
    actual = ClusterSpec(
        {"Gender": ("Body", "Dress"), "Hire": ("Hire",)},
        {
            "Gender": lambda b, d: "man" if (b, d) == ("m", "trousers") else "woman",
            "Hire": {"yes": "yes", "no": "no"},
        },
        domains={"Gender": ("man", "woman"), "Hire": ("yes", "no")},
    )
    ideal = ClusterSpec(
        {"Gender": ("Body",), "Hire": ("Hire",)},
        {"Gender": {"f": "woman", "m": "man"}, "Hire": {"yes": "yes", "no": "no"}},
        dropped=("Dress",),
        domains={"Gender": ("man", "woman"), "Hire": ("yes", "no")},
    )
    return (
        quotient_high_model(low, actual, name="gender_actual").alignment,
        quotient_high_model(low, ideal, name="gender_ideal").alignment,
    )
