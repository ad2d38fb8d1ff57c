"""Attribute versus norm effects across alternative bases for a protected attribute.

    python3 scripts/norm_vs_attribute.py [--csv]

Over three fair coins where Effect copies V3, race is read off a single coin
under each alignment. Every (actual, ideal) choice of coin is compared, and the
dress-code hiring fixture is appended.
"""

from __future__ import annotations

import argparse

from casl import fixtures as F
from casl.abstraction import ClusterSpec, quotient_high_model
from casl.norms import AlignmentPair, HighContrast, norm_effect

from _table import emit

COINS = ("V1", "V2", "V3")
COLUMNS = ("scenario", "actual", "ideal", "attribute", "norm", "delta", "reclassified")


def coin_basis(coin: str):
    spec = ClusterSpec(
        {"Race": (coin,), "Effect": ("Effect",)},
        {"Race": {"0": "r0", "1": "r1"}, "Effect": {"0": "0", "1": "1"}},
        dropped=tuple(c for c in COINS if c != coin),
    )
    return quotient_high_model(F.coins_low(), spec, name=f"race_{coin}").alignment


def rows():
    bases = {c: coin_basis(c) for c in COINS}
    contrast = HighContrast("Race", "r0", "r1")
    for actual in COINS:
        for ideal in COINS:
            r = norm_effect(F.coins_low(), AlignmentPair(bases[actual], bases[ideal]), contrast, "Effect", "1")
            yield _row("coins", actual, ideal, r)
    coins = norm_effect(F.coins_low(), AlignmentPair(*F.coins_alignments()), contrast, "Effect", "1")
    yield _row("coins", "(V2,V3)", "(V1,V2)", coins)
    gender = HighContrast("Gender", "man", "woman")
    dress = norm_effect(F.dress_low(), AlignmentPair(*F.dress_alignments()), gender, "Hire", "yes")
    yield _row("dress", "(Body,Dress)", "(Body)", dress)


def _row(scenario, actual, ideal, r) -> dict[str, str]:
    return {
        "scenario": scenario,
        "actual": actual,
        "ideal": ideal,
        "attribute": str(r.attribute_effect),
        "norm": str(r.norm_effect),
        "delta": str(r.delta),
        "reclassified": str(r.reclassification.total),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--csv", action="store_true", help="emit CSV instead of an aligned table")
    args = ap.parse_args()
    emit(list(rows()), COLUMNS, args.csv)

if __name__ == "__main__":
    main()
