"""Sweep how strongly Jamal's callback depends on education.

    python3 scripts/ambiguity_sweep.py [--csv]

Greg and Jamal-at-StateU are called back 3/20 of the time; Jamal-at-HowardU
is called back ``k``/20 of the time and a share ``q`` of people attend
HowardU. Race is constituted by (Name, Edu). For each (q, k) the script
reports the preimage spread of do(Race=Black), the consistency distance of the
mean quotient, and the audit and race effects on the Name-only resume.
"""

from __future__ import annotations

import argparse
from fractions import Fraction

from casl import fixtures as F
from casl.abstraction import Aggregator, ambiguity_report, quotient_high_model
from casl.audit import PopulationModel, ResumeProjection, audit_validity_check
from casl.scm import SCM, Intervention, build_scm

from _table import emit

SHARES = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
CUTS = range(5)
COLUMNS = ("q", "k", "spread", "epsilon", "audit_effect", "race_effect", "deviation", "verdict")


def model(q: Fraction, k: int) -> SCM:
    draws = {f"c{i}": Fraction(1, 20) for i in range(1, 5)} | {"none": Fraction(4, 5)}

    def callback(name: str, edu: str, cb: str) -> str:
        cut = k if (name, edu) == ("Jamal", "HowardU") else 3
        return "yes" if cb != "none" and int(cb[1:]) <= cut else "no"

    return build_scm(
        {
            "U_name": {"Greg": Fraction(1, 2), "Jamal": Fraction(1, 2)},
            "U_edu": {"StateU": 1 - q, "HowardU": q},
            "U_cb": draws,
        },
        {"Name": ("Greg", "Jamal"), "Edu": ("StateU", "HowardU"), "Callback": ("yes", "no")},
        {"Name": "U_name", "Edu": "U_edu", "Callback": (("Name", "Edu", "U_cb"), callback)},
        name="sweep_low",
    )


def rows():
    uniform = Aggregator.parse("uniform")
    for q in SHARES:
        for k in CUTS:
            low = model(q, k)
            quotient = quotient_high_model(low, F.ambiguity_spec(), name="sweep_high")
            a = quotient.alignment
            spread = ambiguity_report(a, Intervention({"Race": "Black"}), "Callback", "yes", uniform).spread
            pop = PopulationModel(low, "Callback", "yes")
            r = audit_validity_check(pop, ResumeProjection(("Name",)), a, {"Name": "Greg"}, {"Name": "Jamal"})
            yield {
                "q": str(q),
                "k": str(k),
                "spread": str(spread),
                "epsilon": str(quotient.report.epsilon),
                "audit_effect": str(r.audit_effect),
                "race_effect": str(r.race_effect),
                "deviation": str(r.deviation),
                "verdict": str(r.verdict),
            }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--csv", action="store_true", help="emit CSV instead of an aligned table")
    args = ap.parse_args()
    emit(list(rows()), COLUMNS, args.csv)

if __name__ == "__main__":
    main()
