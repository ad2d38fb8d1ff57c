from __future__ import annotations

import csv
import io
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

SCRIPTS = Path(__file__).parents[1] / "scripts"


def table(name: str) -> list[dict[str, str]]:
    proc = subprocess.run(
        [sys.executable, str(SCRIPTS / f"{name}.py"), "--csv"], capture_output=True, text=True, check=True
    )
    return list(csv.DictReader(io.StringIO(proc.stdout)))


def test_audit_experiment():
    rows = {(r["file"], r["rule"]): r for r in table("audit_experiment")}
    audit = rows[("audit", "modal")]
    assert (audit["audit_effect"], audit["race_effect"], audit["ratio"], audit["verdict"]) == ("1/20", "1/20", "3/2", "True")
    assert rows[("atypical", "modal")]["verdict"] == ""
    assert rows[("ambiguity", "probabilistic")]["deviation"] == "-1/20"


def test_ambiguity_sweep_matches_closed_form():
    # Black preimages push to k/20 and 3/20; the mean quotient sits at q*k/20 + (1-q)*3/20.
    for r in table("ambiguity_sweep"):
        q, k = Fraction(r["q"]), int(r["k"])
        gap = Fraction(abs(3 - k), 20)
        assert Fraction(r["spread"]) == gap
        assert Fraction(r["epsilon"]) == max(q, 1 - q) * gap
        assert Fraction(r["audit_effect"]) == q * Fraction(3 - k, 20) == Fraction(r["race_effect"])
        assert r["verdict"] == str(k == 3)


def test_norm_grid():
    rows = table("norm_vs_attribute")
    for r in rows[:9]:
        attr, norm = int(r["actual"] == "V3"), int(r["ideal"] == "V3")
        assert (r["attribute"], r["norm"], r["delta"]) == (str(attr), str(norm), str(attr - norm))
        assert r["reclassified"] == ("0" if r["actual"] == r["ideal"] else "1/2")
    assert [rows[-1][k] for k in ("attribute", "norm", "delta")] == ["-3/11", "-1/5", "-4/55"]
