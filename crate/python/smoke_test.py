"""Smoke test for the finstat Python extension.

Build first:  pip install --no-build-isolation ./crates/py
"""
import math
from pathlib import Path

import finstat

FIXTURES = Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


# A two-point distribution collapsed to a point and reconstructed as a point mass.
m = finstat.StatMorphism(["a", "b"], ["*"], [0, 0], [0.5, 0.5], [[1.0, 0.0]])
assert m.re() == math.inf
assert m.optimal().re() == 0.0
assert m.optimal().is_optimal()

half = finstat.Dist(["a", "b"], [0.5, 0.5])
point = finstat.Dist(["a", "b"], [1.0, 0.0])
assert close(finstat.kl(point, half, base="2"), 1.0)

doc = finstat.Document.parse((FIXTURES / "log2.json").read_text())
assert close(doc.morphism("log2").re(base="2"), 1.0)
assert doc.to_json() == (FIXTURES / "log2.json").read_text()

sq = finstat.Document.parse((FIXTURES / "identity_square.json").read_text()).two_morphism("identity")
assert sq.re2() == 0.0 and sq.ce() == 0.0

spade, club = finstat.TwoMorphism.stacked_pair(seed=7)
both = club.vcompose(spade)
assert close(both.ce(), club.ce() + spade.ce(), 1e-8)
assert close(both.re2(), club.re2() + spade.re2(), 1e-8)

t = finstat.TwoMorphism.random(seed=3, sparse=True)
assert t.marginal_check()[0]
c1, c2 = t.ce(), t.ce_closed_form()
assert (math.isinf(c1) and math.isinf(c2)) or close(c1, c2)

try:
    finstat.Dist(["a", "b"], [0.7, 0.7])
except ValueError:
    pass
else:
    raise AssertionError("unnormalized distribution accepted")

report = finstat.run_suite("chain_rule", trials=200)
assert report["passes"] == 200, report
assert "chain_rule" in finstat.suites()

print("smoke test ok")
