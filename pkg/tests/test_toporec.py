from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmslab.exactmath import RatFun
from bmslab.toporec import (
    CRITICAL_POINTS,
    TRError,
    curve_data_m2,
    expand_and_compare,
    expand_coefficient,
    omega,
    omega_based,
)

STABLE = [(0, 3), (1, 1), (0, 4), (1, 2), (2, 1), (0, 5), (1, 3), (2, 2)]
points = st.fractions(min_value=-5, max_value=5, max_denominator=7).filter(lambda z: z not in (1, -1))


def test_curve_data():
    c = curve_data_m2()
    z = RatFun([0, 1], [1], "z")
    assert c.deck_invariance == RatFun([0], [1], "z")
    assert c.critical_points == (1, -1) == CRITICAL_POINTS
    assert c.dx == 1 - 1 / (z * z)
    assert c.omega01_dz == -(1 - 1 / (z * z)) * z * z / ((1 + z) * (1 + z))
    assert c.delta_omega01_dz == (z - 1) * (z - 1) / (z * z)


def test_unstable_requests_rejected():
    for g, n in ((0, 1), (0, 2)):
        with pytest.raises(TRError):
            omega(g, n)
    with pytest.raises(TRError):
        omega(3, 1)


def test_omega_03_closed_form():
    w = omega(0, 3)
    assert w.pole_locations() == {1}
    assert w.terms == {((1, 2), (1, 2), (1, 2)): Fraction(2)}


def test_omega_11_terms():
    w = omega(1, 1)
    assert w.pole_locations() == {1, -1}
    assert w.terms == {
        ((1, 2),): Fraction(-1, 16),
        ((1, 3),): Fraction(1, 4),
        ((1, 4),): Fraction(1, 4),
        ((-1, 2),): Fraction(1, 16),
    }


@pytest.mark.parametrize("gn", STABLE)
def test_structure(gn):
    w = omega(*gn)
    assert w.is_symmetric()
    assert w.residues_vanish()
    assert w.pole_locations() <= {1, -1}
    assert omega_based(*gn) == w


@given(st.lists(points, min_size=3, max_size=3))
def test_symmetric_as_functions(zs):
    w = omega(0, 4)
    zs = zs + [Fraction(1, 3)]
    for perm in itertools.permutations(range(4)):
        assert w.evaluate([zs[p] for p in perm]) == w.evaluate(zs)


def test_expansion_examples():
    assert expand_coefficient(omega(0, 3), (1, 1, 1)) == 2
    assert expand_coefficient(omega(1, 1), (3,)) == Fraction(1, 3)
    assert expand_coefficient(omega(1, 1), (1,)) == 0


@pytest.mark.parametrize("gn", [(0, 3), (1, 1), (1, 2), (2, 1)])
def test_expand_and_compare(gn):
    report = expand_and_compare(*gn, 5)
    assert report["ok"], report["mismatches"]


def test_compare_reports_mismatch():
    report = expand_and_compare(1, 1, 3, reference=lambda mu: 0)
    assert not report["ok"]
    # b_{1,(1)} and b_{1,(2)} vanish, so only mu = (3) disagrees with zero
    assert report["mismatches"] == [[3]]
