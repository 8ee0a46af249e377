from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmslab.exactmath import MPoly
from bmslab.fockspace import bms_fock
from bmslab.quasipoly import (
    FitFailure,
    QuasiPolyForm,
    denominator_exponents,
    denominator_product,
    fit_poly,
    genus0_poly,
    mu_vars,
    normalized_value,
    prefactor,
)


def test_prefactor_values():
    assert prefactor(2, 1) == 1
    assert prefactor(2, 3) == 2
    # 3!/(2! 3!) by direct factorial evaluation
    assert prefactor(3, 2) == Fraction(1, 2)
    with pytest.raises(ValueError):
        prefactor(1, 2)


def test_denominator_product_values():
    assert denominator_exponents(2, 0, 3) == []
    assert denominator_product(2, 0, 3, (4, 1, 2)) == 1
    assert denominator_product(2, 1, 1, (3,)) == 1
    assert denominator_product(2, 1, 2, (2, 2)) == Fraction(1, 4)


@given(st.sampled_from([2, 3, 4]), st.integers(0, 2), st.integers(1, 4), st.data())
def test_denominator_never_vanishes_at_integers(m, g, n, data):
    if 2 * g - 2 + n <= 0:
        return
    mu = data.draw(st.lists(st.integers(1, 40), min_size=n, max_size=n))
    assert denominator_product(m, g, n, mu) != 0


def test_normalized_values():
    assert normalized_value(2, 0, (1, 1, 1)) == 2
    assert normalized_value(2, 1, (3,)) == Fraction(1, 6)
    assert normalized_value(2, 0, (3, 1, 1)) == 10
    assert normalized_value(2, 0, (3, 1, 1)) == 2 * 5 * 1 * 1


def _product_form(m, n):
    names = mu_vars(n)
    out = MPoly.const(m, names)
    for v in names:
        x = MPoly.var(v, names)
        for j in range(1, m):
            out = out * (m * x - j)
    return out


@pytest.mark.parametrize("m", [2, 3])
def test_genus0_three_point_fit(m):
    form = fit_poly(m, 0, 3)
    assert form.poly.with_vars(mu_vars(3)) == _product_form(m, 3)
    assert form.poly == genus0_poly(m, 3)


@pytest.mark.parametrize("m", [2, 3])
def test_genus0_four_point_fit(m):
    form = fit_poly(m, 0, 4)
    assert form.poly == genus0_poly(m, 4)


def test_one_point_genus_one():
    form = fit_poly(2, 1, 1)
    assert form.poly_value((3,)) == Fraction(1, 6)
    mu = MPoly.var("mu1")
    assert form.poly == mu * mu / 12 - mu / 4 + Fraction(1, 6)
    form3 = fit_poly(3, 1, 1)
    assert form3.poly == 3 * mu**3 / 4 - 2 * mu * mu + 7 * mu / 4 - Fraction(1, 2)


@pytest.mark.parametrize("case", [(2, 1, 1), (2, 1, 2), (3, 1, 1), (2, 0, 3), (3, 0, 3)])
def test_fit_reproduces_fock(case):
    m, g, n = case
    form = fit_poly(m, g, n)
    assert form.is_symmetric()
    assert form.degree <= form.degree_cap
    rng = random.Random(sum(case))
    fresh = [tuple(rng.randint(1, 7) for _ in range(n)) for _ in range(3)]
    for mu in list(form.grid) + list(form.holdout) + fresh:
        assert form.evaluate(mu) == bms_fock(m, g, mu)


def test_fit_respects_cap():
    with pytest.raises(FitFailure):
        fit_poly(2, 1, 1, degree_cap=1)
    with pytest.raises(ValueError):
        fit_poly(2, 0, 2)


def test_fit_with_supplied_values():
    # the genus-zero closed formula as a value source gives the same numerator
    from bmslab.permoracle import genus0_formula

    form = fit_poly(2, 0, 3, values=lambda mu: genus0_formula(2, mu))
    assert form.poly == genus0_poly(2, 3)


def test_form_json_round_trip():
    form = fit_poly(3, 1, 1)
    back = QuasiPolyForm.from_json(form.dumps())
    assert back == form
    assert back.dumps() == form.dumps()


def test_parallel_fit_matches_serial():
    assert fit_poly(2, 1, 2, jobs=2).poly == fit_poly(2, 1, 2).poly


@pytest.mark.parametrize("m", [2, 3])
def test_symmetric_under_transpositions(m):
    form = fit_poly(m, 1, 2)
    for a, b in itertools.product(range(1, 5), repeat=2):
        assert form.poly_value((a, b)) == form.poly_value((b, a))
