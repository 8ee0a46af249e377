from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmslab.exactmath import MPoly
from bmslab.fockspace import bms_fock
from bmslab.permoracle import unstable_onepoint
from bmslab.quasipoly import fit_poly, genus0_poly, mu_vars
from bmslab.spectral import (
    WTensor,
    XiElement,
    XSeries,
    cofactor_polys,
    cofactor_resultant,
    cofactor_resultant_sylvester,
    compose,
    d_operator,
    dxi_identity_check,
    elogz_series,
    minimal_d,
    omega01_check,
    omega02_check,
    w_assemble,
    x_of_z_series,
    xi_closed_coefficient,
    xi_from_poly,
    xi_poly_of,
    xi_series,
    xi_series_direct,
    xi_stated_coefficient,
    z_series,
)

K = MPoly.var("k")
small_fracs = st.fractions(min_value=-10, max_value=10, max_denominator=6)


def test_z_series_examples():
    z = z_series(2, 6)
    assert z[0] == 0
    assert z[1] == 1
    assert z[3] == 5
    for m in (2, 3, 4):
        assert z_series(m, 5)[0] == 0


@pytest.mark.parametrize("m", [2, 3, 4])
def test_z_is_compositional_inverse(m):
    order = 10
    z = z_series(m, order)
    x_of_z = x_of_z_series(m, order)
    assert compose(x_of_z.coeffs, z) == XSeries.monomial(1, order)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_z_matches_one_point_numbers(m):
    z = z_series(m, 10)
    for k in range(1, 11):
        assert z[k] == k * unstable_onepoint(m, k)


def test_xi_coefficients_frozen():
    # exact expansion values; the unsigned binomial differs by an overall sign
    assert xi_series(2, 1, 5)[1] == -1
    assert xi_series(2, 0, 5)[2] == -1
    assert xi_series(2, 0, 5)[3] == -4
    assert xi_stated_coefficient(2, 1, 1) == 1
    assert xi_stated_coefficient(2, 0, 2) == 1
    assert xi_stated_coefficient(2, 0, 3) == 4


@pytest.mark.parametrize("m", [2, 3, 4])
def test_xi_dual_path(m):
    for i in range(m):
        direct = xi_series_direct(m, i, 12)
        assert xi_series(m, i, 12) == direct
        for k in range(13):
            assert direct[k] == xi_closed_coefficient(m, i, k) == -xi_stated_coefficient(m, i, k)


def test_d_operator():
    assert d_operator(XSeries.const(1, 6)) == XSeries.const(0, 6)
    for k in range(5):
        assert d_operator(XSeries.monomial(k, 6)) == XSeries.monomial(k + 1, 6, -k)


@given(st.lists(small_fracs, min_size=1, max_size=6), st.lists(small_fracs, min_size=1, max_size=6))
def test_series_ring(a, b):
    A, B = XSeries(a, 6), XSeries(b, 6)
    assert A * B == B * A
    assert (A + B) - B == A
    if b[0]:
        assert (A / B) * B == A


def test_xi_from_poly_examples():
    assert xi_from_poly(2, 1, MPoly.const(0, ("k",))).is_zero()
    elem = xi_from_poly(2, 1, K)
    assert xi_poly_of(elem) == K
    # a plain xi_i at d = 0: its own data round-trips to a unit coefficient
    for m in (2, 3):
        for i in range(m):
            P = xi_poly_of(XiElement(m, 0, {(0, i): 1}))
            assert xi_from_poly(m, 0, P).coeffs == {(0, i): 1}


@given(st.sampled_from([2, 3]), st.sampled_from([0, 1, 2]), st.data())
def test_xi_solve_round_trip(m, d, data):
    coeffs = data.draw(st.lists(small_fracs, min_size=1, max_size=m * (d + 1)))
    P = MPoly.from_univariate(coeffs, "k")
    elem = xi_from_poly(m, d, P)
    assert xi_poly_of(elem) == P
    assert XiElement.from_json(elem.to_json()) == elem


@pytest.mark.parametrize("m,d", [(2, 0), (2, 1), (3, 0), (3, 1)])
def test_dxi_identity(m, d):
    for P in (MPoly.const(1, ("k",)), K, K * K - 3):
        if P.total_degree() <= m * (d + 1) - 1:
            assert dxi_identity_check(m, d, P) == []


@pytest.mark.parametrize("m", [2, 3, 4])
@pytest.mark.parametrize("d", [0, 1, 2])
def test_cofactors_coprime(m, d):
    A, B = cofactor_polys(m, d)
    assert A.degree("k") == m - 1 and B.degree("k") == m
    r = cofactor_resultant(m, d)
    assert r != 0
    assert r == cofactor_resultant_sylvester(m, d)


def test_minimal_d():
    assert minimal_d(2, 1, 1) == 0
    assert minimal_d(2, 3, 2) == 1
    assert minimal_d(3, 7, 4) == 2


def test_zero_polynomial_gives_zero_tensor():
    class Zero:
        m, g, n = 2, 0, 3
        poly = MPoly(mu_vars(3))

    W = w_assemble(Zero())
    assert W.is_zero()
    assert W.coefficient((1, 2, 3)) == 0


def test_w_genus0_three_point():
    class Form:
        m, g, n = 2, 0, 3
        poly = genus0_poly(2, 3)

    W = w_assemble(Form())
    for mu in itertools.product(range(1, 5), repeat=3):
        assert W.coefficient(mu) == bms_fock(2, 0, mu)


def test_w_genus1_one_point():
    W = w_assemble(fit_poly(2, 1, 1))
    for mu in range(1, 7):
        assert W.coefficient((mu,)) == bms_fock(2, 1, (mu,))
    assert isinstance(W, WTensor)
    with pytest.raises(ValueError):
        w_assemble(fit_poly(2, 1, 1), d=0)


def test_w_larger_d_agrees():
    form = fit_poly(2, 1, 1)
    W1, W2 = w_assemble(form), w_assemble(form, d=w_assemble(form).d + 1)
    for mu in range(1, 7):
        assert W1.coefficient((mu,)) == W2.coefficient((mu,))


@pytest.mark.parametrize("m", [2, 3, 4])
def test_unstable_checks(m):
    assert omega01_check(m, 8)["ok"]
    assert omega02_check(m, 8)["ok"]


def test_unstable_check_examples():
    z = z_series(2, 4)
    assert z[3] == 3 * Fraction(5, 3)
    assert elogz_series(2, 3)[(1, 1)] == (1 + 1) * 1 == math.comb(2, 1) ** 2 - 2 * math.comb(1, 0) ** 2
    assert z_series(3, 2)[1] == 1


def test_unstable_check_detects_bad_values():
    report = omega01_check(2, 5, values=lambda k: unstable_onepoint(2, k) + (k == 3))
    assert not report["ok"] and report["failures"]
