from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmslab.exactmath import (
    MPoly,
    RatFun,
    T_direct,
    T_poly,
    T_tilde_direct,
    T_tilde_poly,
    bernoulli,
    determinant,
    falling_factorial,
    faulhaber_power_sum,
    interpolate_univariate,
    parse_rat,
    rat_str,
    rising_factorial,
    solve_exact,
)

K = MPoly.var("k")
N = MPoly.var("n")
fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


# --- factorials -------------------------------------------------------------


def test_falling_factorial_examples():
    assert falling_factorial(7, 0) == 1
    assert falling_factorial(Fraction(1, 3), 0) == 1
    assert falling_factorial(5, 2) == 20
    assert falling_factorial(3, -2) == Fraction(1, 20)


def test_rising_factorial_examples():
    assert rising_factorial(9, 0) == 1
    assert rising_factorial(2, 3) == 24
    assert rising_factorial(K, 2) == K * K + K


@given(st.integers(-6, 12), st.integers(0, 6), st.integers(0, 6))
def test_falling_factorial_splits(a, b, c):
    assert falling_factorial(a, b) * falling_factorial(a - b, c) == falling_factorial(a, b + c)


@given(st.integers(-8, 8), st.integers(0, 6))
def test_rising_is_reflected_falling(a, t):
    assert rising_factorial(a, t) == (-1) ** t * falling_factorial(-a, t)


# --- Bernoulli and Faulhaber --------------------------------------------------


def test_bernoulli_examples():
    assert bernoulli(0) == 1
    assert bernoulli(1) == Fraction(-1, 2)
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(3) == 0
    assert bernoulli(12) == Fraction(-691, 2730)


def test_faulhaber_low_degrees():
    assert faulhaber_power_sum(0) == N
    assert faulhaber_power_sum(1) == N * N / 2 + N / 2
    assert faulhaber_power_sum(2) == N**3 / 3 + N * N / 2 + N / 6


@pytest.mark.parametrize("p", range(8))
def test_faulhaber_matches_direct_sums(p):
    S = faulhaber_power_sum(p)
    for n in range(1, 11):
        assert S.subs({"n": n}) == sum(j**p for j in range(1, n + 1))


# --- the T tables -------------------------------------------------------------


def test_T_examples():
    assert T_poly(0) == MPoly.const(1, T_poly(0).vars)
    X = MPoly.var("x", ("x", "k"))
    Kx = MPoly.var("k", ("x", "k"))
    assert T_poly(1).with_vars(("x", "k")) == Kx * (Kx + 2 * X - 1) / 2
    assert T_tilde_poly(1).with_vars(("x", "k")) == Kx * (Kx - 2 * X + 1) / 2
    assert T_poly(2).subs({"x": 0, "k": 3}) == 2
    assert T_tilde_poly(2).subs({"x": 0, "k": 2}) == 7


@pytest.mark.parametrize("d", range(9))
def test_T_reflection_divisibility_degree(d):
    T = T_poly(d)
    reflected = T.subs({"k": -MPoly.var("k", T.vars)}).with_vars(T.vars)
    assert T_tilde_poly(d).with_vars(T.vars) == reflected
    assert T.total_degree() == 2 * d
    if d:
        assert T.divisible_by_linear("k", 0)


@pytest.mark.parametrize("d", range(1, 7))
def test_T_recurrences(d):
    T, Tm = T_poly(d), T_poly(d - 1).with_vars(T_poly(d).vars)
    X, Kv = MPoly.var("x", T.vars), MPoly.var("k", T.vars)
    assert T - T.shift("k", -1) == (X + Kv - 1) * Tm.shift("k", -1)
    Tt, Ttm = T_tilde_poly(d), T_tilde_poly(d - 1).with_vars(T_tilde_poly(d).vars)
    X, Kv = MPoly.var("x", Tt.vars), MPoly.var("k", Tt.vars)
    assert Tt - Tt.shift("k", -1) == (Kv - X) * Ttm


@given(st.integers(0, 5), fractions, st.integers(0, 6))
def test_T_poly_matches_direct(d, x, k):
    assert T_poly(d).subs({"x": x, "k": k}) == T_direct(d, x, k)
    assert T_tilde_poly(d).subs({"x": x, "k": k}) == T_tilde_direct(d, x, k)


# --- rational arithmetic ------------------------------------------------------


@given(fractions, fractions, fractions)
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    if a:
        assert a * (1 / a) == 1


@given(fractions)
def test_rat_string_round_trip(a):
    s = rat_str(a)
    assert parse_rat(s) == a
    assert rat_str(parse_rat(s)) == s


def test_rat_str_format():
    assert rat_str(Fraction(5, 3)) == "5/3"
    assert rat_str(Fraction(-4, 2)) == "-2"


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=5), st.lists(st.integers(-5, 5), min_size=1, max_size=5))
def test_mpoly_ring_operations(a, b):
    A, B = MPoly.from_univariate(a, "k"), MPoly.from_univariate(b, "k")
    for k in range(-3, 4):
        assert (A * B).subs({"k": k}) == A.subs({"k": k}) * B.subs({"k": k})
        assert (A - B).subs({"k": k}) == A.subs({"k": k}) - B.subs({"k": k})


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=4), st.integers(-4, 4))
def test_linear_division(coeffs, root):
    P = MPoly.from_univariate(coeffs, "k")
    q, r = P.divmod_linear("k", root)
    assert q * (K - root) + r == P


def test_ratfun_residue():
    # 1 / (k (k + 1)) has residue -1 at k = -1
    f = RatFun(MPoly.const(1, ("k",)), K * (K + 1))
    assert f.residue(-1) == -1
    assert f.residue(0) == 1
    assert f(1) == Fraction(1, 2)


def test_linear_algebra():
    M = [[2, 1], [1, 3]]
    assert determinant(M) == 5
    assert solve_exact(M, [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]


@given(st.lists(fractions, min_size=1, max_size=6))
def test_interpolation_recovers_polynomial(coeffs):
    P = MPoly.from_univariate(coeffs, "k")
    xs = list(range(len(coeffs)))
    assert interpolate_univariate(xs, [P.subs({"k": x}) for x in xs]) == P
