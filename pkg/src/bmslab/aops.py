"""Symbolic calculus of the conjugated operators ``A(k, hbar)``.

``A(k, hbar) = hbar^{-k} e^{alpha_1} D^m (alpha_{-k}/k) D^{-m} e^{-alpha_1}``
has matrix coefficients on ``E_{l-q,l}`` and on the identity that are finite
differences of ``P_k(l)^m`` with ``P_k(l) = prod_{i<k} (1 + hbar(l+i+1/2))``.
This module evaluates those coefficients directly and through their closed
forms in terms of the ``Q``-polynomials, then extracts the polynomial
numerators in ``k`` by interpolation with held-out validation.

Every quantity with two natural evaluation routes exposes both.
"""

from __future__ import annotations

import itertools
import math
import threading
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .exactmath import (
    MPoly,
    RatFun,
    T_poly,
    T_tilde_poly,
    falling_factorial,
    interpolate_univariate,
    rising_factorial,
)

__all__ = [
    "p_poly",
    "delta",
    "delta_power_p_check",
    "r_value_product",
    "r_value_beta",
    "r_value",
    "r_poly",
    "r_tilde_poly",
    "r_tilde_value_series",
    "q_coeffs",
    "q_coeffs_grid",
    "q_reexpansion_check",
    "acheck_E_direct",
    "acheck_E_closed",
    "acheck_E_coeff",
    "acheck_Id_direct",
    "acheck_Id_closed",
    "acheck_Id_coeff",
    "a_prefactor",
    "pole_product",
    "s_numerator",
    "s_numerator_k",
    "s_id_numerator",
    "rho",
    "s_id_from_rho",
    "euler_identity_symbolic",
    "euler_identity_concrete",
    "delta_r_check",
    "adagger_E_direct",
    "adagger_E_closed",
    "adagger_E_coeff",
    "residue_constant",
    "residue_constant_observed",
    "a_rescaled_ratfun",
    "residue_relation_check",
    "multinomial_falling_check",
    "InterpolationFailure",
    "ConsistencyError",
]

HALF = Fraction(1, 2)
_H = MPoly.var("h")
_L = MPoly.var("l")
_K = MPoly.var("k")


class ConsistencyError(AssertionError):
    """Two evaluation routes disagreed."""


class InterpolationFailure(ArithmeticError):
    """An interpolant failed validation on held-out points."""


# ---------------------------------------------------------------------------
# P_k and the difference operator
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def p_poly(k: int) -> MPoly:
    """``P_k(l) = prod_{i=0}^{k-1} (1 + h (l + i + 1/2))`` in variables (l, h)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    out = MPoly.const(1, ("l", "h"))
    for i in range(k):
        out = out * (1 + _H * (_L + i + HALF))
    return out.with_vars(("l", "h"))


def delta(f: MPoly, var: str = "l", times: int = 1) -> MPoly:
    """Backward difference ``f(var) - f(var - 1)`` applied ``times`` times."""
    for _ in range(times):
        f = f - f.shift(var, -1).with_vars(f.vars)
    return f


def delta_power_p_check(t: int, k: int) -> bool:
    """``Delta^t P_k = (k)_t h^t P_{k-t}`` (zero when t > k), as a polynomial identity."""
    lhs = delta(p_poly(k), "l", t)
    if t > k:
        return lhs.is_zero()
    rhs = p_poly(k - t) * (_H**t) * falling_factorial(k, t)
    return lhs == rhs


def _h_product_coeffs(factors: Iterable[Fraction], order: int | None = None) -> list[Fraction]:
    """Coefficients of ``prod (1 + h a)`` (elementary symmetric functions of the a's)."""
    e = [Fraction(1)]
    for a in factors:
        e.append(Fraction(0))
        for j in range(len(e) - 1, 0, -1):
            e[j] += e[j - 1] * a
        if order is not None and len(e) > order + 1:
            e.pop()
    return e


def _p_values(k: int, l: Fraction) -> list[Fraction]:
    return _h_product_coeffs(l + i + HALF for i in range(k))


def _poly_mul(a: Sequence[Fraction], b: Sequence[Fraction], order: int | None = None) -> list[Fraction]:
    n = len(a) + len(b) - 1
    if order is not None:
        n = min(n, order + 1)
    out = [Fraction(0)] * max(n, 0)
    for i, x in enumerate(a):
        if not x or i >= n:
            continue
        for j, y in enumerate(b):
            if i + j >= n:
                break
            out[i + j] += x * y
    return out


def _pm_at(m: int, k: int, l: Fraction) -> list[Fraction]:
    base = _p_values(k, l)
    out = [Fraction(1)]
    for _ in range(m):
        out = _poly_mul(out, base)
    return out


def _delta_numeric(f, l: Fraction, t: int) -> list[Fraction]:
    """``(Delta^t f)(l)`` for f returning h-coefficient lists."""
    acc: list[Fraction] = []
    for j in range(t + 1):
        vals = f(l - j)
        c = (-1) ** j * math.comb(t, j)
        if len(vals) > len(acc):
            acc.extend([Fraction(0)] * (len(vals) - len(acc)))
        for i, v in enumerate(vals):
            acc[i] += c * v
    return acc


# ---------------------------------------------------------------------------
# R_p and its symbolic forms
# ---------------------------------------------------------------------------


def _x_args(l, i: Sequence) -> list:
    """``l - i_{j+1} - ... - i_m`` for j = 1..m."""
    m = len(i)
    return [l - sum(i[j + 1:], 0) for j in range(m)]


def r_value_product(p: int, m: int, k, l, i: Sequence[int]) -> Fraction:
    """``[h^p] prod_j P_{k-i_j}(l - i_{j+1} - ... - i_m)`` by expanding the product.

    Needs ``k - i_j >= 0``.
    """
    if len(i) != m:
        raise ValueError("need m indices")
    coeffs = [Fraction(1)]
    for i_j, x in zip(i, _x_args(Fraction(l), i)):
        n = int(k) - int(i_j)
        if n < 0:
            raise ValueError("product form needs k >= i_j")
        coeffs = _poly_mul(coeffs, _p_values(n, x), p)
    return coeffs[p] if p < len(coeffs) else Fraction(0)


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def r_value_beta(p: int, m: int, k, l, i: Sequence[int]) -> Fraction:
    """Same value through the sum over ``beta`` of products of ``T``-polynomials."""
    xs = [x + HALF for x in _x_args(Fraction(l), [Fraction(v) for v in i])]
    total = Fraction(0)
    for beta in _compositions(p, m):
        term = Fraction(1)
        for b, x, i_j in zip(beta, xs, i):
            term *= T_poly(b).subs({"x": x, "k": Fraction(k) - i_j})
            if not term:
                break
        total += term
    return total


def r_value(p: int, m: int, k, l, i: Sequence[int]) -> Fraction:
    """``R_p(k, l, i)`` with both routes compared when the product route applies."""
    b = r_value_beta(p, m, k, l, i)
    if all(int(k) >= int(v) for v in i) and Fraction(k).denominator == 1:
        a = r_value_product(p, m, k, l, i)
        if a != b:
            raise ConsistencyError(f"R_{p} routes differ at k={k}, l={l}, i={i}: {a} != {b}")
    return b


def _ivars(m: int) -> tuple[str, ...]:
    return tuple(f"i{j + 1}" for j in range(m))


_r_lock = threading.Lock()
_r_cache: dict[tuple[str, int, int], MPoly] = {}


def _r_symbolic(p: int, m: int, tilde: bool) -> MPoly:
    key = ("t" if tilde else "r", p, m)
    if key in _r_cache:
        return _r_cache[key]
    ivs = _ivars(m)
    allv = ("k", "l") + ivs
    I = [MPoly.var(v, allv) for v in ivs]
    L = MPoly.var("l", allv)
    K = MPoly.var("k", allv)
    xs = [x + HALF for x in _x_args(L, I)]
    tpoly = T_tilde_poly if tilde else T_poly
    total = MPoly(allv)
    factor_cache: dict[tuple[int, int], MPoly] = {}
    for beta in _compositions(p, m):
        term = MPoly.const(1, allv)
        for j, b in enumerate(beta):
            f = factor_cache.get((j, b))
            if f is None:
                upper = K + I[j] if tilde else K - I[j]
                f = tpoly(b).subs({"x": xs[j], "k": upper}).with_vars(allv)
                factor_cache[(j, b)] = f
            term = term * f
        total = total + term
    total = total.with_vars(allv)
    with _r_lock:
        _r_cache[key] = total
    return total


def r_poly(p: int, m: int) -> MPoly:
    """``R_p`` as a polynomial in (k, l, i1..im)."""
    return _r_symbolic(p, m, False)


def r_tilde_poly(p: int, m: int) -> MPoly:
    """``[h^p] prod_j Ptilde_{k+i_j}(l - i_{j+1} - ...)^{-1}`` as a polynomial."""
    return _r_symbolic(p, m, True)


def _inverse_series(coeffs: Sequence[Fraction], order: int) -> list[Fraction]:
    out = [Fraction(0)] * (order + 1)
    out[0] = 1 / coeffs[0]
    for n in range(1, order + 1):
        s = sum(coeffs[j] * out[n - j] for j in range(1, min(n, len(coeffs) - 1) + 1))
        out[n] = -s / coeffs[0]
    return out


def _ptilde_values(k: int, l: Fraction) -> list[Fraction]:
    """h-coefficients of ``Ptilde_k(l) = prod_{i<k} (1 - h(-l + i + 1/2))``."""
    return _h_product_coeffs(-(-l + i + HALF) for i in range(k))


def r_tilde_value_series(p: int, m: int, k: int, l, i: Sequence[int]) -> Fraction:
    """``Rtilde_p`` at a point by inverting the h-series of each factor."""
    coeffs = [Fraction(1)]
    for i_j, x in zip(i, _x_args(Fraction(l), i)):
        inv = _inverse_series(_ptilde_values(int(k) + int(i_j), x), p)
        coeffs = _poly_mul(coeffs, inv, p)
    return coeffs[p]


# ---------------------------------------------------------------------------
# Q-polynomials
# ---------------------------------------------------------------------------


def _falling_basis(i_names: Sequence[str], s: Sequence[int], allv) -> MPoly:
    out = MPoly.const(1, allv)
    for name, sj in zip(i_names, s):
        out = out * falling_factorial(MPoly.var(name, allv), sj)
    return out


_q_cache: dict[tuple[int, int], dict[tuple[int, ...], MPoly]] = {}


@lru_cache(maxsize=None)
def _stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


def q_coeffs(p: int, m: int) -> dict[tuple[int, ...], MPoly]:
    """Coefficients ``Q^p_s(k, l)`` of ``R_p`` in the basis ``prod (i_j)_{s_j}``.

    Each monomial ``i^e`` is rewritten as ``sum_s S(e, s) (i)_s`` with
    Stirling numbers of the second kind; the result is certified by
    re-expansion.  :func:`q_coeffs_grid` computes the same table from values
    on an integer grid.
    """
    key = (p, m)
    if key in _q_cache:
        return _q_cache[key]
    R = r_poly(p, m)
    nk = len(("k", "l"))
    acc: dict[tuple[int, ...], dict[tuple, Fraction]] = {}
    for exp, c in R.terms.items():
        kl, ie = exp[:nk], exp[nk:]
        choices = [[(s, _stirling2(e, s)) for s in range(e + 1) if _stirling2(e, s)] for e in ie]
        for combo in itertools.product(*choices):
            svec = tuple(s for s, _ in combo)
            w = c
            for _, st in combo:
                w = w * st
            slot = acc.setdefault(svec, {})
            slot[kl] = slot.get(kl, 0) + w
    out = {s: MPoly(("k", "l"), t) for s, t in acc.items()}
    out = {s: q for s, q in out.items() if not q.is_zero()}
    if not q_reexpansion_check(p, m, out):
        raise ConsistencyError(f"Q^{p} re-expansion mismatch for m={m}")
    with _r_lock:
        _q_cache[key] = out
    return out


def q_coeffs_grid(p: int, m: int) -> dict[tuple[int, ...], MPoly]:
    """Q-table from the values of ``R_p`` on the simplex grid ``|i| <= 2p`` by forward differences."""
    R = r_poly(p, m)
    ivs = _ivars(m)
    N = 2 * p
    grid: dict[tuple[int, ...], MPoly] = {}
    for pt in itertools.product(range(N + 1), repeat=m):
        if sum(pt) > N:
            # total degree <= N only needs the simplex
            continue
        grid[pt] = R.subs(dict(zip(ivs, pt))).with_vars(("k", "l"))
    # Q_s = Delta^s R(0) / s!, one axis at a time
    table = grid
    for axis in range(m):
        new: dict[tuple[int, ...], MPoly] = {}
        for pt in table:
            s = pt[axis]
            acc = MPoly(("k", "l"))
            base = list(pt)
            for j in range(s + 1):
                base[axis] = j
                acc = acc + table[tuple(base)] * ((-1) ** (s - j) * math.comb(s, j))
            new[pt] = acc / math.factorial(s)
        table = new
    return {s: q for s, q in table.items() if not q.is_zero()}


def q_reexpansion_check(p: int, m: int, q: dict | None = None) -> bool:
    if q is None:
        q = q_coeffs(p, m)
    ivs = _ivars(m)
    allv = ("k", "l") + ivs
    total = MPoly(allv)
    for s, c in q.items():
        total = total + c.with_vars(allv) * _falling_basis(ivs, s, allv)
    return total == r_poly(p, m)


def _q_at(p: int, m: int, k, l) -> dict[tuple[int, ...], Fraction]:
    return {s: c.subs({"k": k, "l": l}) for s, c in q_coeffs(p, m).items()}


# ---------------------------------------------------------------------------
# Coefficients of A(k, hbar)
# ---------------------------------------------------------------------------


def acheck_E_direct(m: int, k: int, q: int, p: int, l) -> Fraction:
    """``[h^{q+p}][E_{l-q,l}] A(k)`` from ``Delta^{q+k} P_k^m / (q+k)!``."""
    l = Fraction(l)
    t = q + k
    if t < 0:
        return Fraction(0)
    vals = _delta_numeric(lambda x: _pm_at(m, k, x), l, t)
    e = q + p + k
    c = vals[e] if 0 <= e < len(vals) else Fraction(0)
    return c / (k * math.factorial(t))


def acheck_E_closed(m: int, k: int, q: int, p: int, l) -> Fraction:
    """Same coefficient through the ``Q``-polynomial closed form."""
    if q + k < 0 or p < 0:
        return Fraction(0)
    qs = _q_at(p, m, k, Fraction(l))
    total = Fraction(0)
    for s, c in qs.items():
        sigma = sum(s)
        if sigma > q + k:
            continue
        w = Fraction(1)
        for sj in s:
            w *= falling_factorial(k, sj)
        total += c * w * falling_factorial(m * k - sigma, q + k - sigma) / math.factorial(q + k - sigma)
    return total / k


def acheck_E_coeff(m: int, k: int, q: int, p: int, l) -> Fraction:
    if k < 1:
        raise ValueError("k must be >= 1")
    if q < -k:
        raise ValueError("q must be >= -k")
    if p < 0:
        raise ValueError("p must be >= 0")
    a = acheck_E_closed(m, k, q, p, l)
    b = acheck_E_direct(m, k, q, p, l)
    if a != b:
        raise ConsistencyError(f"E-coefficient routes differ (m={m},k={k},q={q},p={p},l={l}): {a} != {b}")
    return a


def acheck_Id_direct(m: int, k: int, p: int) -> Fraction:
    """``[h^p][Id] A(k)`` from ``Delta^{k-1} P_k^m(-1/2) / k!``."""
    vals = _delta_numeric(lambda x: _pm_at(m, k, x), -HALF, k - 1)
    e = p + k
    c = vals[e] if 0 <= e < len(vals) else Fraction(0)
    return c / (k * math.factorial(k))


def acheck_Id_closed(m: int, k: int, p: int) -> Fraction:
    qs = _q_at(p + 1, m, k, -HALF)
    total = Fraction(0)
    for s, c in qs.items():
        sigma = sum(s)
        if sigma > k - 1:
            continue
        w = Fraction(1)
        for sj in s:
            w *= falling_factorial(k, sj)
        total += c * w * falling_factorial(m * k - sigma, k - 1 - sigma) / math.factorial(k - 1 - sigma)
    return total / (k * k)


def acheck_Id_coeff(m: int, k: int, p: int) -> Fraction:
    if k < 1:
        raise ValueError("k must be >= 1")
    if p < -1:
        return Fraction(0)
    a = acheck_Id_closed(m, k, p)
    b = acheck_Id_direct(m, k, p)
    if a != b:
        raise ConsistencyError(f"Id-coefficient routes differ (m={m},k={k},p={p}): {a} != {b}")
    return a


# ---------------------------------------------------------------------------
# Polynomial numerators S and S^Id
# ---------------------------------------------------------------------------


def a_prefactor(m: int, k: int) -> Fraction:
    """``(mk-m)! / (k! (mk-k-1)!)``."""
    if m < 2:
        raise ValueError("the prefactor needs m >= 2")
    return Fraction(math.factorial(m * k - m), math.factorial(k) * math.factorial(m * k - k - 1))


def pole_product(m: int, top: int, k) -> Fraction:
    """``prod_{m <= j <= top, m does not divide j} (k - j/m)``."""
    out = Fraction(1) if not isinstance(k, MPoly) else MPoly.const(1, k.vars)
    for j in range(m, top + 1):
        if j % m:
            out = out * (k - Fraction(j, m))
    return out


def _fit_k(values, start: int, degree_guess: int, cap: int, holdout: int = 3):
    """Interpolate a polynomial in k from ``values(k)`` with escalation.

    Returns (poly, observed degree, number of points used).
    """
    deg = degree_guess
    cache: dict[int, Fraction] = {}

    def val(k):
        if k not in cache:
            cache[k] = values(k)
        return cache[k]

    while deg <= cap:
        ks = list(range(start, start + deg + 2))
        poly = interpolate_univariate(ks, [val(k) for k in ks], "k")
        extra = range(start + deg + 2, start + deg + 2 + holdout)
        if all(poly.subs({"k": k}) == val(k) for k in extra):
            return poly, poly.degree("k") if poly.terms else -1, deg
        deg += 1
    raise InterpolationFailure(f"no polynomial of degree <= {cap} fits")


def s_numerator_k(m: int, p: int, q: int, l, degree_cap: int | None = None) -> tuple[MPoly, int]:
    """``S_{p,l,q}(k)`` at fixed numeric l; returns (polynomial in k, observed degree)."""
    l = Fraction(l)

    def value(k):
        coef = acheck_E_closed(m, k, q, p, l)
        return coef * pole_product(m, 2 * p - 1, Fraction(k)) * rising_factorial(k + 1, q) / a_prefactor(m, k)

    cap = degree_cap if degree_cap is not None else 6 * p + q + 2 * m + 4
    poly, deg, _ = _fit_k(value, 1, 6 * p + q, cap)
    return poly, deg


def s_numerator(m: int, p: int, q: int, degree_cap: int | None = None) -> MPoly:
    """``S_{p,l,q}(k)`` as a polynomial in (k, l).

    Built from univariate fits in k at ``2p + 4`` half-integer values of l
    (degree in l is at most ``2p``), then validated at further l.
    """
    if p < 0 or q < 1:
        raise ValueError("need p >= 0 and q >= 1")
    npts = 2 * p + 1
    ls = [Fraction(2 * j + 1, 2) for j in range(-(npts // 2) - 1, npts + 2)]
    fits = {l: s_numerator_k(m, p, q, l, degree_cap)[0] for l in ls}
    kdeg = max(f.degree("k") for f in fits.values())
    fit_ls, check_ls = ls[:npts], ls[npts:]
    total = MPoly(("k", "l"))
    for d in range(kdeg + 1):
        ys = [fits[l].coefficient((d,)) if "k" in fits[l].vars else (fits[l].coefficient((0,)) if d == 0 else 0) for l in fit_ls]
        poly_l = interpolate_univariate(fit_ls, ys, "l")
        total = total + poly_l.with_vars(("k", "l")) * (MPoly.var("k", ("k", "l")) ** d)
    for l in check_ls:
        if total.subs({"l": l}).with_vars(("k",)) != fits[l].with_vars(("k",)):
            raise InterpolationFailure(f"S_{p},l,{q} is not polynomial of degree <= {2 * p} in l")
    return total


def s_id_numerator(m: int, p: int, degree_cap: int = 60) -> MPoly:
    """``S^Id_p(k)``: Id-coefficient times ``k^2 (mk-k+1) prod (k - j/m)`` over the prefactor."""
    if p < -1:
        raise ValueError("p must be >= -1")

    def value(k):
        coef = acheck_Id_closed(m, k, p)
        return coef * pole_product(m, 2 * p + 1, Fraction(k)) * k * k * (m * k - k + 1) / a_prefactor(m, k)

    poly, _, _ = _fit_k(value, 1, max(6 * p + 6, 2), degree_cap)
    return poly


def rho(p: int, m: int) -> RatFun:
    """``rho_p(k) = sum_sigma (k-1)_sigma / (mk)_sigma * V_p^sigma(k, -1/2, k, ..., k)``."""
    K = MPoly.var("k")
    total = RatFun.from_number(0)
    by_sigma: dict[int, MPoly] = {}
    for s, c in q_coeffs(p, m).items():
        v = c.subs({"l": -HALF})
        v = v if isinstance(v, MPoly) else MPoly.const(v, ("k",))
        w = MPoly.const(1, ("k",))
        for sj in s:
            w = w * falling_factorial(K, sj)
        sigma = sum(s)
        by_sigma[sigma] = by_sigma.get(sigma, MPoly(("k",))) + v.with_vars(("k",)) * w
    for sigma, v in by_sigma.items():
        num = falling_factorial(K - 1, sigma)
        den = falling_factorial(K * m, sigma)
        total = total + RatFun(num * v, den)
    return total


def s_id_from_rho(p: int, m: int) -> RatFun:
    """``rho_p(k) * k * m (mk-1)...(mk-m+1) / (m-1) * prod_{m<=j<=2p-1} (k - j/m)``."""
    K = MPoly.var("k")
    factor = K * m
    for i in range(1, m):
        factor = factor * (K * m - i)
    factor = factor * pole_product(m, 2 * p - 1, K) / (m - 1)
    return rho(p, m) * RatFun(factor)


# ---------------------------------------------------------------------------
# Euler operator identity
# ---------------------------------------------------------------------------


def euler_identity_symbolic(m: int, p: int) -> MPoly:
    """``[h^p]`` of ``(E R(h; k, -1/2, i))|_{i=k}`` as a polynomial in k.

    ``E = sum_j i_j Delta_{i_j}``; the expected value is ``binom(m,2) k^2`` at
    p = 1 and zero otherwise.
    """
    R = r_poly(p, m).subs({"l": -HALF})
    ivs = _ivars(m)
    total = MPoly(R.vars)
    for v in ivs:
        shifted = R.shift(v, -1).with_vars(R.vars)
        total = total + MPoly.var(v, R.vars) * (R - shifted)
    K = MPoly.var("k")
    out = total.subs({v: K for v in ivs})
    return out.with_vars(("k",)) if isinstance(out, MPoly) else MPoly.const(out, ("k",))


def _r_full_h(m: int, k: int, l: Fraction, i: Sequence[int]) -> list[Fraction]:
    coeffs = [Fraction(1)]
    for i_j, x in zip(i, _x_args(l, i)):
        coeffs = _poly_mul(coeffs, _p_values(k - i_j, x))
    return coeffs


def delta_r_check(m: int, k: int, i: Sequence[int], j: int) -> bool:
    """Backward difference of ``R(h; k, -1/2, i)`` in ``i_j`` (1-based) against its product formula.

    Both sides are multiplied by ``prod_{q<j} (1 + h(-i_{q+1} - ... - i_m))`` so
    the comparison is between polynomials in h.
    """
    if not 1 <= j <= m or len(i) != m:
        raise ValueError("need len(i) == m and 1 <= j <= m")

    def tail(q: int) -> int:
        return sum(i[q - 1:])

    r0 = _r_full_h(m, k, -HALF, i)
    lowered = list(i)
    lowered[j - 1] -= 1
    r1 = _r_full_h(m, k, -HALF, lowered)
    den = [Fraction(1)]
    num = [Fraction(1), Fraction(k - tail(j))]
    for q in range(1, j):
        den = _poly_mul(den, [Fraction(1), Fraction(-tail(q + 1))])
        num = _poly_mul(num, [Fraction(1), Fraction(k - tail(q))])
    diff = [a - b for a, b in itertools.zip_longest(r0, r1, fillvalue=Fraction(0))]
    lhs = _poly_mul(diff, den)
    factor = [a - b for a, b in itertools.zip_longest(den, num, fillvalue=Fraction(0))]
    rhs = _poly_mul(factor, r0)
    n = max(len(lhs), len(rhs))
    lhs += [Fraction(0)] * (n - len(lhs))
    rhs += [Fraction(0)] * (n - len(rhs))
    return lhs == rhs


def euler_identity_concrete(m: int, k: int) -> list[Fraction]:
    """The full h-polynomial ``(E R)|_{i=k}`` at a concrete positive integer k."""
    base = [k] * m
    r0 = _r_full_h(m, k, -HALF, base)
    acc: list[Fraction] = []
    for j in range(m):
        lowered = list(base)
        lowered[j] -= 1
        r1 = _r_full_h(m, k, -HALF, lowered)
        n = max(len(r0), len(r1), len(acc))
        acc = [
            (acc[t] if t < len(acc) else 0)
            + k * ((r0[t] if t < len(r0) else 0) - (r1[t] if t < len(r1) else 0))
            for t in range(n)
        ]
    while acc and acc[-1] == 0:
        acc.pop()
    return acc


def multinomial_falling_check(ks: Sequence[int], t: int) -> bool:
    lhs = Fraction(0)
    for comp in _compositions(t, len(ks)):
        term = Fraction(math.factorial(t))
        for kj, ij in zip(ks, comp):
            term = term * falling_factorial(kj, ij) / math.factorial(ij)
        lhs += term
    return lhs == falling_factorial(sum(ks), t)


# ---------------------------------------------------------------------------
# The dagger operator and the residue relation
# ---------------------------------------------------------------------------


def _ptilde_inv_m(m: int, k: int, l: Fraction, order: int) -> list[Fraction]:
    inv = _inverse_series(_ptilde_values(k, l), order)
    out = [Fraction(1)]
    for _ in range(m):
        out = _poly_mul(out, inv, order)
    return out


def adagger_E_direct(m: int, r: int, q: int, p: int, l) -> Fraction:
    """``[h^{q+p}][E_{l-q,l}] A^dagger(r)`` from ``Delta^{q-r} Ptilde_r^{-m} / (q-r)!``."""
    t = q - r
    if t < 0:
        return Fraction(0)
    e = q + p - r
    if e < 0:
        return Fraction(0)
    vals = _delta_numeric(lambda x: _ptilde_inv_m(m, r, x, e), Fraction(l), t)
    return vals[e] / (r * math.factorial(t))


def adagger_E_closed(m: int, r: int, q: int, p: int, l) -> Fraction:
    """Closed form with ``Q^p(-r, l)`` and rising factorials."""
    if q < r:
        return Fraction(0)
    total = Fraction(0)
    for s, c in q_coeffs(p, m).items():
        sigma = sum(s)
        if sigma > q - r:
            continue
        w = c.subs({"k": -r, "l": Fraction(l)})
        for sj in s:
            w *= rising_factorial(r, sj)
        total += w * rising_factorial(m * r + sigma, q - r - sigma) / math.factorial(q - r - sigma)
    return (-1) ** (q - r) * total / r


def adagger_E_coeff(m: int, r: int, q: int, p: int, l) -> Fraction:
    if r < 1:
        raise ValueError("r must be >= 1")
    a = adagger_E_closed(m, r, q, p, l)
    b = adagger_E_direct(m, r, q, p, l)
    if a != b:
        raise ConsistencyError(f"dagger routes differ (m={m},r={r},q={q},p={p},l={l}): {a} != {b}")
    return a


def residue_constant(m: int, r: int) -> Fraction:
    """``c(r) = (-1)^m (mr - r + 1)^{(m + r - 1)} / r!`` as read from the residue computation."""
    return (-1) ** m * rising_factorial(m * r - r + 1, m + r - 1) / math.factorial(r)


def residue_constant_observed(m: int, r: int) -> Fraction:
    """The constant that actually relates the two sides: ``-r c(r)``.

    The residue at ``k = -r`` of ``1/(k (k+1) ... (k+N))`` carries ``1/r!``
    while the dagger coefficient already contains ``1/r``, and the sign of
    ``(-r)_s`` versus ``r^{(s)}`` flips once more.
    """
    return (-1) ** (m + 1) * rising_factorial(m * r - r + 1, m + r - 1) / math.factorial(r - 1)


def a_rescaled_ratfun(m: int, p: int, q: int, l) -> RatFun:
    """``[h^{q+p}][E_{l-q,l}]`` of the prefactor-free operator as a rational function of k."""
    S, _ = s_numerator_k(m, p, q, l)
    den = pole_product(m, 2 * p - 1, _K) * rising_factorial(_K + 1, q)
    den = den if isinstance(den, MPoly) else MPoly.const(den, ("k",))
    return RatFun(S.with_vars(("k",)), den.with_vars(("k",)))


def residue_relation_check(
    m: int, r: int, q: int, p: int, l, constant: str = "stated"
) -> tuple[bool, Fraction, Fraction]:
    """Compare ``Res_{k=-r}`` of the rescaled coefficient with a constant times the dagger coefficient.

    ``constant="stated"`` uses :func:`residue_constant`; ``"observed"`` uses
    :func:`residue_constant_observed`.  Returns ``(equal, lhs, rhs)``.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if constant not in ("stated", "observed"):
        raise ValueError("constant must be 'stated' or 'observed'")
    lhs = a_rescaled_ratfun(m, p, q, l).residue(-r)
    c = residue_constant(m, r) if constant == "stated" else residue_constant_observed(m, r)
    rhs = c * adagger_E_coeff(m, r, q, p, l)
    return lhs == rhs, lhs, rhs
