"""Spectral-curve side: the coordinate ``X = z/(1+z)^m``, xi-functions and the space Xi^d.

Everything is a truncated power series in ``X`` with exact rational
coefficients.  The module provides

* ``z_series``: the compositional inverse ``z(X)``,
* ``xi_series``: expansions of ``xi_i = z^i / ((1+z)^{m-1} ((m-1)z - 1))``,
* ``d_operator``: ``D = d/dx = -X^2 d/dX``,
* ``xi_from_poly``: the element of Xi^d whose ``X^k`` coefficient equals
  ``prefactor(k) P(k) / prod (k - j/m)``, found by an exact linear solve,
* ``w_assemble``: tensors of such elements reproducing a quasi-polynomial form,
* checks of the two unstable expansions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .exactmath import MPoly, determinant, interpolate_univariate, rat_str, solve_exact

__all__ = [
    "XSeries",
    "XiElement",
    "XiMismatch",
    "z_series",
    "x_of_z_series",
    "compose",
    "xi_closed_coefficient",
    "xi_stated_coefficient",
    "xi_series_direct",
    "xi_series",
    "d_operator",
    "xi_prefactor",
    "xi_pole_product",
    "xi_target",
    "xi_basis_series",
    "xi_from_poly",
    "xi_poly_of",
    "dxi_identity_check",
    "cofactor_polys",
    "cofactor_resultant",
    "cofactor_resultant_sylvester",
    "WTensor",
    "minimal_d",
    "w_assemble",
    "omega01_check",
    "omega02_check",
    "elogz_series",
]


class XiMismatch(AssertionError):
    """Two computations that must agree produced different coefficients."""


# ---------------------------------------------------------------------------
# Truncated power series in X
# ---------------------------------------------------------------------------


class XSeries:
    """Power series ``sum_{k=0}^{order} c_k X^k`` known exactly up to ``order``."""

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Iterable, order: int):
        if order < 0:
            raise ValueError("order must be >= 0")
        c = [Fraction(x) for x in coeffs][: order + 1]
        c += [Fraction(0)] * (order + 1 - len(c))
        self.coeffs = c
        self.order = order

    @classmethod
    def const(cls, c, order: int) -> "XSeries":
        return cls([c], order)

    @classmethod
    def monomial(cls, k: int, order: int, c=1) -> "XSeries":
        out = [Fraction(0)] * (order + 1)
        if k <= order:
            out[k] = Fraction(c)
        return cls(out, order)

    def __getitem__(self, k: int) -> Fraction:
        if k < 0:
            return Fraction(0)
        if k > self.order:
            raise KeyError(f"X^{k} lies beyond the truncation order {self.order}")
        return self.coeffs[k]

    def valuation(self) -> int | None:
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def _coerce(self, other) -> "XSeries":
        if isinstance(other, XSeries):
            return other
        return XSeries.const(other, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        n = min(self.order, other.order)
        return XSeries([self.coeffs[k] + other.coeffs[k] for k in range(n + 1)], n)

    __radd__ = __add__

    def __neg__(self):
        return XSeries([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, XSeries):
            c = Fraction(other)
            return XSeries([c * x for x in self.coeffs], self.order)
        n = min(self.order, other.order)
        out = [Fraction(0)] * (n + 1)
        for i, a in enumerate(self.coeffs[: n + 1]):
            if a:
                for j in range(n + 1 - i):
                    b = other.coeffs[j]
                    if b:
                        out[i + j] += a * b
        return XSeries(out, n)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = XSeries.const(1, self.order)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def inverse(self) -> "XSeries":
        a0 = self.coeffs[0]
        if a0 == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        out = [Fraction(0)] * (self.order + 1)
        out[0] = 1 / a0
        for k in range(1, self.order + 1):
            s = sum(self.coeffs[j] * out[k - j] for j in range(1, k + 1))
            out[k] = -s / a0
        return XSeries(out, self.order)

    def __truediv__(self, other):
        if isinstance(other, XSeries):
            return self * other.inverse()
        return self * (1 / Fraction(other))

    def derivative(self) -> "XSeries":
        """d/dX; the result is known to ``order - 1``."""
        n = max(self.order - 1, 0)
        return XSeries([k * self.coeffs[k] for k in range(1, self.order + 1)], n)

    def truncate(self, order: int) -> "XSeries":
        return XSeries(self.coeffs, min(order, self.order))

    def __eq__(self, other):
        if not isinstance(other, XSeries):
            return NotImplemented
        n = min(self.order, other.order)
        return self.coeffs[: n + 1] == other.coeffs[: n + 1]

    def __repr__(self):
        terms = [f"{rat_str(c)}*X^{k}" for k, c in enumerate(self.coeffs) if c]
        return f"XSeries({' + '.join(terms) or '0'}, order={self.order})"


def compose(outer: Sequence, inner: XSeries) -> XSeries:
    """``sum_j outer[j] inner^j`` for an inner series without constant term."""
    if inner[0] != 0:
        raise ValueError("composition needs an inner series of positive valuation")
    n = inner.order
    out = XSeries.const(0, n)
    power = XSeries.const(1, n)
    for j, a in enumerate(outer):
        if j > n:
            break
        if a:
            out = out + power * a
        power = power * inner
    return out


# ---------------------------------------------------------------------------
# The curve coordinate
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _z_coeffs(m: int, order: int) -> tuple[Fraction, ...]:
    # Lagrange inversion of X = z / (1+z)^m: [X^k] z = binom(mk, k-1) / k
    out = [Fraction(0)]
    for k in range(1, order + 1):
        out.append(Fraction(math.comb(m * k, k - 1), k))
    return tuple(out)


def z_series(m: int, order: int) -> XSeries:
    """The inverse series ``z(X)`` of ``X = z/(1+z)^m``."""
    if order < 1:
        raise ValueError("order must be >= 1")
    return XSeries(_z_coeffs(m, order), order)


def x_of_z_series(m: int, order: int) -> XSeries:
    """``X(z) = z/(1+z)^m`` as a series in ``z`` (reusing the XSeries container)."""
    coeffs = [Fraction(0)] + [Fraction((-1) ** (k - 1) * math.comb(m + k - 2, k - 1)) for k in range(1, order + 1)]
    return XSeries(coeffs, order)


def _rational_in_z(num: Sequence[int], den: Sequence[int], order: int) -> list[Fraction]:
    """Taylor coefficients of ``num(z)/den(z)`` at ``z = 0``."""
    n = XSeries(num, order)
    d = XSeries(den, order)
    return (n / d).coeffs


def _poly_pow(base: Sequence[int], e: int) -> list[int]:
    out = [1]
    for _ in range(e):
        nxt = [0] * (len(out) + len(base) - 1)
        for i, a in enumerate(out):
            for j, b in enumerate(base):
                nxt[i + j] += a * b
        out = nxt
    return out


# ---------------------------------------------------------------------------
# xi-functions
# ---------------------------------------------------------------------------


def xi_closed_coefficient(m: int, i: int, k: int) -> Fraction:
    """``[X^k] xi_i = -binom(mk - m, k - i)``.

    The sign follows from the residue computation: ``X^{-k-1} dX = -x^{k-1} dx``.
    """
    return -_gbinom(m * k - m, k - i)


def xi_stated_coefficient(m: int, i: int, k: int) -> Fraction:
    """The unsigned binomial ``binom(mk - m, k - i)``; differs from the expansion by a sign."""
    return _gbinom(m * k - m, k - i)


def _gbinom(a: int, b: int) -> Fraction:
    # generalized binomial with integer top, zero for negative bottom
    if b < 0:
        return Fraction(0)
    return Fraction(math.prod(a - t for t in range(b)), math.factorial(b))


def xi_series_direct(m: int, i: int, order: int) -> XSeries:
    """Expand the rational function ``xi_i(z)`` and substitute ``z = z(X)``."""
    if not 0 <= i <= m - 1:
        raise ValueError(f"i must lie in 0..{m - 1}")
    num = [0] * i + [1]
    den = _poly_mul_int(_poly_pow([1, 1], m - 1), [-1, m - 1])
    taylor = _rational_in_z(num, den, order)
    return compose(taylor, z_series(m, order))


def _poly_mul_int(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def xi_series(m: int, i: int, order: int) -> XSeries:
    """Expansion of ``xi_i``; the direct and closed paths are compared before returning."""
    direct = xi_series_direct(m, i, order)
    for k in range(order + 1):
        closed = xi_closed_coefficient(m, i, k)
        if direct[k] != closed:
            raise XiMismatch(f"xi_{i} at m={m}: X^{k} direct {direct[k]} != closed {closed}")
    return direct


def d_operator(s: XSeries) -> XSeries:
    """``D = -X^2 d/dX``: ``X^k -> -k X^{k+1}``; output order is input order + 1."""
    out = [Fraction(0)] * (s.order + 2)
    for k in range(1, s.order + 1):
        out[k + 1] = -k * s.coeffs[k]
    return XSeries(out, s.order + 1)


# ---------------------------------------------------------------------------
# The space Xi^d
# ---------------------------------------------------------------------------


def xi_prefactor(m: int, k: int) -> Fraction:
    """``(mk - m)! / (k! (mk - k - 1)!)`` for integer ``k >= 1``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return Fraction(math.factorial(m * k - m), math.factorial(k) * math.factorial(m * k - k - 1))


def xi_pole_product(m: int, lo: int, hi: int, k) -> Fraction:
    """``prod_{lo <= j <= hi, m does not divide j} (k - j/m)``."""
    out = Fraction(1)
    for j in range(lo, hi + 1):
        if j % m:
            out *= Fraction(k) - Fraction(j, m)
    return out


def _xi_poles(m: int, d: int, k) -> Fraction:
    # m < j < m(d+1)
    return xi_pole_product(m, m + 1, m * (d + 1) - 1, k)


def xi_target(m: int, d: int, P: MPoly, k: int) -> Fraction:
    """The prescribed coefficient ``prefactor(k) P(k) / prod (k - j/m)`` at integer ``k``."""
    return xi_prefactor(m, k) * Fraction(_eval_k(P, k)) / _xi_poles(m, d, k)


def _eval_k(P: MPoly, k) -> Fraction:
    used = P.used_vars()
    if not used:
        return P.coefficient((0,) * len(P.vars))
    if len(used) != 1:
        raise ValueError(f"expected a univariate polynomial, got variables {used}")
    return P.subs({used[0]: k})


@lru_cache(maxsize=None)
def _basis_coeffs(m: int, a: int, i: int, order: int) -> tuple[Fraction, ...]:
    s = xi_series(m, i, order)
    for _ in range(a):
        s = d_operator(s).truncate(order)
    return tuple(s.coeffs)


def xi_basis_series(m: int, a: int, i: int, order: int) -> XSeries:
    """Expansion of ``D^a xi_i`` to ``order``."""
    return XSeries(_basis_coeffs(m, a, i, order), order)


def _basis_labels(m: int, d: int) -> list[tuple[int, int]]:
    return [(a, i) for a in range(d + 1) for i in range(m)]


@dataclass
class XiElement:
    """``sum c_{a,i} D^a xi_i`` in Xi^d."""

    m: int
    d: int
    coeffs: dict[tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {k: Fraction(v) for k, v in self.coeffs.items() if v}
        for a, i in self.coeffs:
            if not (0 <= a <= self.d and 0 <= i < self.m):
                raise ValueError(f"basis label {(a, i)} outside Xi^{self.d} for m={self.m}")

    @property
    def dimension(self) -> int:
        return self.m * (self.d + 1)

    def is_zero(self) -> bool:
        return not self.coeffs

    def series(self, order: int) -> XSeries:
        out = XSeries.const(0, order)
        for (a, i), c in self.coeffs.items():
            out = out + xi_basis_series(self.m, a, i, order) * c
        return out

    def coefficient(self, k: int) -> Fraction:
        return self.series(k)[k]

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "d": self.d,
            "terms": [[a, i, rat_str(c)] for (a, i), c in sorted(self.coeffs.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "XiElement":
        return cls(data["m"], data["d"], {(a, i): Fraction(c) for a, i, c in data["terms"]})


def xi_from_poly(m: int, d: int, P: MPoly, extra: int = 3) -> XiElement:
    """The unique element of Xi^d with ``[X^k] = prefactor(k) P(k) / prod_{m<j<m(d+1)} (k - j/m)``.

    Solves the ``m(d+1)``-square system at ``k = 1..m(d+1)`` and verifies the
    next ``extra`` coefficients.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    if d < 0:
        raise ValueError("d must be >= 0")
    N = m * (d + 1)
    if not P.is_zero() and P.total_degree() > N - 1:
        raise ValueError(f"deg P = {P.total_degree()} exceeds m(d+1)-1 = {N - 1}")
    labels = _basis_labels(m, d)
    order = N + extra
    cols = [xi_basis_series(m, a, i, order) for a, i in labels]
    rows = [[col[k] for col in cols] for k in range(1, N + 1)]
    rhs = [xi_target(m, d, P, k) for k in range(1, N + 1)]
    if determinant(rows) == 0:
        raise ArithmeticError(f"singular Xi^{d} system for m={m}")
    sol = solve_exact(rows, rhs)
    elem = XiElement(m, d, dict(zip(labels, sol)))
    series = elem.series(order)
    for k in range(1, order + 1):
        want = xi_target(m, d, P, k)
        if series[k] != want:
            raise XiMismatch(f"Xi^{d} element for m={m} fails at X^{k}: {series[k]} != {want}")
    return elem


def xi_poly_of(elem: XiElement, var: str = "k") -> MPoly:
    """Recover ``P`` from an element's own expansion by interpolation at ``k = 1..m(d+1)``."""
    m, d = elem.m, elem.d
    N = m * (d + 1)
    s = elem.series(N)
    ks = list(range(1, N + 1))
    ys = [s[k] * _xi_poles(m, d, k) / xi_prefactor(m, k) for k in ks]
    return interpolate_univariate(ks, ys, var)


def dxi_identity_check(m: int, d: int, P: MPoly, kmax: int = 12) -> list[int]:
    """Check the effect of ``D`` on the normal form; returns the failing ``k``.

    If ``xi`` has data ``P`` in Xi^d then ``D xi`` has data
    ``Q(k) = -m^{-m} (m-1)^{m-1} P(k-1) prod_{i=0}^{m-1} (k - i/(m-1))`` in Xi^{d+1}.
    """
    elem = xi_from_poly(m, d, P)
    ds = d_operator(elem.series(kmax)).truncate(kmax)
    c = -Fraction((m - 1) ** (m - 1), m**m)
    bad = []
    for k in range(1, kmax + 1):
        q = c * Fraction(_eval_k(P, k - 1)) * math.prod(Fraction(k) - Fraction(i, m - 1) for i in range(m))
        want = xi_prefactor(m, k) * q / _xi_poles(m, d + 1, k)
        if ds[k] != want:
            bad.append(k)
    return bad


def cofactor_polys(m: int, d: int, var: str = "k") -> tuple[MPoly, MPoly]:
    """The two cofactors of the basis change from Xi^d to Xi^{d+1}.

    ``A = prod_{i=(d+1)m+1}^{(d+2)m-1} (k - i/m)`` (degree m-1) and
    ``B = prod_{i=0}^{m-1} (k - i/(m-1))`` (degree m).
    """
    k = MPoly.var(var)
    A = MPoly.const(1, (var,))
    for i in range((d + 1) * m + 1, (d + 2) * m):
        A = A * (k - Fraction(i, m))
    B = MPoly.const(1, (var,))
    for i in range(m):
        B = B * (k - Fraction(i, m - 1))
    return A, B


def cofactor_resultant(m: int, d: int) -> Fraction:
    """Resultant of the monic cofactors as a product of root differences."""
    out = Fraction(1)
    for i in range((d + 1) * m + 1, (d + 2) * m):
        for j in range(m):
            out *= Fraction(i, m) - Fraction(j, m - 1)
    return out


def cofactor_resultant_sylvester(m: int, d: int) -> Fraction:
    """The same resultant via the Sylvester determinant."""
    A, B = cofactor_polys(m, d)
    a = list(reversed(A.univariate_coeffs("k")))
    b = list(reversed(B.univariate_coeffs("k")))
    p, q = len(a) - 1, len(b) - 1
    size = p + q
    rows = []
    for r in range(q):
        rows.append([Fraction(0)] * r + a + [Fraction(0)] * (size - r - len(a)))
    for r in range(p):
        rows.append([Fraction(0)] * r + b + [Fraction(0)] * (size - r - len(b)))
    return determinant(rows)


# ---------------------------------------------------------------------------
# Assembling W_{g,n}
# ---------------------------------------------------------------------------


def minimal_d(m: int, top: int, degree: int) -> int:
    """Smallest ``d`` with ``m(d+1) > top`` whose degree budget fits the padded numerator."""
    d = 0
    while True:
        N = m * (d + 1)
        if N > top:
            pad = sum(1 for j in range(max(top, m) + 1, N) if j % m)
            if degree + pad <= N - 1:
                return d
        d += 1


def _padded_poly(m: int, top: int, d: int, exponent: int, var: str = "k") -> MPoly:
    # k^e times the poles of Xi^d that the quasi-polynomial denominator lacks
    k = MPoly.var(var)
    out = k**exponent if exponent else MPoly.const(1, (var,))
    for j in range(max(top, m) + 1, m * (d + 1)):
        if j % m:
            out = out * (k - Fraction(j, m))
    return out


@dataclass
class WTensor:
    """``sum_t c_t xi_{t,1}(X_1) ... xi_{t,n}(X_n)`` with every factor in Xi^d."""

    m: int
    d: int
    n: int
    terms: list[tuple[Fraction, tuple[XiElement, ...]]]
    minimal_d: int

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, mu: Sequence[int]) -> Fraction:
        if len(mu) != self.n:
            raise ValueError(f"expected {self.n} exponents")
        top = max(mu)
        cache: dict[int, XSeries] = {}
        out = Fraction(0)
        for c, factors in self.terms:
            prod = Fraction(c)
            for elem, k in zip(factors, mu):
                s = cache.get(id(elem))
                if s is None:
                    s = elem.series(top)
                    cache[id(elem)] = s
                prod *= s[k]
                if not prod:
                    break
            out += prod
        return out

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "d": self.d,
            "n": self.n,
            "minimal_d": self.minimal_d,
            "terms": [[rat_str(c), [f.to_json() for f in fs]] for c, fs in self.terms],
        }


def w_assemble(form, d: int | None = None) -> WTensor:
    """Realize a quasi-polynomial form as a tensor of Xi^d elements.

    ``form`` needs attributes ``m``, ``g``, ``n`` and ``poly`` (an MPoly in the
    part variables).  Each monomial ``prod mu_i^{e_i}`` maps to a product of
    univariate elements whose data is ``k^{e_i}`` padded by the extra poles.
    """
    m, g, n, poly = form.m, form.g, form.n, form.poly
    top = 4 * g - 4 + 2 * n - 1
    names = list(poly.vars)
    if len(names) != n:
        raise ValueError(f"form has {len(names)} variables, expected {n}")
    max_deg = max((poly.degree(v) for v in names), default=0) if not poly.is_zero() else 0
    dmin = minimal_d(m, top, max_deg)
    if d is None:
        d = dmin
    elif d < dmin:
        raise ValueError(f"d={d} is below the minimal admissible {dmin}")
    univariate: dict[int, XiElement] = {}

    def elem(e: int) -> XiElement:
        if e not in univariate:
            univariate[e] = xi_from_poly(m, d, _padded_poly(m, top, d, e))
        return univariate[e]

    terms = []
    for exp, c in sorted(poly.terms.items()):
        terms.append((Fraction(c), tuple(elem(e) for e in exp)))
    return WTensor(m, d, n, terms, dmin)


# ---------------------------------------------------------------------------
# Unstable expansions
# ---------------------------------------------------------------------------


def omega01_check(m: int, order: int, values=None) -> dict:
    """Compare ``k b_{0,k}`` with ``[X^k] z`` and the two-binomial form for ``k <= order``.

    ``values(k)`` supplies ``b_{0,(k)}``; defaults to the closed one-point formula.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    if values is None:
        from .permoracle import unstable_onepoint

        def values(k):
            return unstable_onepoint(m, k)

    z = _z_by_iteration(m, order)
    failures = []
    for k in range(1, order + 1):
        binoms = math.comb(m * k, k - 1) - m * _comb0(m * k - 1, k - 2)
        lhs = k * Fraction(values(k))
        if not (lhs == z[k] == binoms):
            failures.append({"k": k, "k_b": rat_str(lhs), "z": rat_str(z[k]), "binomials": binoms})
    return {"m": m, "order": order, "ok": not failures, "failures": failures}


def _comb0(a: int, b: int) -> int:
    return math.comb(a, b) if b >= 0 else 0


def _z_by_iteration(m: int, order: int) -> XSeries:
    """``z = X (1+z)^m`` solved by fixed-point iteration; independent of Lagrange inversion."""
    X = XSeries.monomial(1, order)
    z = XSeries.const(0, order)
    for _ in range(order):
        z = X * (z + 1) ** m
    return z


def elogz_series(m: int, order: int) -> dict[tuple[int, int], Fraction]:
    """Mixed coefficients of ``E log((z_1 - z_2)/(X_1 - X_2))`` for ``1 <= k_1, k_2 <= order``.

    Computed from the bivariate divided difference of ``z(X)`` and its
    logarithm; no closed form is used.
    """
    N = 2 * order
    # total degree N of the quotient needs z up to X^{N+1}
    z = _z_by_iteration(m, N + 1)
    # (z(X1) - z(X2)) / (X1 - X2) = sum_k z_k h_{k-1}(X1, X2)
    u = [[Fraction(0)] * (N + 1) for _ in range(N + 1)]
    for k in range(1, N + 2):
        for a in range(k):
            u[a][k - 1 - a] += z[k]
    # divide by the constant term (= 1) and take log(1 + v)
    c0 = u[0][0]
    v = [[x / c0 for x in row] for row in u]
    v[0][0] = Fraction(0)
    log = [[Fraction(0)] * (N + 1) for _ in range(N + 1)]
    power = [[Fraction(int(a == 0 and b == 0)) for b in range(N + 1)] for a in range(N + 1)]
    for j in range(1, N + 1):
        power = _bimul(power, v, N)
        sign = Fraction((-1) ** (j + 1), j)
        for a in range(N + 1):
            for b in range(N + 1 - a):
                if power[a][b]:
                    log[a][b] += sign * power[a][b]
    return {(a, b): (a + b) * log[a][b] for a in range(1, order + 1) for b in range(1, order + 1)}


def _bimul(x, y, N):
    out = [[Fraction(0)] * (N + 1) for _ in range(N + 1)]
    for a in range(N + 1):
        for b in range(N + 1 - a):
            xv = x[a][b]
            if not xv:
                continue
            for c in range(N + 1 - a - b):
                for e in range(N + 1 - a - b - c):
                    yv = y[c][e]
                    if yv:
                        out[a + c][b + e] += xv * yv
    return out


def _ab_route(m: int, order: int) -> dict[tuple[int, int], Fraction]:
    """``E log(z_1 - z_2) = A(z_1)A(z_2) - m B(z_1)B(z_2)`` with ``A = (1+z)/(1+z-mz)``, ``B = z/(1+z-mz)``."""
    z = z_series(m, order)
    den = (z * (1 - m) + 1).inverse()
    A = (z + 1) * den
    B = z * den
    return {(a, b): A[a] * A[b] - m * B[a] * B[b] for a in range(1, order + 1) for b in range(1, order + 1)}


def omega02_check(m: int, order: int, values=None) -> dict:
    """Verify the two-point identity coefficientwise for ``1 <= k_1, k_2 <= order``.

    Three quantities must coincide: the log series, the A/B product and the
    binomial expression; they must also equal ``(k_1 + k_2) b_{0,(k_1,k_2)}``.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    if values is None:
        from .permoracle import unstable_twopoint

        def values(k1, k2):
            return unstable_twopoint(m, k1, k2)

    log_route = elogz_series(m, order)
    ab = _ab_route(m, order)
    failures = []
    for k1 in range(1, order + 1):
        for k2 in range(1, order + 1):
            binoms = math.comb(m * k1, k1) * math.comb(m * k2, k2) - m * math.comb(m * k1 - 1, k1 - 1) * math.comb(
                m * k2 - 1, k2 - 1
            )
            bms = (k1 + k2) * Fraction(values(k1, k2))
            if not (log_route[k1, k2] == ab[k1, k2] == binoms == bms):
                failures.append(
                    {
                        "k": [k1, k2],
                        "log": rat_str(log_route[k1, k2]),
                        "ab": rat_str(ab[k1, k2]),
                        "binomials": binoms,
                        "bms": rat_str(bms),
                    }
                )
    return {"m": m, "order": order, "ok": not failures, "failures": failures}
