"""Eynard-Orantin recursion on the curve ``x = (1+z)^2 / z`` (the case m = 2).

Stable differentials ``omega_{g,n}`` have poles only at the critical points
``z = +-1``.  They are stored in the tensor basis

    phi_{a,k}(z) dz = dz / (z - a)^k,    a in {+1, -1},  k >= 1,

as a dict from a tuple of ``(a, k)`` per variable to a rational coefficient.
Residues are taken by expanding every ingredient as a Laurent series in the
local parameter ``t = zeta - a`` whose coefficients are vectors in the basis
of the remaining free variables.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .exactmath import RatFun, rat_str
from .spectral import compose, z_series

__all__ = [
    "CRITICAL_POINTS",
    "ORIENTATION",
    "CurveData",
    "MultiDiff",
    "TRError",
    "curve_data_m2",
    "omega",
    "omega_based",
    "expand_coefficient",
    "expand_and_compare",
]

CRITICAL_POINTS = (1, -1)
# -1/(2 pi i) times a contour bounding the preimage of a large x-disk equals
# minus the sum of interior residues; the oracle value omega_{0,3}(1,1,1) = 2
# confirms this orientation.
ORIENTATION = -1
DEFAULT_BUDGET = 4


class TRError(RuntimeError):
    """Recursion request outside the supported range or failed certification."""


# ---------------------------------------------------------------------------
# Curve data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveData:
    x: RatFun
    dx: RatFun
    y: RatFun
    critical_points: tuple[int, ...]
    deck_invariance: RatFun
    omega01_dz: RatFun
    delta_omega01_dz: RatFun


def _x_of(t: RatFun) -> RatFun:
    return (t + 1) * (t + 1) / t


def _y_of(t: RatFun) -> RatFun:
    return -(t * t) / ((t + 1) * (t + 1))


def _derivative(f: RatFun) -> RatFun:
    dn = [i * c for i, c in enumerate(f.num)][1:]
    dd = [i * c for i, c in enumerate(f.den)][1:]
    n = RatFun(dn or [0], [1], f.var)
    d = RatFun(dd or [0], [1], f.var)
    N = RatFun(f.num, [1], f.var)
    D = RatFun(f.den, [1], f.var)
    return (n * D - N * d) / (D * D)


def curve_data_m2() -> CurveData:
    """Rational data of the curve; ``deck_invariance`` is ``x(z) - x(1/z)``."""
    z = RatFun([0, 1], [1], "z")
    inv = RatFun([1], [0, 1], "z")
    x = _x_of(z)
    dx = _derivative(x)
    y = _y_of(z)
    # x(1/z) = x(z), so omega01(1/z) = y(1/z) dx(z)
    return CurveData(
        x=x,
        dx=dx,
        y=y,
        critical_points=_critical_points(dx),
        deck_invariance=x - _x_of(inv),
        omega01_dz=y * dx,
        delta_omega01_dz=(_y_of(inv) - y) * dx,
    )


def _critical_points(dx: RatFun) -> tuple[int, ...]:
    roots = []
    for r in range(-4, 5):
        if r and dx.numerator().subs({"z": r}) == 0:
            roots.append(r)
    return tuple(sorted(roots, reverse=True))


# ---------------------------------------------------------------------------
# Vector-valued Laurent series in the local parameter t
# ---------------------------------------------------------------------------

Key = tuple  # sorted tuple of (var, a, k)
Vec = dict  # Key -> Fraction


def _vadd(x: Vec, y: Vec, c: Fraction = Fraction(1)) -> None:
    for k, v in y.items():
        s = x.get(k, 0) + c * v
        if s:
            x[k] = s
        else:
            x.pop(k, None)


def _kmerge(k1: Key, k2: Key) -> Key:
    return tuple(sorted(k1 + k2))


class VSeries:
    """``sum_{s=val}^{order} c_s t^s`` with vector coefficients ``c_s``."""

    __slots__ = ("terms", "order")

    def __init__(self, terms: Mapping[int, Vec], order: int):
        self.terms = {s: dict(v) for s, v in terms.items() if s <= order and v}
        self.order = order

    @classmethod
    def scalar(cls, coeffs: Mapping[int, Fraction], order: int) -> "VSeries":
        return cls({s: {(): Fraction(c)} for s, c in coeffs.items() if c}, order)

    def valuation(self) -> int | None:
        return min(self.terms) if self.terms else None

    def _val_bound(self) -> int:
        # an all-zero truncated series is O(t^{order+1})
        return min(self.terms) if self.terms else self.order + 1

    def __mul__(self, other: "VSeries") -> "VSeries":
        order = min(self.order + other._val_bound(), other.order + self._val_bound())
        out: dict[int, Vec] = {}
        for s1, c1 in self.terms.items():
            for s2, c2 in other.terms.items():
                s = s1 + s2
                if s > order:
                    continue
                acc = out.setdefault(s, {})
                for k1, a in c1.items():
                    for k2, b in c2.items():
                        key = _kmerge(k1, k2)
                        val = acc.get(key, 0) + a * b
                        if val:
                            acc[key] = val
                        else:
                            acc.pop(key, None)
        return VSeries(out, order)

    def __add__(self, other: "VSeries") -> "VSeries":
        order = min(self.order, other.order)
        out: dict[int, Vec] = {}
        for src in (self, other):
            for s, c in src.terms.items():
                if s <= order:
                    _vadd(out.setdefault(s, {}), c)
        return VSeries(out, order)

    def scale(self, c: Fraction) -> "VSeries":
        return VSeries({s: {k: c * v for k, v in vec.items()} for s, vec in self.terms.items()}, self.order)

    def coefficient(self, s: int) -> Vec:
        if s > self.order:
            raise TRError(f"t^{s} requested beyond precision {self.order}")
        return self.terms.get(s, {})


def _binom(e: int, s: int) -> Fraction:
    # generalized binomial coefficient binom(e, s), s >= 0
    return Fraction(math.prod(e - i for i in range(s)), math.factorial(s))


def _power_series(c: Fraction, e: int, order: int) -> dict[int, Fraction]:
    """``(c + t)^e`` for ``c != 0`` up to ``t^order``."""
    out = {}
    for s in range(order + 1):
        if e >= 0 and s > e:
            break
        out[s] = _binom(e, s) * Fraction(c) ** (e - s)
    return out


def _smul(a: Mapping[int, Fraction], b: Mapping[int, Fraction], order: int) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for i, x in a.items():
        for j, y in b.items():
            if i + j <= order:
                out[i + j] = out.get(i + j, 0) + x * y
    return {s: v for s, v in out.items() if v}


def _inv_local(a: int, order: int) -> dict[int, Fraction]:
    """``1/zeta - a`` at ``zeta = a + t`` (a = +-1), i.e. the local series ``u(t)``."""
    ser = _power_series(Fraction(a), -1, order)
    ser[0] = ser.get(0, 0) - a
    return {s: v for s, v in ser.items() if v}


# scalar building blocks at zeta = a + t --------------------------------------


def _phi_scalar(a: int, b: tuple[int, int], order: int) -> dict[int, Fraction]:
    """``phi_b(zeta)`` at ``zeta = a + t``."""
    ap, k = b
    if ap == a:
        return {-k: Fraction(1)} if -k <= order else {}
    return _power_series(Fraction(a - ap), -k, order)


def _phi_sigma_scalar(a: int, b: tuple[int, int], order: int) -> dict[int, Fraction]:
    """``phi_b(1/zeta) d(1/zeta)/dzeta = -zeta^{k-2} / (1 - a' zeta)^k`` at ``zeta = a + t``."""
    ap, k = b
    lead = _power_series(Fraction(a), k - 2, order + k + 2)
    if ap == a:
        # 1 - a zeta = -a t
        c = Fraction(-1) / Fraction(-a) ** k
        return {s - k: c * v for s, v in lead.items() if s - k <= order}
    # 1 - a' zeta = 2 - a' t  (a' = -a): (2 - a' t)^{-k} = (-a')^{-k} (t - 2a')^{-k}
    tail = _power_series(Fraction(-2 * ap), -k, order)
    tail = {s: v * Fraction(-ap) ** (-k) for s, v in tail.items()}
    return {s: -v for s, v in _smul(lead, tail, order).items()}


def _kernel_factor(a: int, order: int) -> dict[int, Fraction]:
    """``ORIENTATION * dzeta / (omega01(sigma zeta) - omega01(zeta)) = ORIENTATION * zeta^2/(zeta-1)^2``."""
    num = _power_series(Fraction(a), 2, order + 2)
    if a == 1:
        return {s - 2: ORIENTATION * v for s, v in num.items() if s - 2 <= order}
    den = _power_series(Fraction(a - 1), -2, order)
    return {s: ORIENTATION * v for s, v in _smul(num, den, order).items()}


def _omega02_zeta_z(a: int, var: int, order: int, sigma: bool) -> VSeries:
    """``omega02(zeta, z_var)`` (or with ``sigma zeta``) expanded in ``t`` over the basis in ``z_var``."""
    terms: dict[int, Vec] = {}
    if not sigma:
        # 1/(z - a - t)^2 = sum_j (j+1) t^j phi_{a, j+2}(z)
        for j in range(order + 1):
            terms[j] = {((var, a, j + 2),): Fraction(j + 1)}
        return VSeries(terms, order)
    # -w^2 / (z - a - u)^2 with w = 1/zeta = a + u
    u = _inv_local(a, order)
    w2 = _power_series(Fraction(a), -2, order)
    upow = {0: Fraction(1)}
    for j in range(order + 1):
        block = _smul(w2, upow, order)
        for s, v in block.items():
            _vadd(terms.setdefault(s, {}), {((var, a, j + 2),): -(j + 1) * v})
        upow = _smul(upow, u, order)
        if not upow:
            break
    return VSeries(terms, order)


def _omega02_zeta_sigma(a: int, order: int) -> VSeries:
    """``omega02(zeta, sigma zeta) = -dzeta^2 / (zeta^2 - 1)^2``."""
    # zeta^2 - 1 = t (t + 2a)
    base = _power_series(Fraction(2 * a), -2, order + 2)
    return VSeries.scalar({s - 2: -v for s, v in base.items() if s - 2 <= order}, order)


def _kernel_primitive(a: int, var: int, order: int, antisym: bool) -> VSeries:
    """Primitive of ``omega02(., z_var)``: ``1/(z - zeta)`` or ``(1/(z - zeta) - 1/(z - sigma zeta))/2``."""
    terms: dict[int, Vec] = {}
    for j in range(order + 1):
        terms[j] = {((var, a, j + 1),): Fraction(1)}
    if not antisym:
        return VSeries(terms, order)
    u = _inv_local(a, order)
    upow = {0: Fraction(1)}
    for j in range(order + 1):
        for s, v in upow.items():
            _vadd(terms.setdefault(s, {}), {((var, a, j + 1),): -v})
        upow = _smul(upow, u, order)
        if not upow:
            break
    return VSeries(terms, order).scale(Fraction(1, 2))


# ---------------------------------------------------------------------------
# Multi-differentials
# ---------------------------------------------------------------------------


@dataclass
class MultiDiff:
    """``omega_{g,n} = sum c * prod_i dz_i / (z_i - a_i)^{k_i}``."""

    g: int
    n: int
    terms: dict[tuple[tuple[int, int], ...], Fraction]

    def max_pole(self) -> int:
        return max((k for key in self.terms for _, k in key), default=0)

    def pole_locations(self) -> set[int]:
        return {a for key in self.terms for a, _ in key}

    def is_symmetric(self) -> bool:
        for perm in itertools.permutations(range(self.n)):
            moved = {tuple(key[p] for p in perm): c for key, c in self.terms.items()}
            if moved != self.terms:
                return False
        return True

    def residues_vanish(self) -> bool:
        """Every term with a simple pole in some variable has zero coefficient."""
        return all(k >= 2 for key in self.terms for _, k in key)

    def __eq__(self, other):
        if not isinstance(other, MultiDiff):
            return NotImplemented
        return (self.g, self.n, self.terms) == (other.g, other.n, other.terms)

    def evaluate(self, zs: Sequence) -> Fraction:
        """Coefficient of ``dz_1 ... dz_n`` at a rational point."""
        out = Fraction(0)
        for key, c in self.terms.items():
            term = Fraction(c)
            for (a, k), z in zip(key, zs):
                term /= (Fraction(z) - a) ** k
            out += term
        return out

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "n": self.n,
            "terms": [[[list(b) for b in key], rat_str(c)] for key, c in sorted(self.terms.items())],
        }


def _omega_in_slot(
    w: MultiDiff | str, a: int, sigma: bool, free_vars: Sequence[int], order: int
) -> VSeries:
    """Expand ``w(zeta or sigma zeta, z_free)`` in ``t``; ``w == "02"`` means omega_{0,2}."""
    if w == "02":
        (var,) = free_vars
        return _omega02_zeta_z(a, var, order, sigma)
    terms: dict[int, Vec] = {}
    scal_cache: dict[tuple, dict] = {}
    for key, c in w.terms.items():
        b0, rest = key[0], key[1:]
        sc = scal_cache.get(b0)
        if sc is None:
            sc = (_phi_sigma_scalar if sigma else _phi_scalar)(a, b0, order)
            scal_cache[b0] = sc
        tail = tuple(sorted((v, ai, ki) for v, (ai, ki) in zip(free_vars, rest)))
        for s, v in sc.items():
            _vadd(terms.setdefault(s, {}), {tail: c * v})
    return VSeries(terms, order)


def _min_val(w: MultiDiff | str, a: int) -> int:
    # phi_b and its pullback by sigma both have a pole of order k at a when b = (a, k)
    if w == "02":
        return 0
    return -max((k for key in w.terms for (ap, k) in key[:1] if ap == a), default=0)


@lru_cache(maxsize=None)
def _omega_cached(g: int, n: int, antisym: bool) -> MultiDiff:
    return _recursion(g, n, antisym)


def omega(g: int, n: int, budget: int = DEFAULT_BUDGET) -> MultiDiff:
    """``omega_{g,n}`` for m = 2; certified symmetric."""
    if g < 0 or n < 1:
        raise TRError("need g >= 0 and n >= 1")
    if 2 * g - 2 + n <= 0:
        raise TRError(f"(g, n) = ({g}, {n}) is unstable; use the spectral module")
    if 2 * g - 2 + n > budget:
        raise TRError(f"2g-2+n = {2 * g - 2 + n} exceeds the budget {budget}")
    w = _omega_cached(g, n, True)
    if not w.is_symmetric():
        raise TRError(f"omega_{{{g},{n}}} failed the symmetry certification")
    return w


def omega_based(g: int, n: int, budget: int = DEFAULT_BUDGET) -> MultiDiff:
    """Same recursion with the one-sided primitive ``int_o^zeta``; must agree with ``omega``."""
    if 2 * g - 2 + n <= 0 or 2 * g - 2 + n > budget:
        raise TRError("unsupported (g, n)")
    return _omega_cached(g, n, False)


def _lower(g: int, n: int, antisym: bool) -> MultiDiff | str:
    if (g, n) == (0, 2):
        return "02"
    return _omega_cached(g, n, antisym)


def _bracket_terms(g: int, K: tuple[int, ...], antisym: bool):
    """Yield ``(kind, data)`` describing the terms of the bracket in the recursion."""
    if g >= 1:
        yield "pair", (g - 1, K)
    idx = list(K)
    for r in range(len(idx) + 1):
        for N1 in itertools.combinations(idx, r):
            N2 = tuple(v for v in idx if v not in N1)
            for g1 in range(g + 1):
                g2 = g - g1
                if (g1, len(N1) + 1) == (0, 1) or (g2, len(N2) + 1) == (0, 1):
                    continue
                yield "split", (g1, N1, g2, N2)


def _recursion(g: int, n: int, antisym: bool) -> MultiDiff:
    # output variables: 0 is the new point, 1..n-1 the others
    K = tuple(range(1, n))
    total: Vec = {}
    base_point: Vec = {}
    for a in CRITICAL_POINTS:
        factors_list = []
        for kind, data in _bracket_terms(g, K, antisym):
            if kind == "pair":
                gg, KK = data
                if gg == 0 and not KK:
                    factors_list.append([("pairdiag", None)])
                else:
                    w = _lower(gg, len(KK) + 2, antisym)
                    factors_list.append([("pair", (w, KK))])
            else:
                g1, N1, g2, N2 = data
                w1 = _lower(g1, len(N1) + 1, antisym)
                w2 = _lower(g2, len(N2) + 1, antisym)
                factors_list.append([("one", (w1, N1, False)), ("one", (w2, N2, True))])
        for factors in factors_list:
            # valuations: kernel factor contributes -2 at a = 1, primitive >= 0
            vals = [(-2 if a == 1 else 0)]
            for kind, data in factors:
                if kind == "pairdiag":
                    vals.append(-2)
                elif kind == "pair":
                    w, _ = data
                    vals.append(_pair_min_val(w, a))
                else:
                    w, _, sig = data
                    vals.append(_min_val(w, a))
            need = -1 - sum(vals)
            if need < 0:
                continue
            # each factor must be known to `need + own valuation`
            rest = VSeries.scalar(_kernel_factor(a, need + vals[0]), need + vals[0])
            for (kind, data), v in zip(factors, vals[1:]):
                prec = need + v
                if kind == "pairdiag":
                    ser = _omega02_zeta_sigma(a, prec)
                elif kind == "pair":
                    w, KK = data
                    ser = _pair_series(w, a, KK, prec)
                else:
                    w, NN, sig = data
                    ser = _omega_in_slot(w, a, sig, NN, prec)
                rest = rest * ser
            prod = rest * _kernel_primitive(a, 0, need, antisym)
            _vadd(total, prod.coefficient(-1))
            if not antisym:
                # the base point enters through -1/(z - o) times this residue
                _vadd(base_point, rest.coefficient(-1))
    if base_point:
        raise TRError(f"omega_{{{g},{n}}} depends on the base point of the primitive")
    terms: dict[tuple[tuple[int, int], ...], Fraction] = {}
    for key, c in total.items():
        slots = {v: (ai, ki) for v, ai, ki in key}
        if sorted(slots) != list(range(n)):
            raise TRError(f"malformed basis key {key}")
        terms[tuple(slots[v] for v in range(n))] = c
    return MultiDiff(g, n, terms)


def _pair_min_val(w: MultiDiff | str, a: int) -> int:
    if w == "02":
        return -2
    best = 0
    for key in w.terms:
        v = 0
        for ap, k in key[:2]:
            if ap == a:
                v -= k
        best = min(best, v)
    return best


def _pair_series(w: MultiDiff, a: int, KK: Sequence[int], order: int) -> VSeries:
    """``w(zeta, sigma zeta, z_KK)`` expanded in ``t``."""
    terms: dict[int, Vec] = {}
    lo0 = min((-k for key in w.terms for ap, k in key[:1] if ap == a), default=0)
    lo1 = min((-k for key in w.terms for ap, k in key[1:2] if ap == a), default=0)
    for key, c in w.terms.items():
        b0, b1, rest = key[0], key[1], key[2:]
        s0 = _phi_scalar(a, b0, order - lo1)
        s1 = _phi_sigma_scalar(a, b1, order - lo0)
        tail = tuple(sorted((v, ai, ki) for v, (ai, ki) in zip(KK, rest)))
        for s, v in _smul(s0, s1, order).items():
            _vadd(terms.setdefault(s, {}), {tail: c * v})
    return VSeries(terms, order)


# ---------------------------------------------------------------------------
# Expansion in X = 1/x
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _basis_in_X(a: int, k: int, order: int) -> tuple[Fraction, ...]:
    """``dz/(z-a)^k`` written as ``f(X) dX``; coefficients of ``f`` up to ``X^order``."""
    zs = z_series(2, order + 1)
    # (z - a)^{-k} = (-a)^{-k} (1 - z/a)^{-k}
    taylor = [Fraction(-a) ** (-k) * _binom(-k, s) * Fraction(-1, a) ** s for s in range(order + 2)]
    f = compose(taylor, zs) * zs.derivative()
    return tuple(f.truncate(order).coeffs)


def expand_coefficient(w: MultiDiff, mu: Sequence[int]) -> Fraction:
    """The coefficient of ``prod_i dX_i^{mu_i}`` in the expansion of ``w``."""
    if len(mu) != w.n:
        raise ValueError(f"expected {w.n} exponents")
    top = max(mu)
    out = Fraction(0)
    for key, c in w.terms.items():
        term = Fraction(c)
        for (a, k), m_i in zip(key, mu):
            term *= _basis_in_X(a, k, top - 1)[m_i - 1]
            if not term:
                break
        out += term
    return out / math.prod(mu)


def expand_and_compare(g: int, n: int, mu_max: int, reference=None) -> dict:
    """Compare the expansion of ``omega_{g,n}`` with ``b_{g,mu}`` for all ``mu_i <= mu_max``.

    ``reference(mu)`` defaults to the character formula at m = 2.
    """
    if reference is None:
        from .fockspace import bms_fock

        def reference(mu):
            return bms_fock(2, g, tuple(sorted(mu, reverse=True)))

    w = omega(g, n)
    rows = []
    for mu in itertools.combinations_with_replacement(range(1, mu_max + 1), n):
        mu = tuple(sorted(mu, reverse=True))
        tr = expand_coefficient(w, mu)
        ref = Fraction(reference(mu))
        rows.append({"g": g, "n": n, "mu": list(mu), "tr_value": rat_str(tr), "fock_value": rat_str(ref), "equal": tr == ref})
    return {
        "g": g,
        "n": n,
        "mu_max": mu_max,
        "ok": all(r["equal"] for r in rows),
        "rows": rows,
        "mismatches": [r["mu"] for r in rows if not r["equal"]],
    }
