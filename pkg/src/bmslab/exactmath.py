"""Exact scalar and polynomial arithmetic.

Rationals are :class:`fractions.Fraction`.  Polynomials are sparse maps from
exponent tuples to Fraction coefficients over a named, ordered list of
indeterminates.  Everything here is immutable once built.
"""

from __future__ import annotations

import json
import threading
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Mapping, Sequence, Union

Rat = Fraction
Number = Union[int, Fraction]

__all__ = [
    "Rat",
    "MPoly",
    "RatFun",
    "HSeries",
    "rat_str",
    "parse_rat",
    "falling_factorial",
    "rising_factorial",
    "bernoulli",
    "faulhaber_power_sum",
    "T_poly",
    "T_tilde_poly",
    "T_direct",
    "T_tilde_direct",
    "solve_exact",
    "determinant",
    "interpolate_univariate",
    "newton_forward",
]


def rat_str(value: Number) -> str:
    """Serialize a rational as ``"p/q"``, or ``"p"`` when ``q == 1``."""
    v = Fraction(value)
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def parse_rat(text: str) -> Fraction:
    return Fraction(text.strip())


# ---------------------------------------------------------------------------
# Multivariate polynomials
# ---------------------------------------------------------------------------


class MPoly:
    """Sparse multivariate polynomial with Fraction coefficients.

    ``vars`` is an ordered tuple of indeterminate names; ``terms`` maps an
    exponent tuple of matching arity to a nonzero coefficient.  Binary
    operations between polynomials over different variable lists work over
    the union of the lists (left operand's order first).
    """

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Sequence[str], terms: Mapping[tuple, Number] | None = None):
        self.vars = tuple(vars)
        n = len(self.vars)
        clean: dict[tuple, Fraction] = {}
        if terms:
            for exp, c in terms.items():
                if c == 0:
                    continue
                exp = tuple(exp)
                if len(exp) != n:
                    raise ValueError(f"exponent {exp} does not match variables {self.vars}")
                clean[exp] = Fraction(c)
        self.terms = clean
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def const(cls, c: Number, vars: Sequence[str] = ()) -> "MPoly":
        return cls(vars, {(0,) * len(vars): c})

    @classmethod
    def var(cls, name: str, vars: Sequence[str] | None = None) -> "MPoly":
        vars = tuple(vars) if vars is not None else (name,)
        i = vars.index(name)
        exp = tuple(1 if j == i else 0 for j in range(len(vars)))
        return cls(vars, {exp: 1})

    @classmethod
    def from_univariate(cls, coeffs: Sequence[Number], name: str) -> "MPoly":
        return cls((name,), {(i,): c for i, c in enumerate(coeffs) if c})

    @classmethod
    def coerce(cls, other, vars: Sequence[str] = ()) -> "MPoly":
        if isinstance(other, MPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return cls.const(other, vars)
        return NotImplemented

    # variable bookkeeping ---------------------------------------------
    def with_vars(self, vars: Sequence[str]) -> "MPoly":
        """Re-express over ``vars`` (must contain every variable actually used)."""
        vars = tuple(vars)
        if vars == self.vars:
            return self
        pos = []
        for i, v in enumerate(self.vars):
            if v in vars:
                pos.append(vars.index(v))
            else:
                if any(e[i] for e in self.terms):
                    raise ValueError(f"variable {v!r} is used and cannot be dropped")
                pos.append(None)
        n = len(vars)
        out = {}
        for exp, c in self.terms.items():
            new = [0] * n
            for i, e in enumerate(exp):
                if pos[i] is not None:
                    new[pos[i]] = e
            out[tuple(new)] = c
        return MPoly(vars, out)

    def used_vars(self) -> tuple:
        return tuple(v for i, v in enumerate(self.vars) if any(e[i] for e in self.terms))

    def _align(self, other: "MPoly") -> tuple["MPoly", "MPoly"]:
        if self.vars == other.vars:
            return self, other
        vars = list(self.vars)
        for v in other.vars:
            if v not in vars:
                vars.append(v)
        return self.with_vars(vars), other.with_vars(vars)

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = MPoly.coerce(other, self.vars)
        if other is NotImplemented:
            return other
        a, b = self._align(other)
        out = dict(a.terms)
        for exp, c in b.terms.items():
            s = out.get(exp, 0) + c
            if s:
                out[exp] = s
            else:
                out.pop(exp, None)
        return MPoly(a.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = MPoly.coerce(other, self.vars)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return MPoly(self.vars)
            return MPoly(self.vars, {e: c * other for e, c in self.terms.items()})
        if not isinstance(other, MPoly):
            return NotImplemented
        a, b = self._align(other)
        out: dict[tuple, Fraction] = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MPoly(a.vars, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = MPoly.const(1, self.vars)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MPoly.const(other, self.vars)
        if not isinstance(other, MPoly):
            return NotImplemented
        a, b = self._align(other)
        return a.terms == b.terms

    def __hash__(self):
        if self._hash is None:
            used = self.used_vars()
            p = self.with_vars(used)
            self._hash = hash((p.vars, frozenset(p.terms.items())))
        return self._hash

    def is_zero(self) -> bool:
        return not self.terms

    # inspection -------------------------------------------------------
    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree(self, var: str) -> int:
        if var not in self.vars or not self.terms:
            return -1 if not self.terms else 0
        i = self.vars.index(var)
        return max(e[i] for e in self.terms)

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exp), Fraction(0))

    def coeff_in(self, var: str, power: int) -> "MPoly":
        """Coefficient of ``var**power`` as a polynomial in the other variables."""
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1:]
        out = {}
        for e, c in self.terms.items():
            if e[i] == power:
                out[e[:i] + e[i + 1:]] = c
        return MPoly(rest, out)

    def univariate_coeffs(self, var: str | None = None) -> list[Fraction]:
        """Dense coefficient list of a polynomial in one variable."""
        used = self.used_vars()
        if var is None:
            if len(used) > 1:
                raise ValueError("not univariate")
            var = used[0] if used else (self.vars[0] if self.vars else "_")
        elif any(v != var for v in used):
            raise ValueError("not univariate in " + var)
        if not self.terms:
            return []
        p = self.with_vars((var,))
        deg = max(e[0] for e in p.terms)
        out = [Fraction(0)] * (deg + 1)
        for e, c in p.terms.items():
            out[e[0]] = c
        return out

    # evaluation / substitution ----------------------------------------
    def __call__(self, **values):
        return self.subs(values)

    def subs(self, values: Mapping[str, Union[Number, "MPoly"]]):
        """Substitute numbers or polynomials for some variables.

        Returns a Fraction when every variable receives a number, otherwise an
        MPoly over the remaining variables plus those of substituted polys.
        """
        if all(v in values and not isinstance(values[v], MPoly) for v in self.vars):
            vals = [Fraction(values[v]) for v in self.vars]
            total = Fraction(0)
            cache: dict[tuple[int, int], Fraction] = {}
            for exp, c in self.terms.items():
                t = c
                for i, e in enumerate(exp):
                    if e:
                        key = (i, e)
                        pw = cache.get(key)
                        if pw is None:
                            pw = vals[i] ** e
                            cache[key] = pw
                        t *= pw
                total += t
            return total
        keep = [v for v in self.vars if v not in values]
        if not any(isinstance(values[v], MPoly) for v in self.vars if v in values):
            return self._subs_numeric(values, keep)
        result_vars = list(keep)
        for v, val in values.items():
            if isinstance(val, MPoly):
                for w in val.vars:
                    if w not in result_vars:
                        result_vars.append(w)
        result = MPoly(result_vars)
        powers: dict[tuple[str, int], MPoly] = {}

        def power(v, e):
            key = (v, e)
            if key not in powers:
                val = values[v]
                base = val if isinstance(val, MPoly) else MPoly.const(val, result_vars)
                powers[key] = base.with_vars(result_vars) ** e
            return powers[key]

        acc: dict[tuple, Fraction] = {}
        for exp, c in self.terms.items():
            mono_exp = [0] * len(result_vars)
            factor = MPoly.const(c, result_vars)
            for v, e in zip(self.vars, exp):
                if v in values:
                    if e:
                        factor = factor * power(v, e)
                else:
                    mono_exp[result_vars.index(v)] += e
            for fe, fc in factor.terms.items():
                key = tuple(a + b for a, b in zip(fe, mono_exp))
                acc[key] = acc.get(key, 0) + fc
        result = MPoly(result_vars, acc)
        return result

    def _subs_numeric(self, values, keep: list[str]) -> "MPoly":
        sub_idx = [(i, Fraction(values[v])) for i, v in enumerate(self.vars) if v in values]
        keep_idx = [i for i, v in enumerate(self.vars) if v not in values]
        powers: dict[tuple[int, int], Fraction] = {}
        acc: dict[tuple, Fraction] = {}
        for exp, c in self.terms.items():
            t = c
            for i, x in sub_idx:
                e = exp[i]
                if e:
                    pw = powers.get((i, e))
                    if pw is None:
                        pw = x**e
                        powers[(i, e)] = pw
                    t = t * pw
            if t:
                key = tuple(exp[i] for i in keep_idx)
                acc[key] = acc.get(key, 0) + t
        return MPoly(keep, acc)

    def shift(self, var: str, delta: Number) -> "MPoly":
        """``p(var + delta)``."""
        return self.subs({var: MPoly.var(var) + delta})

    def diff(self, var: str) -> "MPoly":
        i = self.vars.index(var)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return MPoly(self.vars, out)

    def divmod_linear(self, var: str, root: Number) -> tuple["MPoly", "MPoly"]:
        """Divide by ``(var - root)``; returns (quotient, remainder)."""
        q, r = _synthetic_division(self, var, Fraction(root))
        return q, r

    def divisible_by_linear(self, var: str, root: Number = 0) -> bool:
        return self.divmod_linear(var, root)[1].is_zero()

    # formatting -------------------------------------------------------
    def __repr__(self):
        return f"MPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exp in sorted(self.terms, key=lambda e: (-sum(e), tuple(-x for x in e))):
            c = self.terms[exp]
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(self.vars, exp) if e
            )
            if not mono:
                parts.append(rat_str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{rat_str(c)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {
            "vars": list(self.vars),
            "terms": [
                {"exp": list(e), "coef": rat_str(c)}
                for e, c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, data: Union[str, dict]) -> "MPoly":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(data["vars"], {tuple(t["exp"]): parse_rat(t["coef"]) for t in data["terms"]})


def _synthetic_division(p: MPoly, var: str, root: Fraction) -> tuple[MPoly, MPoly]:
    i = p.vars.index(var)
    # group by the other exponents, then do Horner division per group
    groups: dict[tuple, dict[int, Fraction]] = {}
    for e, c in p.terms.items():
        groups.setdefault(e[:i] + e[i + 1:], {})[e[i]] = c
    qt: dict[tuple, Fraction] = {}
    rt: dict[tuple, Fraction] = {}
    for rest, coeffs in groups.items():
        deg = max(coeffs)
        carry = Fraction(0)
        for d in range(deg, -1, -1):
            carry = carry * root + coeffs.get(d, 0)
            if d > 0:
                if carry:
                    qt[rest[:i] + (d - 1,) + rest[i:]] = carry
            elif carry:
                rt[rest[:i] + (0,) + rest[i:]] = carry
    return MPoly(p.vars, qt), MPoly(p.vars, rt)


# ---------------------------------------------------------------------------
# Univariate rational functions
# ---------------------------------------------------------------------------


def _trim(c: list[Fraction]) -> list[Fraction]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_divmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    a = _trim(list(a))
    b = _trim(list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return [], a
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    lead = b[-1]
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        f = a[-1] / lead
        q[shift] = f
        for i, bc in enumerate(b):
            a[i + shift] -= f * bc
        a.pop()
        _trim(a)
    return _trim(q), a


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    if not a:
        return []
    lead = a[-1]
    return [c / lead for c in a]


def _poly_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_add(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    n = max(len(a), len(b))
    out = [Fraction(0)] * n
    for i, x in enumerate(a):
        out[i] += x
    for i, x in enumerate(b):
        out[i] += x
    return _trim(out)


def _poly_eval(a: Sequence[Fraction], x: Number) -> Fraction:
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


class RatFun:
    """Ratio of two univariate polynomials in ``var``; gcd-reduced, monic denominator."""

    __slots__ = ("var", "num", "den")

    def __init__(self, num, den=None, var: str = "k"):
        if isinstance(num, MPoly):
            var = (num.used_vars() or (var,))[0]
            num = num.univariate_coeffs(var)
        if isinstance(den, MPoly):
            used = den.used_vars()
            if used and used[0] != var:
                if not num:
                    var = used[0]
                else:
                    raise ValueError("numerator and denominator use different variables")
            den = den.univariate_coeffs(var)
        if den is None:
            den = [Fraction(1)]
        num = _trim([Fraction(c) for c in num])
        den = _trim([Fraction(c) for c in den])
        if not den:
            raise ZeroDivisionError("zero denominator")
        g = _poly_gcd(num, den) if num else list(den)
        if len(g) > 1:
            num, _ = _poly_divmod(num, g)
            den, _ = _poly_divmod(den, g)
        lead = den[-1]
        self.var = var
        self.num = [c / lead for c in num]
        self.den = [c / lead for c in den]

    @classmethod
    def from_number(cls, c: Number, var: str = "k") -> "RatFun":
        return cls([c], [1], var)

    def _coerce(self, other):
        if isinstance(other, RatFun):
            return other
        if isinstance(other, (int, Fraction)):
            return RatFun([other], [1], self.var)
        if isinstance(other, MPoly):
            return RatFun(other.univariate_coeffs(self.var) if other.terms else [], [1], self.var)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RatFun(
            _poly_add(_poly_mul(self.num, other.den), _poly_mul(other.num, self.den)),
            _poly_mul(self.den, other.den),
            self.var,
        )

    __radd__ = __add__

    def __neg__(self):
        return RatFun([-c for c in self.num], self.den, self.var)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RatFun(_poly_mul(self.num, other.num), _poly_mul(self.den, other.den), self.var)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if not other.num:
            raise ZeroDivisionError("division by the zero rational function")
        return RatFun(_poly_mul(self.num, other.den), _poly_mul(self.den, other.num), self.var)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.num == other.num and self.den == other.den

    def __call__(self, x: Number) -> Fraction:
        d = _poly_eval(self.den, x)
        if d == 0:
            raise ZeroDivisionError(f"pole of rational function at {x}")
        return _poly_eval(self.num, x) / d

    def is_polynomial(self) -> bool:
        return len(self.den) == 1

    def numerator(self) -> MPoly:
        return MPoly.from_univariate(self.num, self.var)

    def denominator(self) -> MPoly:
        return MPoly.from_univariate(self.den, self.var)

    def pole_order(self, x: Number) -> int:
        order, d = 0, list(self.den)
        while d and _poly_eval(d, x) == 0:
            d, _ = _poly_divmod(d, [-Fraction(x), Fraction(1)])
            order += 1
        return order

    def residue(self, x: Number) -> Fraction:
        """Residue at ``x`` (exact, via Laurent coefficient extraction)."""
        x = Fraction(x)
        order = self.pole_order(x)
        if order == 0:
            return Fraction(0)
        # f = N / ((t)^order * E(t)) with t = var - x
        d = list(self.den)
        for _ in range(order):
            d, _ = _poly_divmod(d, [-x, Fraction(1)])
        num_t = _taylor_shift(self.num, x)
        den_t = _taylor_shift(d, x)
        # coefficient of t^(order-1) in num_t / den_t
        inv = _series_inverse(den_t, order)
        prod = _poly_mul(num_t[:order], inv)
        return prod[order - 1] if len(prod) >= order else Fraction(0)

    def __repr__(self):
        return f"RatFun(({self.numerator()}) / ({self.denominator()}))"


def _taylor_shift(c: Sequence[Fraction], x: Fraction) -> list[Fraction]:
    """Coefficients of p(x + t) in t."""
    n = len(c)
    out = [Fraction(0)] * n
    for i, ci in enumerate(c):
        if ci:
            for j in range(i + 1):
                out[j] += ci * comb(i, j) * x ** (i - j)
    return out


def _series_inverse(a: Sequence[Fraction], n: int) -> list[Fraction]:
    if not a or a[0] == 0:
        raise ZeroDivisionError("series not invertible")
    b = [Fraction(0)] * n
    b[0] = 1 / Fraction(a[0])
    for i in range(1, n):
        s = Fraction(0)
        for j in range(1, min(i, len(a) - 1) + 1):
            s += a[j] * b[i - j]
        b[i] = -s * b[0]
    return b


# ---------------------------------------------------------------------------
# Factorials, Bernoulli numbers, Faulhaber
# ---------------------------------------------------------------------------


def falling_factorial(a, b: int):
    """Pochhammer symbol in the falling convention.

    ``(a)_b = a(a-1)...(a-b+1)`` for ``b > 0``, ``1/((a+1)...(a-b))`` for
    ``b < 0`` and ``1`` for ``b == 0``.  ``a`` may be a number, a variable
    name, or an MPoly; symbolic input with ``b < 0`` yields a RatFun.
    """
    if isinstance(a, str):
        a = MPoly.var(a)
    if isinstance(a, MPoly):
        if b >= 0:
            out = MPoly.const(1, a.vars)
            for i in range(b):
                out = out * (a - i)
            return out
        den = MPoly.const(1, a.vars)
        for i in range(1, -b + 1):
            den = den * (a + i)
        return RatFun(MPoly.const(1, den.vars), den)
    a = Fraction(a)
    if b >= 0:
        out = Fraction(1)
        for i in range(b):
            out *= a - i
        return out
    den = Fraction(1)
    for i in range(1, -b + 1):
        f = a + i
        if f == 0:
            raise ZeroDivisionError(f"falling factorial ({a})_{b}: factor (a+{i}) vanishes")
        den *= f
    return 1 / den


def rising_factorial(k, t: int):
    """``k(k+1)...(k+t-1)``; the empty product is 1."""
    if t < 0:
        raise ValueError("rising factorial needs t >= 0")
    if isinstance(k, str):
        k = MPoly.var(k)
    out = MPoly.const(1, k.vars) if isinstance(k, MPoly) else Fraction(1)
    for i in range(t):
        out = out * (k + i)
    return out


_bernoulli_cache: list[Fraction] = [Fraction(1)]
_bernoulli_lock = threading.Lock()


def bernoulli(n: int) -> Fraction:
    """Bernoulli number with ``B_1 = -1/2``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n < len(_bernoulli_cache):
        return _bernoulli_cache[n]
    with _bernoulli_lock:
        while len(_bernoulli_cache) <= n:
            m = len(_bernoulli_cache)
            # sum_{j<=m} C(m+1, j) B_j = 0
            s = sum(comb(m + 1, j) * _bernoulli_cache[j] for j in range(m))
            _bernoulli_cache.append(-s / (m + 1))
    return _bernoulli_cache[n]


_N = MPoly.var("n")


def faulhaber_power_sum(p: int) -> MPoly:
    """Polynomial in ``n`` equal to ``1^p + 2^p + ... + n^p``."""
    if p < 0:
        raise ValueError("p must be >= 0")
    if p == 0:
        return _N
    terms = {(p + 1,): Fraction(1, p + 1), (p,): Fraction(1, 2)}
    for k in range(2, p + 1):
        c = falling_factorial(p, k - 1) * bernoulli(k) / factorial(k)
        if c:
            terms[(p - k + 1,)] = terms.get((p - k + 1,), 0) + c
    return MPoly(("n",), terms)


def _sum_below(f: MPoly, var: str, upper: str) -> MPoly:
    """``sum_{var=0}^{upper-1} f`` for ``f`` polynomial in ``var``."""
    out = MPoly((upper,))
    K = MPoly.var(upper)
    for exp, c in f.terms.items():
        e = exp[f.vars.index(var)]
        rest = MPoly(f.vars, {tuple(0 if v == var else x for v, x in zip(f.vars, exp)): c})
        if e == 0:
            s = K
        else:
            s = faulhaber_power_sum(e).subs({"n": K}) - K**e
        out = out + rest * s
    return out


def _sum_upto(f: MPoly, var: str, upper: str) -> MPoly:
    """``sum_{var=1}^{upper} f``."""
    out = MPoly((upper,))
    K = MPoly.var(upper)
    for exp, c in f.terms.items():
        e = exp[f.vars.index(var)]
        rest = MPoly(f.vars, {tuple(0 if v == var else x for v, x in zip(f.vars, exp)): c})
        out = out + rest * faulhaber_power_sum(e).subs({"n": K})
    return out


_T_cache: dict[int, MPoly] = {}
_Tt_cache: dict[int, MPoly] = {}
_T_lock = threading.Lock()


def T_poly(d: int) -> MPoly:
    """Polynomial in (x, k) equal to the sum over 0 <= g_1 < ... < g_d < k of prod (x + g_j)."""
    if d < 0:
        raise ValueError("d must be >= 0")
    if d in _T_cache:
        return _T_cache[d]
    x, g = MPoly.var("x"), MPoly.var("g")
    if d == 0:
        res = MPoly.const(1, ("x", "k"))
    else:
        # T_d(x, k) = sum_{g=0}^{k-1} (x + g) T_{d-1}(x, g)
        inner = (x + g) * T_poly(d - 1).subs({"k": g})
        res = _sum_below(inner, "g", "k").with_vars(("x", "k"))
    with _T_lock:
        _T_cache[d] = res
    return res


def T_tilde_poly(d: int) -> MPoly:
    """Polynomial equal to the sum over 1 <= g_1 <= ... <= g_d <= k of prod (-x + g_j)."""
    if d < 0:
        raise ValueError("d must be >= 0")
    if d in _Tt_cache:
        return _Tt_cache[d]
    x, g = MPoly.var("x"), MPoly.var("g")
    if d == 0:
        res = MPoly.const(1, ("x", "k"))
    else:
        # sum_{g=1}^{k} (g - x) Ttilde_{d-1}(x, g)
        inner = (g - x) * T_tilde_poly(d - 1).subs({"k": g})
        res = _sum_upto(inner, "g", "k").with_vars(("x", "k"))
    with _T_lock:
        _Tt_cache[d] = res
    return res


def T_direct(d: int, x: Number, k: int) -> Fraction:
    """Brute-force value of the strictly increasing product sum (k >= 0)."""
    # elementary symmetric polynomial e_d of {x + g : 0 <= g < k}
    e = [Fraction(1)] + [Fraction(0)] * d
    for g in range(k):
        v = Fraction(x) + g
        for j in range(d, 0, -1):
            e[j] += e[j - 1] * v
    return e[d]


def T_tilde_direct(d: int, x: Number, k: int) -> Fraction:
    """Brute-force value of the weakly increasing product sum (k >= 0)."""
    # complete homogeneous polynomial h_d of {g - x : 1 <= g <= k}
    h = [Fraction(1)] + [Fraction(0)] * d
    for g in range(1, k + 1):
        v = g - Fraction(x)
        for j in range(1, d + 1):
            h[j] += h[j - 1] * v
    return h[d]


# ---------------------------------------------------------------------------
# Exact linear algebra and interpolation
# ---------------------------------------------------------------------------


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def determinant(matrix: Sequence[Sequence[Number]]) -> Fraction:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    scale = Fraction(1)
    rows = []
    for row in matrix:
        fr = [Fraction(v) for v in row]
        den = 1
        for v in fr:
            den = den * v.denominator // _gcd(den, v.denominator)
        scale /= den
        rows.append([int(v * den) for v in fr])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            for i in range(k + 1, n):
                if rows[i][k] != 0:
                    rows[k], rows[i] = rows[i], rows[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        pivot = rows[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                rows[i][j] = (rows[i][j] * pivot - rows[i][k] * rows[k][j]) // prev
        prev = pivot
    return sign * rows[n - 1][n - 1] * scale


def solve_exact(matrix: Sequence[Sequence[Number]], rhs: Sequence[Number]) -> list[Fraction]:
    """Solve ``A x = b`` exactly by Gauss-Jordan elimination over the rationals.

    ``A`` may have more rows than columns; the system must then be consistent
    and of full column rank.  Raises ``ValueError`` on a singular or
    inconsistent system.
    """
    nrows = len(matrix)
    ncols = len(matrix[0]) if nrows else 0
    if len(rhs) != nrows:
        raise ValueError("row count mismatch")
    aug = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if aug[i][c] != 0), None)
        if piv is None:
            raise ValueError(f"singular system (no pivot in column {c})")
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        row_r = [v * inv for v in aug[r]]
        aug[r] = row_r
        for i in range(nrows):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                row_i = aug[i]
                for j in range(c, ncols + 1):
                    if row_r[j]:
                        row_i[j] -= f * row_r[j]
        r += 1
    for i in range(r, nrows):
        if aug[i][ncols] != 0:
            raise ValueError("inconsistent overdetermined system")
    return [aug[c][ncols] for c in range(ncols)]


def interpolate_univariate(xs: Sequence[Number], ys: Sequence[Number], var: str = "k") -> MPoly:
    """Exact Lagrange interpolation (Newton divided differences)."""
    xs = [Fraction(x) for x in xs]
    coef = [Fraction(y) for y in ys]
    n = len(xs)
    if len(set(xs)) != n:
        raise ValueError("interpolation nodes must be distinct")
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    # expand the Newton form into monomials
    poly: list[Fraction] = [coef[-1]] if n else []
    for i in range(n - 2, -1, -1):
        poly = _poly_add(_poly_mul(poly, [-xs[i], Fraction(1)]), [coef[i]])
    return MPoly.from_univariate(poly, var)


def newton_forward(values: Sequence, order: int):
    """Forward differences ``Delta^s f(0) / s!`` for s = 0..order from f(0..order).

    Works for any values supporting ``-`` and division by an int (numbers or MPoly).
    """
    diffs = list(values[: order + 1])
    out = [diffs[0]]
    for s in range(1, order + 1):
        diffs = [diffs[i + 1] - diffs[i] for i in range(len(diffs) - 1)]
        out.append(diffs[0] / factorial(s))
    return out


def poly_from_iterable(vars: Sequence[str], items: Iterable[tuple[tuple, Number]]) -> MPoly:
    acc: dict[tuple, Fraction] = {}
    for e, c in items:
        acc[e] = acc.get(e, 0) + c
    return MPoly(vars, acc)


# ---------------------------------------------------------------------------
# Laurent polynomials in hbar
# ---------------------------------------------------------------------------


class HSeries:
    """Truncated Laurent series in hbar with Fraction coefficients.

    Coefficients with exponent above ``order`` are unknown and dropped.
    ``order=None`` means the series is an exact Laurent polynomial.
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Mapping[int, Number] | None = None, order: int | None = None):
        clean = {}
        if coeffs:
            for e, c in coeffs.items():
                if c and (order is None or e <= order):
                    clean[int(e)] = Fraction(c)
        self.coeffs = clean
        self.order = order

    @classmethod
    def const(cls, c: Number, order: int | None = None) -> "HSeries":
        return cls({0: c}, order)

    @classmethod
    def monomial(cls, e: int, c: Number = 1, order: int | None = None) -> "HSeries":
        return cls({e: c}, order)

    @property
    def min_degree(self) -> int | None:
        return min(self.coeffs) if self.coeffs else None

    def __getitem__(self, e: int) -> Fraction:
        if self.order is not None and e > self.order:
            raise KeyError(f"coefficient of hbar^{e} lies beyond truncation order {self.order}")
        return self.coeffs.get(e, Fraction(0))

    @staticmethod
    def _min_order(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def _coerce(self, other):
        if isinstance(other, HSeries):
            return other
        if isinstance(other, (int, Fraction)):
            return HSeries.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return HSeries(out, self._min_order(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return HSeries({e: -c for e, c in self.coeffs.items()}, self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return HSeries({e: c * other for e, c in self.coeffs.items()}, self.order)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        # a truncated factor with valuation v limits the product to (other's order + v)
        order = None
        if self.order is not None:
            v = other.min_degree
            order = self.order + (v if v is not None else 0)
        if other.order is not None:
            v = self.min_degree
            o2 = other.order + (v if v is not None else 0)
            order = o2 if order is None else min(order, o2)
        out: dict[int, Fraction] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                if order is None or e <= order:
                    out[e] = out.get(e, 0) + c1 * c2
        return HSeries(out, order)

    __rmul__ = __mul__

    def shift(self, s: int) -> "HSeries":
        """Multiply by hbar**s."""
        return HSeries(
            {e + s: c for e, c in self.coeffs.items()},
            None if self.order is None else self.order + s,
        )

    def __pow__(self, n: int):
        out = HSeries.const(1)
        for _ in range(n):
            out = out * self
        return out

    def truncate(self, order: int) -> "HSeries":
        return HSeries(self.coeffs, self._min_order(self.order, order))

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.coeffs == other.coeffs

    def __repr__(self):
        if not self.coeffs:
            body = "0"
        else:
            body = " + ".join(f"{rat_str(c)}*h^{e}" for e, c in sorted(self.coeffs.items()))
        tail = "" if self.order is None else f" + O(h^{self.order + 1})"
        return f"HSeries({body}{tail})"
