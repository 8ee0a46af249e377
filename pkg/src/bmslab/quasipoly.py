"""Quasi-polynomial structure of connected BMS numbers.

For stable ``(g, n)`` the number ``b_{g,mu}`` equals
``prod_i prefactor(m, mu_i) * Poly(mu) / prod_i prod_j (mu_i - j/m)`` where
``j`` runs over ``m <= j <= 4g-4+2n-1`` with ``m`` not dividing ``j``.  This
module strips the prefactor, clears the denominator and interpolates ``Poly``
in the basis of elementary symmetric polynomials, validating every fit on
held-out points.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .exactmath import MPoly, falling_factorial, rat_str, solve_exact

__all__ = [
    "FitFailure",
    "QuasiPolyForm",
    "prefactor",
    "denominator_exponents",
    "denominator_product",
    "normalized_value",
    "fit_poly",
    "genus0_poly",
    "mu_vars",
]


class FitFailure(ArithmeticError):
    """No polynomial up to the degree cap reproduces the held-out values."""


def mu_vars(n: int) -> tuple[str, ...]:
    return tuple(f"mu{i + 1}" for i in range(n))


def _check_stable(g: int, n: int) -> None:
    if n < 1 or g < 0 or 2 * g - 2 + n <= 0:
        raise ValueError(f"(g, n) = ({g}, {n}) is not stable")


def prefactor(m: int, mu_i: int) -> Fraction:
    """``(m mu_i - m)! / (mu_i! (m mu_i - mu_i - 1)!)``."""
    if m < 2:
        raise ValueError("prefactor needs m >= 2")
    if mu_i < 1:
        raise ValueError("parts must be >= 1")
    return Fraction(math.factorial(m * mu_i - m), math.factorial(mu_i) * math.factorial(m * mu_i - mu_i - 1))


def denominator_exponents(m: int, g: int, n: int) -> list[int]:
    """The ``j`` with ``m <= j <= 4g-4+2n-1`` and ``m`` not dividing ``j``."""
    _check_stable(g, n)
    return [j for j in range(m, 4 * g - 4 + 2 * n) if j % m]


def denominator_product(m: int, g: int, n: int, mu: Sequence) -> Fraction:
    """``prod_i prod_j (mu_i - j/m)``; never zero at integer parts."""
    js = denominator_exponents(m, g, n)
    if len(mu) != n:
        raise ValueError(f"expected {n} parts, got {len(mu)}")
    out = Fraction(1)
    for x in mu:
        for j in js:
            out *= Fraction(x) - Fraction(j, m)
    return out


def _fock_value(m: int, g: int, mu: tuple[int, ...]) -> Fraction:
    from .fockspace import bms_fock

    return bms_fock(m, g, mu)


def normalized_value(m: int, g: int, mu: Sequence[int], value: Fraction | None = None) -> Fraction:
    """``b_{g,mu} * denominator_product / prod prefactor(mu_i)``, which equals ``Poly(mu)``."""
    mu = tuple(int(x) for x in mu)
    n = len(mu)
    _check_stable(g, n)
    if value is None:
        value = _fock_value(m, g, mu)
    pref = math.prod((prefactor(m, x) for x in mu), start=Fraction(1))
    return Fraction(value) * denominator_product(m, g, n, mu) / pref


# ---------------------------------------------------------------------------
# Elementary symmetric basis
# ---------------------------------------------------------------------------


def _elementary_values(mu: Sequence[int]) -> list[int]:
    """``[e_1, ..., e_n]`` evaluated at ``mu``."""
    e = [1] + [0] * len(mu)
    for x in mu:
        for j in range(len(mu), 0, -1):
            e[j] += e[j - 1] * x
    return e[1:]


def _e_exponents(n: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent vectors ``a`` with ``sum a <= degree``; ``prod e_j^{a_j}`` has per-variable degree ``sum a``."""
    out = []
    for total in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), total):
            a = [0] * n
            for j in combo:
                a[j] += 1
            out.append(tuple(a))
    return out


def _e_monomial_value(a: Sequence[int], e: Sequence[int]) -> int:
    return math.prod(ej**aj for ej, aj in zip(e, a))


def _elementary_polys(names: Sequence[str]) -> list[MPoly]:
    n = len(names)
    out = []
    for j in range(1, n + 1):
        terms = {}
        for combo in itertools.combinations(range(n), j):
            terms[tuple(1 if i in combo else 0 for i in range(n))] = 1
        out.append(MPoly(names, terms))
    return out


def _e_to_mpoly(coeffs: Mapping[tuple[int, ...], Fraction], names: Sequence[str]) -> MPoly:
    es = _elementary_polys(names)
    out = MPoly.const(0, names)
    for a, c in coeffs.items():
        if not c:
            continue
        term = MPoly.const(c, names)
        for ej, aj in zip(es, a):
            if aj:
                term = term * ej**aj
        out = out + term
    return out.with_vars(names)


def _grid(n: int, base: int, degree: int) -> list[tuple[int, ...]]:
    # sorted points of the tensor grid {base..base+degree}^n; unisolvent for
    # symmetric polynomials of per-variable degree <= degree
    nodes = range(base, base + degree + 1)
    return [tuple(sorted(c, reverse=True)) for c in itertools.combinations_with_replacement(nodes, n)]


def _nontrivial(m: int, g: int, mu: Sequence[int]) -> bool:
    # parts for which the cycle-count constraint does not force b = 0
    return 2 + (m - 1) * sum(mu) - len(mu) - 2 * g >= m


def _holdout(m: int, g: int, n: int, base: int, degree: int, count: int) -> list[tuple[int, ...]]:
    """Points outside the grid where ``b`` is not forced to vanish.

    Restricting to such points keeps a run of forced zeros from certifying
    the zero polynomial.
    """
    top = base + degree + 1
    pts: list[tuple[int, ...]] = []
    hi = top + count
    while len(pts) < count:
        cands = [
            c
            for c in itertools.combinations_with_replacement(range(base, hi), n)
            if max(c) >= top and _nontrivial(m, g, c)
        ]
        cands.sort(key=lambda c: (sum(c), c))
        pts = [tuple(sorted(c, reverse=True)) for c in cands[:count]]
        hi += 1
    return pts


# ---------------------------------------------------------------------------
# Fitted form
# ---------------------------------------------------------------------------


@dataclass
class QuasiPolyForm:
    """Fitted ``Poly_{g,n}`` together with the data used to certify it."""

    m: int
    g: int
    n: int
    poly: MPoly
    poles: list[int]
    grid: list[tuple[int, ...]]
    holdout: list[tuple[int, ...]]
    degree: int
    degree_cap: int
    attempts: list[int] = field(default_factory=list)

    @property
    def total_degree(self) -> int:
        return self.poly.total_degree()

    def poly_value(self, mu: Sequence[int]) -> Fraction:
        return self.poly.subs(dict(zip(self.poly.vars, mu)))

    def evaluate(self, mu: Sequence[int]) -> Fraction:
        """Reconstruct ``b_{g,mu}`` from the form."""
        mu = tuple(mu)
        pref = math.prod((prefactor(self.m, x) for x in mu), start=Fraction(1))
        return pref * self.poly_value(mu) / denominator_product(self.m, self.g, self.n, mu)

    def is_symmetric(self) -> bool:
        names = self.poly.vars
        for i in range(len(names) - 1):
            swapped = list(names)
            swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
            if MPoly(swapped, self.poly.terms).with_vars(names) != self.poly:
                return False
        return True

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "g": self.g,
            "n": self.n,
            "poly": self.poly.to_json(),
            "poly_str": str(self.poly),
            "poles": [rat_str(Fraction(j, self.m)) for j in self.poles],
            "grid": [list(p) for p in self.grid],
            "holdout": [list(p) for p in self.holdout],
            "degree": self.degree,
            "degree_cap": self.degree_cap,
            "attempts": self.attempts,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "QuasiPolyForm":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(
            m=data["m"],
            g=data["g"],
            n=data["n"],
            poly=MPoly.from_json(data["poly"]),
            poles=[int(Fraction(p) * data["m"]) for p in data["poles"]],
            grid=[tuple(p) for p in data["grid"]],
            holdout=[tuple(p) for p in data["holdout"]],
            degree=data["degree"],
            degree_cap=data["degree_cap"],
            attempts=list(data.get("attempts", [])),
        )


def _evaluate_points(m, g, points, values, jobs):
    if values is not None:
        return [Fraction(values(p)) for p in points]
    if jobs and jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_fock_value, [m] * len(points), [g] * len(points), points))
    return [_fock_value(m, g, p) for p in points]


def fit_poly(
    m: int,
    g: int,
    n: int,
    degree_cap: int | None = None,
    grid_base: int = 1,
    degree_guess: int = 0,
    holdout: int = 3,
    values: Callable[[tuple[int, ...]], Fraction] | None = None,
    jobs: int = 1,
) -> QuasiPolyForm:
    """Interpolate ``Poly_{g,n}`` with adaptive per-variable degree.

    The per-variable degree starts at ``degree_guess`` and grows until the
    fit reproduces ``holdout`` unseen points, up to ``degree_cap`` (default
    ``6(2g-2+n)``).  ``values(mu)`` supplies ``b_{g,mu}``; defaults to the
    character formula.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    _check_stable(g, n)
    if holdout < 3:
        raise ValueError("at least 3 held-out points are required")
    cap = 6 * (2 * g - 2 + n) if degree_cap is None else degree_cap
    names = mu_vars(n)
    known: dict[tuple[int, ...], Fraction] = {}

    def norm(points):
        missing = [p for p in points if p not in known]
        vals = _evaluate_points(m, g, missing, values, jobs)
        for p, v in zip(missing, vals):
            known[p] = normalized_value(m, g, p, v)
        return [known[p] for p in points]

    attempts = []
    for degree in range(degree_guess, cap + 1):
        attempts.append(degree)
        exps = _e_exponents(n, degree)
        grid = _grid(n, grid_base, degree)
        held = _holdout(m, g, n, grid_base, degree, holdout)
        rows = []
        for p in grid:
            e = _elementary_values(p)
            rows.append([_e_monomial_value(a, e) for a in exps])
        sol = solve_exact(rows, norm(grid))
        coeffs = dict(zip(exps, sol))
        ok = True
        for p, want in zip(held, norm(held)):
            e = _elementary_values(p)
            if sum(c * _e_monomial_value(a, e) for a, c in coeffs.items()) != want:
                ok = False
                break
        if ok:
            poly = _e_to_mpoly(coeffs, names)
            observed = max(poly.degree(v) for v in names) if not poly.is_zero() else 0
            return QuasiPolyForm(
                m=m,
                g=g,
                n=n,
                poly=poly,
                poles=denominator_exponents(m, g, n),
                grid=grid,
                holdout=held,
                degree=observed,
                degree_cap=cap,
                attempts=attempts,
            )
    raise FitFailure(
        f"no symmetric polynomial of per-variable degree <= {cap} fits (m, g, n) = ({m}, {g}, {n})"
    )


def genus0_poly(m: int, n: int) -> MPoly:
    """``Poly_{0,n}`` derived algebraically from the genus-zero closed formula."""
    if n < 3:
        raise ValueError("genus zero is stable only for n >= 3")
    names = mu_vars(n)
    mus = [MPoly.var(v, names) for v in names]
    total = MPoly.const(0, names)
    for x in mus:
        total = total + x
    out = MPoly.const(m, names) * falling_factorial(total * (m - 1) - 1, n - 3)
    js = denominator_exponents(m, 0, n)
    for x in mus:
        # binom(m x - 1, x) / prefactor(m, x) = (m x - 1)_{m-1}
        out = out * falling_factorial(x * m - 1, m - 1)
        for j in js:
            out = out * (x - Fraction(j, m))
    return out.with_vars(names)
