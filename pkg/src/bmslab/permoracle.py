"""Brute-force BMS numbers from the permutation definition, plus closed formulas.

``b^{.,L}_mu`` weighs m-tuples of permutations of ``{1..|mu|}`` whose product
has cycle type ``mu`` and whose cycle counts add up to ``L`` by
``|Aut mu| / |mu|!``.  The connected number additionally requires the tuple to
generate a transitive group.  Because the count is a class function of the
product, we fix one representative ``s`` of the class, enumerate the first
``m-1`` factors and solve for the last; the weight then collapses to
``1 / prod(mu_i)``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from . import _kernels
from .exactmath import falling_factorial

__all__ = [
    "Partition",
    "BmsKey",
    "BudgetError",
    "partitions_of",
    "aut_order",
    "riemann_hurwitz_L",
    "bms_disconnected_bruteforce",
    "bms_connected_bruteforce",
    "genus0_formula",
    "unstable_onepoint",
    "unstable_twopoint",
    "DEFAULT_BUDGET",
]


class BudgetError(RuntimeError):
    """Raised when an enumeration would exceed its configured size."""


@dataclass(frozen=True, order=True)
class Partition:
    """Weakly decreasing tuple of positive integers."""

    parts: tuple[int, ...]
    size: int = field(init=False, compare=False)
    length: int = field(init=False, compare=False)

    def __init__(self, parts: Iterable[int] = ()):
        p = tuple(sorted((int(x) for x in parts), reverse=True))
        if any(x <= 0 for x in p):
            raise ValueError(f"partition parts must be positive: {p}")
        object.__setattr__(self, "parts", p)
        object.__setattr__(self, "size", sum(p))
        object.__setattr__(self, "length", len(p))

    @classmethod
    def parse(cls, text: str) -> "Partition":
        text = text.strip()
        if not text:
            return cls(())
        return cls(int(t) for t in text.replace(" ", "").split(","))

    @property
    def multiplicities(self) -> dict[int, int]:
        return dict(Counter(self.parts))

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i):
        return self.parts[i]

    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        return Partition(sum(1 for p in self.parts if p > j) for j in range(self.parts[0]))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"

    def __repr__(self) -> str:
        return f"Partition({self.parts})"


def _as_partition(mu) -> Partition:
    return mu if isinstance(mu, Partition) else Partition(mu)


@dataclass(frozen=True)
class BmsKey:
    m: int
    g: int
    mu: Partition


def partitions_of(n: int, max_part: int | None = None) -> list[Partition]:
    """All partitions of ``n`` in reverse lexicographic order."""
    return [Partition(p) for p in _partitions(n, n if max_part is None else max_part)]


@lru_cache(maxsize=None)
def _partitions(n: int, max_part: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


def aut_order(mu) -> int:
    mu = _as_partition(mu)
    out = 1
    for mult in mu.multiplicities.values():
        out *= math.factorial(mult)
    return out


def riemann_hurwitz_L(m: int, g: int, mu) -> int | None:
    """Total cycle count forced by genus; ``None`` when fewer than ``m`` cycles remain."""
    mu = _as_partition(mu)
    L = 2 + (m - 1) * mu.size - mu.length - 2 * g
    if L < m:
        return None
    return L


# default enumeration bounds: largest |mu| per m
DEFAULT_BUDGET = {1: 8, 2: 6, 3: 5, 4: 4}
# hard ceiling on enumerated tuples, independent of the per-m table
MAX_TUPLES = 5 * 10**8


def _check_budget(m: int, n: int, budget: int | None) -> None:
    limit = budget if budget is not None else DEFAULT_BUDGET.get(m, 3)
    cost = math.factorial(n) ** max(m - 1, 0)
    if n > limit or cost > MAX_TUPLES:
        raise BudgetError(
            f"enumeration for m={m}, |mu|={n} exceeds budget |mu|<={limit} "
            f"(estimated {cost} tuples)"
        )


def _representative(mu: Partition) -> np.ndarray:
    """A permutation of cycle type mu in one-line notation."""
    perm = np.empty(mu.size, dtype=np.int64)
    start = 0
    for part in mu.parts:
        for i in range(part):
            perm[start + i] = start + (i + 1) % part
        start += part
    return perm


_hist_cache: dict[tuple[int, tuple[int, ...]], np.ndarray] = {}


def _histogram(m: int, mu: Partition, budget: int | None) -> np.ndarray:
    key = (m, mu.parts)
    hist = _hist_cache.get(key)
    if hist is None:
        _check_budget(m, mu.size, budget)
        perms = _kernels.all_permutations(mu.size)
        hist = _kernels.count_tuples(perms, _representative(mu), m, m * max(mu.size, 1))
        _hist_cache[key] = hist
    return hist


def _weight(mu: Partition) -> Fraction:
    # |Aut| / n! * |C_mu| = 1 / prod(mu_i)
    return Fraction(1, math.prod(mu.parts))


def bms_disconnected_bruteforce(m: int, mu, L: int, budget: int | None = None) -> Fraction:
    """Disconnected count ``b^{.,L}_mu`` by enumeration."""
    if m < 1:
        raise ValueError("m must be >= 1")
    mu = _as_partition(mu)
    if L < m:
        return Fraction(0)
    hist = _histogram(m, mu, budget)
    if L >= hist.shape[0]:
        return Fraction(0)
    return int(hist[L].sum()) * _weight(mu)


def bms_connected_bruteforce(m: int, g: int, mu, budget: int | None = None) -> Fraction:
    """Connected count ``b^o_{g,mu}`` by enumeration with a transitivity test."""
    if m < 1:
        raise ValueError("m must be >= 1")
    mu = _as_partition(mu)
    if mu.length == 0:
        raise ValueError("connected numbers need a nonempty partition")
    L = riemann_hurwitz_L(m, g, mu)
    if L is None:
        return Fraction(0)
    hist = _histogram(m, mu, budget)
    if L >= hist.shape[0]:
        return Fraction(0)
    return int(hist[L, 1]) * _weight(mu)


def genus0_formula(m: int, mu) -> Fraction:
    """Closed genus-zero formula ``m ((m-1)|mu|-1)_{n-3} prod binom(m mu_i - 1, mu_i)``."""
    mu = _as_partition(mu)
    if mu.length == 0:
        raise ValueError("empty partition")
    out = Fraction(m) * falling_factorial((m - 1) * mu.size - 1, mu.length - 3)
    for part in mu.parts:
        out *= math.comb(m * part - 1, part)
    return out


def unstable_onepoint(m: int, k: int) -> Fraction:
    """``b^o_{0,k} = m (mk-1)! / (k! (mk-k+1)!)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return Fraction(m * math.factorial(m * k - 1), math.factorial(k) * math.factorial(m * k - k + 1))


def unstable_twopoint(m: int, k1: int, k2: int) -> Fraction:
    """``b^o_{0,(k1,k2)} = m / (m(k1+k2) - k1 - k2) * binom(mk1-1, k1) binom(mk2-1, k2)``."""
    if k1 < 1 or k2 < 1:
        raise ValueError("parts must be >= 1")
    return (
        Fraction(m, m * (k1 + k2) - k1 - k2)
        * math.comb(m * k1 - 1, k1)
        * math.comb(m * k2 - 1, k2)
    )
