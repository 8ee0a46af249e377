"""Fermionic Fock space: characters, vacuum expectations and windowed operators.

The BMS generating function is a vacuum expectation in the charge-zero
sector of the semi-infinite wedge.  We evaluate it through the Schur
expansion of ``prod alpha_{-mu_i} |0>`` (symmetric group characters) and the
content eigenvalues of ``D(hbar)``.  Operator-level identities are checked on
finite index windows.

Half-integer indices ``l`` of ``E_{i,j}`` are passed around as Fractions.
A basis vector ``v_lambda`` is identified with the set
``S(lambda) = {lambda_i - i + 1/2 : i >= 1}``.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .exactmath import HSeries, MPoly
from .permoracle import BudgetError, Partition, partitions_of

__all__ = [
    "hook_dimension",
    "character",
    "character_mn",
    "power_sum_expansion",
    "content_product",
    "disconnected_vev",
    "connected_correlator",
    "bms_fock",
    "apply_E",
    "apply_E_vector",
    "commutator_check",
    "shift_commutator_check",
    "WindowedOperator",
    "windowed_conjugation_oracle",
    "WindowTooSmall",
    "FOCK_BUDGET",
]

FOCK_BUDGET = 32
HALF = Fraction(1, 2)


def _part(mu) -> Partition:
    return mu if isinstance(mu, Partition) else Partition(mu)


# ---------------------------------------------------------------------------
# Characters
# ---------------------------------------------------------------------------


def hook_dimension(lam) -> int:
    """Number of standard Young tableaux, by the hook length formula."""
    lam = _part(lam)
    conj = lam.conjugate().parts
    hooks = 1
    for i, row in enumerate(lam.parts):
        for j in range(row):
            hooks *= (row - j - 1) + (conj[j] - i - 1) + 1
    return math.factorial(lam.size) // hooks


class CharCache:
    """Thread-safe memo of character values keyed by (lambda, mu)."""

    def __init__(self):
        self._table: dict[tuple[tuple, tuple], int] = {}
        self._lock = threading.Lock()

    def get(self, key):
        return self._table.get(key)

    def put(self, key, value: int) -> None:
        with self._lock:
            self._table[key] = value

    def __len__(self):
        return len(self._table)


_CHARS = CharCache()


def _beta(parts: tuple[int, ...], n: int) -> list[int]:
    """Beta-numbers ``lambda_i + n - i`` (i = 1..n), strictly decreasing."""
    padded = list(parts) + [0] * (n - len(parts))
    return [padded[i] + n - 1 - i for i in range(n)]


def _from_beta(beta: Iterable[int]) -> tuple[int, ...]:
    b = sorted(beta, reverse=True)
    n = len(b)
    return tuple(x for x in (b[i] - (n - 1 - i) for i in range(n)) if x > 0)


def _mn(lam: tuple[int, ...], mu: tuple[int, ...]) -> int:
    if not mu:
        return 1 if not lam else 0
    key = (lam, mu)
    hit = _CHARS.get(key)
    if hit is not None:
        return hit
    r, rest = mu[0], mu[1:]
    n = max(len(lam), 1)
    beta = _beta(lam, n)
    bset = set(beta)
    total = 0
    # removing an r-rim hook = lowering one beta-number by r onto a free slot
    for b in beta:
        c = b - r
        if c < 0 or c in bset:
            continue
        height = sum(1 for x in beta if c < x < b)
        new = _from_beta((bset - {b}) | {c})
        total += (-1) ** height * _mn(new, rest)
    _CHARS.put(key, total)
    return total


def character_mn(lam, mu) -> int:
    """Character by Murnaghan-Nakayama rim-hook removal."""
    lam, mu = _part(lam), _part(mu)
    if lam.size != mu.size:
        raise ValueError(f"size mismatch: |{lam}| != |{mu}|")
    return _mn(lam.parts, mu.parts)


def character(lam, mu) -> int:
    """Irreducible character of S_n indexed by ``lam`` at cycle type ``mu``."""
    return character_mn(lam, mu)


def _add_strip(vec: dict[tuple, int], r: int) -> dict[tuple, int]:
    """Apply ``alpha_{-r}`` to a vector of partitions (border-strip addition)."""
    out: dict[tuple, int] = {}
    for lam, coef in vec.items():
        n = len(lam) + r
        beta = _beta(lam, n)
        bset = set(beta)
        for b in beta:
            c = b + r
            if c in bset:
                continue
            height = sum(1 for x in beta if b < x < c)
            new = _from_beta((bset - {b}) | {c})
            out[new] = out.get(new, 0) + (-1) ** height * coef
    return {k: v for k, v in out.items() if v}


@lru_cache(maxsize=None)
def _power_sum_expansion(mu: tuple[int, ...]) -> tuple[tuple[tuple, int], ...]:
    vec: dict[tuple, int] = {(): 1}
    for r in mu:
        vec = _add_strip(vec, r)
    return tuple(sorted(vec.items()))


def power_sum_expansion(mu) -> dict[Partition, int]:
    """Coefficients of ``prod_i alpha_{-mu_i} |0>`` in the basis ``v_lambda``.

    These are the characters ``chi^lambda_mu``, produced here by moving
    fermions rather than removing rim hooks.
    """
    return {Partition(lam): c for lam, c in _power_sum_expansion(_part(mu).parts)}


# ---------------------------------------------------------------------------
# Vacuum expectations
# ---------------------------------------------------------------------------


def _contents(lam: Partition) -> list[int]:
    return [j - i for i, row in enumerate(lam.parts) for j in range(row)]


def content_product(lam, m: int, order: int | None = None) -> HSeries:
    """``prod_{boxes} (1 + hbar * content)^m``, truncated at ``hbar^order``."""
    lam = _part(lam)
    # elementary symmetric functions of the contents
    e = [Fraction(1)]
    for c in _contents(lam):
        e = [a + (e[i - 1] * c if i else 0) for i, a in enumerate(e + [Fraction(0)])]
    base = HSeries(dict(enumerate(e)))
    out = HSeries.const(1)
    for _ in range(m):
        out = out * base
    return out if order is None else out.truncate(order)


def _check_size(n: int) -> None:
    if n > FOCK_BUDGET:
        raise BudgetError(f"|mu|={n} exceeds the character budget {FOCK_BUDGET}")


@lru_cache(maxsize=None)
def _disconnected(m: int, mu: tuple[int, ...]) -> HSeries:
    n = sum(mu)
    _check_size(n)
    total = HSeries()
    for lam in partitions_of(n):
        chi = _mn(lam.parts, mu)
        if chi:
            total = total + content_product(lam, m) * Fraction(hook_dimension(lam) * chi, math.factorial(n))
    return total * Fraction(1, math.prod(mu))


def disconnected_vev(m: int, mu, order: int | None = None) -> HSeries:
    """``<e^{alpha_1} D^m prod alpha_{-mu_i}/mu_i>`` as a polynomial in hbar."""
    mu = _part(mu)
    out = _disconnected(m, mu.parts)
    return out if order is None else out.truncate(order)


def _set_partitions(items: Sequence[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in _set_partitions(rest):
        yield [[first]] + p
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]


def connected_correlator(m: int, mu, order: int | None = None) -> HSeries:
    """Connected correlator ``<prod A(mu_i)>^o`` as a Laurent polynomial in hbar."""
    mu = _part(mu)
    parts = mu.parts
    block_cache: dict[tuple[int, ...], HSeries] = {}

    def block(idx: list[int]) -> HSeries:
        key = tuple(sorted(parts[i] for i in idx))
        val = block_cache.get(key)
        if val is None:
            val = _disconnected(m, tuple(sorted(key, reverse=True))).shift(-sum(key))
            block_cache[key] = val
        return val

    total = HSeries()
    for pi in _set_partitions(list(range(len(parts)))):
        r = len(pi)
        term = HSeries.const((-1) ** (r - 1) * math.factorial(r - 1))
        for b in pi:
            term = term * block(b)
        total = total + term
    return total if order is None else total.truncate(order)


def bms_fock(m: int, g: int, mu) -> Fraction:
    """Connected BMS number via the character formula."""
    mu = _part(mu)
    if mu.length == 0:
        raise ValueError("empty partition")
    return connected_correlator(m, mu)[2 * g - 2 + mu.length]


# ---------------------------------------------------------------------------
# Semi-infinite wedge action
# ---------------------------------------------------------------------------


def _maya(lam: Partition, depth: int) -> list[Fraction]:
    """The first ``depth`` elements of S(lambda), decreasing."""
    padded = list(lam.parts) + [0] * max(0, depth - lam.length)
    return [padded[i] - (i + 1) + HALF for i in range(depth)]


def _from_maya(s: list[Fraction]) -> Partition:
    s = sorted(s, reverse=True)
    return Partition(int(x + i + HALF) for i, x in enumerate(s) if x + i + HALF > 0)


def apply_E(i: Fraction, j: Fraction, lam) -> tuple[int, Partition] | None:
    """``E_{i,j} v_lambda`` as ``(sign, mu)`` or ``None`` for zero."""
    return _apply_E(Fraction(i), Fraction(j), _part(lam))


@lru_cache(maxsize=1 << 16)
def _apply_E(i: Fraction, j: Fraction, lam: Partition) -> tuple[int, Partition] | None:
    depth = lam.length + int(abs(i) + abs(j)) + 2
    s = _maya(lam, depth)
    floor = s[-1]
    # below the listed part every index is occupied
    occupied = lambda x: x in s or x < floor  # noqa: E731
    if i == j:
        if i > 0:
            return (1, lam) if occupied(i) else None
        return None if occupied(i) else (-1, lam)
    if not occupied(j) or occupied(i):
        return None
    lo, hi = min(i, j), max(i, j)
    between = sum(1 for x in s if lo < x < hi)
    new = [x for x in s if x != j] + [i]
    return ((-1) ** between, _from_maya(new))


def apply_E_vector(i, j, vec: dict) -> dict:
    out: dict = {}
    for lam, c in vec.items():
        r = apply_E(i, j, lam)
        if r is not None:
            sgn, mu = r
            out[mu] = out.get(mu, 0) + sgn * c
    return {k: v for k, v in out.items() if v}


def _half_integers(bound: Fraction) -> list[Fraction]:
    top = int(bound - HALF)
    return [Fraction(2 * t + 1, 2) for t in range(-top - 1, top + 1)]


def commutator_check(bound: Fraction = Fraction(9, 2), max_size: int = 4) -> list[tuple]:
    """Check the ``[E_ab, E_cd]`` relation on every ``v_lambda`` with ``|lambda| <= max_size``.

    Returns the list of failing ``(a, b, c, d, lambda)``; empty on success.
    """
    idx = _half_integers(Fraction(bound))
    basis = [lam for n in range(max_size + 1) for lam in partitions_of(n)]
    failures = []
    for a in idx:
        for b in idx:
            for c in idx:
                for d in idx:
                    central = 0
                    if b == c and a == d:
                        central = int(b > 0) - int(d > 0)
                    for lam in basis:
                        v = {lam: 1}
                        lhs = _sub(
                            apply_E_vector(a, b, apply_E_vector(c, d, v)),
                            apply_E_vector(c, d, apply_E_vector(a, b, v)),
                        )
                        rhs: dict = {}
                        if b == c:
                            rhs = _add(rhs, apply_E_vector(a, d, v))
                        if a == d:
                            rhs = _sub(rhs, apply_E_vector(c, b, v))
                        if central:
                            rhs = _add(rhs, {lam: central})
                        if lhs != rhs:
                            failures.append((a, b, c, d, lam))
    return failures


def _add(x: dict, y: dict, sign: int = 1) -> dict:
    out = dict(x)
    for k, v in y.items():
        out[k] = out.get(k, 0) + sign * v
    return {k: v for k, v in out.items() if v}


def _sub(x: dict, y: dict) -> dict:
    return _add(x, y, -1)


def _apply_operator(terms: dict[tuple[Fraction, Fraction], Fraction], vec: dict) -> dict:
    out: dict = {}
    for (i, j), c in terms.items():
        out = _add(out, {k: v * c for k, v in apply_E_vector(i, j, vec).items()})
    return out


def shift_commutator_check(
    f: Callable[[Fraction], Fraction], a: int, max_size: int = 4, window: Fraction = Fraction(21, 2)
) -> bool:
    """Check ``[sum E_{l-1,l}, sum f(l) E_{l+a,l}]`` against the difference formula.

    Both sides act on every ``v_lambda`` with ``|lambda| <= max_size``.  The
    infinite sums are cut at ``|l| <= window``; the window is chosen wide
    enough that no basis vector sees the cut.
    """
    ls = _half_integers(Fraction(window))
    alpha1 = {(l - 1, l): Fraction(1) for l in ls}
    fop = {(l + a, l): Fraction(f(l)) for l in ls}
    rhs_op = {(l + a - 1, l): Fraction(f(l)) - Fraction(f(l - 1)) for l in ls}
    central = Fraction(f(-HALF)) if a == 1 else Fraction(0)
    for n in range(max_size + 1):
        for lam in partitions_of(n):
            v = {lam: 1}
            lhs = _sub(
                _apply_operator(alpha1, _apply_operator(fop, v)),
                _apply_operator(fop, _apply_operator(alpha1, v)),
            )
            rhs = _apply_operator({k: c for k, c in rhs_op.items() if c}, v)
            if central:
                rhs = _add(rhs, {lam: central})
            if lhs != rhs:
                return False
    return True


# ---------------------------------------------------------------------------
# Windowed conjugation oracle
# ---------------------------------------------------------------------------


class WindowTooSmall(RuntimeError):
    pass


class WindowedOperator:
    """Matrix entries ``(row, col) -> HSeries`` on a half-integer window plus an Id part."""

    def __init__(self, entries: dict[tuple[Fraction, Fraction], HSeries], identity: HSeries, window: Fraction):
        self.entries = entries
        self.identity = identity
        self.window = window

    def entry(self, row, col) -> HSeries:
        row, col = Fraction(row), Fraction(col)
        if abs(row) > self.window or abs(col) > self.window:
            raise KeyError(f"({row}, {col}) lies outside the trusted window {self.window}")
        return self.entries.get((row, col), HSeries())

    def diagonal(self, q: int, l) -> HSeries:
        """Coefficient of ``E_{l-q, l}``."""
        return self.entry(Fraction(l) - q, l)


def _hpoly_of(coeffs: MPoly) -> dict[int, Fraction]:
    return {e[0]: c for e, c in coeffs.terms.items()}


def _conjugate_window(m: int, k: int, W: int) -> tuple[dict, dict[int, Fraction]]:
    """Conjugate ``sum P_k(l)^m E_{l+k,l}`` by ``e^{alpha_1}`` on columns ``|l| <= W + 1/2``.

    Uses Hadamard's formula with ``ad_{alpha_1}`` computed from the
    ``E_{i,j}`` commutation relation.  Entries that would need columns outside
    the window are discarded as they appear, so the output is exact wherever
    it is defined.
    """
    h = MPoly.var("h")
    cols = _half_integers(Fraction(W) + HALF)
    Y: dict[tuple[Fraction, Fraction], dict[int, Fraction]] = {}
    for l in cols:
        # D^m alpha_{-k} D^{-m} sends l to l+k with weight prod_{i<k} (1 + h(l+i+1/2))^m
        w = MPoly.const(1, ("h",))
        for i in range(k):
            w = w * (1 + h * (l + i + HALF))
        Y[(l + k, l)] = _hpoly_of(w**m)
    total = {key: dict(v) for key, v in Y.items()}
    central: dict[int, Fraction] = {}
    Z = Y
    t = 0
    while Z:
        t += 1
        # [alpha_1, E_{c,d}] = E_{c-1,d} - E_{c,d+1} + delta_{c,1/2} delta_{d,-1/2} Id
        new: dict[tuple[Fraction, Fraction], dict[int, Fraction]] = {}
        for (c, d), val in Z.items():
            for key, sgn in (((c - 1, d), 1), ((c, d + 1), -1)):
                slot = new.setdefault(key, {})
                for e, x in val.items():
                    slot[e] = slot.get(e, 0) + sgn * x
            if c == HALF and d == -HALF:
                for e, x in val.items():
                    central[e] = central.get(e, 0) + x / t
        Z = {}
        for key, val in new.items():
            val = {e: x / t for e, x in val.items() if x}
            # entry (a, b) of ad^t Y reads columns b-t..b; keep only those fully inside
            if val and -W + t - HALF <= key[1] <= W + HALF:
                Z[key] = val
        for key, val in Z.items():
            slot = total.setdefault(key, {})
            for e, x in val.items():
                slot[e] = slot.get(e, 0) + x
        if t > 2 * W + 2:
            break
    return total, central


def windowed_conjugation_oracle(m: int, k: int, W: int, order: int | None = None) -> WindowedOperator:
    """Matrix of ``A(k, hbar)`` on ``|index| <= W`` by explicit conjugation.

    The iteration only sees columns ``|l| <= 2W``; entries with both
    indices inside ``[-W, W]`` are reported and cross-checked against a run
    on a doubled window.
    """
    if k <= 0:
        raise ValueError("k must be a positive integer")
    if W < k + (order or 0):
        raise WindowTooSmall(f"window {W} < k + order = {k + (order or 0)}")

    def build(width: int):
        raw, central = _conjugate_window(m, k, width)
        return raw, central

    inner = Fraction(W)
    raw1, c1 = build(2 * W + m * k + 2)
    raw2, c2 = build(4 * W + 2 * m * k + 4)
    if c1 != c2:
        raise WindowTooSmall("central term depends on the window")
    entries: dict[tuple[Fraction, Fraction], HSeries] = {}
    for key, val in raw1.items():
        if abs(key[0]) <= inner and abs(key[1]) <= inner:
            v2 = {e: x for e, x in raw2.get(key, {}).items() if x}
            v1 = {e: x for e, x in val.items() if x}
            if v1 != v2:
                raise WindowTooSmall(f"entry {key} changes when the window is doubled")
            if v1:
                entries[key] = HSeries(v1).shift(-k) * Fraction(1, k)
    identity = HSeries(c1).shift(-k) * Fraction(1, k)
    if order is not None:
        entries = {key: s.truncate(order) for key, s in entries.items()}
        identity = identity.truncate(order)
    return WindowedOperator(entries, identity, inner)
