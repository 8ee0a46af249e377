"""Hot loops for brute-force enumeration of permutation tuples.

Two interchangeable backends count tuples ``(t_1, ..., t_m)`` with
``t_1 t_2 ... t_m = s`` for a fixed target ``s``, bucketed by total cycle
count and by whether the generated group is transitive:

* a numba ``@njit`` kernel (default when numba imports), and
* a vectorized numpy kernel.

Set ``BMSLAB_NO_NUMBA=1`` to force the numpy path.
"""

from __future__ import annotations

import itertools
import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False


def use_numba() -> bool:
    return HAS_NUMBA and os.environ.get("BMSLAB_NO_NUMBA", "") not in ("1", "true", "yes")


def all_permutations(n: int) -> np.ndarray:
    """Every permutation of ``range(n)`` as rows of an ``(n!, n)`` int64 array."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64)


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------


def _orbit_labels(gens: list[np.ndarray], n: int) -> np.ndarray:
    """Per-row minimum point of each orbit under the given batch of generators."""
    batch = gens[0].shape[0]
    lab = np.broadcast_to(np.arange(n, dtype=np.int64), (batch, n)).copy()
    rows = np.arange(batch)[:, None]
    for _ in range(n):
        new = lab
        for g in gens:
            new = np.minimum(new, lab[rows, g])
        # also pull labels backwards along each generator
        for g in gens:
            np.minimum.at(new, (np.broadcast_to(rows, g.shape), g), lab)
        if np.array_equal(new, lab):
            break
        lab = new
    return lab


def _cycle_counts_np(perms: np.ndarray) -> np.ndarray:
    n = perms.shape[1]
    if n == 0:
        return np.zeros(perms.shape[0], dtype=np.int64)
    lab = _orbit_labels([perms], n)
    return (lab == np.arange(n)).sum(axis=1)


def count_tuples_numpy(perms: np.ndarray, target: np.ndarray, m: int, max_cycles: int) -> np.ndarray:
    """Histogram ``out[c, t]``: c = total cycles, t = 1 when transitive."""
    nperm, n = perms.shape
    out = np.zeros((max_cycles + 1, 2), dtype=np.int64)
    cyc = _cycle_counts_np(perms)
    if m == 1:
        # the single permutation must equal the target
        c = _cycle_counts_np(target[None, :])[0]
        conn = int(_orbit_labels([target[None, :]], n).max() == 0) if n else 1
        out[c, conn] += 1
        return out
    for head in itertools.product(range(nperm), repeat=m - 2):
        prefix = np.arange(n, dtype=np.int64)
        head_cycles = 0
        for idx in head:
            prefix = prefix[perms[idx]]
            head_cycles += cyc[idx]
        # full prefix over the last free factor, vectorized: P = prefix o perms[j]
        P = prefix[perms]
        Pinv = np.argsort(P, axis=1)
        last = Pinv[:, target]
        total = head_cycles + cyc + _cycle_counts_np(last)
        gens = [np.broadcast_to(target, (nperm, n)), perms]
        gens += [np.broadcast_to(perms[idx], (nperm, n)) for idx in head]
        lab = _orbit_labels(gens, n)
        conn = (lab.max(axis=1) == 0).astype(np.int64)
        np.add.at(out, (total, conn), 1)
    return out


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def _cycles_nb(p):
        n = p.shape[0]
        seen = np.zeros(n, dtype=np.bool_)
        c = 0
        for i in range(n):
            if not seen[i]:
                c += 1
                j = i
                while not seen[j]:
                    seen[j] = True
                    j = p[j]
        return c

    @njit(cache=True)
    def _find(parent, i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    @njit(cache=True)
    def _count_tuples_nb(perms, target, m, max_cycles):
        nperm = perms.shape[0]
        n = perms.shape[1]
        out = np.zeros((max_cycles + 1, 2), dtype=np.int64)
        free = m - 1
        idx = np.zeros(max(free, 1), dtype=np.int64)
        cyc = np.empty(nperm, dtype=np.int64)
        for j in range(nperm):
            cyc[j] = _cycles_nb(perms[j])
        prefix = np.empty(n, dtype=np.int64)
        tmp = np.empty(n, dtype=np.int64)
        pinv = np.empty(n, dtype=np.int64)
        last = np.empty(n, dtype=np.int64)
        parent = np.empty(n, dtype=np.int64)
        while True:
            for i in range(n):
                prefix[i] = i
            total = 0
            for f in range(free):
                p = perms[idx[f]]
                for i in range(n):
                    tmp[i] = prefix[p[i]]
                for i in range(n):
                    prefix[i] = tmp[i]
                total += cyc[idx[f]]
            for i in range(n):
                pinv[prefix[i]] = i
            for i in range(n):
                last[i] = pinv[target[i]]
            total += _cycles_nb(last)
            for i in range(n):
                parent[i] = i
            comps = n
            for f in range(free + 1):
                for i in range(n):
                    if f < free:
                        j = perms[idx[f]][i]
                    else:
                        j = target[i]
                    a = _find(parent, i)
                    b = _find(parent, j)
                    if a != b:
                        parent[a] = b
                        comps -= 1
            conn = 1 if comps <= 1 else 0
            out[total, conn] += 1
            # odometer
            f = free - 1
            while f >= 0:
                idx[f] += 1
                if idx[f] < nperm:
                    break
                idx[f] = 0
                f -= 1
            if f < 0 or free == 0:
                break
        return out


def count_tuples(perms: np.ndarray, target: np.ndarray, m: int, max_cycles: int) -> np.ndarray:
    """Dispatch to the numba kernel or the numpy fallback."""
    if use_numba():
        return _count_tuples_nb(perms, np.ascontiguousarray(target, dtype=np.int64), m, max_cycles)
    return count_tuples_numpy(perms, np.asarray(target, dtype=np.int64), m, max_cycles)
