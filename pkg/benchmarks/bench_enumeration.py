"""Time the permutation-tuple kernel with and without numba.

Usage: ``python benchmarks/bench_enumeration.py [--m 2] [--n 6] [--repeat 3]``.
Both backends must return identical histograms; the script exits 1 otherwise.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from bmslab import _kernels
from bmslab.permoracle import Partition, _representative


def _time(fn, repeat: int) -> tuple[float, np.ndarray]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    perms = _kernels.all_permutations(args.n)
    target = _representative(Partition((args.n,)))
    max_cycles = args.m * args.n
    if not _kernels.HAS_NUMBA:
        print("numba unavailable; only the numpy path can run", file=sys.stderr)
        return 1
    # first call compiles
    t0 = time.perf_counter()
    _kernels._count_tuples_nb(perms, target, args.m, max_cycles)
    compile_s = time.perf_counter() - t0
    t_nb, h_nb = _time(lambda: _kernels._count_tuples_nb(perms, target, args.m, max_cycles), args.repeat)
    t_np, h_np = _time(lambda: _kernels.count_tuples_numpy(perms, target, args.m, max_cycles), args.repeat)
    same = bool((h_nb == h_np).all())
    print(f"m={args.m} n={args.n} tuples={len(perms) ** (args.m - 1)}")
    print(f"numba : {t_nb:.4f} s (first call incl. compile {compile_s:.2f} s)")
    print(f"numpy : {t_np:.4f} s")
    print(f"speedup {t_np / t_nb:.1f}x, histograms identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
