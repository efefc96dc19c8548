"""Time the enumeration kernels with and without numba.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The numba path is selected per call through TDIP_NUMBA, so both variants run
in one process.  The first numba call (compilation) is excluded.
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from tdip import _kernels
from tdip.graver import enumerate_graver_small
from tdip.instance import SparseIntMatrix
from tdip.lattice import build_lattice_system, lattice_argmin, lattice_points


def _cases():
    a = SparseIntMatrix.from_dense([[1, 2, -1, 1, 0, 1], [0, 1, 1, -2, 1, 1]])
    sys_ = build_lattice_system(a, [0, 0])
    lo, hi = [-6] * 6, [6] * 6
    costs = [lambda v, w=w: w * v + v * v for w in (3, -1, 2, 0, -4, 1)]
    chain = SparseIntMatrix.from_dense([[2, -1, 0, 0], [0, 2, -1, 0], [0, 0, 2, -1]])
    rng = np.random.default_rng(0)
    cands = rng.integers(-3, 4, size=(4000, 5)).astype(np.int64)
    cands = cands[np.abs(cands).sum(axis=1).argsort(kind="stable")]
    return {
        "lattice_points 6 cols box 13^4": lambda: lattice_points(sys_, lo, hi),
        "lattice_argmin 6 cols box 13^4": lambda: lattice_argmin(sys_, lo, hi, costs),
        "graver chain n=4": lambda: enumerate_graver_small(chain),
        "sieve 4000 candidates": lambda: (_kernels.sieve_numba(cands) if _kernels.numba_enabled()
                                          else _kernels.sieve_numpy(cands)),
    }


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels.numba is None:
        print("numba is not installed; only the numpy path is available")
    print(f"{'kernel':34s} {'numpy (s)':>10s} {'numba (s)':>10s} {'speedup':>8s}")
    for name, fn in _cases().items():
        os.environ["TDIP_NUMBA"] = "0"
        slow = _time(fn, args.repeat)
        if _kernels.numba is None:
            print(f"{name:34s} {slow:10.4f} {'-':>10s} {'-':>8s}")
            continue
        os.environ["TDIP_NUMBA"] = "1"
        fn()  # compile
        fast = _time(fn, args.repeat)
        print(f"{name:34s} {slow:10.4f} {fast:10.4f} {slow / fast:8.1f}x")


if __name__ == "__main__":
    main()
