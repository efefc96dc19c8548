"""Integer points of {y : Ay = r, lo <= y <= hi} by elimination plus enumeration.

Gauss-Jordan elimination splits the columns into pivots and free variables;
only the free variables are enumerated, each pivot then follows (or the point
is rejected for being fractional or out of bounds).  The size cap applies to
the box of free variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import LimitError
from .instance import SparseIntMatrix, gauss_jordan

ENUM_CAP = 4_000_000
NUMBA_TABLE_CAP = 1 << 20


@dataclass(frozen=True)
class LatticeSystem:
    n: int
    free: tuple[int, ...]
    pivots: tuple[int, ...]
    d: tuple[int, ...]
    coef: tuple[tuple[int, ...], ...]  # per pivot, coefficients on the free columns
    rhs: tuple[int, ...]
    consistent: bool

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def order(self) -> np.ndarray:
        """Combined index (free first, then pivots) of each original column."""
        pos = np.empty(self.n, dtype=np.int64)
        for k, j in enumerate(self.free + self.pivots):
            pos[j] = k
        return pos


def build_lattice_system(a: SparseIntMatrix, rhs: Sequence[int] | None = None) -> LatticeSystem:
    rhs = [0] * a.rows if rhs is None else list(rhs)
    rows = [r + [b] for r, b in zip(a.to_dense(), rhs)]
    basis, status = gauss_jordan(rows, a.cols)
    pivots = tuple(p for p, _, _ in basis)
    pset = set(pivots)
    free = tuple(j for j in range(a.cols) if j not in pset)
    return LatticeSystem(
        n=a.cols,
        free=free,
        pivots=pivots,
        d=tuple(row[p] for p, row, _ in basis),
        coef=tuple(tuple(row[f] for f in free) for _, row, _ in basis),
        rhs=tuple(row[-1] for _, row, _ in basis),
        consistent="inconsistent" not in status,
    )


def _free_box_size(flo, fhi) -> int:
    size = 1
    for l, h in zip(flo, fhi):
        size *= max(0, h - l + 1)
    return size


def _arrays(sys: LatticeSystem, lo, hi, dtype):
    flo = np.array([lo[j] for j in sys.free], dtype=dtype)
    fhi = np.array([hi[j] for j in sys.free], dtype=dtype)
    plo = np.array([lo[j] for j in sys.pivots], dtype=dtype)
    phi = np.array([hi[j] for j in sys.pivots], dtype=dtype)
    M = np.array(sys.coef, dtype=dtype).reshape(len(sys.pivots), len(sys.free))
    d = np.array(sys.d, dtype=dtype)
    rhs = np.array(sys.rhs, dtype=dtype)
    return flo, fhi, M, d, rhs, plo, phi


def _int64_ok(sys: LatticeSystem, lo, hi) -> bool:
    span = max([abs(v) for v in list(lo) + list(hi)] + [1])
    for row, r in zip(sys.coef, sys.rhs):
        if abs(r) + sum(abs(c) for c in row) * span >= _kernels.INT64_SAFE:
            return False
    return span < _kernels.INT64_SAFE


def lattice_points(sys: LatticeSystem, lo: Sequence[int], hi: Sequence[int],
                   cap: int = ENUM_CAP) -> np.ndarray:
    """All integer solutions inside [lo, hi], as rows in original column order."""
    if not sys.consistent:
        return np.empty((0, sys.n), dtype=np.int64)
    flo = [lo[j] for j in sys.free]
    fhi = [hi[j] for j in sys.free]
    size = _free_box_size(flo, fhi)
    if size > cap:
        raise LimitError("enumeration box", size, cap)
    if size == 0:
        return np.empty((0, sys.n), dtype=np.int64)
    dtype = np.int64 if _int64_ok(sys, lo, hi) else object
    args = _arrays(sys, lo, hi, dtype)
    if dtype == np.int64 and _kernels.numba_enabled():
        pts = _kernels.points_numba(*args)
    else:
        pts = _kernels.points_numpy(*args, dtype=dtype)
    return pts[:, sys.order()]


def lattice_argmin(sys: LatticeSystem, lo: Sequence[int], hi: Sequence[int],
                   costs: Sequence[Callable[[int], int]], cap: int = ENUM_CAP):
    """Minimize sum_j costs[j](y_j) over integer solutions in [lo, hi].

    Every cost must be convex.  Returns ``(cost, y)`` or None; ties go to
    the lexicographically smallest y.
    """
    if not sys.consistent:
        return None
    if any(l > h for l, h in zip(lo, hi)):
        return None
    lo, hi = list(lo), list(hi)
    for k, j in enumerate(sys.free):
        if all(row[k] == 0 for row in sys.coef):
            # a free column no equation mentions is minimized on its own
            lo[j] = hi[j] = _convex_argmin(costs[j], lo[j], hi[j])
    flo = [lo[j] for j in sys.free]
    fhi = [hi[j] for j in sys.free]
    size = _free_box_size(flo, fhi)
    if size > cap:
        raise LimitError("enumeration box", size, cap)
    combined = sys.free + sys.pivots
    order = sys.order()
    safe = _int64_ok(sys, lo, hi)
    table_len = sum(hi[j] - lo[j] + 1 for j in combined)
    if safe and _kernels.numba_enabled() and table_len <= NUMBA_TABLE_CAP:
        tables = [[costs[j](v) for v in range(lo[j], hi[j] + 1)] for j in combined]
        worst = sum(max(map(abs, t), default=0) for t in tables)
        if worst < _kernels.INT64_SAFE:
            flat = np.array([c for t in tables for c in t], dtype=np.int64)
            offsets = np.zeros(len(combined) + 1, dtype=np.int64)
            offsets[1:] = np.cumsum([len(t) for t in tables])
            lo_all = np.array([lo[j] for j in combined], dtype=np.int64)
            found, cost, vec = _kernels.argmin_numba(
                *_arrays(sys, lo, hi, np.int64), flat, offsets, lo_all, order)
            if not found:
                return None
            return int(cost), tuple(int(vec[order[p]]) for p in range(sys.n))
    dtype = np.int64 if safe else object
    fns = [_vector_cost(costs[j], dtype) for j in combined]
    return _kernels.argmin_numpy(*_arrays(sys, lo, hi, dtype), fns, order, dtype=dtype)


def _vector_cost(fn: Callable[[int], int], dtype):
    def apply(vals: np.ndarray) -> np.ndarray:
        uniq, inv = np.unique(vals, return_inverse=True)
        table = [fn(int(v)) for v in uniq]
        if dtype == np.int64 and all(abs(t) < _kernels.INT64_SAFE >> 8 for t in table):
            return np.array(table, dtype=np.int64)[inv.reshape(-1)]
        return np.array(table, dtype=object)[inv.reshape(-1)]
    return apply


def _convex_argmin(fn: Callable[[int], int], lo: int, hi: int) -> int:
    """Smallest minimizer of a convex function on [lo, hi]."""
    while lo < hi:
        mid = (lo + hi) // 2
        if fn(mid + 1) >= fn(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo
