"""Brute-force reference answers.

Nothing here touches the solver code paths: the box is enumerated directly
and only the instance types are shared.
"""

from __future__ import annotations

import numpy as np

from .errors import InstanceError, LimitError
from .instance import IpInstance, is_finite
from .report import INFEASIBLE, OPTIMAL, SolveReport, StepResult

BRUTE_CAP = 10_000_000
_CHUNK = 1 << 17
_SAFE = 1 << 62


def _check_box(inst: IpInstance, cap: int) -> list[int]:
    if not inst.finite_bounds():
        raise InstanceError("brute force needs finite bounds")
    sizes = [max(0, u - l + 1) for l, u in zip(inst.lower, inst.upper)]
    total = 1
    for s in sizes:
        total *= s
    if total > cap:
        raise LimitError("brute-force box", total, cap)
    return sizes


def _chunks(lower, sizes):
    """Box points in lexicographic order, as int64 offsets from ``lower``."""
    total = 1
    for s in sizes:
        total *= s
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        pts = np.empty((len(idx), len(sizes)), dtype=np.int64)
        for j in range(len(sizes) - 1, -1, -1):
            idx, pts[:, j] = np.divmod(idx, sizes[j])
        yield pts


def _feasible_rows(inst: IpInstance, offs: np.ndarray) -> np.ndarray:
    """Mask of box points (given as offsets) satisfying Ax = b."""
    dense = inst.a.to_dense()
    lo = list(inst.lower)
    span = max([abs(v) for v in lo + list(inst.upper)] + [1])
    big = max([abs(v) for r in dense for v in r] + [abs(v) for v in inst.b] + [1])
    safe = big * span * (inst.n + 1) < _SAFE
    dt = np.int64 if safe else object
    x = offs.astype(dt) + np.array(lo, dtype=dt)[None, :]
    if not dense:
        return np.ones(len(offs), dtype=bool), x
    A = np.array(dense, dtype=dt)
    ok = np.all(x @ A.T == np.array(inst.b, dtype=dt)[None, :], axis=1)
    return ok, x


def brute_force_solve(inst: IpInstance, cap: int = BRUTE_CAP) -> SolveReport:
    sizes = _check_box(inst, cap)
    tables = []
    for t, l, s in zip(inst.objective.terms, inst.lower, sizes):
        vals = [t(l + k) for k in range(s)]
        dt = np.int64 if all(abs(v) < _SAFE >> 8 for v in vals) else object
        tables.append(np.array(vals, dtype=dt))
    best_val, best_x = None, None
    if all(sizes):
        for offs in _chunks(inst.lower, sizes):
            ok, x = _feasible_rows(inst, offs)
            if not ok.any():
                continue
            sel = offs[ok]
            cost = np.zeros(len(sel), dtype=np.int64)
            for j, tab in enumerate(tables):
                cost = cost + tab[sel[:, j]]
            k = int(np.argmin(cost))  # first minimum = lexicographically first
            if best_val is None or cost[k] < best_val:
                best_val = cost[k]
                best_x = tuple(int(v) for v in x[ok][k])
    if best_x is None:
        return SolveReport(INFEASIBLE, algorithm="brute-force")
    return SolveReport(OPTIMAL, x=best_x, value=int(best_val), algorithm="brute-force")


def brute_force_feasible(inst: IpInstance, cap: int = BRUTE_CAP) -> bool:
    sizes = _check_box(inst, cap)
    if not all(sizes):
        return False
    for offs in _chunks(inst.lower, sizes):
        ok, _ = _feasible_rows(inst, offs)
        if ok.any():
            return True
    return False


def graver_best_step_oracle(inst: IpInstance, x, basis) -> StepResult | None:
    """Best f(x + lam g) over all basis elements g and lam >= 1 keeping x + lam g
    in the box.  None when no pair improves.

    The basis must be complete or reach at least the box width, since longer
    elements never fit.
    """
    width = inst.box_width()
    if not is_finite(width):
        raise InstanceError("oracle steps need finite bounds")
    if not basis.complete and basis.radius < width:
        raise InstanceError("basis radius is below the box width")
    x = tuple(x)
    fx = inst.f(x)
    best = None
    for g in basis.elements:
        lam = 1
        while lam <= max(width, 1):
            y = tuple(xi + lam * gi for xi, gi in zip(x, g))
            if not all(l <= v <= u for v, l, u in zip(y, inst.lower, inst.upper)):
                break
            cand = (inst.f(y) - fx, lam, g)
            if best is None or cand < best:
                best = cand
            lam += 1
    if best is None or best[0] >= 0:
        return None
    return StepResult(best[2], best[1], best[0])
