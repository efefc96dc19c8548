"""Enumeration kernels with a numba path and a pure-numpy path.

All three kernels walk the integer points of an eliminated system

    d_p * y_p + sum_f M[p, f] * y_f = rhs_p      (one equation per pivot p)

where the free variables y_f range over a box and the pivot variables are
solved for, kept only when integral and inside their own bounds.  Points are
reported in "combined" order: free variables first, then pivots.

Set ``TDIP_NUMBA=0`` in the environment to force the numpy path.  The numba
kernels only ever see int64 data; callers check overflow safety first and
fall back to numpy (object dtype if needed) otherwise.
"""

from __future__ import annotations

import os

import numpy as np

try:  # numba is optional at runtime
    import numba
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

INT64_SAFE = 1 << 62
CHUNK = 1 << 16


def numba_enabled() -> bool:
    return numba is not None and os.environ.get("TDIP_NUMBA", "1") != "0"


# ---------------------------------------------------------------------------
# numpy path


def _free_chunks(flo, fhi, dtype=np.int64):
    """Yield arrays of free-variable assignments in lexicographic order."""
    sizes = [int(h - l + 1) for l, h in zip(flo, fhi)]
    total = 1
    for s in sizes:
        total *= s
    k = len(sizes)
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        out = np.empty((len(idx), k), dtype=dtype)
        for j in range(k - 1, -1, -1):
            idx, r = np.divmod(idx, sizes[j])
            out[:, j] = r.astype(dtype) + int(flo[j])
        yield out


def _solve_pivots(free, M, d, rhs, plo, phi, dtype):
    """Return (mask, pivots) for a chunk of free assignments."""
    if free.dtype != dtype:
        free = free.astype(dtype)
    if M.shape[0] == 0:
        return np.ones(len(free), dtype=bool), np.empty((len(free), 0), dtype=dtype)
    num = rhs[None, :] - free @ M.T if M.shape[1] else np.repeat(rhs[None, :], len(free), axis=0)
    ok = np.all(num % d[None, :] == 0, axis=1)
    piv = num // d[None, :]
    ok &= np.all((piv >= plo[None, :]) & (piv <= phi[None, :]), axis=1)
    return ok, piv


def points_numpy(flo, fhi, M, d, rhs, plo, phi, dtype=np.int64):
    parts = []
    for free in _free_chunks(flo, fhi, dtype):
        ok, piv = _solve_pivots(free, M, d, rhs, plo, phi, dtype)
        if ok.any():
            parts.append(np.hstack([free[ok].astype(dtype), piv[ok]]))
    width = len(flo) + len(plo)
    if not parts:
        return np.empty((0, width), dtype=dtype)
    return np.vstack(parts)


def argmin_numpy(flo, fhi, M, d, rhs, plo, phi, cost_fns, order, dtype=np.int64):
    """Minimum-cost point; ties go to the lexicographically smallest vector
    in original column order (``order[p]`` is the combined index of column p).

    ``cost_fns[k]`` maps an integer array of values of combined variable k
    to an array of costs.
    """
    best_cost = None
    best_vec = None
    for free in _free_chunks(flo, fhi, dtype):
        ok, piv = _solve_pivots(free, M, d, rhs, plo, phi, dtype)
        if not ok.any():
            continue
        pts = np.hstack([free[ok].astype(dtype), piv[ok]])
        cost = np.zeros(len(pts), dtype=dtype)
        for k, fn in enumerate(cost_fns):
            cost = cost + fn(pts[:, k])
        low = cost.min()
        if best_cost is not None and low > best_cost:
            continue
        cand = pts[cost == low][:, order]
        if dtype == np.int64:
            pick = cand[np.lexsort(cand.T[::-1])[0]]
        else:
            pick = np.array(min(tuple(r) for r in cand), dtype=object)
        vec = tuple(int(v) for v in pick)
        if best_cost is None or low < best_cost or vec < best_vec:
            best_cost, best_vec = low, vec
    if best_cost is None:
        return None
    return int(best_cost), best_vec


def sieve_numpy(cands: np.ndarray) -> np.ndarray:
    """Keep candidates not conformally dominated by an earlier kept one.

    Candidates must be sorted by l1 norm; domination by a kept vector or its
    negation both count.
    """
    keep = np.zeros(len(cands), dtype=bool)
    acc = np.empty((0, cands.shape[1]), dtype=cands.dtype)
    for i, c in enumerate(cands):
        if len(acc):
            ac = np.abs(c)[None, :]
            small = np.abs(acc) <= ac
            pos = np.all(small & (acc * c[None, :] >= 0), axis=1)
            neg = np.all(small & (-acc * c[None, :] >= 0), axis=1)
            if (pos | neg).any():
                continue
        keep[i] = True
        acc = np.vstack([acc, c[None, :]])
    return keep


# ---------------------------------------------------------------------------
# numba path

if numba is not None:

    @njit(cache=True)
    def _pivots_nb(cur, nf, M, d, rhs, plo, phi):
        npv = M.shape[0]
        for p in range(npv):
            s = rhs[p]
            for f in range(nf):
                s -= M[p, f] * cur[f]
            if s % d[p] != 0:
                return False
            v = s // d[p]
            if v < plo[p] or v > phi[p]:
                return False
            cur[nf + p] = v
        return True

    @njit(cache=True)
    def _advance(cur, flo, fhi):
        j = flo.shape[0] - 1
        while j >= 0:
            if cur[j] < fhi[j]:
                cur[j] += 1
                return True
            cur[j] = flo[j]
            j -= 1
        return False

    @njit(cache=True)
    def _walk_points(flo, fhi, M, d, rhs, plo, phi, out, fill):
        nf = flo.shape[0]
        cur = np.empty(nf + M.shape[0], dtype=np.int64)
        for j in range(nf):
            if flo[j] > fhi[j]:
                return 0
            cur[j] = flo[j]
        count = 0
        while True:
            if _pivots_nb(cur, nf, M, d, rhs, plo, phi):
                if fill:
                    out[count, :] = cur
                count += 1
            if not _advance(cur, flo, fhi):
                break
        return count

    @njit(cache=True)
    def points_numba(flo, fhi, M, d, rhs, plo, phi):
        width = flo.shape[0] + M.shape[0]
        dummy = np.empty((0, width), dtype=np.int64)
        total = _walk_points(flo, fhi, M, d, rhs, plo, phi, dummy, False)
        out = np.empty((total, width), dtype=np.int64)
        _walk_points(flo, fhi, M, d, rhs, plo, phi, out, True)
        return out

    @njit(cache=True)
    def argmin_numba(flo, fhi, M, d, rhs, plo, phi, tables, offsets, lo_all, order):
        nf = flo.shape[0]
        width = nf + M.shape[0]
        best = np.zeros(width, dtype=np.int64)
        cur = np.empty(width, dtype=np.int64)
        found = False
        best_cost = 0
        for j in range(nf):
            if flo[j] > fhi[j]:
                return False, best_cost, best
            cur[j] = flo[j]
        while True:
            if _pivots_nb(cur, nf, M, d, rhs, plo, phi):
                c = 0
                for k in range(width):
                    c += tables[offsets[k] + cur[k] - lo_all[k]]
                better = not found or c < best_cost
                if found and c == best_cost:
                    for p in range(width):
                        a = cur[order[p]]
                        b = best[order[p]]
                        if a != b:
                            better = a < b
                            break
                if better:
                    found = True
                    best_cost = c
                    best[:] = cur
            if not _advance(cur, flo, fhi):
                break
        return found, best_cost, best

    @njit(cache=True)
    def sieve_numba(cands):
        n, w = cands.shape
        keep = np.zeros(n, dtype=np.bool_)
        acc = np.empty(n, dtype=np.int64)
        nacc = 0
        for i in range(n):
            dominated = False
            for t in range(nacc):
                a = cands[acc[t]]
                pos = True
                neg = True
                for k in range(w):
                    x = a[k]
                    y = cands[i, k]
                    if abs(x) > abs(y):
                        pos = False
                        neg = False
                        break
                    if x * y < 0:
                        pos = False
                    elif x * y > 0:
                        neg = False
                    if not pos and not neg:
                        break
                if pos or neg:
                    dominated = True
                    break
            if not dominated:
                keep[i] = True
                acc[nacc] = i
                nacc += 1
        return keep
