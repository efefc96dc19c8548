"""Graver bases of small matrices, conformal decompositions and norm bounds."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DecompositionError, LimitError, TdipError
from .instance import SparseIntMatrix, purify
from .lattice import ENUM_CAP, build_lattice_system, lattice_points
from .structure import DUAL, PRIMAL, TdDecomposition

DIGIT_CAP = 10_000


def is_conformal(x: Sequence[int], y: Sequence[int]) -> bool:
    """x ⊑ y: same orthant and |x_i| <= |y_i| everywhere."""
    if len(x) != len(y):
        raise ValueError("vectors of different length")
    return all(a * b >= 0 and abs(a) <= abs(b) for a, b in zip(x, y))


@dataclass(frozen=True)
class GraverBasis:
    matrix: SparseIntMatrix
    elements: tuple[tuple[int, ...], ...]
    radius: int
    complete: bool

    @property
    def g1(self) -> int:
        return max((sum(map(abs, g)) for g in self.elements), default=0)

    @property
    def ginf(self) -> int:
        return max((max(map(abs, g)) for g in self.elements), default=0)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, g) -> bool:
        return tuple(g) in self._set

    @property
    def _set(self) -> frozenset:
        return frozenset(self.elements)

    def to_json(self) -> dict:
        return {
            "elements": [list(g) for g in self.elements],
            "g1": self.g1,
            "ginf": self.ginf,
            "radius": self.radius,
            "complete": self.complete,
        }


# ---------------------------------------------------------------------------
# norm bounds


def base_norm_bound(a: SparseIntMatrix) -> int:
    """(2 m ||A|| + 1)^m, an upper bound on the l1 norm of Graver elements."""
    return (2 * a.rows * a.max_abs + 1) ** a.rows


MINOR_CAP = 5_000


def _det(m: list[list[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    m = [row[:] for row in m]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[-1][-1] if n else 1


def _maximal_minors(a: SparseIntMatrix) -> set[int] | None:
    """Absolute values of all nonzero r x r minors of a full-row-rank matrix,
    or None when there are too many column subsets to list."""
    r, n = a.rows, a.cols
    if math.comb(n, r) > MINOR_CAP:
        return None
    dense = a.to_dense()
    out = set()
    for cols in itertools.combinations(range(n), r):
        d = abs(_det([[row[j] for j in cols] for row in dense]))
        if d:
            out.add(d)
    return out


def circuit_norm_bounds(a: SparseIntMatrix) -> tuple[int, int]:
    """Certified (l_inf, l1) bounds on Graver elements via circuits.

    Every Graver element is a conformal sum of at most n - rank circuits with
    coefficients below one (or is itself a circuit).  Circuit entries are
    maximal minors of the pure system: listed exactly when there are few
    column subsets, else bounded by Hadamard's inequality.  When all nonzero
    maximal minors share one absolute value the matrix is unimodular, its
    Graver basis consists of its circuits and every entry is 0 or +-1.
    """
    pure = purify(a, [0] * a.rows)
    r = pure.a.rows
    free = a.cols - r
    if free == 0:
        return 0, 0
    base = base_norm_bound(a)
    minors = _maximal_minors(pure.a)
    if minors is not None and len(minors) == 1:
        return 1, min(base, r + 1)
    if minors:
        c_inf = max(minors)
    else:
        prod = 1
        for i in range(r):
            prod *= sum(v * v for _, v in pure.a.row_items(i))
        c_inf = max(1, math.isqrt(prod))
    return min(base, free * c_inf), min(base, free * (r + 1) * c_inf)


def dual_norm_bound(a: SparseIntMatrix, f: TdDecomposition) -> int:
    """(3 ||A|| K)^(K-1) with K = max over root-leaf paths of prod(k_i + 1)."""
    if f.orientation != DUAL:
        raise DecompositionError("dual_norm_bound needs a dual decomposition")
    k = f.profile.k_product
    return (3 * a.max_abs * k) ** (k - 1)


@dataclass(frozen=True)
class PrimalNormBound:
    value: int | None
    too_large: bool
    certified: bool


def primal_norm_bound(a: SparseIntMatrix, f: TdDecomposition, alpha: int = 1,
                      digit_cap: int = DIGIT_CAP) -> PrimalNormBound:
    """The l_inf bound for primal decompositions.

    With one level this is h (2 ||A|| h + 1)^h for a path of height h, which
    is certified for pure systems.  Deeper forests give a tower of ttd - 1
    twos over (2 ||A||)^(2^ttd * alpha * h^2); the constant alpha is unknown,
    so those values are reported as uncertified.
    """
    if f.orientation != PRIMAL:
        raise DecompositionError("primal_norm_bound needs a primal decomposition")
    h, t, norm = f.height, f.ttd, a.max_abs
    if t <= 1:
        return PrimalNormBound(h * (2 * norm * h + 1) ** h, False, True)
    bits_cap = int(digit_cap * math.log2(10))
    base = 2 * norm
    exp = (2 ** t) * alpha * h * h
    if base <= 1:
        value = base ** exp
    elif exp * math.log2(base) > bits_cap:
        return PrimalNormBound(None, True, False)
    else:
        value = base ** exp
    for _ in range(t - 1):
        if value > bits_cap:
            return PrimalNormBound(None, True, False)
        value = 2 ** value
    return PrimalNormBound(value, False, False)


# ---------------------------------------------------------------------------
# enumeration


def enumerate_graver_small(a: SparseIntMatrix, radius: int | None = None,
                           cap: int = ENUM_CAP) -> GraverBasis:
    """All ⊑-minimal nonzero kernel vectors with l_inf norm at most ``radius``.

    The default radius is the certified circuit bound, which makes the result
    the full Graver basis.
    """
    cert, _ = circuit_norm_bounds(a)
    if radius is None:
        radius = cert
    n = a.cols
    sys = build_lattice_system(a)
    pts = lattice_points(sys, [-radius] * n, [radius] * n, cap=cap)
    nz = pts != 0
    has = nz.any(axis=1)
    pts, nz = pts[has], nz[has]
    lead = pts[np.arange(len(pts)), nz.argmax(axis=1)]
    cands = pts[lead > 0]
    if len(cands):
        l1 = np.abs(cands).sum(axis=1)
        cands = cands[np.lexsort(tuple(cands.T[::-1]) + (l1,))]
        if _kernels.numba_enabled():
            keep = _kernels.sieve_numba(np.ascontiguousarray(cands))
        else:
            keep = _kernels.sieve_numpy(cands)
        cands = cands[keep]
    elems = [tuple(int(v) for v in g) for g in cands]
    elems += [tuple(-v for v in g) for g in elems]
    elems.sort(key=lambda g: (sum(map(abs, g)), g))
    return GraverBasis(a, tuple(elems), radius, radius >= cert)


@lru_cache(maxsize=256)
def cached_graver(a: SparseIntMatrix, cap: int = ENUM_CAP) -> GraverBasis | None:
    """Full basis when the certified enumeration fits the cap, else None."""
    cert, _ = circuit_norm_bounds(a)
    free = a.cols - purify(a, [0] * a.rows).a.rows
    if (2 * cert + 1) ** free > cap:
        return None
    try:
        return enumerate_graver_small(a, cert, cap)
    except LimitError:
        return None


# ---------------------------------------------------------------------------
# norm parameter policy


@dataclass(frozen=True)
class RhoChoice:
    value: int
    source: str  # "user", "enum" or "formula"


def resolve_rho(a: SparseIntMatrix, norm: str, policy: str | int = "auto",
                td: TdDecomposition | None = None, cap: int = ENUM_CAP) -> RhoChoice:
    """The ball radius for AugIP: an upper bound on g_inf (norm="inf") or g_1.

    Priority: explicit integer, then exact enumeration when it fits the cap,
    then the closed-form bounds.
    """
    if isinstance(policy, int) or (isinstance(policy, str) and policy.lstrip("-").isdigit()):
        value = int(policy)
        if value < 0:
            raise TdipError("rho must be nonnegative")
        return RhoChoice(value, "user")
    if policy not in ("auto", "enum", "formula"):
        raise TdipError(f"unknown rho policy {policy!r}")
    if policy in ("auto", "enum"):
        basis = cached_graver(a, cap)
        if basis is not None:
            return RhoChoice(basis.ginf if norm == "inf" else basis.g1, "enum")
        if policy == "enum":
            free = a.cols - purify(a, [0] * a.rows).a.rows
            raise LimitError("Graver enumeration box", (2 * circuit_norm_bounds(a)[0] + 1) ** free, cap)
    ginf, g1 = circuit_norm_bounds(a)
    if norm == "inf":
        return RhoChoice(ginf, "formula")
    if td is not None and td.orientation == DUAL and td.n == a.rows:
        g1 = min(g1, dual_norm_bound(a, td))
    return RhoChoice(g1, "formula")


# ---------------------------------------------------------------------------
# positive sum property


def conformal_decompose(a: SparseIntMatrix, x: Sequence[int],
                        basis: GraverBasis) -> list[tuple[int, tuple[int, ...]]]:
    """Write x = sum lam_j g_j with g_j ⊑ x taken from the basis.

    Uses at most 2n - 2 distinct elements (max(1, ...) for n = 1): a greedy
    pass first, then iterative deepening on the number of distinct elements.
    """
    x = tuple(int(v) for v in x)
    if any(a.matvec(x)):
        raise ValueError("vector is not in the kernel")
    if not any(x):
        return []
    limit = max(1, 2 * len(x) - 2)
    cands = [g for g in basis.elements if is_conformal(g, x)]
    if not cands:
        raise DecompositionError("basis has no element conformal to the vector (incomplete basis?)")

    def mult(g, y):
        return min(abs(yi) // abs(gi) for gi, yi in zip(g, y) if gi)

    def fits(g, y):
        return all(gi * yi >= 0 and abs(gi) <= abs(yi) for gi, yi in zip(g, y))

    terms: dict[tuple, int] = {}
    y = x
    while any(y):
        best = None
        for g in cands:
            if fits(g, y):
                lam = mult(g, y)
                score = lam * sum(map(abs, g))
                if best is None or score > best[0]:
                    best = (score, lam, g)
        if best is None:
            raise DecompositionError("no conformal element left (incomplete basis?)")
        _, lam, g = best
        terms[g] = terms.get(g, 0) + lam
        y = tuple(yi - lam * gi for yi, gi in zip(y, g))
    if len(terms) <= limit:
        return sorted(((lam, g) for g, lam in terms.items()), key=lambda t: t[1])

    def dfs(y, start, budget):
        if not any(y):
            return []
        if budget == 0:
            return None
        for idx in range(start, len(cands)):
            g = cands[idx]
            if not fits(g, y):
                continue
            for lam in range(mult(g, y), 0, -1):
                rest = dfs(tuple(yi - lam * gi for yi, gi in zip(y, g)), idx + 1, budget - 1)
                if rest is not None:
                    return [(lam, g)] + rest
        return None

    for k in range(1, limit + 1):
        found = dfs(x, 0, k)
        if found is not None:
            return found
    raise DecompositionError(f"no decomposition with at most {limit} distinct elements")
