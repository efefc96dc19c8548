"""Standard-form integer programs: min f(x) s.t. Ax = b, l <= x <= u, x integral.

Everything here is exact.  Matrix entries, right-hand sides, bounds and
objective values are Python ints; infinite bounds are the floats ``-INF`` and
``INF`` and never take part in arithmetic except through the helpers below.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Sequence, Union

INF = math.inf

Bound = Union[int, float]
IntVector = tuple[int, ...]


def floor_div(a: Bound, b: int) -> Bound:
    if a in (INF, -INF):
        return a
    return a // b


def ceil_div(a: Bound, b: int) -> Bound:
    if a in (INF, -INF):
        return a
    return -((-a) // b)


def is_finite(v: Bound) -> bool:
    return v not in (INF, -INF)


# ---------------------------------------------------------------------------
# sparse matrices


@dataclass(frozen=True)
class SparseIntMatrix:
    """Row-major triplet storage with exact integer entries."""

    rows: int
    cols: int
    entries: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self) -> None:
        ents = tuple(sorted((int(i), int(j), int(v)) for i, j, v in self.entries))
        seen = set()
        for i, j, v in ents:
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise ValueError(f"entry ({i},{j}) outside a {self.rows}x{self.cols} matrix")
            if v == 0:
                raise ValueError(f"explicit zero stored at ({i},{j})")
            if (i, j) in seen:
                raise ValueError(f"duplicate entry at ({i},{j})")
            seen.add((i, j))
        object.__setattr__(self, "entries", ents)

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[int]], cols: int | None = None) -> SparseIntMatrix:
        dense = [list(r) for r in dense]
        if cols is None:
            cols = len(dense[0]) if dense else 0
        if any(len(r) != cols for r in dense):
            raise ValueError("ragged dense matrix")
        ents = [(i, j, int(v)) for i, r in enumerate(dense) for j, v in enumerate(r) if v]
        return cls(len(dense), cols, tuple(ents))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> SparseIntMatrix:
        return cls(rows, cols, ())

    @cached_property
    def _row_items(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.rows)]
        for i, j, v in self.entries:
            out[i].append((j, v))
        return tuple(tuple(r) for r in out)

    @cached_property
    def _col_items(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.cols)]
        for i, j, v in self.entries:
            out[j].append((i, v))
        return tuple(tuple(c) for c in out)

    def row_items(self, i: int) -> tuple[tuple[int, int], ...]:
        return self._row_items[i]

    def col_items(self, j: int) -> tuple[tuple[int, int], ...]:
        return self._col_items[j]

    def row_support(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, _ in self._row_items[i])

    def col_support(self, j: int) -> tuple[int, ...]:
        return tuple(i for i, _ in self._col_items[j])

    def get(self, i: int, j: int) -> int:
        for jj, v in self._row_items[i]:
            if jj == j:
                return v
        return 0

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for i, j, v in self.entries:
            out[i][j] = v
        return out

    @cached_property
    def max_abs(self) -> int:
        """The entry-wise max norm of the matrix."""
        return max((abs(v) for _, _, v in self.entries), default=0)

    def matvec(self, x: Sequence[int]) -> list[int]:
        if len(x) != self.cols:
            raise ValueError(f"vector of length {len(x)} for {self.cols} columns")
        return [sum(v * x[j] for j, v in items) for items in self._row_items]

    def transpose(self) -> SparseIntMatrix:
        return SparseIntMatrix(self.cols, self.rows, tuple((j, i, v) for i, j, v in self.entries))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> SparseIntMatrix:
        """Rows and columns are taken (and renumbered) in the order given."""
        cpos = {c: k for k, c in enumerate(cols)}
        ents = []
        for ri, r in enumerate(rows):
            for j, v in self._row_items[r]:
                k = cpos.get(j)
                if k is not None:
                    ents.append((ri, k, v))
        return SparseIntMatrix(len(rows), len(cols), tuple(ents))

    def hstack_identity(self) -> SparseIntMatrix:
        """(A I): one extra unit column per row."""
        ents = list(self.entries) + [(i, self.cols + i, 1) for i in range(self.rows)]
        return SparseIntMatrix(self.rows, self.cols + self.rows, tuple(ents))


# ---------------------------------------------------------------------------
# separable objective terms


@dataclass(frozen=True)
class Linear:
    weight: int

    def __call__(self, x: int) -> int:
        return self.weight * x

    def problems(self) -> list[str]:
        return []


@dataclass(frozen=True)
class Quadratic:
    """a*x^2 + b*x + c with a >= 0."""

    a: int
    b: int = 0
    c: int = 0

    def __call__(self, x: int) -> int:
        return (self.a * x + self.b) * x + self.c

    def problems(self) -> list[str]:
        return ["quadratic coefficient is negative"] if self.a < 0 else []


@dataclass(frozen=True)
class PiecewiseLinear:
    """Convex piecewise-linear function through integer points.

    Outside the outermost breakpoints the function continues with the given
    extension slopes; a missing slope means the function is undefined there.
    """

    breakpoints: tuple[int, ...]
    values: tuple[int, ...]
    left_slope: int | None = None
    right_slope: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "breakpoints", tuple(int(v) for v in self.breakpoints))
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    def problems(self) -> list[str]:
        bp, vals = self.breakpoints, self.values
        out = []
        if not bp:
            return ["piecewise term without breakpoints"]
        if len(bp) != len(vals):
            return ["breakpoints and values differ in length"]
        if any(bp[k] >= bp[k + 1] for k in range(len(bp) - 1)):
            return ["breakpoints are not strictly increasing"]
        seq = []
        if self.left_slope is not None:
            seq.append(self.left_slope)
        for k in range(len(bp) - 1):
            rise, run = vals[k + 1] - vals[k], bp[k + 1] - bp[k]
            if rise % run:
                out.append(f"non-integral slope between breakpoints {bp[k]} and {bp[k + 1]}")
            seq.append(rise / run)
        if self.right_slope is not None:
            seq.append(self.right_slope)
        if any(seq[k] > seq[k + 1] for k in range(len(seq) - 1)):
            out.append(f"convexity violated: slopes {tuple(seq)} are not nondecreasing")
        return out

    def __call__(self, x: int) -> int:
        bp, vals = self.breakpoints, self.values
        if x < bp[0]:
            if self.left_slope is None:
                raise ValueError(f"{x} lies left of the piecewise domain [{bp[0]}, {bp[-1]}]")
            return vals[0] + self.left_slope * (x - bp[0])
        if x > bp[-1]:
            if self.right_slope is None:
                raise ValueError(f"{x} lies right of the piecewise domain [{bp[0]}, {bp[-1]}]")
            return vals[-1] + self.right_slope * (x - bp[-1])
        k = bisect.bisect_left(bp, x)
        if bp[k] == x:
            return vals[k]
        rise, run = vals[k] - vals[k - 1], bp[k] - bp[k - 1]
        return vals[k - 1] + rise * (x - bp[k - 1]) // run


@dataclass(frozen=True)
class Shifted:
    """x -> base(offset + scale * x); composition with an affine map keeps convexity."""

    base: object
    offset: int = 0
    scale: int = 1

    def __call__(self, x: int) -> int:
        return self.base(self.offset + self.scale * x)

    def problems(self) -> list[str]:
        return self.base.problems()


def distance_term(lo: Bound, hi: Bound) -> object:
    """dist(x, [lo, hi]) as a convex piecewise-linear term."""
    if is_finite(lo) and is_finite(hi):
        if lo == hi:
            return PiecewiseLinear((lo,), (0,), -1, 1)
        return PiecewiseLinear((lo, hi), (0, 0), -1, 1)
    if is_finite(lo):
        return PiecewiseLinear((lo,), (0,), -1, 0)
    if is_finite(hi):
        return PiecewiseLinear((hi,), (0,), 0, 1)
    return Linear(0)


Term = Union[Linear, Quadratic, PiecewiseLinear, Shifted]


@dataclass(frozen=True)
class SeparableObjective:
    terms: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def linear(cls, weights: Iterable[int]) -> SeparableObjective:
        return cls(tuple(Linear(int(w)) for w in weights))

    @classmethod
    def zero(cls, n: int) -> SeparableObjective:
        return cls((Linear(0),) * n)

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, i: int) -> Term:
        return self.terms[i]

    def __call__(self, x: Sequence[int]) -> int:
        return evaluate_objective(self, x)

    def is_linear(self) -> bool:
        return all(isinstance(t, Linear) for t in self.terms)

    def weights(self) -> list[int]:
        if not self.is_linear():
            raise ValueError("objective is not linear")
        return [t.weight for t in self.terms]

    def shifted(self, offset: Sequence[int], scale: int = 1) -> SeparableObjective:
        """The objective y -> f(offset + scale * y)."""
        return SeparableObjective(tuple(
            t if (o == 0 and scale == 1) else Shifted(t, int(o), scale)
            for t, o in zip(self.terms, offset)))

    def subset(self, idx: Sequence[int]) -> SeparableObjective:
        return SeparableObjective(tuple(self.terms[i] for i in idx))

    def __add__(self, other: SeparableObjective) -> SeparableObjective:
        return SeparableObjective(self.terms + other.terms)


def evaluate_objective(obj: SeparableObjective, x: Sequence[int]) -> int:
    if len(x) != len(obj.terms):
        raise ValueError(f"vector of length {len(x)} for {len(obj.terms)} terms")
    return sum(t(v) for t, v in zip(obj.terms, x))


def term_argmin(term: Term, lo: int, hi: int) -> int:
    """Smallest minimizer of a convex integer function on [lo, hi]."""
    a, b = lo, hi
    while a < b:
        mid = (a + b) // 2
        if term(mid + 1) - term(mid) >= 0:
            b = mid
        else:
            a = mid + 1
    return a


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class IpInstance:
    a: SparseIntMatrix
    b: IntVector
    lower: tuple
    upper: tuple
    objective: SeparableObjective = field(default_factory=SeparableObjective)

    def __post_init__(self) -> None:
        object.__setattr__(self, "b", tuple(int(v) for v in self.b))
        object.__setattr__(self, "lower", tuple(v if v in (INF, -INF) else int(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(v if v in (INF, -INF) else int(v) for v in self.upper))
        if len(self.objective) == 0 and self.a.cols:
            object.__setattr__(self, "objective", SeparableObjective.zero(self.a.cols))

    @property
    def n(self) -> int:
        return self.a.cols

    @property
    def m(self) -> int:
        return self.a.rows

    def f(self, x: Sequence[int]) -> int:
        return evaluate_objective(self.objective, x)

    def finite_bounds(self) -> bool:
        return all(map(is_finite, self.lower)) and all(map(is_finite, self.upper))

    def box_width(self) -> Bound:
        """max_i (u_i - l_i), the quantity bounding useful step lengths."""
        if not self.n:
            return 0
        return max(u - l for l, u in zip(self.lower, self.upper))

    def box_l1(self) -> Bound:
        """||u - l||_1, an upper bound on the l1 norm of any step inside the box."""
        return sum((u - l for l, u in zip(self.lower, self.upper)), 0)

    def replace(self, **kw) -> IpInstance:
        return replace(self, **kw)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    problems: tuple[str, ...] = ()


def validate_instance(inst: IpInstance) -> ValidationReport:
    problems = []
    n = inst.a.cols
    if len(inst.b) != inst.a.rows:
        problems.append(f"b has length {len(inst.b)}, matrix has {inst.a.rows} rows")
    for name, vec in (("lower", inst.lower), ("upper", inst.upper), ("objective", inst.objective.terms)):
        if len(vec) != n:
            problems.append(f"{name} has length {len(vec)}, matrix has {n} columns")
    for i, (l, u) in enumerate(zip(inst.lower, inst.upper)):
        if l > u:
            problems.append(f"bound crossing at coordinate {i}: lower {l} > upper {u}")
        if l == INF or u == -INF:
            problems.append(f"empty bound interval at coordinate {i}")
    for i, t in enumerate(inst.objective.terms):
        for p in t.problems():
            problems.append(f"objective term {i}: {p}")
    return ValidationReport(not problems, tuple(problems))


def is_feasible(inst: IpInstance, x: Sequence[int]) -> bool:
    if len(x) != inst.n:
        raise ValueError(f"vector of length {len(x)} for {inst.n} columns")
    if any(not (l <= v <= u) for v, l, u in zip(x, inst.lower, inst.upper)):
        return False
    return tuple(inst.a.matvec(x)) == inst.b


# ---------------------------------------------------------------------------
# exact elimination


def _primitive(vec: list[int]) -> list[int]:
    g = 0
    for v in vec:
        if v:
            g = math.gcd(g, v)
            if g == 1:
                return vec
    return [v // g for v in vec] if g > 1 else vec


def gauss_jordan(rows: Iterable[Sequence[int]], ncoef: int):
    """Fraction-free Gauss-Jordan elimination, pivoting on the first nonzero.

    Each input row has ``ncoef`` coefficients optionally followed by extra
    columns (a right-hand side).  Returns ``(basis, status)`` where ``basis``
    lists ``(pivot, row, source)`` with every basis row zero in the other
    pivot columns and a positive pivot entry, and ``status[k]`` is
    ``"independent"``, ``"dependent"`` or ``"inconsistent"`` for input row k.
    """
    basis: list[tuple[int, list[int], int]] = []
    status = []
    for k, row in enumerate(rows):
        vec = [int(v) for v in row]
        for piv, brow, _ in basis:
            a = vec[piv]
            if a:
                p = brow[piv]
                vec = _primitive([p * v - a * r for v, r in zip(vec, brow)])
        piv = next((j for j in range(ncoef) if vec[j]), None)
        if piv is None:
            status.append("inconsistent" if any(vec[ncoef:]) else "dependent")
            continue
        if vec[piv] < 0:
            vec = [-v for v in vec]
        for idx, (bp, brow, src) in enumerate(basis):
            a = brow[piv]
            if a:
                basis[idx] = (bp, _primitive([vec[piv] * r - a * v for r, v in zip(brow, vec)]), src)
        basis.append((piv, vec, k))
        status.append("independent")
    return basis, status


@dataclass(frozen=True)
class PureSystem:
    a: SparseIntMatrix
    b: IntVector
    rows: tuple[int, ...]


def purify(a: SparseIntMatrix, b: Sequence[int]) -> PureSystem | None:
    """Drop linearly dependent rows; None when Ax = b has no rational solution."""
    dense = a.to_dense()
    _, status = gauss_jordan((r + [bi] for r, bi in zip(dense, b)), a.cols)
    if "inconsistent" in status:
        return None
    keep = tuple(k for k, s in enumerate(status) if s == "independent")
    return PureSystem(a.submatrix(keep, range(a.cols)), tuple(b[k] for k in keep), keep)


def purify_instance(inst: IpInstance) -> tuple[IpInstance, tuple[int, ...]] | None:
    pure = purify(inst.a, inst.b)
    if pure is None:
        return None
    return inst.replace(a=pure.a, b=pure.b), pure.rows


# ---------------------------------------------------------------------------
# centering and objective ranges


def center_instance(inst: IpInstance) -> tuple[IpInstance, IntVector]:
    """Translate by v = floor((l+u)/2) so that 0 lies inside the box."""
    if not inst.finite_bounds():
        raise ValueError("centering needs finite bounds")
    v = tuple((l + u) // 2 for l, u in zip(inst.lower, inst.upper))
    av = inst.a.matvec(v)
    centered = inst.replace(
        b=tuple(bi - s for bi, s in zip(inst.b, av)),
        lower=tuple(l - vi for l, vi in zip(inst.lower, v)),
        upper=tuple(u - vi for u, vi in zip(inst.upper, v)),
        objective=inst.objective.shifted(v),
    )
    return centered, v


def _term_range(t: Term, lo: int, hi: int) -> tuple[int, int]:
    top = max(t(lo), t(hi))
    return t(term_argmin(t, lo, hi)), top


def f_max(obj: SeparableObjective, lower: Sequence[Bound], upper: Sequence[Bound]) -> int:
    """max |f(x)| over the box, exact for separable convex f."""
    if not (all(map(is_finite, lower)) and all(map(is_finite, upper))):
        raise ValueError("f_max needs finite bounds")
    lo_sum = hi_sum = 0
    for t, l, u in zip(obj.terms, lower, upper):
        a, b = _term_range(t, l, u)
        lo_sum += a
        hi_sum += b
    return max(abs(lo_sum), abs(hi_sum))


def f_sepmax(obj: SeparableObjective, lower: Sequence[Bound], upper: Sequence[Bound]) -> int:
    """sum_i max |f_i(x_i)| over the box."""
    total = 0
    for t, l, u in zip(obj.terms, lower, upper):
        a, b = _term_range(t, l, u)
        total += max(abs(a), abs(b))
    return total
