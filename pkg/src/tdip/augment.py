"""Augmentation: AugIP step solvers, halfling steps, the augmentation loop,
initial feasible solutions and infinite-bound handling.

An AugIP query asks, for a feasible x and a step length lam, for an integer
g with Ag = 0 and l <= x + lam g <= u minimizing f(x + lam g).  The solvers
here answer it over a ball of radius rho around 0 (l_inf for the primal
solver, l_1 for the dual one); with rho at least the matching Graver norm the
answer is at least as good as every Graver step of that length.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

from .errors import DecompositionError, InstanceError, LimitError
from .graver import RhoChoice, base_norm_bound, resolve_rho
from .instance import (
    INF,
    IpInstance,
    Linear,
    SeparableObjective,
    SparseIntMatrix,
    ceil_div,
    distance_term,
    floor_div,
    is_feasible,
    is_finite,
    purify,
)
from .lattice import ENUM_CAP, build_lattice_system, lattice_argmin
from .report import INFEASIBLE, OPTIMAL, UNBOUNDED, SolveReport, StepResult
from .structure import (
    DUAL,
    PRIMAL,
    TdDecomposition,
    build_dual_graph,
    extend_decomposition_for_identity,
    primal_decompose,
    verify_td_decomposition,
)

TABLE_CAP = 2_000_000


# ---------------------------------------------------------------------------
# windows and step costs


def step_window(lower, upper, x, lam: int, rho: int) -> tuple[list[int], list[int]]:
    """[ceil((l - x)/lam), floor((u - x)/lam)] intersected with [-rho, rho]."""
    lo, hi = [], []
    for l, u, xi in zip(lower, upper, x):
        a = ceil_div(l - xi, lam) if is_finite(l) else -INF
        b = floor_div(u - xi, lam) if is_finite(u) else INF
        lo.append(int(max(a, -rho)))
        hi.append(int(min(b, rho)))
    return lo, hi


def step_costs(obj: SeparableObjective, x, lam: int) -> list[Callable[[int], int]]:
    """c_j(v) = f_j(x_j + lam v) - f_j(x_j), convex in v."""
    out = []
    for t, xi in zip(obj.terms, x):
        base = t(xi)
        out.append(lambda v, t=t, xi=xi, base=base: t(xi + lam * v) - base)
    return out


# ---------------------------------------------------------------------------
# steppers


class Stepper:
    """Answers AugIP queries for one fixed matrix."""

    name = "abstract"

    def __init__(self, a: SparseIntMatrix, td: TdDecomposition, rho: RhoChoice) -> None:
        self.a = a
        self.td = td
        self.rho = rho
        self.calls = 0

    def __call__(self, inst: IpInstance, x: Sequence[int], lam: int) -> StepResult | None:
        self.calls += 1
        return self.step(inst, tuple(x), lam)

    def step(self, inst: IpInstance, x: tuple[int, ...], lam: int) -> StepResult | None:
        raise NotImplementedError


@lru_cache(maxsize=4096)
def _decompose(a: SparseIntMatrix, td: TdDecomposition):
    return primal_decompose(a, td)


@lru_cache(maxsize=16384)
def _system(a: SparseIntMatrix, rhs: tuple[int, ...]):
    return build_lattice_system(a, rhs)


def primal_min(a: SparseIntMatrix, td: TdDecomposition, lo: list[int], hi: list[int],
               costs: Sequence[Callable[[int], int]], rhs: tuple[int, ...],
               cap: int = ENUM_CAP, memo: dict | None = None, tag: tuple = ()):
    """min sum c_j(g_j) s.t. a g = rhs, lo <= g <= hi, along a primal decomposition.

    The top path is enumerated; every block below it is then an independent
    problem with right-hand side rhs_i - A_bar_i g0, solved recursively and
    memoized per (block, right-hand side).  Returns (cost, g) or None.
    """
    if memo is None:
        memo = {}
    dec = _decompose(a, td)
    if not dec.blocks:
        return lattice_argmin(_system(a, rhs), lo, hi, costs, cap)
    path = dec.path_cols
    ranges = [range(lo[j], hi[j] + 1) for j in path]
    size = 1
    for r in ranges:
        size *= len(r)
    if size > cap:
        raise LimitError("path enumeration box", size, cap)
    if size == 0:
        return None
    path_cost = [{v: costs[j](v) for v in r} for j, r in zip(path, ranges)]
    pos = {j: k for k, j in enumerate(path)}
    top_rows = [(rhs[i], [(pos[j], v) for j, v in a.row_items(i)]) for i in dec.path_rows]
    blocks = []
    for bi, blk in enumerate(dec.blocks):
        links = [[(pos[j], v) for j, v in a.row_items(i) if j in pos] for i in blk.rows]
        blocks.append((
            bi, blk, a.submatrix(blk.rows, blk.cols), links,
            [rhs[i] for i in blk.rows],
            [lo[j] for j in blk.cols], [hi[j] for j in blk.cols],
            [costs[j] for j in blk.cols],
        ))
    best = None
    for g0 in itertools.product(*ranges):
        if any(sum(v * g0[k] for k, v in items) != r for r, items in top_rows):
            continue
        total = sum(pc[v] for pc, v in zip(path_cost, g0))
        full = [0] * a.cols
        for j, v in zip(path, g0):
            full[j] = v
        ok = True
        for bi, blk, sub, links, brhs, blo, bhi, bcost in blocks:
            r = tuple(b - sum(v * g0[k] for k, v in items) for b, items in zip(brhs, links))
            key = (tag + (bi,), r)
            if key not in memo:
                memo[key] = primal_min(sub, blk.td, blo, bhi, bcost, r, cap, memo, tag + (bi,))
            res = memo[key]
            if res is None:
                ok = False
                break
            total += res[0]
            for j, v in zip(blk.cols, res[1]):
                full[j] = v
        if not ok:
            continue
        cand = (total, tuple(full))
        if best is None or cand < best:
            best = cand
    return best


class PrimalStepper(Stepper):
    """AugIP over the l_inf ball by recursion along a primal decomposition."""

    name = "primal"

    def __init__(self, a, td, rho, cap: int = ENUM_CAP) -> None:
        if td.orientation != PRIMAL or td.n != a.cols:
            raise DecompositionError("primal stepper needs a primal decomposition over the columns")
        super().__init__(a, td, rho)
        self.cap = cap

    def step(self, inst, x, lam):
        lo, hi = step_window(inst.lower, inst.upper, x, lam, self.rho.value)
        if any(l > h for l, h in zip(lo, hi)):
            return None
        res = primal_min(self.a, self.td, lo, hi, step_costs(inst.objective, x, lam),
                         (0,) * self.a.rows, self.cap)
        if res is None:
            return None
        return StepResult(res[1], lam, res[0])


def solve_augip_primal(inst: IpInstance, x, lam: int, td: TdDecomposition, rho: int,
                       cap: int = ENUM_CAP) -> StepResult | None:
    return PrimalStepper(inst.a, td, RhoChoice(rho, "user"), cap)(inst, x, lam)


# ---------------------------------------------------------------------------
# dual dynamic program


@dataclass
class Segment:
    """A maximal chain of a dual forest: rows[0] is the top, rows[-1] branches or is a leaf."""

    rows: list[int]
    anc: tuple[int, ...]
    children: list["Segment"]
    cols_by_row: dict[int, list[int]]


def dual_segments(a: SparseIntMatrix, td: TdDecomposition) -> Segment:
    """Chain structure of a dual decomposition under a virtual root.

    Every column is attached to the deepest row of its support; columns
    without support go to the virtual root.
    """
    if td.orientation != DUAL or td.n != a.rows:
        raise DecompositionError("dual solver needs a dual decomposition over the rows")
    if not verify_td_decomposition(build_dual_graph(a), td):
        raise DecompositionError("decomposition does not cover the row interaction graph")
    depth = td.depth
    home: dict[int | None, list[int]] = {}
    for j in range(a.cols):
        sup = a.col_support(j)
        deep = max(sup, key=lambda i: depth[i]) if sup else None
        home.setdefault(deep, []).append(j)

    def build(top: int, anc: tuple[int, ...]) -> Segment:
        rows = [top]
        while len(td.children[rows[-1]]) == 1:
            rows.append(td.children[rows[-1]][0])
        key = anc + tuple(rows)
        return Segment(rows, anc, [build(c, key) for c in td.children[rows[-1]]],
                       {i: home.get(i, []) for i in rows})

    root = Segment([], (), [build(r, ()) for r in td.roots], {})
    root.cols_by_row[None] = home.get(None, [])
    return root


class DualTable:
    """Min-plus tables keyed by (residual over some rows..., l1 norm so far)."""

    def __init__(self, amax: int, rho: int, cap: int, nominal: int) -> None:
        self.amax = amax
        self.rho = rho
        self.cap = cap
        self.nominal = nominal

    def combine(self, cur: dict, options: list) -> dict:
        """options: (delta key, cost, update); the update is {col: value} or a
        dense vector added to the stored witness."""
        new: dict = {}
        rho, amax = self.rho, self.amax
        for key, (c, g) in cur.items():
            for dk, oc, upd in options:
                nk = tuple(p + q for p, q in zip(key, dk))
                if nk[-1] > rho:
                    continue
                # every key row must return to zero using the norm still left
                bound = (rho - nk[-1]) * amax
                if any(v > bound or v < -bound for v in nk[:-1]):
                    continue
                if isinstance(upd, dict):
                    ng = list(g)
                    for j, v in upd.items():
                        ng[j] = v
                    ng = tuple(ng)
                else:
                    ng = tuple(p + q for p, q in zip(g, upd))
                cand = (c + oc, ng)
                old = new.get(nk)
                if old is None or cand < old:
                    new[nk] = cand
            if len(new) > self.cap:
                raise LimitError("dual DP table (nominal (2||A|| rho + 1)^k1 = "
                                 f"{self.nominal})", len(new), self.cap)
        return new


def column_options(a: SparseIntMatrix, j: int, keys, lo, hi, costs) -> list:
    """All values of column j as table options over the given rows (+ norm)."""
    pos = {i: k for k, i in enumerate(keys)}
    entries = [(pos[i], v) for i, v in a.col_items(j) if i in pos]
    opts = []
    for v in range(lo[j], hi[j] + 1):
        dk = [0] * (len(keys) + 1)
        for k, av in entries:
            dk[k] = av * v
        dk[-1] = abs(v)
        opts.append((tuple(dk), costs[j](v), {j: v}))
    return opts


def project(cur: dict, keep: int) -> dict:
    """Drop residual coordinates beyond the first ``keep`` (the norm stays)."""
    out: dict = {}
    for k, v in cur.items():
        pk = k[:keep] + k[-1:]
        old = out.get(pk)
        if old is None or v < old:
            out[pk] = v
    return out


def dual_min(a: SparseIntMatrix, root: Segment, lo, hi, costs, rho: int,
             cap: int = TABLE_CAP):
    """min sum c_j(g_j) s.t. a g = 0, ||g||_1 <= rho, lo <= g <= hi, by
    dynamic programming over the chains of a dual decomposition.

    Returns (cost, g) or None.  A partial residual r with norm t so far is
    kept only while |r_i| <= (rho - t) ||A||, since the remaining columns
    have to cancel it with the norm that is left.
    """
    k1 = max((len(s.rows) for s in root.children), default=0)
    table = DualTable(a.max_abs, rho, cap, (2 * a.max_abs * rho + 1) ** k1)
    zero = (0,) * a.cols

    def solve(seg: Segment) -> dict:
        keys = seg.anc + tuple(seg.rows)
        cur = {(0,) * (len(keys) + 1): (0, zero)}
        for child in seg.children:
            sub = solve(child)
            cur = table.combine(cur, [(dk, c, g) for dk, (c, g) in sub.items()])
            if not cur:
                return {}
        if not seg.rows:
            for j in seg.cols_by_row.get(None, []):
                cur = table.combine(cur, column_options(a, j, keys, lo, hi, costs))
        for t in range(len(seg.rows) - 1, -1, -1):
            for j in seg.cols_by_row[seg.rows[t]]:
                cur = table.combine(cur, column_options(a, j, keys, lo, hi, costs))
            p = len(seg.anc) + t
            cur = {k: v for k, v in cur.items() if k[p] == 0}
            if not cur:
                return {}
        return project(cur, len(seg.anc))

    top = solve(root)
    return min(top.values()) if top else None


class DualStepper(Stepper):
    """AugIP over the l_1 ball by the chain dynamic program of a dual decomposition."""

    name = "dual"

    def __init__(self, a, td, rho, cap: int = TABLE_CAP) -> None:
        super().__init__(a, td, rho)
        self.root = dual_segments(a, td)
        self.cap = cap

    def step(self, inst, x, lam):
        lo, hi = step_window(inst.lower, inst.upper, x, lam, self.rho.value)
        if any(l > h for l, h in zip(lo, hi)):
            return None
        res = dual_min(self.a, self.root, lo, hi, step_costs(inst.objective, x, lam),
                       self.rho.value, self.cap)
        if res is None:
            return None
        return StepResult(res[1], lam, res[0])


def solve_augip_dual(inst: IpInstance, x, lam: int, td: TdDecomposition, rho: int,
                     cap: int = TABLE_CAP) -> StepResult | None:
    return DualStepper(inst.a, td, RhoChoice(rho, "user"), cap)(inst, x, lam)


# ---------------------------------------------------------------------------
# backends


@dataclass(frozen=True)
class Backend:
    """Recipe for steppers: which algorithm and how to pick rho."""

    algo: str = "primal"
    rho: str | int = "auto"
    cap: int = ENUM_CAP
    table_cap: int = TABLE_CAP
    leaf_width: int = 4

    @property
    def orientation(self) -> str:
        return DUAL if self.algo.startswith("dual") else PRIMAL

    def stepper(self, a: SparseIntMatrix, td: TdDecomposition) -> Stepper:
        if self.algo in ("primal", "primal-recursive"):
            rho = resolve_rho(a, "inf", self.rho, td, self.cap)
        else:
            rho = resolve_rho(a, "1", self.rho, td, self.cap)
        if self.algo == "primal":
            return PrimalStepper(a, td, rho, self.cap)
        if self.algo == "dual":
            return DualStepper(a, td, rho, self.table_cap)
        if self.algo == "dual-convtree":
            from .convtree import ConvTreeStepper
            return ConvTreeStepper(a, td, rho, self.table_cap)
        if self.algo == "primal-recursive":
            from .recursive_primal import PrefixStepper
            return PrefixStepper(a, td, rho, self)
        raise ValueError(f"unknown algorithm {self.algo!r}")


# ---------------------------------------------------------------------------
# halfling steps and the augmentation loop


def lambda_range(inst: IpInstance, lam_max: int | None = None) -> list[int]:
    """Powers of two up to the box width (at least 1)."""
    if lam_max is None:
        width = inst.box_width()
        if not is_finite(width):
            raise InstanceError("step lengths need finite bounds or an explicit cap")
        lam_max = width
    out, lam = [1], 2
    while lam <= lam_max:
        out.append(lam)
        lam *= 2
    return out


def halfling_step(inst: IpInstance, x, stepper: Callable, lam_max: int | None = None) -> StepResult | None:
    """Best step over all lam in {1, 2, 4, ...} up to the box width.

    Ties keep the smallest lam (and each stepper already returns the
    lexicographically smallest g).  None when nothing improves.
    """
    best = None
    for lam in lambda_range(inst, lam_max):
        res = stepper(inst, x, lam)
        if res is not None and res.delta < 0 and (best is None or res.delta < best.delta):
            best = res
    return best


def augment_to_optimality(inst: IpInstance, x0, stepper: Callable, lam_max: int | None = None,
                          max_iter: int | None = None) -> SolveReport:
    x = tuple(int(v) for v in x0)
    if not is_feasible(inst, x):
        raise InstanceError("starting point is not feasible")
    value = inst.f(x)
    report = SolveReport(OPTIMAL, details={"start": list(x), "start_value": value})
    while max_iter is None or report.iterations < max_iter:
        step = halfling_step(inst, x, stepper, lam_max)
        if step is None:
            break
        x = tuple(xi + hi for xi, hi in zip(x, step.h))
        value += step.delta
        report.iterations += 1
        report.trace.append((step.lam, value))
    report.x = x
    report.value = value
    if isinstance(stepper, Stepper):
        report.rho_source = stepper.rho.source
        report.algorithm = stepper.name
    return report


# ---------------------------------------------------------------------------
# Hermite normal form


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hermite_normal_form(a: SparseIntMatrix) -> tuple[list[list[int]], list[list[int]], list[int | None]]:
    """Column-style HNF: returns (H, U, pivot column per row) with A U = H.

    U is unimodular, H is lower triangular in the pivot columns with positive
    pivots and entries left of each pivot reduced modulo it.
    """
    m, n = a.rows, a.cols
    H = a.to_dense()
    U = [[int(i == j) for j in range(n)] for i in range(n)]

    def colop(k: int, c: int, p: int, q: int, r: int, s: int) -> None:
        """(col_k, col_c) <- (p col_k + q col_c, r col_k + s col_c)."""
        for M in (H, U):
            for row in M:
                a_, b_ = row[k], row[c]
                row[k], row[c] = p * a_ + q * b_, r * a_ + s * b_

    pivots: list[int | None] = []
    c = 0
    for i in range(m):
        if c >= n:
            pivots.append(None)
            continue
        for k in range(c + 1, n):
            if H[i][k] == 0:
                continue
            a_, b_ = H[i][c], H[i][k]
            g, p, q = _xgcd(a_, b_)
            # new col c = p col_c + q col_k, new col k = (-b/g) col_c + (a/g) col_k
            colop(c, k, p, q, -b_ // g, a_ // g)
        if H[i][c] == 0:
            pivots.append(None)
            continue
        if H[i][c] < 0:
            for M in (H, U):
                for row in M:
                    row[c] = -row[c]
        piv = H[i][c]
        for k in range(c):
            q = H[i][k] // piv
            if q:
                for M in (H, U):
                    for row in M:
                        row[k] -= q * row[c]
        pivots.append(c)
        c += 1
    return H, U, pivots


def hermite_solve(a: SparseIntMatrix, b: Sequence[int]) -> tuple[int, ...] | None:
    """An integer z with Az = b, or None when none exists."""
    H, U, pivots = hermite_normal_form(a)
    n = a.cols
    y = [0] * n
    for i, c in enumerate(pivots):
        acc = sum(H[i][k] * y[k] for k in range(n) if k != c)
        if c is None:
            if acc != b[i]:
                return None
            continue
        r = b[i] - acc
        if r % H[i][c]:
            return None
        y[c] = r // H[i][c]
    return tuple(sum(U[j][k] * y[k] for k in range(n)) for j in range(n))


# ---------------------------------------------------------------------------
# initial feasible solutions


def _finite_scale(inst: IpInstance, z: Sequence[int]) -> int:
    vals = [abs(v) for v in list(inst.lower) + list(inst.upper) if is_finite(v)]
    vals += [abs(v) for v in z]
    return max(vals + [1])


def find_initial_solution_hnf(inst: IpInstance, stepper: Callable) -> tuple[tuple[int, ...] | None, SolveReport | None]:
    """Integer solution of Az = b, then pull it into the box by minimizing
    the distance to [l, u] under the same matrix.

    With infinite bounds the step lengths stop at twice the largest finite
    bound or coordinate of z.
    """
    z = hermite_solve(inst.a, inst.b)
    if z is None:
        return None, None
    lower = tuple(min(l, zi) for l, zi in zip(inst.lower, z))
    upper = tuple(max(u, zi) for u, zi in zip(inst.upper, z))
    aux = inst.replace(
        lower=lower, upper=upper,
        objective=SeparableObjective(tuple(distance_term(l, u) for l, u in zip(inst.lower, inst.upper))),
    )
    lam_max = None if aux.finite_bounds() else 2 * _finite_scale(inst, z)
    rep = augment_to_optimality(aux, z, stepper, lam_max=lam_max)
    rep.details["phase"] = "hnf-feasibility"
    if rep.value != 0:
        return None, rep
    return rep.x, rep


def identity_extension(inst: IpInstance) -> IpInstance:
    """The instance with matrix (A I): slack s_i in [min(0, b_i), max(0, b_i)]
    with linear weight sign(b_i) and zero cost on x.  Its optimum is zero
    exactly when the original system is feasible."""
    a_i = inst.a.hstack_identity()
    sign = [(b > 0) - (b < 0) for b in inst.b]
    return IpInstance(
        a_i, inst.b,
        tuple(inst.lower) + tuple(min(0, b) for b in inst.b),
        tuple(inst.upper) + tuple(max(0, b) for b in inst.b),
        SeparableObjective((Linear(0),) * inst.n + tuple(Linear(s) for s in sign)),
    )


def find_initial_solution_AI(inst: IpInstance, backend: Backend, td: TdDecomposition
                             ) -> tuple[tuple[int, ...] | None, SolveReport]:
    """Feasibility through the (A I) instance started at (0, b).

    ``inst`` must contain 0 in its box (center it first); ``td`` is a
    decomposition of A in the backend's orientation.
    """
    if not inst.finite_bounds():
        raise InstanceError("the (A I) feasibility instance needs finite bounds")
    if any(not (l <= 0 <= u) for l, u in zip(inst.lower, inst.upper)):
        raise InstanceError("the box must contain 0 (center the instance first)")
    aux = identity_extension(inst)
    z0 = (0,) * inst.n + tuple(inst.b)
    stepper = backend.stepper(aux.a, extend_decomposition_for_identity(inst.a, td))
    rep = augment_to_optimality(aux, z0, stepper)
    rep.details["phase"] = "identity-feasibility"
    if rep.value != 0:
        return None, rep
    return rep.x[:inst.n], rep


# ---------------------------------------------------------------------------
# infinite bounds with linear objectives


def detect_unbounded_linear(inst: IpInstance, stepper: Callable) -> tuple[int, ...] | None:
    """An integer ray g (Ag = 0, wg < 0, moving only toward infinite bounds),
    or None when the objective is bounded on the feasible set.

    One AugIP query with lam = 1 from 0 on the box that is 0 on finite sides
    and +-N on infinite ones, N the base Graver norm bound.
    """
    if not inst.objective.is_linear():
        raise InstanceError("unboundedness detection needs a linear objective")
    pure = purify(inst.a, [0] * inst.m)
    big = base_norm_bound(pure.a)
    lower = tuple(0 if is_finite(l) else -big for l in inst.lower)
    upper = tuple(0 if is_finite(u) else big for u in inst.upper)
    aux = inst.replace(b=(0,) * inst.m, lower=lower, upper=upper)
    res = stepper(aux, (0,) * inst.n, 1)
    if res is None or res.delta >= 0:
        return None
    return res.g


def solve_no_apriori_bounds(inst: IpInstance, x0, stepper: Callable,
                            max_iter: int | None = None) -> SolveReport:
    """Augment with lam = 1, 2, 4, ... while the returned step still improves.

    Needs a linear objective and a bounded problem (see
    detect_unbounded_linear).
    """
    if not inst.objective.is_linear():
        raise InstanceError("unbounded boxes are only supported for linear objectives")
    x = tuple(int(v) for v in x0)
    if not is_feasible(inst, x):
        raise InstanceError("starting point is not feasible")
    value = inst.f(x)
    report = SolveReport(OPTIMAL, details={"start": list(x), "start_value": value})
    width = inst.box_width()
    while max_iter is None or report.iterations < max_iter:
        best, lam = None, 1
        while True:
            res = stepper(inst, x, lam)
            if res is None or res.delta >= 0:
                break
            if best is None or res.delta < best.delta:
                best = res
            lam *= 2
            if is_finite(width) and lam > width:
                break
        if best is None:
            break
        x = tuple(xi + hi for xi, hi in zip(x, best.h))
        value += best.delta
        report.iterations += 1
        report.trace.append((best.lam, value))
    report.x, report.value = x, value
    if isinstance(stepper, Stepper):
        report.rho_source = stepper.rho.source
        report.algorithm = stepper.name
    return report


def unbounded_report(g) -> SolveReport:
    return SolveReport(UNBOUNDED, details={"ray": list(g)})


def infeasible_report(**details) -> SolveReport:
    return SolveReport(INFEASIBLE, details=dict(details))
