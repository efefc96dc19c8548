"""Recursive primal algorithm: proximity scaling outside, and augmentation
steps that are best over "prefix-bounded" sets inside.

For a primal decomposition with top path P, a step at length lam ranges
over S_lam = lam * ([-rho, rho]^P x Z^(rest)).  The path part g0 is
enumerated; every block below the path then has to solve an exact separable
convex IP with right-hand side -A_bar g0, which is done by the same
algorithm one level down, or by the small-dimension leaf solver.
"""

from __future__ import annotations

from dataclasses import dataclass

from .augment import Backend, Stepper, _decompose, _system, step_costs, step_window
from .errors import DecompositionError, LimitError
from .lattice import lattice_argmin, lattice_points
from .instance import INF, IpInstance, SeparableObjective, Shifted
from .report import INFEASIBLE, OPTIMAL, SolveReport, StepResult
from .structure import PRIMAL, TdDecomposition

LEAF_WIDTH = 4


@dataclass(frozen=True)
class PrefixBestQuery:
    inst: IpInstance
    x: tuple[int, ...]
    lam: int
    rho: int

    @property
    def k(self) -> int:
        return self.inst.n


def _sub_instance(inst: IpInstance, x, lam: int, cols, sub_a, rhs, lo, hi) -> IpInstance:
    """Block subproblem in the step variable: min sum f_j(x_j + lam g_j)."""
    terms = tuple(Shifted(inst.objective.terms[j], x[j], lam) for j in cols)
    return IpInstance(sub_a, tuple(rhs), tuple(lo), tuple(hi), SeparableObjective(terms))


def best_step_over_prefix(q: PrefixBestQuery, td: TdDecomposition, backend: Backend,
                          stats: dict | None = None) -> StepResult | None:
    """Best step lam * g with g in [-rho, rho] on the top path and unrestricted
    (inside the box) elsewhere; None when no such step exists."""
    inst, x, lam = q.inst, q.x, q.lam
    a = inst.a
    dec = _decompose(a, td)
    # the path window is the rho ball, block columns only meet the box
    plo, phi = step_window(inst.lower, inst.upper, x, lam, q.rho)
    blo, bhi = step_window(inst.lower, inst.upper, x, lam, INF)
    path = dec.path_cols
    base = [inst.objective.terms[j](x[j]) for j in range(inst.n)]
    if not dec.blocks:
        # the whole step lives in the rho ball: a plain lattice minimization
        res = lattice_argmin(_system(a, (0,) * a.rows), plo, phi,
                             step_costs(inst.objective, x, lam), backend.cap)
        return None if res is None else StepResult(res[1], lam, res[0])
    path_sys = _system(a.submatrix(dec.path_rows, path), (0,) * len(dec.path_rows))
    prefixes = lattice_points(path_sys, [plo[j] for j in path], [phi[j] for j in path],
                              backend.cap)
    pos = {j: k for k, j in enumerate(path)}
    blocks = []
    for blk in dec.blocks:
        links = [[(pos[j], v) for j, v in a.row_items(i) if j in pos] for i in blk.rows]
        blocks.append((blk, a.submatrix(blk.rows, blk.cols), links))
    memo: dict = {}
    best = None
    for row in prefixes:
        g0 = tuple(int(v) for v in row)
        full = [0] * inst.n
        total = 0
        for j, v in zip(path, g0):
            full[j] = v
            total += inst.objective.terms[j](x[j] + lam * v) - base[j]
        ok = True
        for bi, (blk, sub_a, links) in enumerate(blocks):
            r = tuple(-sum(v * g0[k] for k, v in items) for items in links)
            key = (bi, r)
            if key not in memo:
                sub = _sub_instance(inst, x, lam, blk.cols, sub_a, r,
                                    [blo[j] for j in blk.cols], [bhi[j] for j in blk.cols])
                if stats is not None:
                    stats["subproblems"] = stats.get("subproblems", 0) + 1
                rep = solve_block(sub, blk.td, backend)
                memo[key] = rep.x if rep.optimal else None
            y = memo[key]
            if y is None:
                ok = False
                break
            for j, v in zip(blk.cols, y):
                full[j] = v
                total += inst.objective.terms[j](x[j] + lam * v) - base[j]
        if not ok:
            continue
        cand = (total, tuple(full))
        if best is None or cand < best:
            best = cand
    if best is None:
        return None
    return StepResult(best[1], lam, best[0])


def solve_block(inst: IpInstance, td: TdDecomposition, backend: Backend) -> SolveReport:
    if inst.n <= backend.leaf_width:
        return leaf_solve_fixed_dim(inst, backend.leaf_width)
    return primal_recursive_solve(inst, td, backend)


def leaf_solve_fixed_dim(inst: IpInstance, width: int = LEAF_WIDTH) -> SolveReport:
    """Exact optimum of an instance with at most ``width`` columns by scaling
    with enumerated augmentation steps.  Only objective comparisons are used."""
    from .scaling import scaling_solve

    if inst.n > width:
        raise LimitError("leaf width", inst.n, width)
    if inst.n == 0:
        ok = not any(inst.b)
        return SolveReport(OPTIMAL if ok else INFEASIBLE, x=() if ok else None,
                           value=0 if ok else None, algorithm="leaf")
    path = TdDecomposition(tuple(range(-1, inst.n - 1)), PRIMAL)
    rep = scaling_solve(inst, Backend("primal"), path)
    rep.algorithm = "leaf"
    return rep


class PrefixStepper(Stepper):
    """Steps that are best over S_lam, the prefix-bounded set of the top path."""

    name = "primal-recursive"

    def __init__(self, a, td, rho, backend: Backend) -> None:
        if td.orientation != PRIMAL or td.n != a.cols:
            raise DecompositionError("recursive primal solver needs a primal decomposition")
        super().__init__(a, td, rho)
        self.backend = backend
        self.stats: dict = {}

    def step(self, inst, x, lam):
        q = PrefixBestQuery(inst, x, lam, self.rho.value)
        return best_step_over_prefix(q, self.td, self.backend, self.stats)


def primal_recursive_solve(inst: IpInstance, td: TdDecomposition,
                           backend: Backend | None = None) -> SolveReport:
    """Exact optimum: proximity scaling over (A I) and A with prefix-best steps."""
    from .scaling import scaling_solve

    if backend is None:
        backend = Backend("primal-recursive")
    elif backend.algo != "primal-recursive":
        backend = Backend("primal-recursive", backend.rho, backend.cap,
                          backend.table_cap, backend.leaf_width)
    rep = scaling_solve(inst, backend, td)
    rep.algorithm = "primal-recursive"
    return rep
