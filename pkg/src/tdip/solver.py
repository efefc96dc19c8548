"""One entry point that validates an instance, picks a decomposition and runs
the requested algorithm."""

from __future__ import annotations

from .augment import (
    Backend,
    augment_to_optimality,
    detect_unbounded_linear,
    find_initial_solution_AI,
    find_initial_solution_hnf,
    infeasible_report,
    solve_no_apriori_bounds,
    unbounded_report,
)
from .errors import DecompositionError, InstanceError, LimitError
from .instance import IpInstance, center_instance, purify, validate_instance
from .lattice import ENUM_CAP
from .report import SolveReport
from .scaling import scaling_solve
from .structure import (
    DUAL,
    PRIMAL,
    TdDecomposition,
    build_dual_graph,
    build_primal_graph,
    compute_treedepth_exact,
    verify_td_decomposition,
)

ALGOS = ("auto", "primal", "dual", "primal-recursive", "dual-convtree")
MODES = ("basic", "scaling")


def _graph(a, orientation):
    return build_primal_graph(a) if orientation == PRIMAL else build_dual_graph(a)


def choose_decomposition(a, algo: str = "auto", td: TdDecomposition | None = None
                         ) -> tuple[str, TdDecomposition]:
    """The algorithm to run and a decomposition for it.

    A supplied decomposition fixes the orientation.  Otherwise ``auto``
    computes both and keeps the shallower one, preferring the dual side on a
    tie.
    """
    if td is not None:
        if not verify_td_decomposition(_graph(a, td.orientation), td):
            raise DecompositionError(f"supplied {td.orientation} decomposition does not fit the matrix")
        if algo == "auto":
            return ("dual" if td.orientation == DUAL else "primal"), td
        want = DUAL if algo.startswith("dual") else PRIMAL
        if want != td.orientation:
            raise DecompositionError(f"algorithm {algo} needs a {want} decomposition")
        return algo, td
    if algo != "auto":
        orient = DUAL if algo.startswith("dual") else PRIMAL
        return algo, compute_treedepth_exact(_graph(a, orient), orient)
    found = {}
    for orient in (DUAL, PRIMAL):
        try:
            found[orient] = compute_treedepth_exact(_graph(a, orient), orient)
        except LimitError:
            continue
    if not found:
        raise LimitError("treedepth component", max(a.rows, a.cols), 20)
    if DUAL in found and (PRIMAL not in found or found[DUAL].height <= found[PRIMAL].height):
        return "dual", found[DUAL]
    return "primal", found[PRIMAL]


def solve(inst: IpInstance, algo: str = "auto", mode: str = "basic",
          td: TdDecomposition | None = None, rho: str | int = "auto",
          cap: int = ENUM_CAP, table_cap: int = 2_000_000, leaf_width: int = 4) -> SolveReport:
    if algo not in ALGOS:
        raise ValueError(f"unknown algorithm {algo!r}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    check = validate_instance(inst)
    if not check.ok:
        raise InstanceError("; ".join(check.problems))
    pure = purify(inst.a, inst.b)
    if pure is None:
        rep = infeasible_report(reason="no rational solution")
        rep.algorithm = f"{mode}/{algo}"
        return rep
    work = inst
    if len(pure.rows) != inst.m:
        work = inst.replace(a=pure.a, b=pure.b)
        if td is not None and td.orientation == DUAL:
            td = td.restrict(pure.rows)
    algo, td = choose_decomposition(work.a, algo, td)
    details = {"orientation": td.orientation, "td_height": td.height,
               "ttd": td.ttd, "rows_kept": len(pure.rows)}

    if not work.finite_bounds():
        rep = _solve_infinite(work, algo, td, rho, cap, table_cap)
    else:
        backend = Backend(algo, rho, cap, table_cap, leaf_width)
        if mode == "scaling":
            rep = scaling_solve(work, backend, td)
        else:
            rep = _solve_basic(work, backend, td)
    rep.algorithm = f"{mode}/{algo}"
    rep.details = {**details, **rep.details}
    return rep


def _solve_basic(inst: IpInstance, backend: Backend, td: TdDecomposition) -> SolveReport:
    centred, v = center_instance(inst)
    found, frep = find_initial_solution_AI(centred, backend, td)
    if found is None:
        return infeasible_report(phase="identity-feasibility", iterations=frep.iterations)
    x0 = tuple(a + b for a, b in zip(found, v))
    rep = augment_to_optimality(inst, x0, backend.stepper(inst.a, td))
    rep.details["feasibility_iterations"] = frep.iterations
    return rep


def _solve_infinite(inst: IpInstance, algo: str, td: TdDecomposition, rho, cap, table_cap) -> SolveReport:
    """Linear objectives only: HNF start, one unboundedness query, then
    augmentation with growing step lengths."""
    if not inst.objective.is_linear():
        raise InstanceError("infinite bounds are supported only for linear objectives")
    # the recursive variants need finite boxes for their subproblems
    basic = "dual" if td.orientation == DUAL else "primal"
    stepper = Backend(basic, rho, cap, table_cap).stepper(inst.a, td)
    x0, frep = find_initial_solution_hnf(inst, stepper)
    if x0 is None:
        return infeasible_report(phase="hnf-feasibility")
    ray = detect_unbounded_linear(inst, stepper)
    if ray is not None:
        return unbounded_report(ray)
    rep = solve_no_apriori_bounds(inst, x0, stepper)
    rep.details["stepper"] = basic
    return rep
