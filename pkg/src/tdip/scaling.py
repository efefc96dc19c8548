"""Proximity scaling: solve a sequence of coarse instances with small boxes,
each centred on the previous answer, then an epsilon-accurate continuous
relaxation via a refined ("up-scaled") integer program.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .augment import Backend, augment_to_optimality, find_initial_solution_AI, identity_extension
from .errors import InstanceError
from .graver import resolve_rho
from .instance import (
    IpInstance,
    Linear,
    PiecewiseLinear,
    Quadratic,
    SeparableObjective,
    Shifted,
    ceil_div,
    center_instance,
    floor_div,
    purify,
)
from .report import INFEASIBLE, OPTIMAL, SolveReport
from .structure import DUAL, TdDecomposition, extend_decomposition_for_identity


@dataclass(frozen=True)
class BoxExtended:
    """A term continued linearly outside [lo, hi] with its boundary slopes.

    Coarse instances may evaluate the objective slightly outside the original
    box; piecewise terms without extension slopes are undefined there.
    """

    base: object
    lo: int
    hi: int

    def __call__(self, x: int) -> int:
        if x < self.lo:
            slope = self.base(self.lo + 1) - self.base(self.lo) if self.hi > self.lo else 0
            return self.base(self.lo) + slope * (x - self.lo)
        if x > self.hi:
            slope = self.base(self.hi) - self.base(self.hi - 1) if self.hi > self.lo else 0
            return self.base(self.hi) + slope * (x - self.hi)
        return self.base(x)

    def problems(self) -> list[str]:
        return self.base.problems()


def _needs_extension(t) -> bool:
    if isinstance(t, PiecewiseLinear):
        return t.left_slope is None or t.right_slope is None
    if isinstance(t, Shifted):
        return _needs_extension(t.base)
    return False


def extend_objective(inst: IpInstance) -> IpInstance:
    terms = tuple(BoxExtended(t, l, u) if _needs_extension(t) else t
                  for t, l, u in zip(inst.objective.terms, inst.lower, inst.upper))
    return inst.replace(objective=SeparableObjective(terms))


def scale_instance(inst: IpInstance, s: int) -> IpInstance:
    """min f(s y) s.t. Ay = 0, floor(l/s) <= y <= ceil(u/s)."""
    if any(inst.b):
        raise InstanceError("scaling needs a homogeneous instance (b = 0)")
    if s < 1:
        raise ValueError("scale must be a positive integer")
    if s == 1:
        return inst
    return inst.replace(
        lower=tuple(floor_div(l, s) for l in inst.lower),
        upper=tuple(ceil_div(u, s) for u in inst.upper),
        objective=inst.objective.shifted((0,) * inst.n, s),
    )


def proximity_radius(n: int, g: int, s: int | None = None) -> int:
    """n g for the basic bound, (2n - 2) s g for the scaled one."""
    if s is None:
        return n * g
    return (2 * n - 2) * s * g


@dataclass
class ScaleLevel:
    phase: str
    s: int
    width: int  # l_inf width of the coarse box
    limit: int  # the width the window construction guarantees
    anchored: bool
    iterations: int


@dataclass
class ScalePlan:
    radius: int
    ginf_ai: int
    source: str
    levels: list[ScaleLevel] = field(default_factory=list)


def _in_box(y, lo, hi) -> bool:
    return all(l <= v <= u for v, l, u in zip(y, lo, hi))


def _scaling_loop(inst: IpInstance, start, backend: Backend, td: TdDecomposition,
                  radius: int, phase: str, plan: ScalePlan) -> tuple[tuple[int, ...], int]:
    """Optimum of ``inst`` from the feasible point ``start``; returns (x, iterations)."""
    inst = extend_objective(inst)
    n = inst.n
    lower = tuple(l - x for l, x in zip(inst.lower, start))
    upper = tuple(u - x for u, x in zip(inst.upper, start))
    obj = inst.objective.shifted(start)
    stepper = backend.stepper(inst.a, td)
    reach = max([abs(v) for v in lower + upper] + [1])
    kappa = 0
    while (1 << kappa) * radius < reach:
        kappa += 1
    x = (0,) * n
    lp, up = lower, upper
    total_iter = 0
    for i in range(kappa + 1):
        s = 1 << (kappa - i)
        li = tuple(max(l, xi - s * radius) for l, xi in zip(lp, x))
        ui = tuple(min(u, xi + s * radius) for u, xi in zip(up, x))
        anchored = True
        y0 = None
        for attempt in range(2):
            aux = IpInstance(inst.a, (0,) * inst.m,
                             tuple(floor_div(l, s) for l in li),
                             tuple(ceil_div(u, s) for u in ui),
                             obj.shifted((0,) * n, s))
            guess = tuple(xi // s for xi in x)
            if _in_box(guess, aux.lower, aux.upper):
                y0 = guess
            else:
                centred, v = center_instance(aux)
                found, _ = find_initial_solution_AI(centred, backend, td)
                if found is not None:
                    y0 = tuple(a + b for a, b in zip(found, v))
            if y0 is not None:
                break
            # no point of the narrowed window: fall back to the full box
            anchored = False
            li, ui = lower, upper
        if y0 is None:
            raise InstanceError("coarse instance without feasible points")
        rep = augment_to_optimality(aux, y0, stepper)
        total_iter += rep.iterations
        x = tuple(s * v for v in rep.x)
        width = max((u - l for l, u in zip(aux.lower, aux.upper)), default=0)
        if anchored and width > 2 * radius + 1:
            raise AssertionError(f"coarse window of width {width} exceeds {2 * radius + 1}")
        plan.levels.append(ScaleLevel(phase, s, width, 2 * radius + 1, anchored, rep.iterations))
        lp, up = li, ui
    return tuple(xi + si for xi, si in zip(x, start)), total_iter


def scaling_solve(inst: IpInstance, backend: Backend, td: TdDecomposition,
                  rho_policy: str | int | None = None) -> SolveReport:
    """Exact optimum through proximity scaling.

    A feasibility phase runs the scaling loop on the (A I) instance from
    (0, b); the optimization phase then runs it on the instance itself from
    the point found.  The window radius is 4 n' g_inf(A_I) - 1 with n' the
    column count of the phase's matrix, so every coarse box has width at
    most 8 n' g_inf(A_I).
    """
    if not inst.finite_bounds():
        raise InstanceError("scaling needs finite bounds")
    pure = purify(inst.a, inst.b)
    if pure is None:
        return SolveReport(INFEASIBLE, algorithm=f"scaling/{backend.algo}",
                           details={"reason": "no rational solution"})
    if len(pure.rows) != inst.m:
        inst = inst.replace(a=pure.a, b=pure.b)
        if td.orientation == DUAL:
            td = td.restrict(pure.rows)
    centred, v = center_instance(inst)
    aux = identity_extension(centred)
    td_i = extend_decomposition_for_identity(centred.a, td)
    policy = backend.rho if rho_policy is None else rho_policy
    g = resolve_rho(aux.a, "inf", policy, None, backend.cap)
    ginf = max(1, g.value)
    plan = ScalePlan(0, ginf, g.source)

    def radius(cols: int) -> int:
        return 4 * cols * ginf - 1

    z0 = (0,) * centred.n + tuple(centred.b)
    plan.radius = radius(aux.n)
    z, it1 = _scaling_loop(aux, z0, backend, td_i, plan.radius, "feasibility", plan)
    details = {"plan": plan, "translation": list(v)}
    if aux.f(z) != 0:
        return SolveReport(INFEASIBLE, iterations=it1, rho_source=g.source,
                           algorithm=f"scaling/{backend.algo}", details=details)
    x0 = z[:centred.n]
    x, it2 = _scaling_loop(centred, x0, backend, td, radius(centred.n), "optimization", plan)
    x = tuple(a + b for a, b in zip(x, v))
    return SolveReport(OPTIMAL, x=x, value=inst.f(x), iterations=it1 + it2,
                       rho_source=g.source, algorithm=f"scaling/{backend.algo}",
                       details=details)


# ---------------------------------------------------------------------------
# continuous relaxation


def _up_term(t, p: int, factor: int):
    """factor * t(z / p) as an integer-valued term."""
    if isinstance(t, Linear):
        return Linear(t.weight * factor // p)
    if isinstance(t, Quadratic):
        if factor % (p * p):
            raise InstanceError("quadratic terms need the factor p^2")
        k = factor // (p * p)
        return Quadratic(t.a * k, t.b * p * k, t.c * p * p * k)
    if isinstance(t, PiecewiseLinear):
        k = factor // p
        return PiecewiseLinear(
            tuple(p * b for b in t.breakpoints),
            tuple(factor * v for v in t.values),
            None if t.left_slope is None else t.left_slope * k,
            None if t.right_slope is None else t.right_slope * k,
        )
    raise InstanceError(f"cannot refine objective term {type(t).__name__}")


@dataclass(frozen=True)
class Relaxation:
    x: tuple[Fraction, ...]
    p: int
    factor: int
    report: SolveReport


def solve_relaxation_eps(inst: IpInstance, eps, backend: Backend, td: TdDecomposition,
                         p: int | None = None) -> Relaxation:
    """An epsilon-accurate point of the continuous relaxation.

    With p the smallest integer such that n g_inf(A) / p <= eps, the
    integer program over the grid (1/p) Z^n (bounds and right-hand side
    multiplied by p, objective rescaled by a positive integer to stay
    integral) is solved exactly and its optimum divided by p.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not inst.finite_bounds():
        raise InstanceError("the relaxation needs finite bounds")
    if p is None:
        g = resolve_rho(inst.a, "inf", backend.rho, None, backend.cap).value
        p = max(1, -(-(inst.n * max(g, 1) * eps.denominator) // eps.numerator))
    quad = any(isinstance(t, Quadratic) for t in inst.objective.terms)
    factor = p * p if quad else p
    up = IpInstance(
        inst.a, tuple(p * b for b in inst.b),
        tuple(p * l for l in inst.lower), tuple(p * u for u in inst.upper),
        SeparableObjective(tuple(_up_term(t, p, factor) for t in inst.objective.terms)),
    )
    rep = scaling_solve(up, backend, td)
    if not rep.optimal:
        return Relaxation((), p, factor, rep)
    return Relaxation(tuple(Fraction(v, p) for v in rep.x), p, factor, rep)
