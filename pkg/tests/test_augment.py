from __future__ import annotations

import itertools
import math
import random

import pytest

from fixtures import random_instance, random_matrix, tiny
from tdip.augment import (
    Backend,
    augment_to_optimality,
    detect_unbounded_linear,
    find_initial_solution_AI,
    find_initial_solution_hnf,
    halfling_step,
    hermite_solve,
    lambda_range,
    solve_augip_dual,
    solve_augip_primal,
    solve_no_apriori_bounds,
)
from tdip.errors import InstanceError, LimitError
from tdip.instance import (
    INF,
    IpInstance,
    Linear,
    Quadratic,
    SeparableObjective,
    SparseIntMatrix,
    center_instance,
    f_max,
    is_feasible,
)
from tdip.oracle import brute_force_feasible, brute_force_solve
from tdip.structure import (
    DUAL,
    PRIMAL,
    TdDecomposition,
    build_dual_graph,
    build_primal_graph,
    compute_treedepth_exact,
)

PATH2 = TdDecomposition((-1, 0))
ROW1 = TdDecomposition((-1,), DUAL)


def _ball_scan(inst, x, lam, rho, norm):
    """Best delta over kernel steps in the rho ball, by plain enumeration."""
    best = None
    for g in itertools.product(range(-rho, rho + 1), repeat=inst.n):
        size = max(map(abs, g)) if norm == "inf" else sum(map(abs, g))
        if size > rho or any(inst.a.matvec(g)):
            continue
        y = [a + lam * b for a, b in zip(x, g)]
        if not all(l <= v <= u for v, l, u in zip(y, inst.lower, inst.upper)):
            continue
        d = inst.f(y) - inst.f(x)
        if best is None or d < best:
            best = d
    return best


def test_primal_augip_example():
    inst = tiny()
    res = solve_augip_primal(inst, (2, 0), 1, PATH2, 1)
    assert res.g == (-1, 1) and res.delta == -1 == _ball_scan(inst, (2, 0), 1, 1, "inf")


def test_primal_augip_at_optimum_does_not_improve():
    res = solve_augip_primal(tiny(), (0, 2), 1, PATH2, 2)
    assert res is None or res.delta >= 0


def test_primal_augip_without_room():
    # x = (1, 1) inside [0, 2]^2: lam = 3 leaves only g = 0
    res = solve_augip_primal(tiny(), (1, 1), 3, PATH2, 2)
    assert (res.g, res.delta) == ((0, 0), 0)
    # a box that excludes g = 0 leaves nothing at all
    shifted = tiny().replace(lower=(0, 0), upper=(2, 2))
    assert solve_augip_primal(shifted, (5, -4), 3, PATH2, 2) is None


def test_dual_augip_examples():
    inst = tiny()
    res = solve_augip_dual(inst, (2, 0), 1, ROW1, 2)
    assert res.delta == -1
    one_two = IpInstance(SparseIntMatrix.from_dense([[1, 2]]), (2,), (0, 0), (2, 2),
                         SeparableObjective.linear((1, 1)))
    res = solve_augip_dual(one_two, (2, 0), 1, ROW1, 3)
    assert res.g == (-2, 1) and res.delta == -1 == _ball_scan(one_two, (2, 0), 1, 3, "1")
    res = solve_augip_dual(one_two, (2, 0), 1, ROW1, 0)
    assert res is None or res.delta == 0


def test_dual_table_cap():
    a = SparseIntMatrix.from_dense([[1, 2, 2, 1], [2, 1, 1, 2]])
    inst = IpInstance(a, (0, 0), (-3,) * 4, (3,) * 4, SeparableObjective.linear((1, 1, 1, 1)))
    td = compute_treedepth_exact(build_dual_graph(a), DUAL)
    with pytest.raises(LimitError):
        solve_augip_dual(inst, (0,) * 4, 1, td, 40, cap=100)


@pytest.mark.parametrize("seed", range(25))
def test_primal_and_dual_augip_agree(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, n_max=4, m_max=2, feasible_bias=1.0)
    x = brute_force_feasible_point(inst)
    if x is None:
        return
    pt = compute_treedepth_exact(build_primal_graph(inst.a))
    dt = compute_treedepth_exact(build_dual_graph(inst.a), DUAL)
    for lam in (1, 2):
        p = solve_augip_primal(inst, x, lam, pt, 2)
        d = solve_augip_dual(inst, x, lam, dt, 2 * inst.n)
        ref_inf = _ball_scan(inst, x, lam, 2, "inf")
        ref_one = _ball_scan(inst, x, lam, 2 * inst.n, "1")
        assert (p.delta if p else None) == ref_inf
        assert (d.delta if d else None) == ref_one


def brute_force_feasible_point(inst):
    for x in itertools.product(*(range(l, u + 1) for l, u in zip(inst.lower, inst.upper))):
        if is_feasible(inst, x):
            return x
    return None


def test_halfling_step_examples():
    st = Backend("primal").stepper(tiny().a, PATH2)
    # restricted to lam = 1 the step is (-1, 1); over all lengths lam = 2 wins
    step = halfling_step(tiny(), (2, 0), st, lam_max=1)
    assert (step.lam, step.g, step.delta) == (1, (-1, 1), -1)
    step = halfling_step(tiny(), (2, 0), st)
    assert (step.lam, step.h, step.delta) == (2, (-2, 2), -2)
    assert halfling_step(tiny(), (0, 2), st) is None


def test_halfling_picks_long_step():
    # f2 = (x2 - 4)^2 on [0, 8]: moving 4 units is the best single step
    inst = IpInstance(SparseIntMatrix.from_dense([[1, 1]]), (8,), (0, 0), (8, 8),
                      SeparableObjective((Linear(0), Quadratic(1, -8, 16))))
    st = Backend("primal").stepper(inst.a, PATH2)
    step = halfling_step(inst, (8, 0), st)
    assert step.lam == 4 and step.g == (-1, 1) and step.delta == -16
    assert lambda_range(inst) == [1, 2, 4, 8]


def test_augment_examples():
    inst = tiny()
    st = Backend("primal").stepper(inst.a, PATH2)
    rep = augment_to_optimality(inst, (0, 2), st)
    assert rep.iterations == 0 and rep.value == 2
    rep = augment_to_optimality(inst, (2, 0), st)
    assert rep.x == (0, 2) and rep.value == 2 == brute_force_solve(inst).value
    with pytest.raises(InstanceError):
        augment_to_optimality(inst, (1, 0), st)


@pytest.mark.parametrize("seed", range(30))
def test_augment_matches_brute_force(seed):
    rng = random.Random(1000 + seed)
    inst = random_instance(rng, n_max=5, m_max=3, feasible_bias=1.0)
    ref = brute_force_solve(inst)
    x0 = brute_force_feasible_point(inst)
    if x0 is None:
        assert not ref.optimal
        return
    for algo, orient in (("primal", PRIMAL), ("dual", DUAL)):
        graph = build_primal_graph(inst.a) if orient == PRIMAL else build_dual_graph(inst.a)
        td = compute_treedepth_exact(graph, orient)
        rep = augment_to_optimality(inst, x0, Backend(algo).stepper(inst.a, td))
        assert rep.value == ref.value
        fm = f_max(inst.objective, inst.lower, inst.upper)
        limit = 0 if fm == 0 else math.ceil(3 * inst.n * math.log2(2 * fm))
        assert rep.iterations <= limit


def test_hermite_solve_examples():
    assert hermite_solve(SparseIntMatrix.from_dense([[2, 3]]), (1,)) is not None
    z = hermite_solve(SparseIntMatrix.from_dense([[2, 3]]), (1,))
    assert 2 * z[0] + 3 * z[1] == 1
    assert hermite_solve(SparseIntMatrix.from_dense([[2, 4]]), (3,)) is None
    eye = SparseIntMatrix.from_dense([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert hermite_solve(eye, (4, -5, 6)) == (4, -5, 6)


@pytest.mark.parametrize("seed", range(20))
def test_hermite_solve_one_row(seed):
    rng = random.Random(seed)
    row = [rng.randint(-6, 6) for _ in range(rng.randint(1, 4))]
    if not any(row):
        row[0] = 1
    b = rng.randint(-10, 10)
    z = hermite_solve(SparseIntMatrix.from_dense([row]), (b,))
    g = math.gcd(*row)
    if b % g:
        assert z is None
    else:
        assert sum(r * v for r, v in zip(row, z)) == b


def test_hermite_solve_random_systems():
    rng = random.Random(7)
    for _ in range(30):
        a = random_matrix(rng, rng.randint(1, 3), rng.randint(2, 5))
        x = [rng.randint(-4, 4) for _ in range(a.cols)]
        from tdip.instance import purify

        pure = purify(a, a.matvec(x))
        z = hermite_solve(pure.a, pure.b)
        assert z is not None and pure.a.matvec(z) == list(pure.b)


def test_initial_solution_hnf_examples():
    inst = tiny()
    st = Backend("primal").stepper(inst.a, PATH2)
    x, rep = find_initial_solution_hnf(inst, st)
    assert x is not None and is_feasible(inst, x)
    over = inst.replace(b=(5,))
    x, rep = find_initial_solution_hnf(over, st)
    assert x is None and rep.value == 1
    even = IpInstance(SparseIntMatrix.from_dense([[2, 4]]), (3,), (0, 0), (3, 3),
                      SeparableObjective.linear((1, 1)))
    x, rep = find_initial_solution_hnf(even, Backend("primal").stepper(even.a, PATH2))
    assert x is None and rep is None


def test_initial_solution_ai_examples():
    inst = tiny().replace(b=(0,), lower=(-1, -1), upper=(1, 1))
    x, _ = find_initial_solution_AI(inst, Backend("primal"), PATH2)
    assert x == (0, 0)
    three = tiny().replace(b=(3,))
    c, v = center_instance(three)
    x, _ = find_initial_solution_AI(c, Backend("dual"), ROW1)
    y = tuple(a + b for a, b in zip(x, v))
    assert is_feasible(three, y)
    five = tiny().replace(b=(5,))
    c, v = center_instance(five)
    x, _ = find_initial_solution_AI(c, Backend("primal"), PATH2)
    assert x is None


@pytest.mark.parametrize("seed", range(25))
def test_initial_solution_ai_verdicts(seed):
    rng = random.Random(500 + seed)
    inst = random_instance(rng, n_max=5, m_max=3, feasible_bias=0.5)
    from tdip.instance import purify_instance

    pure = purify_instance(inst)
    if pure is None:
        assert not brute_force_feasible(inst)
        return
    work, _ = pure
    c, v = center_instance(work)
    td = compute_treedepth_exact(build_dual_graph(work.a), DUAL)
    x, _ = find_initial_solution_AI(c, Backend("dual"), td)
    assert (x is not None) == brute_force_feasible(inst)


def _ray_instance(weights, upper):
    return IpInstance(SparseIntMatrix.from_dense([[1, -1]]), (0,), (0, 0), upper,
                      SeparableObjective.linear(weights))


def test_detect_unbounded_examples():
    inst = _ray_instance((-1, 0), (INF, INF))
    st = Backend("primal").stepper(inst.a, PATH2)
    assert detect_unbounded_linear(inst, st) == (1, 1)
    assert detect_unbounded_linear(_ray_instance((-1, 0), (3, 3)), st) is None
    assert detect_unbounded_linear(_ray_instance((1, 0), (INF, 3)), st) is None
    quad = _ray_instance((1, 0), (INF, INF)).replace(
        objective=SeparableObjective((Quadratic(1, 0, 0), Linear(0))))
    with pytest.raises(InstanceError):
        detect_unbounded_linear(quad, st)


def test_no_apriori_bounds_examples():
    inst = _ray_instance((1, 1), (INF, INF))
    st = Backend("primal").stepper(inst.a, PATH2)
    rep = solve_no_apriori_bounds(inst, (0, 0), st)
    assert rep.x == (0, 0) and rep.value == 0
    rep = solve_no_apriori_bounds(inst, (37, 37), st)
    assert rep.x == (0, 0) and rep.iterations <= 3 * 2 * 7 * 7
    # the same problem on an enclosing finite box
    boxed = inst.replace(upper=(40, 40))
    assert rep.value == brute_force_solve(boxed).value
    quad = inst.replace(objective=SeparableObjective((Quadratic(1, 0, 0), Linear(0))))
    with pytest.raises(InstanceError):
        solve_no_apriori_bounds(quad, (0, 0), st)
