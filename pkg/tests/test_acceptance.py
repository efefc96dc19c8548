"""Acceptance checks, one function per criterion.

Run with pytest (each test prints a PASS/FAIL line) or directly as a
script: ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import math
import os
import random
import sys
import time
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from fixtures import random_instance, random_matrix  # noqa: E402

from tdip.augment import Backend, augment_to_optimality, halfling_step  # noqa: E402
from tdip.blocks import (  # noqa: E402
    build_multi_stage,
    build_nfold,
    build_tree_fold,
    build_two_stage,
    model_scheduling_qcmax,
    model_three_way_table,
)
from tdip.convtree import ct_init, ct_query, ct_sigma_update, ct_update  # noqa: E402
from tdip.errors import LimitError  # noqa: E402
from tdip.graver import base_norm_bound, conformal_decompose, enumerate_graver_small, is_conformal  # noqa: E402
from tdip.instance import (  # noqa: E402
    IpInstance,
    Linear,
    PiecewiseLinear,
    Quadratic,
    SeparableObjective,
    SparseIntMatrix,
    f_max,
    is_feasible,
)
from tdip.oracle import brute_force_solve, graver_best_step_oracle  # noqa: E402
from tdip.scaling import scaling_solve, solve_relaxation_eps  # noqa: E402
from tdip.solver import solve  # noqa: E402
from tdip.structure import (  # noqa: E402
    DUAL,
    PRIMAL,
    build_dual_graph,
    build_primal_graph,
    compute_treedepth_exact,
    topological_profile,
    verify_td_decomposition,
)

C1_PATHS = (("primal", "basic"), ("dual", "basic"), ("primal", "scaling"), ("dual", "scaling"),
            ("primal-recursive", "scaling"), ("dual-convtree", "basic"))


def _c1_instances():
    rng = random.Random(20240601)
    return [random_instance(rng, n_max=6, m_max=4, bound=3) for _ in range(200)]


def _td(a, orient):
    graph = build_primal_graph(a) if orient == PRIMAL else build_dual_graph(a)
    return compute_treedepth_exact(graph, orient)


def _worst_feasible(inst):
    """A feasible point of largest objective, so augmentation has work to do."""
    best = None
    for x in itertools.product(*(range(l, u + 1) for l, u in zip(inst.lower, inst.upper))):
        if is_feasible(inst, x) and (best is None or inst.f(x) > inst.f(best)):
            best = x
    return best


def _iteration_bound(inst):
    fm = f_max(inst.objective, inst.lower, inst.upper)
    return 0 if fm == 0 else math.ceil(3 * inst.n * math.log2(2 * fm))


# ---------------------------------------------------------------------------


def criterion_1():
    start = time.perf_counter()
    bad = []
    for k, inst in enumerate(_c1_instances()):
        ref = brute_force_solve(inst)
        for algo, mode in C1_PATHS:
            rep = solve(inst, algo, mode)
            ok = rep.status == ref.status
            if ok and ref.optimal:
                ok = rep.value == ref.value and is_feasible(inst, rep.x) and inst.f(rep.x) == rep.value
            if not ok:
                bad.append((k, algo, mode))
    took = time.perf_counter() - start
    ok = not bad and took < 120
    return ok, f"{200 * len(C1_PATHS)} runs, {len(bad)} mismatches {bad[:3]}, {took:.1f}s"


def criterion_2():
    rng = random.Random(7)
    bad = []
    for k in range(50):
        a = random_matrix(rng, rng.randint(1, 3), rng.randint(2, 5))
        basis = enumerate_graver_small(a)
        if not basis.complete or basis.g1 > base_norm_bound(a):
            bad.append(k)
    chain = SparseIntMatrix.from_dense([[2, -1, 0, 0], [0, 2, -1, 0], [0, 0, 2, -1]])
    cb = enumerate_graver_small(chain)
    has = (1, 2, 4, 8) in cb.elements
    ok = not bad and has and cb.ginf >= 8
    return ok, f"50 matrices, {len(bad)} over the bound; chain has (1,2,4,8): {has}, g_inf={cb.ginf}"


def criterion_3():
    checked = steps = 0
    bad = []
    for k, inst in enumerate(_c1_instances()):
        x0 = _worst_feasible(inst)
        if x0 is None:
            continue
        try:
            basis = enumerate_graver_small(inst.a)
        except LimitError:
            continue
        limit = _iteration_bound(inst)
        for algo, orient in (("primal", PRIMAL), ("dual", DUAL)):
            stepper = Backend(algo).stepper(inst.a, _td(inst.a, orient))
            x, it = x0, 0
            while True:
                step = halfling_step(inst, x, stepper)
                best = graver_best_step_oracle(inst, x, basis)
                if step is None:
                    if best is not None:
                        bad.append((k, algo, "stopped early"))
                    break
                steps += 1
                if best is None or 2 * step.delta > best.delta:
                    bad.append((k, algo, "not a halfling"))
                    break
                x = tuple(a + b for a, b in zip(x, step.h))
                it += 1
            if it > limit:
                bad.append((k, algo, f"{it} > {limit} iterations"))
            rep = augment_to_optimality(inst, x0, stepper)
            if rep.iterations > limit or rep.value != inst.f(x):
                bad.append((k, algo, "loop disagrees"))
        checked += 1
    ok = not bad and checked > 0
    return ok, f"{checked} instances, {steps} steps certified, {len(bad)} failures {bad[:3]}"


def criterion_4():
    rng = random.Random(11)
    vectors = 0
    bad = []
    fixtures = 0
    while fixtures < 20:
        a = random_matrix(rng, rng.randint(1, 2), rng.randint(2, 4))
        basis = enumerate_graver_small(a)
        if not basis.elements:
            continue
        fixtures += 1
        n = a.cols
        for _ in range(5):
            x = [0] * n
            while not any(x):
                for _ in range(rng.randint(1, 4)):
                    g = rng.choice(basis.elements)
                    c = rng.randint(1, 3)
                    x = [xi + c * gi for xi, gi in zip(x, g)]
            vectors += 1
            terms = conformal_decompose(a, x, basis)
            total = [0] * n
            for lam, g in terms:
                total = [t + lam * gi for t, gi in zip(total, g)]
            gs = [g for _, g in terms]
            ok = (total == x and len(set(gs)) == len(gs) <= max(1, 2 * n - 2)
                  and all(lam > 0 and g in basis.elements and is_conformal(g, x) for lam, g in terms))
            if not ok:
                bad.append(tuple(x))
    return not bad and vectors == 100, f"{vectors} vectors over {fixtures} fixtures, {len(bad)} failures"


def _costs_state(rng, n):
    lo, hi, costs = [], [], []
    for _ in range(n):
        l = rng.randint(-2, 0)
        lo.append(l)
        hi.append(rng.randint(l, 2))
        w, q = rng.randint(-3, 3), rng.randint(0, 2)
        costs.append(lambda v, w=w, q=q: w * v + q * v * v)
    return lo, hi, costs


def criterion_5():
    rng = random.Random(5)
    fixtures = []
    while len(fixtures) < 20:
        a = random_matrix(rng, rng.randint(1, 3), rng.randint(2, 5), density=0.5)
        fixtures.append((a, _td(a, DUAL)))
    bad = []
    for seq in range(1000):
        a, td = fixtures[seq % 20]
        lo, hi, costs = _costs_state(rng, a.cols)
        rho = rng.randint(1, 3)
        t = ct_init(a, td, rho, lo, hi, costs)
        for _ in range(rng.randint(1, 6)):
            nlo, nhi, ncost = _costs_state(rng, a.cols)
            if rng.random() < 0.5:
                j = rng.randrange(a.cols)
                lo[j], hi[j], costs[j] = nlo[j], nhi[j], ncost[j]
                ct_update(t, j, lo[j], hi[j], costs[j])
            else:
                coords = sorted(rng.sample(range(a.cols), rng.randint(1, a.cols)))
                for j in coords:
                    lo[j], hi[j], costs[j] = nlo[j], nhi[j], ncost[j]
                ct_sigma_update(t, coords, [lo[j] for j in coords], [hi[j] for j in coords],
                                [costs[j] for j in coords])
        got = {k: v[0] for k, v in ct_query(t).items()}
        fresh = {k: v[0] for k, v in ct_query(ct_init(a, td, rho, lo, hi, costs)).items()}
        if got != fresh:
            bad.append(seq)
    return not bad, f"1000 sequences over 20 fixtures, {len(bad)} mismatches"


def _c6_instances():
    rng = random.Random(66)
    out = []
    big = 10**6
    dense_options = ([[1, 1]], [[1, -1, 2]], [[1, 2, 0], [0, 1, 1]], [[2, 1]], [[1, 1, 1]])
    for k in range(10):
        a = SparseIntMatrix.from_dense(dense_options[k % len(dense_options)])
        width = rng.choice((10**4, 10**5, big))
        lower = tuple(rng.randint(-width, 0) for _ in range(a.cols))
        upper = tuple(l + width for l in lower)
        x = [rng.randint(l, u) for l, u in zip(lower, upper)]
        terms = []
        for _ in range(a.cols):
            if rng.random() < 0.5:
                terms.append(Linear(rng.randint(-5, 5)))
            else:
                terms.append(Quadratic(1, rng.randint(-2 * width, 2 * width), 0))
        out.append(IpInstance(a, tuple(a.matvec(x)), lower, upper, SeparableObjective(tuple(terms))))
    return out


def criterion_6():
    bad = []
    windows = 0
    for k, inst in enumerate(_c6_instances()):
        td = _td(inst.a, PRIMAL)
        rep = scaling_solve(inst, Backend("primal"), td)
        basic = solve(inst, "primal", "basic")
        if not (rep.optimal and basic.optimal and rep.value == basic.value):
            bad.append((k, "values", rep.value, basic.value))
        plan = rep.details["plan"]
        for level in plan.levels:
            cols = inst.n + inst.m if level.phase == "feasibility" else inst.n
            windows += 1
            if not level.anchored or level.width > 8 * cols * plan.ginf_ai:
                bad.append((k, "window", level))
    return not bad, f"10 instances, {windows} windows, {len(bad)} failures {bad[:2]}"


def _c7_instances():
    rng = random.Random(77)
    shapes = ([[1, 1]], [[1, -1]], [[1, 2]], [[1, 1, 1]], [[1, -1, 0], [0, 1, 1]])
    out = []
    for k in range(20):
        a = SparseIntMatrix.from_dense(shapes[k % len(shapes)])
        lower = tuple(rng.randint(-3, 0) for _ in range(a.cols))
        upper = tuple(rng.randint(1, 3) for _ in range(a.cols))
        x = [rng.randint(l, u) for l, u in zip(lower, upper)]
        terms = []
        for _ in range(a.cols):
            kind = rng.choice(("quad", "linear", "pwl"))
            if kind == "quad":
                terms.append(Quadratic(rng.randint(1, 3), rng.randint(-6, 6), 0))
            elif kind == "linear":
                terms.append(Linear(rng.randint(-3, 3)))
            else:
                terms.append(PiecewiseLinear((0,), (0,), -rng.randint(0, 3), rng.randint(0, 3)))
        out.append(IpInstance(a, tuple(a.matvec(x)), lower, upper, SeparableObjective(tuple(terms))))
    return out


def criterion_7():
    bad = []
    for k, inst in enumerate(_c7_instances()):
        ref = brute_force_solve(inst)
        td = _td(inst.a, PRIMAL)
        rel = solve_relaxation_eps(inst, Fraction(1), Backend("primal"), td, p=64)
        g = enumerate_graver_small(inst.a).ginf
        slack = inst.n * g + Fraction(inst.n * g, 64)
        dist = max(abs(a - b) for a, b in zip(ref.x, rel.x))
        if not ref.optimal or dist > slack:
            bad.append((k, dist, slack))
    return not bad, f"20 fixtures at p=64, {len(bad)} violations {bad[:2]}"


def criterion_8():
    q = Quadratic(4, -4, 1)  # (2x - 1)^2
    inst = IpInstance(SparseIntMatrix.from_dense([[1, 1]]), (1,), (0, 0), (1, 1), SeparableObjective((q, q)))
    rel = solve_relaxation_eps(inst, Fraction(1, 4), Backend("primal"), _td(inst.a, PRIMAL))
    want = (Fraction(1, 2), Fraction(1, 2))
    return rel.x == want, f"x_eps = {tuple(str(v) for v in rel.x)} with p = {rel.p}"


def _schedules_exist(speeds, counts, cmax):
    caps = [int(Fraction(s) * Fraction(cmax)) for s in speeds]
    jobs = [p + 1 for p, c in enumerate(counts) for _ in range(c)]
    for assign in itertools.product(range(len(speeds)), repeat=len(jobs)):
        load = [0] * len(speeds)
        for j, mach in zip(jobs, assign):
            load[mach] += j
        if all(l <= c for l, c in zip(load, caps)):
            return True
    return False


def _tables_exist(u, v, w):
    for bits in itertools.product((0, 1), repeat=8):
        x = [[[bits[4 * i + 2 * j + k] for k in range(2)] for j in range(2)] for i in range(2)]
        if all(sum(x[i][j][k] for i in range(2)) == u[j][k] for j in range(2) for k in range(2)) and \
           all(sum(x[i][j][k] for j in range(2)) == v[i][k] for i in range(2) for k in range(2)) and \
           all(sum(x[i][j][k] for k in range(2)) == w[i][j] for i in range(2) for j in range(2)):
            return True
    return False


SCHEDULES = (
    ([1, Fraction(1, 2)], [2, 1]),
    ([1, 1, 1], [1, 2, 1]),
    ([Fraction(2, 3), 1], [1, 1, 1]),
    ([1, Fraction(1, 2), Fraction(1, 3)], [4, 3, 3]),
    ([1, 1], [3, 2]),
)


def criterion_9():
    start = time.perf_counter()
    bad = []
    runs = 0
    for speeds, counts in SCHEDULES:
        total = sum((p + 1) * c for p, c in enumerate(counts))
        for cmax in range(0, total + 2):
            inst, td = model_scheduling_qcmax(speeds, counts, cmax, with_td=True)
            got = solve(inst, "dual", "basic", td).status == "optimal"
            runs += 1
            if got != _schedules_exist(speeds, counts, cmax):
                bad.append(("schedule", tuple(map(str, speeds)), cmax))
    rng = random.Random(9)
    for _ in range(20):
        x = [[[rng.randint(0, 1) for _ in range(2)] for _ in range(2)] for _ in range(2)]
        u = [[sum(x[i][j][k] for i in range(2)) for k in range(2)] for j in range(2)]
        v = [[sum(x[i][j][k] for j in range(2)) for k in range(2)] for i in range(2)]
        w = [[sum(x[i][j][k] for k in range(2)) for j in range(2)] for i in range(2)]
        if rng.random() < 0.5:
            u[rng.randint(0, 1)][rng.randint(0, 1)] ^= 1
        inst, td = model_three_way_table(u, v, w, with_td=True)
        got = solve(inst, "dual", "basic", td).status == "optimal"
        runs += 1
        if got != _tables_exist(u, v, w):
            bad.append(("table", u, v, w))
    took = time.perf_counter() - start
    return not bad and took < 60, f"{runs} models, {len(bad)} mismatches, {took:.1f}s"


def criterion_10():
    bad = []

    def check(name, a, td, orient, want):
        graph = build_dual_graph(a) if orient == DUAL else build_primal_graph(a)
        p = topological_profile(td)
        if td.orientation != orient or not verify_td_decomposition(graph, td) or (p.ttd, p.levels) != want:
            bad.append((name, p.ttd, p.levels, want))

    for r, s, n in ((1, 1, 3), (2, 1, 4), (1, 2, 2), (2, 3, 3)):
        a1 = [[1, -1, 2] for _ in range(r)]
        a2 = [[1, 2, 0] if i == 0 else [0, 1, 1] for i in range(s)]
        a, td = build_nfold(a1, a2, n)
        check(f"nfold r={r} s={s}", a, td, DUAL, (2, (r, s)))
        b, f = build_two_stage([list(c) for c in zip(*a1)], [list(c) for c in zip(*a2)], n)
        check(f"two-stage r={r} s={s}", b, f, PRIMAL, (2, (r, s)))
    tree = [-1, 0, 0, 1, 1, 2, 2, 2]
    for rows in ((1, 2, 1), (2, 1, 1), (1, 1, 3)):
        blocks = [[[1, i + 1] for i in range(r)] for r in rows]
        a, td = build_tree_fold(tree, blocks)
        check(f"tree-fold {rows}", a, td, DUAL, (3, rows))
        tb = [[list(c) for c in zip(*blk)] for blk in blocks]
        b, f = build_multi_stage(tree, tb)
        check(f"multi-stage {rows}", b, f, PRIMAL, (3, rows))
    deep = [-1, 0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6]
    a, td = build_tree_fold(deep, [[[1]], [[1]], [[1, ]], [[1]]])
    check("tree-fold depth 4", a, td, DUAL, (4, (1, 1, 1, 1)))
    return not bad, f"{len(bad)} profile mismatches {bad[:2]}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def _report(k, capsys=None):
    ok, msg = CRITERIA[k - 1]()
    line = f"CRITERION {k} {'PASS' if ok else 'FAIL'}: {msg}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok, msg


def test_criterion_1_oracle_equivalence(capsys):
    ok, msg = _report(1, capsys)
    assert ok, msg


def test_criterion_2_graver_norm_bounds(capsys):
    ok, msg = _report(2, capsys)
    assert ok, msg


def test_criterion_3_halfling_certificates(capsys):
    ok, msg = _report(3, capsys)
    assert ok, msg


def test_criterion_4_positive_sum(capsys):
    ok, msg = _report(4, capsys)
    assert ok, msg


def test_criterion_5_convtree_updates(capsys):
    ok, msg = _report(5, capsys)
    assert ok, msg


def test_criterion_6_scaling_windows(capsys):
    ok, msg = _report(6, capsys)
    assert ok, msg


def test_criterion_7_proximity(capsys):
    ok, msg = _report(7, capsys)
    assert ok, msg


def test_criterion_8_relaxation(capsys):
    ok, msg = _report(8, capsys)
    assert ok, msg


def test_criterion_9_applications(capsys):
    ok, msg = _report(9, capsys)
    assert ok, msg


def test_criterion_10_structure_profiles(capsys):
    ok, msg = _report(10, capsys)
    assert ok, msg


if __name__ == "__main__":
    results = [_report(k)[0] for k in range(1, len(CRITERIA) + 1)]
    sys.exit(0 if all(results) else 1)
