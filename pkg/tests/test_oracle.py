from __future__ import annotations

import itertools
import random

import pytest

from fixtures import random_instance, tiny
from tdip.augment import Backend, augment_to_optimality
from tdip.errors import InstanceError, LimitError
from tdip.graver import enumerate_graver_small
from tdip.instance import INF, IpInstance, SeparableObjective, SparseIntMatrix, is_feasible
from tdip.oracle import brute_force_feasible, brute_force_solve, graver_best_step_oracle
from tdip.solver import solve


def _two_x_four():
    return IpInstance(SparseIntMatrix.from_dense([[2]]), (4,), (0,), (10,), SeparableObjective.linear((1,)))


def test_brute_force_examples():
    rep = brute_force_solve(tiny())
    assert rep.x == (0, 2) and rep.value == 2
    assert brute_force_solve(tiny().replace(b=(5,))).status == "infeasible"
    assert brute_force_solve(_two_x_four()).x == (2,)


def test_brute_force_feasible_examples():
    assert brute_force_feasible(tiny())
    assert not brute_force_feasible(tiny().replace(b=(5,)))
    assert brute_force_feasible(_two_x_four())


def test_brute_force_limits():
    with pytest.raises(InstanceError):
        brute_force_solve(tiny().replace(upper=(INF, 2)))
    with pytest.raises(LimitError):
        brute_force_solve(tiny().replace(upper=(10**4, 10**4)), cap=1000)


def test_brute_force_tie_break_is_lexicographic():
    inst = tiny().replace(objective=SeparableObjective.linear((1, 1)))
    assert brute_force_solve(inst).x == (0, 2)


@pytest.mark.parametrize("seed", range(20))
def test_brute_force_agrees_with_plain_scan(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, n_max=4, m_max=3)
    best = None
    for x in itertools.product(*(range(l, u + 1) for l, u in zip(inst.lower, inst.upper))):
        if is_feasible(inst, x):
            cand = (inst.f(x), x)
            best = cand if best is None or cand < best else best
    rep = brute_force_solve(inst)
    if best is None:
        assert rep.status == "infeasible"
    else:
        assert (rep.value, rep.x) == best


def test_graver_best_step_examples():
    inst = tiny()
    basis = enumerate_graver_small(inst.a)
    step = graver_best_step_oracle(inst, (2, 0), basis)
    assert step.delta == -2 and step.h == (-2, 2)
    assert graver_best_step_oracle(inst, (0, 2), basis) is None
    pinned = inst.replace(lower=(1, 1), upper=(1, 1))
    assert graver_best_step_oracle(pinned, (1, 1), basis) is None


@pytest.mark.parametrize("seed", range(15))
def test_oracle_never_beaten_by_solvers(seed):
    rng = random.Random(50 + seed)
    inst = random_instance(rng)
    ref = brute_force_solve(inst)
    rep = solve(inst, "auto", "basic")
    if rep.optimal:
        assert is_feasible(inst, rep.x)
        assert ref.value <= inst.f(rep.x)
