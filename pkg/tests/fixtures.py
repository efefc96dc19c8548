"""Random and hand-made instances shared by the tests."""

from __future__ import annotations

import random

from tdip.instance import (
    IpInstance,
    Linear,
    PiecewiseLinear,
    Quadratic,
    SeparableObjective,
    SparseIntMatrix,
)


def tiny() -> IpInstance:
    """x1 + x2 = 2, 0 <= x <= 2, objective 2 x1 + x2."""
    return IpInstance(SparseIntMatrix.from_dense([[1, 1]]), (2,), (0, 0), (2, 2),
                      SeparableObjective.linear((2, 1)))


def random_term(rng: random.Random, family: str | None = None):
    family = family or rng.choice(("linear", "pwl", "quad"))
    if family == "linear":
        return Linear(rng.randint(-3, 3))
    if family == "quad":
        return Quadratic(rng.randint(0, 2), rng.randint(-4, 4), rng.randint(-2, 2))
    # convex piecewise term: increasing slopes through a few breakpoints
    k = rng.randint(1, 3)
    bps = sorted(rng.sample(range(-3, 4), k))
    slopes = sorted(rng.randint(-3, 3) for _ in range(k + 1))
    vals = [rng.randint(-2, 2)]
    for a, b, s in zip(bps, bps[1:], slopes[1:]):
        vals.append(vals[-1] + s * (b - a))
    return PiecewiseLinear(tuple(bps), tuple(vals), slopes[0], slopes[-1])


def random_matrix(rng: random.Random, m: int, n: int, amax: int = 2, density: float = 0.6) -> SparseIntMatrix:
    dense = [[rng.randint(-amax, amax) if rng.random() < density else 0 for _ in range(n)]
             for _ in range(m)]
    return SparseIntMatrix.from_dense(dense)


def random_instance(rng: random.Random, n_max: int = 6, m_max: int = 4, bound: int = 3,
                    feasible_bias: float = 0.75, family: str | None = None) -> IpInstance:
    n = rng.randint(1, n_max)
    m = rng.randint(1, m_max)
    a = random_matrix(rng, m, n)
    lower = tuple(rng.randint(-bound, 0) for _ in range(n))
    upper = tuple(rng.randint(l, bound) for l in lower)
    if rng.random() < feasible_bias:
        x = [rng.randint(l, u) for l, u in zip(lower, upper)]
        b = tuple(a.matvec(x))
    else:
        b = tuple(rng.randint(-3, 3) for _ in range(m))
    obj = SeparableObjective(tuple(random_term(rng, family) for _ in range(n)))
    return IpInstance(a, b, lower, upper, obj)
