"""Block-structured matrix families with their canonical decompositions, and
two models built on them (uniform-machine scheduling, three-way tables).

Block matrices are given as dense lists of rows.  Every constructor returns
the matrix together with a treedepth decomposition in the orientation in
which that family has small depth.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .instance import IpInstance, SeparableObjective, SparseIntMatrix, floor_div
from .structure import DUAL, PRIMAL, TdDecomposition

Dense = Sequence[Sequence[int]]


def _shape(block: Dense, cols: int | None = None) -> tuple[int, int]:
    rows = len(block)
    width = len(block[0]) if rows else (cols or 0)
    if any(len(r) != width for r in block):
        raise ValueError("ragged block")
    return rows, width


def _place(entries: list, block: Dense, r0: int, c0: int) -> None:
    for i, row in enumerate(block):
        for j, v in enumerate(row):
            if v:
                entries.append((r0 + i, c0 + j, int(v)))


def _transpose(block: Dense, cols: int) -> list[list[int]]:
    return [[row[j] for row in block] for j in range(cols)]


def _chain(parent: list[int], start: int, length: int, top: int) -> int:
    """Hang vertices start..start+length-1 as a path below ``top``; returns the
    last vertex (or ``top`` for an empty path)."""
    for k in range(length):
        parent[start + k] = top if k == 0 else start + k - 1
    return start + length - 1 if length else top


# ---------------------------------------------------------------------------
# n-fold and two-stage


def build_nfold_general(tops: Sequence[Dense], diags: Sequence[Dense], widths: Sequence[int] | None = None
                        ) -> tuple[SparseIntMatrix, TdDecomposition]:
    """Generalized n-fold matrix: brick i has its own linking block tops[i]
    (r x t_i, the same r for all bricks) and diagonal block diags[i] (s_i x t_i).

    Decomposition over the rows: the r linking rows form a path; the rows of
    each brick hang below it as a path of their own.
    """
    if len(tops) != len(diags) or not tops:
        raise ValueError("need the same positive number of linking and diagonal blocks")
    widths = list(widths) if widths is not None else [None] * len(tops)
    shapes = []
    r = None
    for top, diag, w in zip(tops, diags, widths):
        rt, tt = _shape(top, w)
        rd, td = _shape(diag, w)
        if rt and rd and tt != td:
            raise ValueError("linking and diagonal blocks of a brick differ in width")
        t = tt if rt else td
        if w is not None and t != w:
            raise ValueError("brick width mismatch")
        if r is None:
            r = rt
        elif rt != r:
            raise ValueError("linking blocks must share their row count")
        shapes.append((rd, t))
    rows = r + sum(s for s, _ in shapes)
    cols = sum(t for _, t in shapes)
    entries: list = []
    parent = [-1] * rows
    last = _chain(parent, 0, r, -1)
    r0, c0 = r, 0
    for top, diag, (s, t) in zip(tops, diags, shapes):
        _place(entries, top, 0, c0)
        _place(entries, diag, r0, c0)
        _chain(parent, r0, s, last)
        r0 += s
        c0 += t
    return SparseIntMatrix(rows, cols, tuple(entries)), TdDecomposition(tuple(parent), DUAL)


def build_nfold(a1: Dense, a2: Dense, n: int, t: int | None = None
                ) -> tuple[SparseIntMatrix, TdDecomposition]:
    """n copies of a1 side by side on top of a block diagonal of n copies of a2."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return build_nfold_general([a1] * n, [a2] * n, [t] * n if t is not None else None)


def build_two_stage(a1: Dense, a2: Dense, n: int) -> tuple[SparseIntMatrix, TdDecomposition]:
    """The transpose of an n-fold matrix: a1 (t x r) repeated down the first r
    columns, a2 (t x s) on the diagonal.  The decomposition is over columns."""
    if n < 1:
        raise ValueError("n must be at least 1")
    t1, r = _shape(a1)
    t2, s = _shape(a2)
    if t1 != t2:
        raise ValueError("both blocks of a two-stage matrix need the same row count")
    m, f = build_nfold(_transpose(a1, r), _transpose(a2, s), n, t1)
    return m.transpose(), TdDecomposition(f.parent, PRIMAL)


# ---------------------------------------------------------------------------
# tree-fold and multi-stage


def _tree(parent: Sequence[int], tau: int) -> tuple[int, list[list[int]], list[int]]:
    n = len(parent)
    roots = [v for v in range(n) if parent[v] == -1]
    if len(roots) != 1:
        raise ValueError("the repetition tree needs exactly one root")
    children: list[list[int]] = [[] for _ in range(n)]
    for v, p in enumerate(parent):
        if p != -1:
            if not 0 <= p < n:
                raise ValueError(f"parent {p} out of range")
            children[p].append(v)
    depth = [-1] * n
    order = [roots[0]]
    depth[roots[0]] = 0
    for v in order:
        for c in children[v]:
            depth[c] = depth[v] + 1
            order.append(c)
    if len(order) != n:
        raise ValueError("the repetition tree has a cycle")
    for v in range(n):
        if not children[v] and depth[v] != tau - 1:
            raise ValueError(f"leaf {v} is at depth {depth[v]}, expected {tau - 1}")
        if children[v] and depth[v] >= tau - 1:
            raise ValueError("the tree is deeper than the number of blocks")
    return roots[0], children, depth


def build_tree_fold(tree: Sequence[int], blocks: Sequence[Dense]
                    ) -> tuple[SparseIntMatrix, TdDecomposition]:
    """Tree-fold matrix: one t-column brick per leaf; every tree vertex at
    depth d adds the rows of blocks[d] repeated over the bricks below it.

    Each vertex becomes a path of r_d rows in the decomposition, with its
    children hung below the last one.
    """
    tau = len(blocks)
    if tau < 1:
        raise ValueError("need at least one block")
    root, children, depth = _tree(tree, tau)
    shapes = [_shape(b) for b in blocks]
    t = shapes[0][1]
    if any(w != t for _, w in shapes):
        raise ValueError("tree-fold blocks must share their column count")
    # leaves in depth-first order define the bricks
    leaves_below: dict[int, list[int]] = {}
    leaf_order: list[int] = []

    def collect(v: int) -> list[int]:
        if not children[v]:
            leaf_order.append(v)
            leaves_below[v] = [v]
        else:
            leaves_below[v] = [l for c in children[v] for l in collect(c)]
        return leaves_below[v]

    collect(root)
    brick = {v: k for k, v in enumerate(leaf_order)}
    entries: list = []
    parent: list[int] = []

    def emit(v: int, above: int) -> None:
        d = depth[v]
        r = shapes[d][0]
        r0 = len(parent)
        parent.extend([-1] * r)
        last = _chain(parent, r0, r, above)
        for leaf in leaves_below[v]:
            _place(entries, blocks[d], r0, brick[leaf] * t)
        for c in children[v]:
            emit(c, last)

    emit(root, -1)
    m = SparseIntMatrix(len(parent), t * len(leaf_order), tuple(entries))
    return m, TdDecomposition(tuple(parent), DUAL)


def build_multi_stage(tree: Sequence[int], blocks: Sequence[Dense]
                      ) -> tuple[SparseIntMatrix, TdDecomposition]:
    """Multi-stage stochastic matrix, the transpose of the tree-fold matrix of
    the transposed blocks; the decomposition is over columns."""
    tt = []
    for b in blocks:
        _, w = _shape(b)
        tt.append(_transpose(b, w))
    m, f = build_tree_fold(tree, tt)
    return m.transpose(), TdDecomposition(f.parent, PRIMAL)


# ---------------------------------------------------------------------------
# models


def model_scheduling_qcmax(speeds: Sequence, counts: Sequence[int], cmax,
                           with_td: bool = False):
    """Feasibility of a schedule with makespan at most ``cmax`` on machines of
    the given speeds; counts[j-1] jobs have length j.

    One brick per machine: x_1..x_pmax (jobs of each length) and a slack
    column turning the capacity inequality into an equation.  Machine i gets
    capacity floor(s_i * cmax).
    """
    pmax = len(counts)
    if pmax < 1:
        raise ValueError("need at least one job length")
    speeds = [Fraction(s) for s in speeds]
    if any(not (0 < s <= 1) for s in speeds):
        raise ValueError("speeds must lie in (0, 1]")
    cmax = Fraction(cmax)
    caps = [floor_div((s * cmax).numerator, (s * cmax).denominator) for s in speeds]
    top = [[1 if j == k else 0 for j in range(pmax)] + [0] for k in range(pmax)]
    diag = [list(range(1, pmax + 1)) + [1]]
    a, td = build_nfold(top, diag, len(speeds))
    b = tuple(int(c) for c in counts) + tuple(caps)
    lower, upper = [], []
    for cap in caps:
        lower += [0] * (pmax + 1)
        upper += [int(c) for c in counts] + [max(cap, 0)]
    inst = IpInstance(a, b, tuple(lower), tuple(upper), SeparableObjective.zero(a.cols))
    return (inst, td) if with_td else inst


def model_three_way_table(u: Dense, v: Dense, w: Dense, with_td: bool = False):
    """Nonnegative l x m x n table x[i][j][k] (i < n, j < m, k < l) with line sums

        sum_i x = u[j][k],  sum_j x = v[i][k],  sum_k x = w[i][j].

    Columns: brick i holds x[i][j][k] at j*l + k.  Rows: u first, then
    (v^i, w^i) for each i.
    """
    m, l = _shape(u)
    n, l2 = _shape(v)
    n2, m2 = _shape(w)
    if l2 != l or n2 != n or m2 != m:
        raise ValueError("line-sum dimensions disagree")
    top = [[1 if c == q else 0 for c in range(m * l)] for q in range(m * l)]
    jblock = [[1 if c % l == k else 0 for c in range(m * l)] for k in range(l)]
    jblock += [[1 if c // l == j else 0 for c in range(m * l)] for j in range(m)]
    a, td = build_nfold(top, jblock, n, m * l)
    b = [u[j][k] for j in range(m) for k in range(l)]
    upper = []
    for i in range(n):
        b += list(v[i]) + list(w[i])
        upper += [max(0, min(u[j][k], v[i][k], w[i][j])) for j in range(m) for k in range(l)]
    inst = IpInstance(a, tuple(int(x) for x in b), (0,) * a.cols, tuple(upper),
                      SeparableObjective.zero(a.cols))
    return (inst, td) if with_td else inst
