"""Convolution trees: cached min-plus tables over a dual decomposition that
absorb coordinate updates by recomputing only the affected root paths.

Every chain (segment) of the dual forest owns a balanced binary tree whose
leaves are its columns and the result tables of its child chains.  A table
maps a key ``(residual over the chain's rows and their ancestors..., l1
norm)`` to ``(cost, witness)``; an inner node is the min-plus convolution of
its two children.  A child chain enters its parent through a leaf that keeps
only entries whose residual on the child's own rows is zero.
"""

from __future__ import annotations

from typing import Callable, Sequence

from .augment import Stepper, augment_to_optimality, dual_segments, step_costs, step_window
from .errors import LimitError
from .instance import IpInstance, SparseIntMatrix, is_finite
from .report import SolveReport, StepResult
from .structure import TdDecomposition

COLUMN, BLOCK, INNER, EMPTY = "column", "block", "inner", "empty"


class _Node:
    __slots__ = ("kind", "parent", "left", "right", "col", "child", "keys", "table", "depth")

    def __init__(self, kind: str, keys: tuple[int, ...]) -> None:
        self.kind = kind
        self.keys = keys
        self.parent = None
        self.left = self.right = None
        self.col = None
        self.child = None  # for BLOCK: root node of the child chain's tree
        self.table: dict = {}
        self.depth = 0


class ConvolutionTree:
    """State: per-column windows [lo_j, hi_j] and cost functions c_j."""

    def __init__(self, a: SparseIntMatrix, td: TdDecomposition, rho: int,
                 lo: Sequence[int], hi: Sequence[int],
                 costs: Sequence[Callable[[int], int]], cap: int = 2_000_000) -> None:
        self.a = a
        self.rho = rho
        self.bound = rho * a.max_abs
        self.cap = cap
        self.lo = list(lo)
        self.hi = list(hi)
        self.costs = list(costs)
        self.leaf_of: dict[int, _Node] = {}
        self.recomputed = 0
        vroot = dual_segments(a, td)
        loose = vroot.cols_by_row.get(None, [])
        if len(vroot.children) == 1:
            top = vroot.children[0]
            self.root = self._build_chain(top, extra=loose)
            self.top_rows = tuple(top.rows)
        else:
            self.root = self._build_chain(vroot, extra=loose)
            self.top_rows = ()
        self._set_depths()
        for node in sorted(self._all_nodes(), key=lambda v: -v.depth):
            self._recompute(node)

    # -- construction -------------------------------------------------------

    def _build_chain(self, seg, extra=()) -> _Node:
        keys = seg.anc + tuple(seg.rows)
        leaves = []
        for child in seg.children:
            sub = self._build_chain(child)
            leaf = _Node(BLOCK, keys)
            leaf.child = sub
            sub.parent = leaf
            leaves.append(leaf)
        cols = [j for i in seg.rows for j in seg.cols_by_row[i]] + list(extra)
        for j in sorted(cols):
            leaf = _Node(COLUMN, keys)
            leaf.col = j
            self.leaf_of[j] = leaf
            leaves.append(leaf)
        if not leaves:
            return _Node(EMPTY, keys)
        return self._balanced(leaves, keys)

    def _balanced(self, leaves: list[_Node], keys) -> _Node:
        if len(leaves) == 1:
            return leaves[0]
        mid = len(leaves) // 2
        node = _Node(INNER, keys)
        node.left = self._balanced(leaves[:mid], keys)
        node.right = self._balanced(leaves[mid:], keys)
        node.left.parent = node
        node.right.parent = node
        return node

    def _all_nodes(self):
        stack, out = [self.root], []
        while stack:
            v = stack.pop()
            out.append(v)
            for c in (v.left, v.right, v.child):
                if c is not None:
                    stack.append(c)
        return out

    def _set_depths(self) -> None:
        stack = [(self.root, 0)]
        while stack:
            v, d = stack.pop()
            v.depth = d
            for c in (v.left, v.right, v.child):
                if c is not None:
                    stack.append((c, d + 1))

    def height(self) -> int:
        return max(v.depth for v in self._all_nodes()) + 1

    # -- tables ---------------------------------------------------------------

    def _ok(self, key) -> bool:
        b = self.bound
        return key[-1] <= self.rho and all(-b <= v <= b for v in key[:-1])

    def _recompute(self, node: _Node) -> None:
        self.recomputed += 1
        width = len(node.keys)
        if node.kind == EMPTY:
            node.table = {(0,) * (width + 1): (0, None)}
        elif node.kind == COLUMN:
            j = node.col
            pos = {i: k for k, i in enumerate(node.keys)}
            entries = [(pos[i], v) for i, v in self.a.col_items(j) if i in pos]
            table: dict = {}
            for v in range(self.lo[j], self.hi[j] + 1):
                key = [0] * (width + 1)
                for k, av in entries:
                    key[k] = av * v
                key[-1] = abs(v)
                key = tuple(key)
                if not self._ok(key):
                    continue
                cand = (self.costs[j](v), v)
                old = table.get(key)
                if old is None or cand[0] < old[0]:
                    table[key] = cand
            node.table = table
        elif node.kind == BLOCK:
            sub = node.child
            cut = width
            table = {}
            for key, (c, _) in sub.table.items():
                if any(key[cut:-1]):
                    continue
                pk = key[:cut] + key[-1:]
                old = table.get(pk)
                if old is None or c < old[0]:
                    table[pk] = (c, key)
            node.table = table
        else:
            table = {}
            right = list(node.right.table.items())
            for ka, (ca, _) in node.left.table.items():
                for kb, (cb, _) in right:
                    key = tuple(p + q for p, q in zip(ka, kb))
                    if not self._ok(key):
                        continue
                    c = ca + cb
                    old = table.get(key)
                    if old is None or c < old[0]:
                        table[key] = (c, (ka, kb))
                if len(table) > self.cap:
                    raise LimitError("convolution table", len(table), self.cap)
            node.table = table

    # -- operations -------------------------------------------------------------

    def update(self, i: int, lo_i: int, hi_i: int, cost_i: Callable[[int], int]) -> None:
        self.sigma_update([i], [lo_i], [hi_i], [cost_i])

    def sigma_update(self, coords: Sequence[int], los, his, costs) -> None:
        """Same result as updating each coordinate in turn; the shared part of
        the root paths is recomputed once, deepest nodes first."""
        dirty: dict[int, _Node] = {}
        for i, lo_i, hi_i, c in zip(coords, los, his, costs):
            self.lo[i], self.hi[i], self.costs[i] = lo_i, hi_i, c
            node = self.leaf_of.get(i)
            while node is not None and id(node) not in dirty:
                dirty[id(node)] = node
                node = node.parent
        for node in sorted(dirty.values(), key=lambda v: -v.depth):
            self._recompute(node)

    def query(self) -> dict:
        """The cached root table: keys (residual over the top chain rows..., norm)."""
        return self.root.table

    def witness(self, key) -> tuple[int, ...]:
        """Materialize the step stored at a root entry (walks down the tree)."""
        g = [0] * self.a.cols
        stack = [(self.root, key)]
        while stack:
            node, k = stack.pop()
            if node.kind == COLUMN:
                g[node.col] = node.table[k][1]
            elif node.kind == BLOCK:
                stack.append((node.child, node.table[k][1]))
            elif node.kind == INNER:
                ka, kb = node.table[k][1]
                stack.append((node.left, ka))
                stack.append((node.right, kb))
        return tuple(g)

    def best_zero_entry(self):
        """(cost, key) of the cheapest entry with zero residual, or None."""
        best = None
        for key, (c, _) in self.query().items():
            if any(key[:-1]):
                continue
            if best is None or (c, key[-1]) < best:
                best = (c, key[-1], key)
        return None if best is None else (best[0], best[2])


def ct_init(a, td, rho, lo, hi, costs, cap: int = 2_000_000) -> ConvolutionTree:
    return ConvolutionTree(a, td, rho, lo, hi, costs, cap)


def ct_update(t: ConvolutionTree, i, lo_i, hi_i, cost_i) -> ConvolutionTree:
    t.update(i, lo_i, hi_i, cost_i)
    return t


def ct_sigma_update(t: ConvolutionTree, coords, los, his, costs) -> ConvolutionTree:
    t.sigma_update(coords, los, his, costs)
    return t


def ct_query(t: ConvolutionTree) -> dict:
    return t.query()


class ConvTreeStepper(Stepper):
    """Dual AugIP answered from one lazily built convolution tree per lam.

    Between queries only the coordinates where x moved are pushed into each
    tree.  A different instance object (new bounds or objective) resets all
    trees.
    """

    name = "dual-convtree"

    def __init__(self, a, td, rho, cap: int = 2_000_000) -> None:
        super().__init__(a, td, rho)
        self.cap = cap
        self._inst = None
        self._trees: dict[int, tuple[ConvolutionTree, tuple[int, ...]]] = {}

    def step(self, inst, x, lam):
        if inst is not self._inst:
            self._inst = inst
            self._trees = {}
        lo, hi = step_window(inst.lower, inst.upper, x, lam, self.rho.value)
        if any(l > h for l, h in zip(lo, hi)):
            return None
        costs = step_costs(inst.objective, x, lam)
        entry = self._trees.get(lam)
        if entry is None:
            rho = self.rho.value
            spread = inst.box_l1()
            if is_finite(spread):
                rho = min(rho, int(spread))
            tree = ConvolutionTree(self.a, self.td, rho, lo, hi, costs, self.cap)
        else:
            tree, old_x = entry
            moved = [j for j in range(len(x)) if x[j] != old_x[j]]
            if moved:
                tree.sigma_update(moved, [lo[j] for j in moved], [hi[j] for j in moved],
                                  [costs[j] for j in moved])
        self._trees[lam] = (tree, tuple(x))
        best = tree.best_zero_entry()
        if best is None:
            return None
        return StepResult(tree.witness(best[1]), lam, best[0])


def nearlylinear_dual_solve(inst: IpInstance, td: TdDecomposition, x0, rho_policy="auto",
                            cap: int = 2_000_000) -> SolveReport:
    """Halfling augmentation from x0 with convolution-tree steps."""
    from .graver import resolve_rho

    rho = resolve_rho(inst.a, "1", rho_policy, td)
    stepper = ConvTreeStepper(inst.a, td, rho, cap)
    rep = augment_to_optimality(inst, x0, stepper)
    rep.algorithm = "dual-convtree"
    return rep
