"""Primal/dual graphs, treedepth decompositions and the block splits they induce."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .errors import DecompositionError, LimitError
from .instance import SparseIntMatrix, gauss_jordan

PRIMAL = "primal"
DUAL = "dual"

TD_COMPONENT_CAP = 20


@dataclass(frozen=True)
class Graph:
    n: int
    adj: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        nb: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                continue
            nb[u].add(v)
            nb[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nb))

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        out = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, stack = [], [s]
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in self.adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        stack.append(v)
            out.append(sorted(comp))
        return out


def build_primal_graph(a: SparseIntMatrix) -> Graph:
    """Columns are vertices; two columns are adjacent when some row uses both."""
    edges = []
    for i in range(a.rows):
        sup = a.row_support(i)
        edges.extend((sup[p], sup[q]) for p in range(len(sup)) for q in range(p + 1, len(sup)))
    return Graph.from_edges(a.cols, edges)


def build_dual_graph(a: SparseIntMatrix) -> Graph:
    return build_primal_graph(a.transpose())


# ---------------------------------------------------------------------------
# rooted forests


@dataclass(frozen=True)
class Profile:
    ttd: int
    levels: tuple[int, ...]
    k_product: int


@dataclass(frozen=True)
class TdDecomposition:
    """A rooted forest given by parent pointers (-1 marks a root)."""

    parent: tuple[int, ...]
    orientation: str = PRIMAL

    def __post_init__(self) -> None:
        par = tuple(int(p) for p in self.parent)
        object.__setattr__(self, "parent", par)
        if self.orientation not in (PRIMAL, DUAL):
            raise DecompositionError(f"unknown orientation {self.orientation!r}")
        n = len(par)
        for v, p in enumerate(par):
            if not (p == -1 or 0 <= p < n) or p == v:
                raise DecompositionError(f"vertex {v} has invalid parent {p}")
        state = [0] * n  # 0 new, 1 on stack, 2 done
        for s in range(n):
            walk = []
            v = s
            while v != -1 and state[v] == 0:
                state[v] = 1
                walk.append(v)
                v = par[v]
            if v != -1 and state[v] == 1:
                raise DecompositionError(f"parent mapping has a cycle through vertex {v}")
            for w in walk:
                state[w] = 2

    @property
    def n(self) -> int:
        return len(self.parent)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        ch: list[list[int]] = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p >= 0:
                ch[p].append(v)
        return tuple(tuple(c) for c in ch)

    @cached_property
    def roots(self) -> tuple[int, ...]:
        return tuple(v for v, p in enumerate(self.parent) if p == -1)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        d = [0] * self.n
        for v in self.preorder:
            p = self.parent[v]
            d[v] = 1 if p == -1 else d[p] + 1
        return tuple(d)

    @cached_property
    def preorder(self) -> tuple[int, ...]:
        out = []
        stack = list(reversed(self.roots))
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children[v]))
        return tuple(out)

    @cached_property
    def height(self) -> int:
        return max(self.depth, default=0)

    def leaves(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n) if not self.children[v])

    def root_path(self, v: int) -> list[int]:
        """Vertices from the root down to v."""
        path = []
        while v != -1:
            path.append(v)
            v = self.parent[v]
        return path[::-1]

    def is_ancestor(self, u: int, v: int) -> bool:
        """True when u lies on the root path of v (u == v counts)."""
        while v != -1:
            if v == u:
                return True
            v = self.parent[v]
        return False

    def subtree(self, v: int) -> list[int]:
        out, stack = [], [v]
        while stack:
            w = stack.pop()
            out.append(w)
            stack.extend(self.children[w])
        return sorted(out)

    @cached_property
    def profile(self) -> Profile:
        return topological_profile(self)

    @property
    def ttd(self) -> int:
        return self.profile.ttd

    def restrict(self, kept: Sequence[int]) -> TdDecomposition:
        """Induced forest on ``kept``, renumbered in the given order.

        Each kept vertex hangs below its nearest kept ancestor, so ancestor
        relations among kept vertices survive.
        """
        pos = {v: k for k, v in enumerate(kept)}
        par = []
        for v in kept:
            p = self.parent[v]
            while p != -1 and p not in pos:
                p = self.parent[p]
            par.append(pos[p] if p != -1 else -1)
        return TdDecomposition(tuple(par), self.orientation)

    def retag(self, orientation: str) -> TdDecomposition:
        return TdDecomposition(self.parent, orientation)

    def to_json(self) -> dict:
        return {"parent": list(self.parent), "orientation": self.orientation}


def topological_profile(f: TdDecomposition) -> Profile:
    """Topological height, level heights and K = max over paths of prod(k_i + 1).

    A vertex is degenerate when it has exactly one child; the level heights of
    a root-leaf path are the gaps between its non-degenerate vertices.
    """
    if f.n == 0:
        return Profile(0, (), 1)
    levels: list[int] = []
    k_product = 1
    for leaf in f.leaves():
        path = f.root_path(leaf)
        ks = []
        prev = 0
        for pos, v in enumerate(path, start=1):
            if len(f.children[v]) != 1:
                ks.append(pos - prev)
                prev = pos
        for i, k in enumerate(ks):
            if i < len(levels):
                levels[i] = max(levels[i], k)
            else:
                levels.append(k)
        prod = 1
        for k in ks:
            prod *= k + 1
        k_product = max(k_product, prod)
    return Profile(len(levels), tuple(levels), k_product)


def verify_td_decomposition(g: Graph, f: TdDecomposition) -> bool:
    if g.n != f.n:
        return False
    depth = f.depth
    for u, v in g.edges():
        lo, hi = (u, v) if depth[u] > depth[v] else (v, u)
        if not f.is_ancestor(hi, lo):
            return False
    return True


# ---------------------------------------------------------------------------
# exact treedepth


def compute_treedepth_exact(g: Graph, orientation: str = PRIMAL,
                            cap: int = TD_COMPONENT_CAP) -> TdDecomposition:
    """Optimal-height decomposition by memoized recursion over vertex subsets.

    td(G) = 1 + min_v max_C td(C) over the components C of G - v.  Ties pick
    the smallest vertex index.
    """
    for comp in g.components():
        if len(comp) > cap:
            raise LimitError("treedepth component", len(comp), cap)
    nbr = [0] * g.n
    for u in range(g.n):
        for v in g.adj[u]:
            nbr[u] |= 1 << v

    def components(mask: int) -> list[int]:
        out = []
        while mask:
            low = mask & -mask
            comp = frontier = low
            while frontier:
                b = frontier & -frontier
                frontier ^= b
                grow = nbr[b.bit_length() - 1] & mask & ~comp
                comp |= grow
                frontier |= grow
            out.append(comp)
            mask &= ~comp
        return out

    memo: dict[int, tuple[int, int]] = {}

    def td(mask: int) -> int:
        """Treedepth of a connected vertex set."""
        hit = memo.get(mask)
        if hit is not None:
            return hit[0]
        size = bin(mask).count("1")
        if size == 1:
            memo[mask] = (1, mask.bit_length() - 1)
            return 1
        best, best_v = size + 1, -1
        rest = mask
        while rest:
            b = rest & -rest
            rest ^= b
            val = 1
            for comp in components(mask ^ b):
                if 1 + bin(comp).count("1") <= val:
                    continue
                val = max(val, 1 + td(comp))
                if val >= best:
                    break
            if val < best:
                best, best_v = val, b.bit_length() - 1
        memo[mask] = (best, best_v)
        return best

    parent = [-1] * g.n

    def build(mask: int, par: int) -> None:
        td(mask)
        v = memo[mask][1]
        parent[v] = par
        for comp in components(mask & ~(1 << v)):
            build(comp, v)

    for comp in g.components():
        mask = 0
        for v in comp:
            mask |= 1 << v
        build(mask, -1)
    return TdDecomposition(tuple(parent), orientation)


# ---------------------------------------------------------------------------
# block splits


@dataclass(frozen=True)
class Block:
    cols: tuple[int, ...]
    rows: tuple[int, ...]
    td: TdDecomposition


@dataclass(frozen=True)
class PrimalDecomposition:
    """Split of A along the top path of a primal decomposition.

    ``path_cols`` are the k_1 columns on the root path (empty for a forest
    with several trees).  ``path_rows`` are rows touching no column outside
    the path, zero rows included.  Every other row touches exactly one block.
    """

    path_cols: tuple[int, ...]
    path_rows: tuple[int, ...]
    blocks: tuple[Block, ...]

    def extended(self, i: int) -> TdDecomposition:
        """Decomposition of (A_bar_i A_i) on columns path_cols + block cols:
        the block forest hung below a path on the k_1 path columns."""
        k = len(self.path_cols)
        blk = self.blocks[i]
        par = [j - 1 for j in range(k)]
        for p in blk.td.parent:
            par.append(k - 1 if p == -1 else p + k)
        return TdDecomposition(tuple(par), PRIMAL)


@dataclass(frozen=True)
class DualDecomposition:
    """Row analogue of PrimalDecomposition: ``path_rows`` are the k_1 linking
    rows, ``path_cols`` the columns meeting no other row."""

    path_rows: tuple[int, ...]
    path_cols: tuple[int, ...]
    blocks: tuple[Block, ...]


def _split(a: SparseIntMatrix, f: TdDecomposition):
    """Shared core: split vertices (columns of a) along the first branching."""
    if f.n != a.cols:
        raise DecompositionError(f"decomposition has {f.n} vertices, matrix has {a.cols} columns")
    if not verify_td_decomposition(build_primal_graph(a), f):
        raise DecompositionError("decomposition does not cover the interaction graph")
    if len(f.roots) == 1:
        v = f.roots[0]
        path = [v]
        while len(f.children[v]) == 1:
            v = f.children[v][0]
            path.append(v)
        tops = f.children[v]
    else:
        path, tops = [], f.roots
    owner = {}
    for bi, t in enumerate(tops):
        for w in f.subtree(t):
            owner[w] = bi
    block_rows: list[list[int]] = [[] for _ in tops]
    path_rows = []
    for i in range(a.rows):
        owners = {owner[j] for j in a.row_support(i) if j in owner}
        if not owners:
            path_rows.append(i)
        elif len(owners) == 1:
            block_rows[owners.pop()].append(i)
        else:
            raise DecompositionError(f"row {i} spans several blocks")
    blocks = []
    for bi, t in enumerate(tops):
        cols = tuple(f.subtree(t))
        blocks.append(Block(cols, tuple(block_rows[bi]), f.restrict(cols)))
    return tuple(path), tuple(path_rows), tuple(blocks)


def primal_decompose(a: SparseIntMatrix, f: TdDecomposition) -> PrimalDecomposition:
    if f.orientation != PRIMAL:
        raise DecompositionError("primal_decompose needs a primal decomposition")
    path, path_rows, blocks = _split(a, f)
    return PrimalDecomposition(path, path_rows, blocks)


def dual_decompose(a: SparseIntMatrix, f: TdDecomposition) -> DualDecomposition:
    if f.orientation != DUAL:
        raise DecompositionError("dual_decompose needs a dual decomposition")
    path, path_cols, blocks = _split(a.transpose(), f.retag(PRIMAL))
    return DualDecomposition(
        path, path_cols,
        tuple(Block(b.rows, b.cols, b.td.retag(DUAL)) for b in blocks),
    )


def extend_decomposition_for_identity(a: SparseIntMatrix, f: TdDecomposition) -> TdDecomposition:
    """A decomposition for (A I) built from one for A.

    Dual: the row graph does not change, so f is returned as is.  Primal: the
    slack column of every row is placed on a path hung below a leaf whose root
    path contains the row's support, taking leaves in index order.
    """
    if f.orientation == DUAL:
        if f.n != a.rows:
            raise DecompositionError(f"dual decomposition has {f.n} vertices, matrix has {a.rows} rows")
        return f
    if f.n != a.cols:
        raise DecompositionError(f"primal decomposition has {f.n} vertices, matrix has {a.cols} columns")
    _, status = gauss_jordan(a.to_dense(), a.cols)
    if any(s != "independent" for s in status):
        raise DecompositionError("primal extension needs a pure system (run purify first)")
    parent = list(f.parent) + [-1] * a.rows
    assigned = [False] * a.rows
    for leaf in f.leaves():
        on_path = set(f.root_path(leaf))
        tail = leaf
        for i in range(a.rows):
            if not assigned[i] and set(a.row_support(i)) <= on_path:
                assigned[i] = True
                parent[a.cols + i] = tail
                tail = a.cols + i
    if not all(assigned):
        raise DecompositionError("a row support is not contained in any root-leaf path")
    return TdDecomposition(tuple(parent), PRIMAL)
