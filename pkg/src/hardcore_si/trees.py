"""Rooted trees: occupation recursion, root influence sums, regular truncations."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from .graph import Graph
from .uniqueness import _check_subcritical, critical_fugacity, recurrence_orbit

MAX_TREE_NODES = 10**7
MAX_ENUMERATION_NODES = 14
SERIES_REL_CUTOFF = 1e-18


@dataclass(frozen=True)
class RootedTree:
    """Rooted tree given by a parent array; ``parent[root] == -1``."""

    parent: tuple[int, ...]
    children: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    root: int = field(init=False, compare=False)

    def __post_init__(self):
        parent = tuple(int(p) for p in self.parent)
        object.__setattr__(self, "parent", parent)
        n = len(parent)
        if n == 0:
            raise ValueError("a rooted tree needs at least one vertex")
        roots = [v for v, p in enumerate(parent) if p == -1]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        kids: list[list[int]] = [[] for _ in range(n)]
        for v, p in enumerate(parent):
            if p == -1:
                continue
            if not 0 <= p < n or p == v:
                raise ValueError(f"bad parent {p} for vertex {v}")
            kids[p].append(v)
        object.__setattr__(self, "children", tuple(tuple(k) for k in kids))
        object.__setattr__(self, "root", roots[0])
        if len(self.bfs_order()) != n:
            raise ValueError("parent array contains a cycle")

    @property
    def n(self) -> int:
        return len(self.parent)

    def bfs_order(self) -> list[int]:
        order = [self.root]
        i = 0
        while i < len(order):
            order.extend(self.children[order[i]])
            i += 1
            if len(order) > len(self.parent):
                break
        return order

    def depths(self) -> list[int]:
        depth = [0] * self.n
        for v in self.bfs_order()[1:]:
            depth[v] = depth[self.parent[v]] + 1
        return depth

    def levels(self) -> list[list[int]]:
        """``levels()[k]`` lists the vertices at distance k from the root."""
        out: list[list[int]] = []
        for v, k in zip(range(self.n), self.depths()):
            while len(out) <= k:
                out.append([])
            out[k].append(v)
        return out

    @property
    def max_degree(self) -> int:
        return max(len(c) + (p != -1) for c, p in zip(self.children, self.parent))

    @property
    def max_children(self) -> int:
        return max(len(c) for c in self.children)

    def to_graph(self) -> Graph:
        return Graph.from_edges(self.n, [(p, v) for v, p in enumerate(self.parent) if p != -1])

    @classmethod
    def from_graph(cls, graph: Graph, root: int) -> "RootedTree":
        """Root a connected acyclic graph at ``root``."""
        parent = [-2] * graph.n
        parent[root] = -1
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for u in graph.adjacency[v]:
                if u == parent[v]:
                    continue
                if parent[u] != -2:
                    raise ValueError("graph contains a cycle")
                parent[u] = v
                queue.append(u)
        if -2 in parent:
            raise ValueError("graph is not connected")
        return cls(tuple(parent))


def load_tree(text: str) -> RootedTree:
    """Parse ``n`` on the first line and the parent array (root -1) on the second."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if len(lines) != 2:
        raise ValueError("rooted-tree document needs exactly two lines: n and the parent array")
    n = int(lines[0])
    parent = [int(tok) for tok in lines[1].replace(",", " ").split()]
    if len(parent) != n:
        raise ValueError(f"parent array has {len(parent)} entries, expected {n}")
    return RootedTree(tuple(parent))


def serialize_tree(tree: RootedTree) -> str:
    return f"{tree.n}\n{' '.join(map(str, tree.parent))}\n"


@dataclass(frozen=True)
class TreeMarginals:
    p: tuple[float, ...]


@dataclass(frozen=True)
class InfluenceSum:
    phi: float
    per_level: tuple[float, ...]


def tree_marginals(tree: RootedTree, lam: float) -> TreeMarginals:
    """Occupation probability of each vertex in the model on its own subtree.

    Bottom-up: ``p_v / (1 - p_v) = lam * prod over children w of (1 - p_w)``.
    """
    if not lam > 0:
        raise ValueError("fugacity must be positive")
    p = [0.0] * tree.n
    for v in reversed(tree.bfs_order()):
        prod = 1.0
        for w in tree.children[v]:
            prod *= 1.0 - p[w]
        ratio = lam * prod
        p[v] = ratio / (1.0 + ratio)
    return TreeMarginals(tuple(p))


def root_influence_sum(tree: RootedTree, lam: float) -> InfluenceSum:
    """Sum over all vertices of the absolute influence of the root.

    The influence of the root on ``v`` is the product of subtree marginals
    along the path below the root, so one top-down pass suffices.
    """
    p = tree_marginals(tree, lam).p
    path_product = [0.0] * tree.n
    depth = [0] * tree.n
    per_level = [1.0]
    path_product[tree.root] = 1.0
    for v in tree.bfs_order()[1:]:
        u = tree.parent[v]
        path_product[v] = path_product[u] * p[v]
        depth[v] = depth[u] + 1
        if depth[v] == len(per_level):
            per_level.append(0.0)
        per_level[depth[v]] += path_product[v]
    return InfluenceSum(phi=sum(per_level), per_level=tuple(per_level))


def truncated_regular_tree_size(max_degree: int, height: int) -> int:
    d = max_degree - 1
    return 1 + sum(max_degree * d ** (k - 1) for k in range(1, height + 1))


def build_truncated_regular_tree(max_degree: int, height: int) -> RootedTree:
    """Regular tree cut at depth ``height``: root has D children, inner vertices D-1."""
    if max_degree < 3 or height < 1:
        raise ValueError("need max_degree >= 3 and height >= 1")
    size = truncated_regular_tree_size(max_degree, height)
    if size > MAX_TREE_NODES:
        raise ValueError(f"tree would have {size} vertices, above the limit {MAX_TREE_NODES}")
    parent = [-1]
    frontier = [0]
    for k in range(1, height + 1):
        branching = max_degree if k == 1 else max_degree - 1
        nxt = []
        for u in frontier:
            for _ in range(branching):
                nxt.append(len(parent))
                parent.append(u)
        frontier = nxt
    return RootedTree(tuple(parent))


@dataclass(frozen=True)
class TruncatedSeries:
    phi: float
    a: tuple[float, ...]   # a[k-1]: |influence| of the root on a depth-k vertex
    terms_used: int


def truncated_influence_series(max_degree: int, height: int, lam: float) -> TruncatedSeries:
    """Root influence sum of the truncated regular tree without building it.

    A depth-j vertex roots a full (D-1)-ary tree of height ``height - j``, so
    its subtree marginal is ``F^(height-j+1)(0)``. Summation stops once a
    term falls below ``1e-18`` of the running sum.
    """
    d = max_degree - 1
    critical_fugacity(max_degree)
    _check_subcritical(d, lam)
    if height < 1:
        raise ValueError("height must be >= 1")
    orbit = recurrence_orbit(d, lam, 0.0, height)  # orbit[t] = F^(t)(0)
    total = 1.0
    a: list[float] = []
    ak = 1.0
    term = max_degree / d  # level-k term is (d+1) d^(k-1) a_k
    for k in range(1, height + 1):
        x = orbit[height - k + 1]
        ak *= x
        a.append(ak)
        term *= d * x
        total += term
        if term < SERIES_REL_CUTOFF * total:
            break
    return TruncatedSeries(phi=total, a=tuple(a), terms_used=len(a))


def regular_tree_limit(max_degree: int, x_hat: float) -> float:
    """``(1 + x)/(1 - d x)``: the influence sum of the infinite regular tree."""
    d = max_degree - 1
    return (1.0 + x_hat) / (1.0 - d * x_hat)


# --- exhaustive enumeration of small rooted trees ---------------------------

@lru_cache(maxsize=None)
def _shapes(size: int, max_children: int) -> tuple[tuple, ...]:
    """Canonical shapes (nested sorted tuples of child shapes) with ``size`` vertices."""
    if size == 1:
        return ((),)
    out = []
    for kids in _forests(size - 1, max_children, None, max_children):
        out.append(kids)
    return tuple(out)


def _shape_order(shape: tuple) -> tuple:
    return (_shape_size(shape), shape)


@lru_cache(maxsize=None)
def _shape_size(shape: tuple) -> int:
    return 1 + sum(_shape_size(c) for c in shape)


def _forests(total: int, max_children: int, bound, slots: int) -> list[tuple]:
    """Multisets of at most ``slots`` shapes, total size ``total``, as sorted tuples.

    Shapes are emitted in non-increasing order of ``_shape_order`` and none
    exceeds ``bound``, which makes each multiset appear once.
    """
    if total == 0:
        return [()]
    if slots == 0:
        return []
    out = []
    top = total if bound is None else min(total, _shape_size(bound))
    for size in range(top, 0, -1):
        for shape in _shapes(size, max_children):
            if bound is not None and _shape_order(shape) > _shape_order(bound):
                continue
            for rest in _forests(total - size, max_children, shape, slots - 1):
                out.append((shape,) + rest)
    return out


def _shape_to_tree(shape: tuple) -> RootedTree:
    parent = [-1]
    stack = [(shape, 0)]
    while stack:
        s, v = stack.pop()
        for child in s:
            parent.append(v)
            stack.append((child, len(parent) - 1))
    return RootedTree(tuple(parent))


def rooted_tree_shapes(max_n: int, max_children: int,
                       root_max_children: int | None = None) -> Iterator[tuple]:
    if not 1 <= max_n <= MAX_ENUMERATION_NODES:
        raise ValueError(f"max_n must be in [1, {MAX_ENUMERATION_NODES}]")
    if max_children < 0:
        raise ValueError("max_children must be non-negative")
    root_cap = max_children if root_max_children is None else root_max_children
    for size in range(1, max_n + 1):
        if root_cap == max_children:
            yield from _shapes(size, max_children)
        else:
            yield from _forests(size - 1, max_children, None, root_cap)


def enumerate_rooted_trees(max_n: int, max_children: int,
                           root_max_children: int | None = None) -> Iterator[RootedTree]:
    """Every rooted tree with at most ``max_n`` vertices, once per isomorphism class.

    Non-root vertices have at most ``max_children`` children; the root may
    have up to ``root_max_children`` (defaults to ``max_children``).
    """
    for shape in rooted_tree_shapes(max_n, max_children, root_max_children):
        yield _shape_to_tree(shape)


def canonical_code(tree: RootedTree, v: int | None = None) -> str:
    """AHU parenthesis code of the subtree at ``v``; equal iff isomorphic as rooted trees."""
    v = tree.root if v is None else v
    codes: dict[int, str] = {}
    for u in reversed(tree.bfs_order()):
        codes[u] = "(" + "".join(sorted(codes[w] for w in tree.children[u])) + ")"
    return codes[v]
