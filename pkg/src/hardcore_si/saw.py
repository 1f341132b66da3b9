"""Self-avoiding-walk trees and the graph-vs-tree influence comparison.

The tree of self-avoiding walks from ``u`` follows Weitz's construction.
Whenever a walk can step back onto a vertex ``w`` already on it, a leaf copy
of ``w`` is added and pinned. With edges ordered lexicographically by their
sorted endpoint pairs, the copy is pinned occupied when the closing edge
comes after the edge through which the walk left ``w``, and unoccupied
otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass

from .exact import influence_matrix
from .graph import Graph, Pinning, apply_pinning, component_of
from .trees import RootedTree, root_influence_sum

MAX_SAW_NODES = 10**6


class SawTreeTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SawTree:
    tree: RootedTree
    leaf_pins: Pinning
    origin: tuple[int, ...]   # tree vertex -> graph vertex


def _edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def build_saw_tree(graph: Graph, u: int, max_nodes: int = MAX_SAW_NODES) -> SawTree:
    """Tree of self-avoiding walks in ``graph`` starting at ``u``."""
    if not 0 <= u < graph.n:
        raise ValueError(f"vertex {u} out of range")
    parent = [-1]
    origin = [u]
    pins: dict[int, int] = {}
    # walk: vertices in order; position: vertex -> index on the walk
    stack = [(0, [u], {u: 0})]
    while stack:
        node, walk, position = stack.pop()
        tip = walk[-1]
        back = walk[-2] if len(walk) > 1 else None
        for w in graph.adjacency[tip]:
            if w == back:
                continue
            if len(parent) >= max_nodes:
                raise SawTreeTooLarge(f"SAW tree from {u} exceeds {max_nodes} nodes")
            child = len(parent)
            parent.append(node)
            origin.append(w)
            i = position.get(w)
            if i is None:
                stack.append((child, walk + [w], {**position, w: len(walk)}))
            else:
                leaving = _edge(w, walk[i + 1])
                closing = _edge(w, tip)
                pins[child] = 1 if closing > leaving else 0
    return SawTree(RootedTree(tuple(parent)), Pinning(pins), tuple(origin))


@dataclass(frozen=True)
class DominationReport:
    vertex: int
    graph_row_sum: float
    tree_sum: float
    dominated: bool
    tree_size: int
    tree_max_degree: int

    def as_dict(self) -> dict:
        return {
            "vertex": self.vertex,
            "graph_row_sum": self.graph_row_sum,
            "tree_sum": self.tree_sum,
            "dominated": self.dominated,
            "tree_size": self.tree_size,
            "tree_max_degree": self.tree_max_degree,
        }


def pinned_tree_influence_sum(saw: SawTree, lam: float) -> float:
    """Root influence sum of the SAW tree's hardcore model with its leaf pins applied."""
    graph = saw.tree.to_graph()
    residual = apply_pinning(graph, saw.leaf_pins)
    # the root is never pinned nor next to a pin, and keeps index 0
    root = residual.labels.index(saw.tree.root)
    keep = component_of(residual, root)
    comp = residual.induced_subgraph(keep)
    tree = RootedTree.from_graph(comp, keep.index(root))
    return root_influence_sum(tree, lam).phi


def verify_saw_domination(graph: Graph, lam: float, u: int,
                          tol: float = 1e-9) -> DominationReport:
    """Compare the graph's influence row sum at ``u`` with its SAW tree's."""
    psi = influence_matrix(graph, lam)
    graph_sum = psi.row_sum(u)
    saw = build_saw_tree(graph, u)
    tree_sum = pinned_tree_influence_sum(saw, lam)
    return DominationReport(
        vertex=u,
        graph_row_sum=graph_sum,
        tree_sum=tree_sum,
        dominated=graph_sum <= tree_sum + tol,
        tree_size=saw.tree.n,
        tree_max_degree=saw.tree.max_degree,
    )
