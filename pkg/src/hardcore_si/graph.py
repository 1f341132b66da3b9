"""Simple undirected graphs, pinnings, and the pinning -> induced subgraph reduction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence


class GraphFormatError(ValueError):
    """Raised when an edge-list document cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidPinningError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    ``labels[i]`` is the vertex id of ``i`` in the graph this one was cut
    from (identity for graphs built directly).
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    labels: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        if len(self.adjacency) != self.n:
            raise ValueError("adjacency must have one list per vertex")
        for v, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"neighbors of {v} must be sorted and distinct")
            for u in nbrs:
                if not 0 <= u < self.n:
                    raise ValueError(f"neighbor {u} of {v} out of range")
                if u == v:
                    raise ValueError(f"self-loop at {v}")
                if v not in self.adjacency[u]:
                    raise ValueError(f"edge {v}-{u} is not symmetric")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(self.n)))
        elif len(self.labels) != self.n:
            raise ValueError("labels must have one entry per vertex")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   labels: Sequence[int] | None = None) -> "Graph":
        """Build a graph, rejecting self-loops, duplicates and bad indices."""
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has a vertex index >= n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if v in nbrs[u]:
                raise ValueError(f"duplicate edge ({u}, {v})")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs),
                   tuple(labels) if labels is not None else ())

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def neighbor_masks(self) -> list[int]:
        """Bitmask of the neighbourhood of each vertex."""
        masks = []
        for nbrs in self.adjacency:
            m = 0
            for u in nbrs:
                m |= 1 << u
            masks.append(m)
        return masks

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        return len(component_of(self, 0)) == self.n

    def induced_subgraph(self, vertices: Iterable[int]) -> "Graph":
        """Subgraph induced by ``vertices``; labels point back to the originals."""
        keep = sorted(set(vertices))
        for v in keep:
            _check_vertex(self, v)
        index = {v: i for i, v in enumerate(keep)}
        adj = tuple(
            tuple(sorted(index[u] for u in self.adjacency[v] if u in index))
            for v in keep
        )
        return Graph(len(keep), adj, tuple(self.labels[v] for v in keep))

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g

    @classmethod
    def from_networkx(cls, g) -> "Graph":
        nodes = sorted(g.nodes())
        index = {v: i for i, v in enumerate(nodes)}
        return cls.from_edges(len(nodes), ((index[u], index[v]) for u, v in g.edges()))


@dataclass(frozen=True)
class Configuration:
    """Spin vector stored as a bitmask: bit ``v`` set iff ``v`` is occupied."""

    n: int
    bits: int = 0

    @classmethod
    def from_vertices(cls, n: int, occupied: Iterable[int]) -> "Configuration":
        bits = 0
        for v in occupied:
            if not 0 <= v < n:
                raise ValueError(f"vertex {v} out of range")
            bits |= 1 << v
        return cls(n, bits)

    def __contains__(self, v: int) -> bool:
        return bool(self.bits >> v & 1)

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def vertices(self) -> list[int]:
        return [v for v in range(self.n) if self.bits >> v & 1]

    def is_independent(self, graph: Graph) -> bool:
        return is_independent_mask(graph, self.bits)


def is_independent_mask(graph: Graph, bits: int) -> bool:
    for u, v in graph.edges():
        if bits >> u & 1 and bits >> v & 1:
            return False
    return True


@dataclass(frozen=True)
class Pinning:
    """Partial 0/1 assignment ``values`` on the vertices in its keys."""

    values: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        frozen = {int(v): int(s) for v, s in dict(self.values).items()}
        for v, s in frozen.items():
            if s not in (0, 1):
                raise InvalidPinningError(f"vertex {v} pinned to {s}, expected 0 or 1")
        object.__setattr__(self, "values", dict(sorted(frozen.items())))

    def __hash__(self):
        return hash(tuple(self.values.items()))

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(self.values)

    @property
    def zeros(self) -> frozenset[int]:
        return frozenset(v for v, s in self.values.items() if s == 0)

    @property
    def ones(self) -> frozenset[int]:
        return frozenset(v for v, s in self.values.items() if s == 1)

    def validate(self, graph: Graph) -> None:
        for v in self.values:
            _check_vertex(graph, v)
        ones = self.ones
        for v in ones:
            for u in graph.adjacency[v]:
                if u in ones:
                    raise InvalidPinningError(
                        f"vertices {min(u, v)} and {max(u, v)} are adjacent and both pinned to 1")

    def is_valid(self, graph: Graph) -> bool:
        try:
            self.validate(graph)
        except (InvalidPinningError, ValueError):
            return False
        return True

    def agrees_with(self, bits: int) -> bool:
        return all((bits >> v & 1) == s for v, s in self.values.items())


EMPTY_PINNING = Pinning()


def _check_vertex(graph: Graph, v: int) -> None:
    if not 0 <= v < graph.n:
        raise ValueError(f"vertex {v} out of range for graph with n={graph.n}")


def boundary(graph: Graph, vertices: Iterable[int]) -> frozenset[int]:
    """Vertices outside ``vertices`` that have a neighbour inside it."""
    s = set(vertices)
    for v in s:
        _check_vertex(graph, v)
    return frozenset(u for v in s for u in graph.adjacency[v] if u not in s)


def free_vertices(graph: Graph, pinning: Pinning) -> list[int]:
    """Vertices left unfixed by ``pinning``: not pinned and not next to a 1-pin."""
    pinning.validate(graph)
    fixed = pinning.domain | boundary(graph, pinning.ones)
    return [v for v in range(graph.n) if v not in fixed]


def apply_pinning(graph: Graph, pinning: Pinning) -> Graph:
    """Graph whose hardcore model equals the conditional model under ``pinning``.

    Pinned vertices and the neighbours of occupied pins are dropped. The
    result's ``labels`` map its vertices to ``graph``'s labels.
    """
    return graph.induced_subgraph(free_vertices(graph, pinning))


def component_of(graph: Graph, v: int) -> list[int]:
    _check_vertex(graph, v)
    seen = {v}
    stack = [v]
    while stack:
        w = stack.pop()
        for u in graph.adjacency[w]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return sorted(seen)


def connected_vertex_subsets(graph: Graph) -> Iterator[int]:
    """Every nonempty vertex set inducing a connected subgraph, as a bitmask.

    Each set is produced once, grown from its smallest vertex.
    """
    nmask = graph.neighbor_masks()
    for root in range(graph.n):
        allowed = ~((1 << (root + 1)) - 1)  # vertices greater than root

        def grow(current: int, frontier: int, excluded: int):
            yield current
            candidates = frontier & ~excluded
            while candidates:
                low = candidates & -candidates
                candidates ^= low
                w = low.bit_length() - 1
                excluded |= low
                new_frontier = (frontier | nmask[w]) & allowed & ~current & ~low
                yield from grow(current | low, new_frontier, excluded)

        start = 1 << root
        yield from grow(start, nmask[root] & allowed, 0)


# --- edge-list text format -------------------------------------------------

def load_graph(text: str) -> Graph:
    """Parse the edge-list format: vertex count, then one ``u v`` pair per line.

    ``#`` starts a comment; blank lines are ignored.
    """
    n: int | None = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if n is None:
            if len(tokens) != 1:
                raise GraphFormatError("expected the vertex count", lineno)
            try:
                n = int(tokens[0])
            except ValueError:
                raise GraphFormatError(f"bad vertex count {tokens[0]!r}", lineno) from None
            if n < 0:
                raise GraphFormatError("vertex count must be non-negative", lineno)
            continue
        if len(tokens) != 2:
            raise GraphFormatError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphFormatError(f"bad vertex index in {line!r}", lineno) from None
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex index >= n={n} in {line!r}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key}", lineno)
        seen.add(key)
        edges.append(key)
    if n is None:
        raise GraphFormatError("empty document: missing vertex count")
    return Graph.from_edges(n, edges)


def serialize_graph(graph: Graph) -> str:
    lines = [str(graph.n)] + [f"{u} {v}" for u, v in sorted(graph.edges())]
    return "\n".join(lines) + "\n"


# --- small graph families --------------------------------------------------

def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def grid_graph(rows: int, cols: int) -> Graph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph.from_edges(rows * cols, edges)


def enumerate_graphs(n: int, max_degree: int | None = None,
                     connected: bool = True) -> list[Graph]:
    """All graphs on ``n`` vertices up to isomorphism with bounded degree.

    Graphs are grown one edge at a time and deduplicated by isomorphism
    within Weisfeiler-Lehman hash buckets.
    """
    import networkx as nx

    if n < 0:
        raise ValueError("n must be non-negative")
    cap = n - 1 if max_degree is None else max_degree
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def key(g):
        return (g.number_of_edges(), tuple(sorted(d for _, d in g.degree())),
                nx.weisfeiler_lehman_graph_hash(g, iterations=3))

    empty = nx.empty_graph(n)
    level = [empty]
    found = [empty]
    while level:
        buckets: dict[tuple, list] = {}
        for g in level:
            for u, v in pairs:
                if g.has_edge(u, v) or g.degree(u) >= cap or g.degree(v) >= cap:
                    continue
                h = g.copy()
                h.add_edge(u, v)
                bucket = buckets.setdefault(key(h), [])
                if not any(nx.is_isomorphic(h, other) for other in bucket):
                    bucket.append(h)
        level = [g for bucket in buckets.values() for g in bucket]
        found.extend(level)
    out = [Graph.from_networkx(g) for g in found
           if not connected or n == 0 or nx.is_connected(g)]
    out.sort(key=lambda g: (len(g.edges()), sorted(g.edges())))
    return out
