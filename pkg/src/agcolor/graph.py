"""Bounded-degree graphs with deterministic generators and topology events."""
from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator


class GraphError(ValueError):
    """A graph construction or topology event violates the ROM bounds."""


@dataclass(frozen=True)
class TopologyEvent:
    round: int
    kind: str  # add-vertex | remove-vertex | add-edge | remove-edge
    payload: int | tuple[int, int]

    KINDS = ("add-vertex", "remove-vertex", "add-edge", "remove-edge")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise GraphError(f"unknown topology event kind {self.kind!r}")

    def sites(self) -> tuple[int, ...]:
        if isinstance(self.payload, tuple):
            return tuple(self.payload)
        return (self.payload,)


class Graph:
    """Undirected simple graph on integer IDs in ``[0, n_bound)``.

    Adjacency lists are kept sorted so that port order is reproducible.
    Instances are treated as immutable: :meth:`apply` returns a new graph
    sharing the adjacency lists it did not touch.
    """

    def __init__(self, n_bound: int, delta_bound: int,
                 adjacency: dict[int, list[int]] | None = None) -> None:
        if n_bound < 1:
            raise GraphError("n_bound must be >= 1")
        if delta_bound < 0:
            raise GraphError("delta_bound must be >= 0")
        self.n_bound = n_bound
        self.delta_bound = delta_bound
        self.adj: dict[int, list[int]] = {} if adjacency is None else adjacency

    @classmethod
    def from_edges(cls, n_bound: int, delta_bound: int, vertices: Iterable[int],
                   edges: Iterable[tuple[int, int]]) -> "Graph":
        g = cls(n_bound, delta_bound)
        for v in vertices:
            g._add_vertex(v)
        for u, v in edges:
            g._add_edge(u, v)
        g.check()
        return g

    # queries

    @property
    def vertices(self) -> list[int]:
        return sorted(self.adj)

    def __len__(self) -> int:
        return len(self.adj)

    def __contains__(self, v: object) -> bool:
        return v in self.adj

    def neighbors(self, v: int) -> list[int]:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj.values()), default=0)

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in sorted(self.adj):
            for v in self.adj[u]:
                if u < v:
                    yield (u, v)

    def has_edge(self, u: int, v: int) -> bool:
        return u in self.adj and v in self.adj[u]

    def copy(self) -> "Graph":
        return Graph(self.n_bound, self.delta_bound, {v: list(a) for v, a in self.adj.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n_bound, self.delta_bound, self.adj) == (other.n_bound, other.delta_bound, other.adj)

    def __repr__(self) -> str:
        return f"Graph(n={len(self.adj)}, m={sum(1 for _ in self.edges())}, delta<={self.delta_bound})"

    def check(self) -> None:
        for v, nbrs in self.adj.items():
            if not 0 <= v < self.n_bound:
                raise GraphError(f"vertex id {v} outside [0, {self.n_bound})")
            if len(nbrs) > self.delta_bound:
                raise GraphError(f"vertex {v} has degree {len(nbrs)} > {self.delta_bound}")
            if nbrs != sorted(set(nbrs)):
                raise GraphError(f"adjacency of {v} not sorted/unique")
            for u in nbrs:
                if u == v:
                    raise GraphError(f"self-loop at {v}")
                if u not in self.adj or v not in self.adj[u]:
                    raise GraphError(f"asymmetric edge {v}-{u}")

    # mutation (private; public path is apply())

    def _add_vertex(self, v: int) -> None:
        if not 0 <= v < self.n_bound:
            raise GraphError(f"vertex id {v} outside [0, {self.n_bound})")
        if v in self.adj:
            raise GraphError(f"vertex {v} already present")
        self.adj[v] = []

    def _add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise GraphError(f"self-loop at {u}")
        for x in (u, v):
            if x not in self.adj:
                raise GraphError(f"edge endpoint {x} not present")
        if v in self.adj[u]:
            raise GraphError(f"edge {u}-{v} already present")
        for x in (u, v):
            if len(self.adj[x]) >= self.delta_bound:
                raise GraphError(f"degree of {x} would exceed delta bound {self.delta_bound}")
        self.adj[u] = sorted(self.adj[u] + [v])
        self.adj[v] = sorted(self.adj[v] + [u])

    def apply(self, event: TopologyEvent) -> "Graph":
        return apply_topology_event(self, event)


def apply_topology_event(graph: Graph, event: TopologyEvent) -> Graph:
    """Return a new graph with ``event`` applied; raise GraphError if invalid."""
    adj = dict(graph.adj)  # shallow: untouched lists are shared
    g = Graph(graph.n_bound, graph.delta_bound, adj)
    kind, p = event.kind, event.payload
    if kind == "add-vertex":
        g._add_vertex(int(p))
    elif kind == "remove-vertex":
        v = int(p)
        if v not in adj:
            raise GraphError(f"cannot remove absent vertex {v}")
        for u in adj[v]:
            adj[u] = [w for w in adj[u] if w != v]
        del adj[v]
    elif kind == "add-edge":
        u, v = p
        g._add_edge(u, v)
    else:
        u, v = p
        if not graph.has_edge(u, v):
            raise GraphError(f"cannot remove absent edge {u}-{v}")
        adj[u] = [w for w in adj[u] if w != v]
        adj[v] = [w for w in adj[v] if w != u]
    return g


def build_graph(kind: str, n: int, delta: int, seed: int = 0,
                n_bound: int | None = None) -> Graph:
    """Deterministic generator: path, cycle, complete, or random-capped."""
    if n < 1:
        raise GraphError("n must be >= 1")
    nb = n if n_bound is None else n_bound
    if nb < n:
        raise GraphError("n_bound smaller than n")
    vertices = range(n)
    if kind == "path":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif kind == "cycle":
        if n <= 2:
            edges = [(0, 1)] if n == 2 else []
        else:
            edges = [(i, (i + 1) % n) for i in range(n)]
    elif kind == "complete":
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    elif kind == "random-capped":
        if delta < 1:
            raise GraphError("random-capped needs delta >= 1")
        rng = random.Random(seed)
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        rng.shuffle(pairs)
        deg = [0] * n
        edges = []
        for u, v in pairs:
            if deg[u] < delta and deg[v] < delta:
                edges.append((u, v))
                deg[u] += 1
                deg[v] += 1
    else:
        raise GraphError(f"unknown graph kind {kind!r}")
    counts: dict[int, int] = {}
    for u, v in edges:
        counts[u] = counts.get(u, 0) + 1
        counts[v] = counts.get(v, 0) + 1
    needed = max(counts.values(), default=0)
    if needed > delta:
        raise GraphError(f"{kind} graph on {n} vertices needs degree {needed} > cap {delta}")
    return Graph.from_edges(nb, delta, vertices, edges)


def random_sparse(n: int, delta: int, seed: int, density: float = 0.5,
                  n_bound: int | None = None) -> Graph:
    """Random graph with max degree <= delta where each shuffled pair is kept with
    probability ``density`` (degree profile varies, unlike random-capped)."""
    rng = random.Random(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    rng.shuffle(pairs)
    deg = [0] * n
    edges = []
    for u, v in pairs:
        if deg[u] < delta and deg[v] < delta and rng.random() < density:
            edges.append((u, v))
            deg[u] += 1
            deg[v] += 1
    return Graph.from_edges(n if n_bound is None else n_bound, delta, range(n), edges)


def dumps(graph: Graph) -> str:
    """Edge-list fixture: header ``n delta`` then one ``u v`` per line.

    Vertices are assumed to be ``0..n-1``; isolated vertices are implied.
    """
    lines = [f"{graph.n_bound} {graph.delta_bound}"]
    lines += [f"{u} {v}" for u, v in graph.edges()]
    return "\n".join(lines) + "\n"


def loads(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise GraphError("fixture header must be 'n delta'")
    n, delta = (int(x) for x in rows[0])
    edges = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise GraphError(f"line {i}: expected 'u v'")
        edges.append((int(row[0]), int(row[1])))
    return Graph.from_edges(n, delta, range(n), edges)


def load(path: str | Path) -> Graph:
    return loads(Path(path).read_text())
