"""Brute-force checkers. Nothing here imports algorithm code; they take plain
adjacency (anything with ``vertices``, ``neighbors`` and ``edges``) and plain
dicts so they can judge any trace independently."""
from __future__ import annotations

from collections import deque
from typing import Any, Callable, Mapping


class OracleError(ValueError):
    pass


def _total(graph, assignment: Mapping, what: str) -> None:
    missing = [v for v in graph.vertices if v not in assignment]
    if missing:
        raise OracleError(f"{what} missing for vertices {missing[:5]}")


def is_proper_coloring(graph, coloring: Mapping[int, Any]) -> bool:
    _total(graph, coloring, "color")
    for u, v in graph.edges():
        if coloring[u] == coloring[v]:
            return False
    return True


def _ekey(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def is_proper_edge_coloring(graph, coloring: Mapping[tuple[int, int], Any]) -> bool:
    for e in graph.edges():
        if _ekey(*e) not in coloring:
            raise OracleError(f"edge {e} has no color")
    for v in graph.vertices:
        seen = set()
        for u in graph.neighbors(v):
            c = coloring[_ekey(u, v)]
            if c in seen:
                return False
            seen.add(c)
    return True


def is_mis(graph, members) -> bool:
    s = set(members)
    for v in graph.vertices:
        inside = v in s
        nbr_inside = any(u in s for u in graph.neighbors(v))
        if inside and nbr_inside:
            return False
        if not inside and not nbr_inside:
            return False
    return True


def is_mm(graph, matching) -> bool:
    m = {_ekey(*e) for e in matching}
    edges = {_ekey(*e) for e in graph.edges()}
    if not m <= edges:
        return False
    covered: dict[int, int] = {}
    for u, v in m:
        for x in (u, v):
            covered[x] = covered.get(x, 0) + 1
            if covered[x] > 1:
                return False
    return all(u in covered or v in covered for u, v in edges)


def defect(graph, coloring: Mapping[int, Any]) -> int:
    _total(graph, coloring, "color")
    return max((sum(1 for u in graph.neighbors(v) if coloring[u] == coloring[v])
                for v in graph.vertices), default=0)


def arbdefect_witness(graph, coloring: Mapping[int, Any],
                      orientation: Mapping[tuple[int, int], int]) -> int:
    """Largest number of same-colored out-neighbors under ``orientation``
    (edge -> head)."""
    out = {v: 0 for v in graph.vertices}
    for u, v in graph.edges():
        key = _ekey(u, v)
        if key not in orientation:
            raise OracleError(f"edge {key} not oriented")
        head = orientation[key]
        if head not in key:
            raise OracleError(f"head {head} not an endpoint of {key}")
        if coloring[u] == coloring[v]:
            out[u if head == v else v] += 1
    return max(out.values(), default=0)


def palette_size(coloring: Mapping[Any, Any]) -> int:
    return len(set(coloring.values()))


# trace-level measures


def stabilization_time(trace, predicate: Callable[[Any, dict], bool]) -> int | None:
    """Rounds after the last fault until ``predicate(graph, outputs)`` holds
    and outputs stay unchanged through the end of the trace. None if that
    never happens.

    A fault-free run has nothing to recover from; it counts as stabilized
    when it terminates, so the result is its length (if the predicate holds).
    """
    records = trace.records
    last = records[-1]
    if not trace.fault_rounds:
        return last.round if predicate(trace.graph_at(last.round), last.outputs) else None
    start = trace.last_fault_round
    settled = None
    for rec in reversed(records):
        if rec.round < start:
            break
        if rec.outputs != last.outputs or not predicate(trace.graph_at(rec.round), rec.outputs):
            break
        settled = rec.round
    if settled is None:
        return None
    return max(0, settled - start)


def bfs_distances(graph, sources, seeds: Mapping[int, int] | None = None) -> dict[int, int]:
    """Hop distances from ``sources`` (distance 0) and optional ``seeds``
    (vertex -> starting distance)."""
    start = {s: 0 for s in sources if s in graph.adj}
    for v, d in (seeds or {}).items():
        if v in graph.adj and d < start.get(v, d + 1):
            start[v] = d
    dist = {}
    dq = deque()
    for v in sorted(start, key=start.get):
        dist[v] = start[v]
        dq.append(v)
    while dq:
        x = dq.popleft()
        for y in graph.neighbors(x):
            if y not in dist or dist[y] > dist[x] + 1:
                dist[y] = dist[x] + 1
                dq.append(y)
    return dist


def changed_vertices(before: Mapping, after: Mapping) -> set:
    return {k for k in after if k in before and before[k] != after[k]}


def adjustment_radius(trace, project: Callable[[Mapping], Mapping] | None = None,
                      edge_level: bool = False) -> float:
    """Largest hop distance (in the post-fault graph) from any fault site to an
    element whose output differs between the last pre-fault round and the end.

    ``project`` maps a round's raw outputs to per-element values (vertices, or
    edges when ``edge_level``; an edge's distance is the larger endpoint
    distance). Returns 0 when nothing changed and inf when a changed element is
    unreachable from the fault sites.
    """
    if not trace.fault_rounds:
        return 0
    project = project or (lambda o: o)
    first = min(trace.fault_rounds)
    before = project(trace.records[first - 1].outputs)
    after = project(trace.final_outputs)
    sites = sorted({s for ss in trace.fault_sites.values() for s in ss})
    g = trace.final_graph
    # a removed site is represented by its former neighbors at distance 1
    seeds = {}
    for s in sites:
        if s not in g.adj:
            for rnd in sorted(trace.graphs):
                old = trace.graphs[rnd]
                if s in old.adj:
                    for u in old.neighbors(s):
                        seeds[u] = 1
    dist = bfs_distances(g, sites, seeds)
    worst = 0
    for k in changed_vertices(before, after):
        if edge_level:
            d = max(dist.get(k[0], float("inf")), dist.get(k[1], float("inf")))
        else:
            d = dist.get(k, float("inf"))
        worst = max(worst, d)
    return worst
