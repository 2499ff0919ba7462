"""Re-check a recorded trace with the oracles and summarize it.

Works from the JSONL file alone: a header line (problem and bounds) followed by
one record per round.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable

from . import oracles
from .graph import Graph

OK, BOUND, ORACLE, SCENARIO = 0, 2, 3, 4

CSV_FIELDS = ("scenario", "algorithm", "n", "delta", "rounds", "bit_rounds", "stab_rounds",
              "palette", "adj_radius", "max_bits_per_edge")


class TraceFormatError(ValueError):
    pass


def _norm(x: Any) -> Any:
    if isinstance(x, list):
        return tuple(_norm(y) for y in x)
    if isinstance(x, dict):
        return {_key(k): _norm(v) for k, v in x.items()}
    return x


def _key(k: str) -> Any:
    try:
        return int(k)
    except (TypeError, ValueError):
        return k


@dataclass
class Record:
    round: int
    engine_rounds: int
    outputs: dict
    bits: dict
    events: list


@dataclass
class TraceView:
    """The parts of a run trace the oracles need, rebuilt from JSONL."""
    header: dict
    records: list[Record]
    graphs: dict[int, Graph]
    fault_rounds: list[int] = field(default_factory=list)
    fault_sites: dict[int, list[int]] = field(default_factory=dict)

    @property
    def rounds(self) -> int:
        return self.records[-1].round

    @property
    def engine_rounds(self) -> int:
        return sum(r.engine_rounds for r in self.records[1:])

    @property
    def last_fault_round(self) -> int | None:
        return max(self.fault_rounds) if self.fault_rounds else None

    def graph_at(self, rnd: int) -> Graph:
        return self.graphs[max(k for k in self.graphs if k <= rnd)]

    @property
    def final_graph(self) -> Graph:
        return self.graphs[max(self.graphs)]

    @property
    def final_outputs(self) -> dict:
        return self.records[-1].outputs

    def bits_per_direction(self) -> dict:
        tot: dict = {}
        for rec in self.records:
            for e, b in rec.bits.items():
                tot[e] = tot.get(e, 0) + b
        return tot


def parse_trace(lines: Iterable[str]) -> TraceView:
    header = None
    records, graphs = [], {}
    fault_rounds, fault_sites = [], {}
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as e:
            raise TraceFormatError(f"trace line {i}: {e.msg}") from None
        if "header" in d:
            header = d["header"]
            continue
        try:
            rnd = d["round"]
            if "graph" in d:
                g = d["graph"]
                graphs[rnd] = Graph.from_edges(g["n_bound"], g["delta"], g["vertices"],
                                               [tuple(e) for e in g["edges"]])
            if "fault_sites" in d:
                fault_rounds.append(rnd)
                fault_sites[rnd] = list(d["fault_sites"])
            bits = {}
            for k, b in d["bits"].items():
                u, v = k.split(">")
                bits[(int(u), int(v))] = b
            records.append(Record(rnd, d["engine_rounds"], _norm(d["outputs"]), bits, d["events"]))
        except (KeyError, ValueError, TypeError) as e:
            raise TraceFormatError(f"trace line {i}: malformed record ({e})") from None
    if header is None:
        raise TraceFormatError("trace has no header line")
    if not records or 0 not in graphs:
        raise TraceFormatError("trace has no records or no initial graph")
    if [r.round for r in records] != list(range(len(records))):
        raise TraceFormatError("trace rounds are not consecutive from 0")
    return TraceView(header, records, graphs, fault_rounds, fault_sites)


def load_trace(path) -> TraceView:
    with open(path) as fh:
        return parse_trace(fh)


# projections from raw outputs to what the oracles judge


def vertex_colors(outputs: dict, problem: str) -> dict:
    if problem == "mis":
        return {v: o[0] for v, o in outputs.items()}
    return dict(outputs)


def edge_values(graph: Graph, outputs: dict, strict: bool) -> dict | None:
    """Edge -> value; None while some edge has no value yet. With ``strict``
    both endpoints must agree, otherwise the smaller endpoint's copy counts."""
    out = {}
    for u, v in graph.edges():
        a = outputs.get(u, {}).get(v) if isinstance(outputs.get(u), dict) else None
        b = outputs.get(v, {}).get(u) if isinstance(outputs.get(v), dict) else None
        if a is None:
            return None
        if strict and a != b:
            raise oracles.OracleError(f"endpoints of edge {u}-{v} disagree: {a!r} vs {b!r}")
        out[(u, v)] = a
    return out


def _edge_copies(graph: Graph, outputs: dict) -> dict:
    out = {}
    for u, v in graph.edges():
        view = outputs.get(u)
        if isinstance(view, dict) and v in view:
            out[(u, v)] = view[v]
    return out


@dataclass
class Verdict:
    rows: list[dict]
    violations: list[tuple[int, str]]  # (exit code, message)
    summary: dict

    @property
    def code(self) -> int:
        return max((c for c, _ in self.violations), default=OK)


def _proper(problem: str, graph: Graph, outputs: dict, strict_edges: bool) -> bool | None:
    if problem in ("coloring", "mis"):
        return oracles.is_proper_coloring(graph, vertex_colors(outputs, problem))
    if problem == "edge-coloring":
        ev = edge_values(graph, outputs, strict_edges)
        return None if ev is None else oracles.is_proper_edge_coloring(graph, ev)
    return None


def _final_ok(h: dict, graph: Graph, outputs: dict) -> bool:
    """The output predicate a finished (or stabilized) run must satisfy."""
    problem = h["problem"]
    try:
        if problem == "coloring":
            cols = outputs
            ok = oracles.is_proper_coloring(graph, cols)
        elif problem == "edge-coloring":
            cols = edge_values(graph, outputs, True)
            ok = cols is not None and oracles.is_proper_edge_coloring(graph, cols)
        elif problem == "mis":
            members = [v for v, o in outputs.items() if o[1] == h["mis_flag"]]
            return oracles.is_proper_coloring(graph, vertex_colors(outputs, problem)) and \
                oracles.is_mis(graph, members)
        elif problem == "mm":
            ev = edge_values(graph, outputs, True)
            return ev is not None and oracles.is_mm(graph, [e for e, m in ev.items() if m])
        elif problem == "defective":
            return oracles.defect(graph, outputs) <= h["defect_max"]
        elif problem == "arbdefective":
            return all(isinstance(o, tuple) and o[2] is not None for o in outputs.values())
        else:
            return False
    except oracles.OracleError:
        return False
    if not ok:
        return False
    if "final_max" in h:
        return all(isinstance(c, int) and 0 <= c < h["final_max"] for c in cols.values())
    return True


def _arb_witness(graph: Graph, outputs: dict, q: int) -> tuple[int, int]:
    """(same-class out-degree, initial same-class degree) recomputed from the
    final (psi0, value, finalized round) states."""
    colors = {v: o[1] % q for v, o in outputs.items()}
    orient = {}
    for u, v in graph.edges():
        fu = math.inf if outputs[u][2] is None else outputs[u][2]
        fv = math.inf if outputs[v][2] is None else outputs[v][2]
        orient[(u, v)] = u if fu < fv else v if fv < fu else max(u, v)
    psi0 = {v: o[0] for v, o in outputs.items()}
    return oracles.arbdefect_witness(graph, colors, orient), oracles.defect(graph, psi0)


def check(view: TraceView, small: int = 8) -> Verdict:
    """Re-validate every round. Graphs with at most ``small`` vertices are
    additionally checked for edge-view consistency every round."""
    h = view.header
    problem = h["problem"]
    every = h.get("proper_every_round", False)
    rows, bad = [], []
    for rec in view.records:
        g = view.graph_at(rec.round)
        strict = every or len(g.vertices) <= small
        row = {"round": rec.round}
        try:
            row["proper"] = _proper(problem, g, rec.outputs, strict)
        except oracles.OracleError as e:
            row["proper"] = False
            bad.append((ORACLE, f"round {rec.round}: {e}"))
        if problem in ("coloring", "defective"):
            row["palette"] = oracles.palette_size(rec.outputs)
            if problem == "defective" or not row["proper"]:
                row["defect"] = oracles.defect(g, rec.outputs)
        if problem == "mis":
            row["mis"] = _final_ok(h, g, rec.outputs)
        if problem == "mm":
            row["mm"] = _final_ok(h, g, rec.outputs)
        rows.append(row)
        if every and row["proper"] is False and not any(f"round {rec.round}:" in m for _, m in bad):
            bad.append((ORACLE, f"round {rec.round}: coloring not proper"))

    g_end = view.final_graph
    out = view.final_outputs
    if not _final_ok(h, g_end, out):
        bad.append((ORACLE, "final outputs do not satisfy the problem predicate"))

    stab = oracles.stabilization_time(view, lambda g, o: _final_ok(h, g, o))
    if "stab_max" in h:
        if stab is None:
            bad.append((BOUND, "never stabilized"))
        elif stab > h["stab_max"]:
            bad.append((BOUND, f"stabilized after {stab} rounds > bound {h['stab_max']}"))

    if "rounds_max" in h and view.rounds > h["rounds_max"]:
        bad.append((BOUND, f"{view.rounds} rounds > bound {h['rounds_max']}"))

    if problem == "edge-coloring":
        final_colors = edge_values(g_end, out, False) or {}
    elif problem == "mm":
        final_colors = {}
    elif problem == "arbdefective":
        final_colors = {v: o[1] % h["q"] for v, o in out.items()}
    else:
        final_colors = vertex_colors(out, problem)
    if "palette_max" in h and problem != "mis":
        over = [c for c in final_colors.values() if not (isinstance(c, int) and 0 <= c < h["palette_max"])]
        if over:
            bad.append((BOUND, f"final color {over[0]!r} outside [0, {h['palette_max']})"))

    extra = {}
    if problem == "arbdefective":
        w, init = _arb_witness(g_end, out, h["q"])
        extra = {"out_degree": w, "initial_defect": init}
        if w > h["p"] + init:
            bad.append((BOUND, f"same-class out-degree {w} > p + initial defect {h['p'] + init}"))

    radius = 0
    if view.fault_rounds:
        proj = None
        edge_level = problem in ("edge-coloring", "mm")
        if edge_level:
            proj = lambda o: _edge_copies(g_end, o)  # noqa: E731
        elif problem == "mis":
            proj = lambda o: {v: x[1] == h["mis_flag"] for v, x in o.items()}  # noqa: E731
        try:
            radius = oracles.adjustment_radius(view, proj, edge_level)
        except (KeyError, AttributeError, TypeError):
            radius = math.inf
        # the radius bound is about faults hitting a stabilized configuration
        first = min(view.fault_rounds)
        settled = first >= 2 and _final_ok(h, view.graph_at(first - 1), view.records[first - 1].outputs) \
            and view.records[first - 1].outputs == view.records[first - 2].outputs
        if settled and "radius_max" in h and radius > h["radius_max"]:
            bad.append((BOUND, f"adjustment radius {radius} > {h['radius_max']}"))

    per_dir = view.bits_per_direction()
    summary = {
        "scenario": h.get("scenario", ""),
        "algorithm": h.get("algorithm", ""),
        "n": h.get("n", len(g_end.vertices)),
        "delta": h.get("delta", g_end.delta_bound),
        "rounds": view.rounds,
        "bit_rounds": view.engine_rounds,
        "stab_rounds": "" if stab is None else stab,
        "palette": len(set(final_colors.values())),
        "adj_radius": radius,
        "max_bits_per_edge": max(per_dir.values(), default=0),
        **extra,
    }
    return Verdict(rows, bad, summary)


def csv_row(summary: dict) -> str:
    return ",".join(str(summary[k]) for k in CSV_FIELDS)
