"""(2Δ-1)-edge-coloring with small messages.

Stages, all run by the vertices with each edge's color replicated at both
endpoints:

1. optional ID exchange (skipped when neighbor IDs are pre-shared);
2. ranks: edges point toward the greater ID, the tail assigns its out-edges
   distinct ranks i and the head assigns its in-edges distinct ranks j, so each
   class <i,j> is a set of vertex-disjoint increasing paths;
3. Cole-Vishkin along each class path (edge identifier = tail ID);
4. either 1-bit AG rounds or 2-bit mixed 3AG / AG(N) rounds with N = 2Δ-1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from . import engine
from .algebra import ag_modulus, ag_update, decode_pair, encode_pair
from .engine import Algorithm, Msg, Rom, RoundModel, RunTrace
from .graph import Graph
from .linial import cv_fold, cv_fold_bounds
from .pipelines import ExactSpace, bits_for, exact_budget


class EdgeConsistencyError(RuntimeError):
    pass


def line_degree(delta: int) -> int:
    return max(0, 2 * delta - 2)


def edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class EdgeSchedule:
    known_ids: bool
    fold_bounds: tuple[int, ...]
    mode: str  # "ag" | "3ag"
    delta: int
    tail_rounds: int
    q: int | None = None
    space: ExactSpace | None = None

    def stages(self) -> list[tuple[str, int]]:
        out = [] if self.known_ids else [("ids", 0)]
        out.append(("rank", 0))
        out += [("fold", k) for k in range(len(self.fold_bounds))]
        out += [("recolor", c) for c in (5, 4, 3)]
        return out

    @property
    def pre_rounds(self) -> int:
        return len(self.stages())

    def at(self, rnd: int) -> tuple[str, int]:
        st = self.stages()
        if rnd <= len(st):
            return st[rnd - 1]
        return ("tail", rnd - len(st) - 1)

    @property
    def tail_base(self) -> int:
        """Offset of the triple palette in the tail's color space; the exact
        tail starts every edge in the 3AG region so nobody waits on AG(N)."""
        return 2 * self.space.n if self.space is not None else 0

    @property
    def palette_in(self) -> int:
        return 3 * self.delta * self.delta


def edge_schedule(n_bound: int, delta: int, mode: str = "3ag", known_ids: bool = False) -> EdgeSchedule:
    if mode not in ("ag", "3ag"):
        raise ValueError(f"unknown edge tail mode {mode!r}")
    id_bits = max(1, (n_bound - 1).bit_length())
    folds = tuple(cv_fold_bounds(id_bits))
    palette = 3 * max(delta, 1) ** 2
    dl = line_degree(delta)
    if mode == "ag":
        q = ag_modulus(max(1, dl), palette)
        return EdgeSchedule(known_ids, folds, mode, delta, q, q=q)
    if dl == 0:
        return EdgeSchedule(known_ids, folds, mode, delta, 1)
    space = ExactSpace(dl, 2 * (dl + 1) + palette, hold="targeted")
    return EdgeSchedule(known_ids, folds, mode, delta, exact_budget(space), space=space)


def _clip2(c: int | None) -> int:
    """Two-bit summary of a neighbor-edge color for the recolor step."""
    return 3 if c is None or c > 2 else c


class EdgePipeline(Algorithm):
    """Per-vertex state: {"ids": set of learned neighbor IDs,
    "i","j","cv","x": per-neighbor views of the shared edge}."""
    name = "edge"
    uses_ids = True

    def __init__(self, n_bound: int, delta: int, mode: str = "3ag", known_ids: bool = False) -> None:
        self.sched = edge_schedule(n_bound, delta, mode, known_ids)
        self.name = f"edge-{mode}"
        self.delta = delta
        self.n_bound = n_bound

    # helpers over a vertex's view

    def init_state(self, rom: Rom) -> dict:
        ids = set(rom.ports) if self.sched.known_ids else set()
        return {"ids": ids, "i": {}, "j": {}, "cv": {}, "x": {}}

    @staticmethod
    def _outs(rom: Rom, st: dict) -> list[int]:
        return sorted(u for u in st["ids"] if u > rom.id)

    @staticmethod
    def _ins(rom: Rom, st: dict) -> list[int]:
        return sorted(u for u in st["ids"] if u < rom.id)

    def _succ(self, rom: Rom, st: dict, tail: int) -> int | None:
        """Out-neighbor w of this vertex whose edge continues the class of (tail -> me)."""
        cls = (st["i"][tail], st["j"][tail])
        for w in self._outs(rom, st):
            if (st["i"][w], st["j"][w]) == cls:
                return w
        return None

    def _pred(self, rom: Rom, st: dict, head: int) -> int | None:
        cls = (st["i"][head], st["j"][head])
        for t in self._ins(rom, st):
            if (st["i"][t], st["j"][t]) == cls:
                return t
        return None

    def output(self, st: dict) -> dict:
        if st["x"]:
            return dict(st["x"])
        if st["cv"]:
            return {u: (st["i"][u], st["j"][u], st["cv"][u]) for u in st["cv"]}
        return {}

    def phase_bits(self, rnd: int) -> int | None:
        ph, k = self.sched.at(rnd)
        s = self.sched
        if ph == "ids":
            return bits_for(self.n_bound)
        if ph == "rank":
            return bits_for(max(self.delta, 1))
        if ph == "fold":
            return bits_for(s.fold_bounds[k])
        if ph == "recolor":
            return 2
        return 1 if s.mode == "ag" else 2

    def send(self, rom: Rom, st: dict, rnd: int) -> dict[int, Msg] | None:
        ph, k = self.sched.at(rnd)
        out: dict[int, Msg] = {}
        if ph == "ids":
            return {u: Msg(rom.id, bits_for(rom.n_bound)) for u in rom.ports}
        if ph == "rank":
            w = self.phase_bits(rnd)
            for r, u in enumerate(self._outs(rom, st), 1):
                out[u] = Msg(r, w)
            for r, t in enumerate(self._ins(rom, st), 1):
                out[t] = Msg(r, w)
            return out
        if ph == "fold":
            w = self.phase_bits(rnd)
            for t in self._ins(rom, st):
                out[t] = Msg(self._fold(rom, st, t), w)
            return out
        if ph == "recolor":
            for u, c in st["cv"].items():
                if c != k:
                    continue
                if u < rom.id:  # I am the head: report the successor's color
                    s = self._succ(rom, st, u)
                    out[u] = Msg(_clip2(None if s is None else st["cv"][s]), 2)
                else:
                    p = self._pred(rom, st, u)
                    out[u] = Msg(_clip2(None if p is None else st["cv"][p]), 2)
            return out
        return self._tail_send(rom, st)

    def _fold(self, rom: Rom, st: dict, t: int) -> int:
        s = self._succ(rom, st, t)
        return cv_fold(st["cv"][t], None if s is None else st["cv"][s])

    def step(self, rom: Rom, st: dict, inbox: dict, rnd: int) -> dict:
        ph, k = self.sched.at(rnd)
        new = {key: (set(val) if key == "ids" else dict(val)) for key, val in st.items()}
        if ph == "ids":
            new["ids"] = set(inbox.values())
        elif ph == "rank":
            for r, u in enumerate(self._outs(rom, st), 1):
                new["i"][u] = r
                new["j"][u] = inbox[u]
            for r, t in enumerate(self._ins(rom, st), 1):
                new["j"][t] = r
                new["i"][t] = inbox[t]
            # class identifier of an edge = tail ID
            for u in st["ids"]:
                new["cv"][u] = min(u, rom.id)
        elif ph == "fold":
            for t in self._ins(rom, st):
                new["cv"][t] = self._fold(rom, st, t)
            for u in self._outs(rom, st):
                new["cv"][u] = inbox[u]
        elif ph == "recolor":
            for u, c in st["cv"].items():
                if c != k:
                    continue
                if u < rom.id:
                    s = self._succ(rom, st, u)
                    used = {_clip2(None if s is None else st["cv"][s]), inbox[u]}
                else:
                    p = self._pred(rom, st, u)
                    used = {_clip2(None if p is None else st["cv"][p]), inbox[u]}
                new["cv"][u] = min({0, 1, 2} - used)
            if k == 3:
                d = max(self.delta, 1)
                base = self.sched.tail_base
                new["x"] = {u: base + ((new["i"][u] - 1) * d + (new["j"][u] - 1)) * 3 + new["cv"][u]
                            for u in new["cv"]}
        else:
            new["x"] = self._tail_step(rom, st, inbox, k)
        return new

    # tail

    def _final(self, x: int) -> bool:
        s = self.sched
        if s.mode == "ag":
            return x < s.q
        if s.space is None:
            return x == 0
        return s.space.is_final(x)

    def _local_bits(self, st: dict, u: int) -> int:
        s = self.sched
        x = st["x"][u]
        others = [y for w, y in st["x"].items() if w != u]
        if s.mode == "ag":
            return int(any(y % s.q == x % s.q for y in others))
        bb, ab = s.space.blocked(x, others)
        return 2 * int(bb) + int(ab)

    def _tail_send(self, rom: Rom, st: dict) -> dict[int, Msg]:
        s = self.sched
        if s.mode == "3ag" and s.space is None:
            return {}
        w = 1 if s.mode == "ag" else 2
        return {u: Msg(self._local_bits(st, u), w) for u, x in st["x"].items() if not self._final(x)}

    def _tail_step(self, rom: Rom, st: dict, inbox: dict, k: int) -> dict:
        s = self.sched
        if s.mode == "3ag" and s.space is None:
            return {u: 0 for u in st["x"]}
        out = {}
        for u, x in st["x"].items():
            if self._final(x):
                out[u] = x
                continue
            bits = self._local_bits(st, u) | inbox[u]
            if s.mode == "ag":
                out[u] = decode_pair(ag_update(encode_pair(x, s.q), bool(bits)))
            else:
                out[u] = s.space.apply_bits(x, bool(bits & 2), bool(bits & 1))
        return out

    def finished(self, states: dict, rnd: int) -> bool:
        ph, k = self.sched.at(rnd)
        if ph != "tail":
            return False
        if k + 1 >= self.sched.tail_rounds:
            return True
        return all(self._final(x) for st in states.values() for x in st["x"].values())


def edge_colors(graph: Graph, outputs: dict[int, dict]) -> dict[tuple[int, int], Any] | None:
    """Shared edge colors from per-vertex views; None before colors exist.

    Raises EdgeConsistencyError if the two endpoints disagree.
    """
    colors = {}
    for u, v in graph.edges():
        cu, cv = outputs[u].get(v), outputs[v].get(u)
        if cu != cv:
            raise EdgeConsistencyError(f"endpoints of edge {u}-{v} hold {cu!r} and {cv!r}")
        colors[(u, v)] = cu
    if any(c is None for c in colors.values()):
        return None
    return colors


@dataclass
class EdgeResult:
    trace: RunTrace
    schedule: EdgeSchedule
    colors: dict[tuple[int, int], int]

    @property
    def rounds(self) -> int:
        return self.trace.rounds

    @property
    def tail_rounds(self) -> int:
        return self.trace.rounds - self.schedule.pre_rounds

    def bits_per_edge(self) -> dict[tuple[int, int], int]:
        return self.trace.bits_per_edge()


def _edge_run(graph: Graph, mode: str, model: RoundModel | None, known_ids: bool) -> EdgeResult:
    alg = EdgePipeline(graph.n_bound, graph.delta_bound, mode, known_ids)
    total = alg.sched.pre_rounds + alg.sched.tail_rounds
    tr = engine.run(graph, alg, model, max_rounds=total)
    colors = edge_colors(tr.final_graph, tr.final_outputs) or {}
    return EdgeResult(tr, alg.sched, colors)


def edge_ag_run(graph: Graph, model: RoundModel | None = None, known_ids: bool = False) -> EdgeResult:
    """Edge coloring ending with 1-bit AG rounds; palette < q."""
    return _edge_run(graph, "ag", model, known_ids)


def edge_3ag_run(graph: Graph, model: RoundModel | None = None, known_ids: bool = False) -> EdgeResult:
    """Edge coloring ending with 2-bit mixed 3AG / AG(2Δ-1) rounds; palette ⊆ [0, 2Δ-2]."""
    return _edge_run(graph, "3ag", model, known_ids)


def kuhn_2defective_edge(graph: Graph) -> dict[tuple[int, int], tuple[int, int]]:
    """Rank pairs <i,j> per edge (reference computation of the rank stage)."""
    out = {}
    for u, v in graph.edges():
        outs = [w for w in graph.neighbors(u) if w > u]
        ins = [w for w in graph.neighbors(v) if w < v]
        out[(u, v)] = (outs.index(v) + 1, ins.index(u) + 1)
    return out


def cv_edge_stage(graph: Graph, pairs: dict[tuple[int, int], tuple[int, int]]) -> dict[tuple[int, int], tuple[int, int, int]]:
    """Cole-Vishkin per rank class; edge identifier = tail ID."""
    from .linial import LinialError, cole_vishkin_3color
    succ = {}
    at: dict[tuple[int, tuple[int, int]], list[tuple[int, int]]] = {}
    for e, cls in pairs.items():
        for x in e:
            at.setdefault((x, cls), []).append(e)
    for key, es in at.items():
        if len(es) > 2:
            raise LinialError(f"class {key[1]} has {len(es)} edges at vertex {key[0]}")
    for (u, v), cls in pairs.items():
        nxt = [e for e in at[(v, cls)] if e[0] == v]
        succ[(u, v)] = nxt[0] if nxt else None
    ids = {e: e[0] for e in pairs}
    out = {}
    for cls in set(pairs.values()):
        members = {e: ids[e] for e in pairs if pairs[e] == cls}
        colors, _ = cole_vishkin_3color(members, {e: succ[e] for e in members})
        out.update({e: (cls[0], cls[1], colors[e]) for e in members})
    return out
