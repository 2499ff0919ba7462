"""Synchronous round engine.

Each round: due faults are applied, every live vertex emits its messages,
messages are metered against the communication model, and then every vertex
computes its next state from its own RAM and the delivered messages only.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, NamedTuple

from .graph import Graph, TopologyEvent

LOCAL = "LOCAL"
CONGEST = "CONGEST"
BIT_ROUND = "BIT_ROUND"
SET_LOCAL = "SET_LOCAL"


class BandwidthError(RuntimeError):
    def __init__(self, vertex: int, rnd: int, bits: int, allowed: int) -> None:
        super().__init__(f"vertex {vertex} tried to send {bits} bits in round {rnd}; "
                         f"the protocol phase allows {allowed}")
        self.vertex = vertex
        self.round = rnd
        self.bits = bits
        self.allowed = allowed


@dataclass(frozen=True)
class RoundModel:
    kind: str = LOCAL
    word_bits: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in (LOCAL, CONGEST, BIT_ROUND, SET_LOCAL):
            raise ValueError(f"unknown model {self.kind!r}")
        if self.kind == CONGEST and not self.word_bits:
            raise ValueError("CONGEST needs an explicit word size")

    @classmethod
    def parse(cls, text: str) -> "RoundModel":
        t = text.strip().lower()
        if t == "local":
            return cls(LOCAL)
        if t in ("bit", "bit-round", "bit_round"):
            return cls(BIT_ROUND)
        if t in ("set-local", "set_local", "setlocal"):
            return cls(SET_LOCAL)
        if t.startswith("congest"):
            _, _, w = t.partition(":")
            if not w:
                raise ValueError("congest model needs a word size, e.g. congest:32")
            return cls(CONGEST, int(w))
        raise ValueError(f"unknown model {text!r}")

    @classmethod
    def congest_for(cls, n_bound: int, factor: int = 4) -> "RoundModel":
        return cls(CONGEST, factor * max(1, math.ceil(math.log2(max(n_bound, 2)))))

    @property
    def default_phase_bits(self) -> int | None:
        if self.kind == CONGEST:
            return self.word_bits
        if self.kind == BIT_ROUND:
            return 1
        return None

    def __str__(self) -> str:
        if self.kind == CONGEST:
            return f"congest:{self.word_bits}"
        return {LOCAL: "local", BIT_ROUND: "bit", SET_LOCAL: "set-local"}[self.kind]


def serialize_message(bits: int, model: RoundModel) -> list[int]:
    """Split an L-bit payload into the per-engine-round transmissions on one edge."""
    if bits <= 0:
        return []
    if model.kind == BIT_ROUND:
        return [1] * bits
    if model.kind == CONGEST:
        w = model.word_bits
        return [min(w, bits - i) for i in range(0, bits, w)]
    return [bits]


def engine_rounds_for(bits: int, model: RoundModel) -> int:
    return max(1, len(serialize_message(bits, model)))


class Msg(NamedTuple):
    data: Any
    bits: int


@dataclass(frozen=True)
class Rom:
    """Read-only per-vertex data: ID and the global bounds."""
    id: int
    n_bound: int
    delta: int
    ports: tuple[int, ...] = ()


@dataclass(frozen=True)
class FaultEvent:
    round: int
    kind: str  # "corrupt" | "topology"
    target: int | None = None
    value: Any = None
    event: TopologyEvent | None = None

    def sites(self) -> tuple[int, ...]:
        if self.kind == "topology":
            return self.event.sites()
        return (self.target,)

    def describe(self) -> str:
        if self.kind == "topology":
            return f"{self.event.kind}:{self.event.payload}"
        return f"corrupt:{self.target}={self.value!r}"


def corrupt(rnd: int, target: int, value: Any) -> FaultEvent:
    return FaultEvent(rnd, "corrupt", target, value)


def topology(ev: TopologyEvent) -> FaultEvent:
    return FaultEvent(ev.round, "topology", event=ev)


class Algorithm:
    """Base class for per-vertex step functions.

    Subclasses keep no cross-round state outside the returned vertex state;
    ``step`` sees only the vertex's own state and its inbox.
    """
    name = "base"
    uses_ids = False

    def init_state(self, rom: Rom) -> Any:
        raise NotImplementedError

    def send(self, rom: Rom, state: Any, rnd: int) -> Msg | dict[int, Msg] | None:
        raise NotImplementedError

    def step(self, rom: Rom, state: Any, inbox: Any, rnd: int) -> Any:
        raise NotImplementedError

    def phase_bits(self, rnd: int) -> int | None:
        """Payload width both endpoints expect this round (None: model default)."""
        return None

    def output(self, state: Any) -> Any:
        return state

    def corrupt(self, rom: Rom, state: Any, value: Any) -> Any:
        return value

    def finished(self, states: dict[int, Any], rnd: int) -> bool:
        return False


@dataclass
class RoundRecord:
    round: int
    engine_rounds: int
    outputs: dict[int, Any]
    bits: dict[tuple[int, int], int] = field(default_factory=dict)
    events: list[str] = field(default_factory=list)
    states: dict[int, Any] | None = None

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "engine_rounds": self.engine_rounds,
            "outputs": {str(v): _jsonable(o) for v, o in sorted(self.outputs.items())},
            "bits": {f"{u}>{v}": b for (u, v), b in sorted(self.bits.items())},
            "events": self.events,
        }


def _jsonable(x: Any) -> Any:
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (frozenset, set)):
        return sorted(_jsonable(y) for y in x)
    return x


@dataclass
class RunTrace:
    algorithm: str
    model: RoundModel
    records: list[RoundRecord]
    graphs: dict[int, Graph]
    final_states: dict[int, Any]
    fault_rounds: list[int]
    fault_sites: dict[int, list[int]]

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
        keys = [k for k in self.graphs if k <= rnd]
        return self.graphs[max(keys)]

    @property
    def final_graph(self) -> Graph:
        return self.graphs[max(self.graphs)]

    def outputs(self, rnd: int) -> dict[int, Any]:
        return self.records[rnd].outputs

    @property
    def final_outputs(self) -> dict[int, Any]:
        return self.records[-1].outputs

    def bits_per_edge(self) -> dict[tuple[int, int], int]:
        """Total bits over the whole run, both directions summed, per undirected edge."""
        tot: dict[tuple[int, int], int] = {}
        for rec in self.records:
            for (u, v), b in rec.bits.items():
                key = (min(u, v), max(u, v))
                tot[key] = tot.get(key, 0) + b
        return tot

    def bits_per_direction(self) -> dict[tuple[int, int], int]:
        tot: dict[tuple[int, int], int] = {}
        for rec in self.records:
            for e, b in rec.bits.items():
                tot[e] = tot.get(e, 0) + b
        return tot

    def max_bits_per_engine_round(self) -> float:
        """Largest per-direction load of a single engine round (1 in BIT_ROUND)."""
        worst = 0.0
        for rec in self.records[1:]:
            for b in rec.bits.values():
                chunks = serialize_message(b, self.model)
                if chunks:
                    worst = max(worst, max(chunks))
        return worst

    def to_jsonl(self) -> str:
        lines = []
        for rec in self.records:
            d = rec.to_json()
            d["algorithm"] = self.algorithm
            d["model"] = str(self.model)
            g = self.graph_at(rec.round)
            if rec.round in self.fault_sites:
                d["fault_sites"] = self.fault_sites[rec.round]
            if rec.round in self.graphs:
                d["graph"] = {"n_bound": g.n_bound, "delta": g.delta_bound,
                              "vertices": g.vertices, "edges": [list(e) for e in g.edges()]}
            lines.append(json.dumps(d, sort_keys=True))
        return "\n".join(lines) + "\n"


_IMMUTABLE = (int, float, str, bool, type(None), frozenset)


def _isolate(x: Any) -> Any:
    """Copy a message payload so receivers can never alias sender RAM."""
    if isinstance(x, _IMMUTABLE):
        return x
    if isinstance(x, tuple):
        return tuple(_isolate(y) for y in x)
    if isinstance(x, dict):
        return {k: _isolate(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_isolate(y) for y in x]
    if isinstance(x, set):
        return {_isolate(y) for y in x}
    return copy.deepcopy(x)


def _rom(graph: Graph, v: int) -> Rom:
    return Rom(v, graph.n_bound, graph.delta_bound, tuple(graph.neighbors(v)))


def run(graph: Graph, algorithm: Algorithm, model: RoundModel | None = None,
        faults: Iterable[FaultEvent] = (), max_rounds: int = 1000,
        until: Callable[[dict[int, Any], int], bool] | None = None,
        record_states: bool = False,
        initial_states: dict[int, Any] | None = None) -> RunTrace:
    """Run ``algorithm`` synchronously on ``graph``.

    ``until(states, rnd)`` may stop the run early once no faults are pending.
    ``initial_states`` overrides ``init_state`` (used to start from a given RAM).
    """
    model = model or RoundModel()
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    if model.kind == SET_LOCAL and algorithm.uses_ids:
        raise ValueError(f"{algorithm.name} needs sender identities; not runnable in SET-LOCAL")
    script = sorted(faults, key=lambda f: f.round)
    by_round: dict[int, list[FaultEvent]] = {}
    for f in script:
        if f.round < 1:
            raise ValueError("faults are scheduled at rounds >= 1")
        by_round.setdefault(f.round, []).append(f)
    last_fault = max(by_round, default=0)

    roms = {v: _rom(graph, v) for v in graph.vertices}
    if initial_states is not None:
        states = {v: initial_states[v] for v in graph.vertices}
    else:
        states = {v: algorithm.init_state(roms[v]) for v in graph.vertices}
    records = [RoundRecord(0, 0, {v: algorithm.output(s) for v, s in states.items()},
                           states=dict(states) if record_states else None)]
    graphs = {0: graph}
    fault_rounds: list[int] = []
    fault_sites: dict[int, list[int]] = {}

    for rnd in range(1, max_rounds + 1):
        events: list[str] = []
        due = by_round.get(rnd, [])
        if due:
            fault_rounds.append(rnd)
            sites: list[int] = []
            topo = [f for f in due if f.kind == "topology"]
            for f in topo:
                graph = graph.apply(f.event)
                events.append(f.describe())
                sites.extend(f.sites())
            if topo:
                graphs[rnd] = graph
                for v in list(states):
                    if v not in graph:
                        del states[v]
                roms = {v: _rom(graph, v) for v in graph.vertices}
                for v in graph.vertices:
                    if v not in states:
                        states[v] = algorithm.init_state(roms[v])
            for f in due:
                if f.kind == "corrupt":
                    if f.target not in states:
                        raise ValueError(f"corrupt fault targets absent vertex {f.target}")
                    states[f.target] = algorithm.corrupt(roms[f.target], states[f.target], f.value)
                    events.append(f.describe())
                    sites.append(f.target)
            fault_sites[rnd] = sorted(set(sites))

        # message exchange
        declared = algorithm.phase_bits(rnd)
        limit = declared if declared is not None else model.default_phase_bits
        outbox: dict[int, dict[int, Msg]] = {}
        for v in graph.vertices:
            out = algorithm.send(roms[v], states[v], rnd)
            if out is None:
                continue
            if isinstance(out, Msg):
                per = {u: out for u in graph.neighbors(v)}
            else:
                if model.kind == SET_LOCAL:
                    raise ValueError("SET-LOCAL permits broadcast messages only")
                per = {u: m for u, m in out.items() if u in graph.adj[v]}
            for u, m in per.items():
                if limit is not None and m.bits > limit:
                    raise BandwidthError(v, rnd, m.bits, limit)
            outbox[v] = per
        outbox = {v: {u: Msg(_isolate(m.data), m.bits) for u, m in per.items()}
                  for v, per in outbox.items()}
        ledger: dict[tuple[int, int], int] = {}
        widest = 0
        for v, per in outbox.items():
            for u, m in per.items():
                if m.bits:
                    ledger[(v, u)] = m.bits
                widest = max(widest, m.bits)
        phase = declared if declared is not None else widest
        eng = engine_rounds_for(phase, model) if ledger else 1

        new_states = {}
        for v in graph.vertices:
            if model.kind == SET_LOCAL:
                inbox: Any = frozenset(outbox[u][v].data for u in graph.neighbors(v)
                                       if u in outbox and v in outbox[u])
            else:
                inbox = {u: outbox[u][v].data for u in graph.neighbors(v)
                         if u in outbox and v in outbox[u]}
            new_states[v] = algorithm.step(roms[v], states[v], inbox, rnd)
        states = new_states
        records.append(RoundRecord(rnd, eng, {v: algorithm.output(s) for v, s in states.items()},
                                   ledger, events, dict(states) if record_states else None))
        if rnd >= last_fault:
            if algorithm.finished(states, rnd) or (until is not None and until(states, rnd)):
                break

    return RunTrace(algorithm.name, model, records, graphs, states, fault_rounds, fault_sites)
