"""Scenario files: which graph, which algorithm, which model, which faults.

A scenario is a small YAML mapping::

    name: k3-ag
    graph: {kind: complete, n: 3, delta: 2}
    algorithm: ag
    model: local

Errors point at the offending line.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import yaml

from . import engine
from .algebra import is_prime, select_prime
from .edges import EdgePipeline, line_degree
from .engine import FaultEvent, RoundModel, RunTrace, corrupt, topology
from .graph import Graph, GraphError, TopologyEvent, build_graph, load as load_fixture, random_sparse
from .pipelines import (AGPipeline, LinialOnly, Sequence, ThreeAG, arbdefective_algorithm,
                        defective_plan, exact_algorithm, three_ag_budget)
from .selfstab import MIS, SSColoring, SSLine, SSMis, random_fault_script


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


GRAPH_KINDS = ("path", "cycle", "complete", "random-capped", "random-sparse")
TOP_KEYS = {"name", "graph", "algorithm", "model", "params", "rounds", "faults", "known_ids", "seed"}
GRAPH_KEYS = {"kind", "n", "delta", "seed", "n_bound", "density", "file"}


@dataclass
class Scenario:
    name: str
    graph: dict
    algorithm: str
    model: str = "local"
    params: dict = field(default_factory=dict)
    rounds: int | None = None
    faults: Any = None
    known_ids: bool = False
    seed: int = 0
    base: Path | None = None
    lines: dict = field(default_factory=dict, repr=False)

    def line(self, *path: str) -> int | None:
        while path:
            if path in self.lines:
                return self.lines[path]
            path = path[:-1]
        return self.lines.get(())


# YAML with line numbers


def _plain(node: yaml.Node, path: tuple, lines: dict, loader: yaml.SafeLoader) -> Any:
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = loader.construct_object(k, deep=True)
            if isinstance(key, (list, dict)):
                raise ScenarioError("mapping keys must be scalars", k.start_mark.line + 1)
            if key in out:
                raise ScenarioError(f"duplicate key {key!r}", k.start_mark.line + 1)
            out[key] = _plain(v, path + (str(key),), lines, loader)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_plain(v, path + (str(i),), lines, loader) for i, v in enumerate(node.value)]
    return loader.construct_object(node, deep=True)


def parse_scenario(text: str, base: Path | None = None) -> Scenario:
    loader = yaml.SafeLoader(text)
    lines: dict = {}
    try:
        root = loader.get_single_node()
        if root is None:
            raise ScenarioError("empty scenario", 1)
        data = _plain(root, (), lines, loader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ScenarioError(f"unparseable scenario: {getattr(e, 'problem', None) or e}",
                            mark.line + 1 if mark else None) from None
    finally:
        loader.dispose()
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping", lines[()])
    unknown = sorted(set(data) - TOP_KEYS, key=str)
    if unknown:
        raise ScenarioError(f"unknown key {unknown[0]!r}", lines[(str(unknown[0]),)])
    for key in ("graph", "algorithm"):
        if key not in data:
            raise ScenarioError(f"missing required key {key!r}", lines[()])
    g = data["graph"]
    if not isinstance(g, dict):
        raise ScenarioError("graph must be a mapping", lines[("graph",)])
    bad = sorted(set(g) - GRAPH_KEYS, key=str)
    if bad:
        raise ScenarioError(f"unknown graph key {bad[0]!r}", lines[("graph", str(bad[0]))])
    sc = Scenario(
        name=str(data.get("name", "scenario")),
        graph=g,
        algorithm=str(data["algorithm"]),
        model=str(data.get("model", "local")),
        params=data.get("params") or {},
        rounds=data.get("rounds"),
        faults=data.get("faults"),
        known_ids=bool(data.get("known_ids", False)),
        seed=data.get("seed", 0),
        base=base,
        lines=lines,
    )
    if sc.algorithm not in ALGORITHMS:
        raise ScenarioError(f"unknown algorithm {sc.algorithm!r}; choose from {', '.join(ALGORITHMS)}",
                            sc.line("algorithm"))
    if not isinstance(sc.params, dict):
        raise ScenarioError("params must be a mapping", sc.line("params"))
    if not isinstance(sc.seed, int):
        raise ScenarioError("seed must be an integer", sc.line("seed"))
    if sc.rounds is not None and (not isinstance(sc.rounds, int) or sc.rounds < 1):
        raise ScenarioError("rounds must be a positive integer", sc.line("rounds"))
    try:
        RoundModel.parse(sc.model)
    except ValueError as e:
        raise ScenarioError(str(e), sc.line("model")) from None
    return sc


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ScenarioError(f"cannot read scenario {p}: {e.strerror}") from None
    return parse_scenario(text, p.parent)


# graphs and faults


def _int(sc: Scenario, value: Any, *path: str, lo: int = 0) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < lo:
        raise ScenarioError(f"{'.'.join(path)} must be an integer >= {lo}", sc.line(*path))
    return value


def scenario_graph(sc: Scenario) -> Graph:
    g = sc.graph
    try:
        if "file" in g:
            path = Path(str(g["file"]))
            if not path.is_absolute() and sc.base is not None:
                path = sc.base / path
            return load_fixture(path)
        kind = g.get("kind")
        if kind not in GRAPH_KINDS:
            raise ScenarioError(f"graph.kind must be one of {', '.join(GRAPH_KINDS)} (or give graph.file)",
                                sc.line("graph", "kind"))
        n = _int(sc, g.get("n"), "graph", "n", lo=1)
        default_delta = {"path": min(2, n - 1), "cycle": min(2, n - 1), "complete": n - 1}
        delta = g.get("delta", default_delta.get(kind))
        delta = _int(sc, delta, "graph", "delta")
        seed = _int(sc, g.get("seed", sc.seed), "graph", "seed")
        n_bound = g.get("n_bound")
        if n_bound is not None:
            n_bound = _int(sc, n_bound, "graph", "n_bound", lo=n)
        if kind == "random-sparse":
            return random_sparse(n, delta, seed, float(g.get("density", 0.5)), n_bound)
        graph = build_graph(kind, n, delta, seed, n_bound)
        if max((graph.degree(v) for v in graph.vertices), default=0) > delta:
            raise ScenarioError(f"a {kind} graph on {n} vertices exceeds delta={delta}",
                                sc.line("graph", "delta"))
        return graph
    except (GraphError, OSError) as e:
        raise ScenarioError(f"bad graph: {e}", sc.line("graph")) from None


def scenario_faults(sc: Scenario, graph: Graph, alg) -> list[FaultEvent]:
    f = sc.faults
    if not f:
        return []
    if not sc.algorithm.startswith("ss-"):
        raise ScenarioError(f"faults are only meaningful for self-stabilizing algorithms, not {sc.algorithm}",
                            sc.line("faults"))
    if isinstance(f, dict):
        r = f.get("random")
        if set(f) != {"random"} or not isinstance(r, dict):
            raise ScenarioError("faults must be a list of events or {random: {...}}", sc.line("faults"))
        rng = random.Random(_int(sc, r.get("seed", sc.seed), "faults", "random", "seed"))
        count = _int(sc, r.get("count", 1), "faults", "random", "count", lo=1)
        first = _int(sc, r.get("first", 1), "faults", "random", "first", lo=1)
        last = _int(sc, r.get("last", first), "faults", "random", "last", lo=first)
        churn = float(r.get("churn", 0.0))
        sites = r.get("sites")
        return random_fault_script(graph, alg, rng, count, first, last, churn, sites)
    if not isinstance(f, list):
        raise ScenarioError("faults must be a list of events or {random: {...}}", sc.line("faults"))
    out = []
    for i, ev in enumerate(f):
        where = sc.line("faults", str(i))
        if not isinstance(ev, dict) or "round" not in ev:
            raise ScenarioError("fault event needs a round", where)
        rnd = _int(sc, ev["round"], "faults", str(i), "round", lo=1)
        if "corrupt" in ev:
            value = ev.get("value")
            if isinstance(value, list):
                value = tuple(value)
            if isinstance(value, dict):
                value = {int(k): tuple(x) if isinstance(x, list) else x for k, x in value.items()}
            out.append(corrupt(rnd, _int(sc, ev["corrupt"], "faults", str(i), "corrupt"), value))
        elif "topology" in ev:
            payload = ev.get("payload")
            payload = tuple(payload) if isinstance(payload, list) else payload
            try:
                out.append(topology(TopologyEvent(rnd, str(ev["topology"]), payload)))
            except GraphError as e:
                raise ScenarioError(str(e), where) from None
        else:
            raise ScenarioError("fault event needs 'corrupt' or 'topology'", where)
    return out


# algorithm registry


@dataclass
class Prepared:
    """An algorithm ready to run plus what the verifier should check."""
    algorithm: Any
    max_rounds: int
    header: dict
    initial: dict | None = None


def _p(sc: Scenario, name: str, default: Any) -> Any:
    return sc.params.get(name, default)


def _ag(sc, g, compact=False):
    alg = AGPipeline(g.n_bound, g.delta_bound, compact)
    return Prepared(alg, max(1, alg.sched.total), {
        "problem": "coloring", "proper_every_round": True,
        "palette_max": g.delta_bound + 1, "rounds_max": alg.sched.total,
        "q": alg.sched.q})


def _three_ag(sc, g):
    d = g.delta_bound
    eps = _p(sc, "epsilon", None)
    p = _p(sc, "p", None)
    if p is None:
        lo = 2 * d + 2 if eps is None else math.ceil((1 + eps) * d) + 1
        p = select_prime(max(lo, 2))
        while p ** 3 < g.n_bound:
            p = select_prime(p + 1)
    if not isinstance(p, int) or not is_prime(p):
        raise ScenarioError("params.p must be a prime", sc.line("params", "p"))
    try:
        budget = three_ag_budget(p, d, eps)
    except ValueError as e:
        raise ScenarioError(str(e), sc.line("params")) from None
    if p ** 3 < g.n_bound:
        raise ScenarioError("params.p too small: IDs need p^3 >= n", sc.line("params", "p"))
    return Prepared(ThreeAG(p, budget), budget, {
        "problem": "coloring", "proper_every_round": True, "palette_max": p,
        "rounds_max": budget, "p": p}, initial={v: v for v in g.vertices})


def _exact(sc, g):
    alg, space, lin = exact_algorithm(g.n_bound, g.delta_bound)
    total = alg.total if isinstance(alg, Sequence) else 1
    return Prepared(alg, total, {"problem": "coloring", "proper_every_round": True,
                                 "palette_max": g.delta_bound + 1, "rounds_max": total})


def _defective(sc, g):
    p = _int(sc, _p(sc, "p", max(1, math.isqrt(max(g.delta_bound, 1)))), "params", "p", lo=1)
    plan = defective_plan(g.n_bound, g.delta_bound, p)
    header = {"problem": "defective", "proper_every_round": False,
              "defect_max": plan.defect_bound, "rounds_max": len(plan.steps), "p": p}
    if plan.zero or not plan.steps:
        header["palette_max"] = 1 if plan.zero else g.n_bound
        first = (lambda rom: 0) if plan.zero else (lambda rom: rom.id)
        alg = Sequence("defective", first, [(_Idle(), 1, None)])
        header["rounds_max"] = 1
        return Prepared(alg, 1, header)
    header["palette_max"] = plan.palette
    return Prepared(LinialOnly(list(plan.steps)), len(plan.steps), header)


class _Idle(engine.Algorithm):
    name = "idle"

    def send(self, rom, state, rnd):
        return None

    def step(self, rom, state, inbox, rnd):
        return state

    def finished(self, states, rnd):
        return True


def _arbdefective(sc, g):
    d = g.delta_bound
    p = _int(sc, _p(sc, "p", max(1, math.isqrt(max(d, 1)))), "params", "p", lo=1)
    try:
        seq, loop, plan = arbdefective_algorithm(g.n_bound, d, p)
    except ValueError as e:
        raise ScenarioError(str(e), sc.line("params", "p")) from None
    return Prepared(seq, seq.total, {"problem": "arbdefective", "proper_every_round": False,
                                     "rounds_max": seq.total, "p": p, "q": loop.q,
                                     "loop_rounds": loop.rounds})


def _edge(sc, g, mode):
    alg = EdgePipeline(g.n_bound, g.delta_bound, mode, sc.known_ids)
    total = alg.sched.pre_rounds + alg.sched.tail_rounds
    pal = 2 * g.delta_bound - 1 if mode == "3ag" else alg.sched.q
    return Prepared(alg, total, {"problem": "edge-coloring", "proper_every_round": True,
                                 "palette_max": max(pal, 1), "rounds_max": total})


def _ss(sc, g, kind):
    d = g.delta_bound
    if kind in ("ss-coloring", "ss-exact"):
        alg = SSColoring(g.n_bound, d, exact=kind == "ss-exact")
        header = {"problem": "coloring", "radius_max": 1}
    elif kind in ("ss-mis", "ss-mis-mu"):
        variant = "mu" if kind == "ss-mis-mu" else "status"
        alg = SSMis(g.n_bound, d, variant)
        header = {"problem": "mis", "mis_flag": MIS if variant == "status" else 1}
        if variant == "status":
            header["radius_max"] = 2
    else:
        alg = SSLine(g.n_bound, d, "edge-color" if kind == "ss-edge" else "mm")
        header = {"problem": "edge-coloring" if kind == "ss-edge" else "mm",
                  "radius_max": 2 if kind == "ss-edge" else 3}
    params = alg.params
    # resets and Linial steps keep the coloring proper through every fault
    header["proper_every_round"] = header["problem"] != "mm"
    if header["problem"] in ("coloring", "edge-coloring"):
        if params.table is None:
            header["final_max"] = 1
        elif params.exact:
            header["final_max"] = params.space.n
        else:
            header["final_max"] = params.q
        header["stab_max"] = params.stabilization_bound
        header["interval_count"] = params.table.r if params.table else 0
        header["q"] = params.q if params.table else 1
    if kind == "ss-edge":
        header["palette_max"] = max(1, 2 * d - 1)
    if kind == "ss-exact":
        header["palette_max"] = d + 1
    stab = params.stabilization_bound
    q = params.q if params.table is not None else 1
    rounds = 2 * stab + (3 * q if header["problem"] in ("mis", "mm") else 0) + 10
    return alg, header, rounds


ALGORITHMS: dict[str, Callable] = {
    "ag": lambda sc, g: _ag(sc, g),
    "ag-compact": lambda sc, g: _ag(sc, g, compact=True),
    "three-ag": _three_ag,
    "exact": _exact,
    "defective": _defective,
    "arbdefective": _arbdefective,
    "edge-ag": lambda sc, g: _edge(sc, g, "ag"),
    "edge-3ag": lambda sc, g: _edge(sc, g, "3ag"),
    "ss-coloring": None,
    "ss-exact": None,
    "ss-mis": None,
    "ss-mis-mu": None,
    "ss-mm": None,
    "ss-edge": None,
}


def prepare(sc: Scenario, graph: Graph) -> tuple[Prepared, list[FaultEvent]]:
    if sc.algorithm.startswith("ss-"):
        alg, header, rounds = _ss(sc, graph, sc.algorithm)
        faults = scenario_faults(sc, graph, alg)
        last = max((f.round for f in faults), default=0)
        prep = Prepared(alg, sc.rounds or last + rounds, header)
        return prep, faults
    scenario_faults(sc, graph, None)
    return ALGORITHMS[sc.algorithm](sc, graph), []


@dataclass
class Outcome:
    scenario: Scenario
    graph: Graph
    trace: RunTrace
    header: dict


def run_scenario(sc: Scenario, model: str | None = None, seed: int | None = None,
                 known_ids: bool | None = None) -> Outcome:
    """Build, run and describe one scenario. CLI flags override the file."""
    if seed is not None or known_ids is not None:
        sc = replace(sc, seed=sc.seed if seed is None else seed,
                     known_ids=sc.known_ids if known_ids is None else known_ids)
    try:
        rm = RoundModel.parse(model or sc.model)
    except ValueError as e:
        raise ScenarioError(str(e), sc.line("model")) from None
    graph = scenario_graph(sc)
    prep, faults = prepare(sc, graph)
    max_rounds = sc.rounds or prep.max_rounds
    try:
        trace = engine.run(graph, prep.algorithm, rm, faults, max_rounds=max_rounds,
                           initial_states=prep.initial)
    except (ValueError, GraphError) as e:
        raise ScenarioError(f"cannot run {sc.algorithm}: {e}") from None
    header = dict(prep.header)
    header.update({"scenario": sc.name, "algorithm": sc.algorithm, "model": str(rm),
                   "n": len(graph.vertices), "n_bound": graph.n_bound,
                   "delta": graph.delta_bound, "seed": sc.seed, "known_ids": sc.known_ids})
    if sc.algorithm.startswith("edge-"):
        header["line_delta"] = line_degree(graph.delta_bound)
    return Outcome(sc, graph, trace, header)
