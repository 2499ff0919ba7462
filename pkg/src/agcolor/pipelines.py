"""Static locally-iterative pipelines: AG coloring with Linial front end and
standard reduction, defective and arbdefective coloring, 3AG, and the exact
(Delta+1) scheme that mixes 3AG(p) with AG(N)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from . import engine
from .algebra import (ColorPair, ColorTriple, agn_update, ag_modulus, ag_update,
                      arb_update, ceil_sqrt, decode_pair, decode_triple, encode_pair,
                      encode_triple, is_prime, select_prime, three_ag_update, b_blocks)
from .engine import Algorithm, Msg, Rom, RoundModel, RunTrace
from .graph import Graph
from .linial import LinialParams, linial_params, linial_step, reduction_schedule


def bits_for(palette: int) -> int:
    return max(1, math.ceil(math.log2(max(palette, 2))))


def _values(inbox: Any) -> Iterable:
    return inbox.values() if isinstance(inbox, dict) else inbox


# standard reduction


def reduction_step(color: int, neighbor_colors: Iterable[int], top: int) -> int:
    """Vertices of color ``top`` take the smallest color absent around them."""
    if color != top:
        return color
    used = set(neighbor_colors)
    c = 0
    while c in used:
        c += 1
    return c


def standard_reduction(graph: Graph, coloring: dict[int, int],
                       alpha: int | None = None) -> tuple[dict[int, int], int]:
    """Reduce a proper alpha-coloring to delta+1 colors in alpha-(delta+1) rounds."""
    for u, v in graph.edges():
        if coloring[u] == coloring[v]:
            raise ValueError(f"standard_reduction input not proper on edge {u}-{v}")
    if alpha is None:
        alpha = max(coloring.values(), default=-1) + 1
    target = graph.delta_bound + 1
    colors = dict(coloring)
    rounds = 0
    for top in range(alpha - 1, target - 1, -1):
        colors = {v: reduction_step(colors[v], (colors[u] for u in graph.neighbors(v)), top)
                  for v in graph.vertices}
        rounds += 1
    return colors, rounds


# AG pipeline


@dataclass(frozen=True)
class AGSchedule:
    delta: int
    linial: tuple[LinialParams, ...]
    palette: int  # colors entering the AG phase
    q: int

    @property
    def linial_rounds(self) -> int:
        return len(self.linial)

    @property
    def ag_rounds(self) -> int:
        return self.q

    @property
    def reduction_rounds(self) -> int:
        return max(0, self.q - (self.delta + 1))

    @property
    def total(self) -> int:
        return self.linial_rounds + self.ag_rounds + self.reduction_rounds

    def phase(self, rnd: int) -> tuple[str, int]:
        """(phase name, 0-based index within the phase) for engine round ``rnd``."""
        i = rnd - 1
        if i < self.linial_rounds:
            return "linial", i
        i -= self.linial_rounds
        if i < self.ag_rounds:
            return "ag", i
        i -= self.ag_rounds
        return "reduce", i


def ag_schedule(n_bound: int, delta: int) -> AGSchedule:
    steps = tuple(reduction_schedule(n_bound, delta))
    palette = steps[-1].target if steps else n_bound
    return AGSchedule(delta, steps, palette, ag_modulus(delta, palette))


class AGPipeline(Algorithm):
    """Linial rounds, then AG rounds, then standard reduction to delta+1 colors.

    With ``compact=True`` the AG phase sends one bit per edge direction per
    round ("final" / "moved") after a single full-color exchange; receivers
    track neighbor colors from those bits. That variant needs port identities.
    """
    name = "ag"

    def __init__(self, n_bound: int, delta: int, compact: bool = False) -> None:
        self.sched = ag_schedule(n_bound, delta)
        self.compact = compact
        self.uses_ids = compact

    def init_state(self, rom: Rom) -> Any:
        return (rom.id, None) if self.compact else rom.id

    def _color(self, state: Any) -> int:
        return state[0] if self.compact else state

    def output(self, state: Any) -> int:
        return self._color(state)

    def phase_bits(self, rnd: int) -> int | None:
        ph, i = self.sched.phase(rnd)
        if ph == "linial":
            return bits_for(self.sched.linial[i].m)
        if ph == "ag":
            if self.compact and i > 0:
                return 1
            return bits_for(self.sched.q ** 2)
        return bits_for(self.sched.q)

    def send(self, rom: Rom, state: Any, rnd: int) -> Msg:
        ph, i = self.sched.phase(rnd)
        color = self._color(state)
        width = self.phase_bits(rnd)
        if self.compact and ph == "ag" and i > 0:
            return Msg(1 if color < self.sched.q else 0, 1)
        return Msg(color, width)

    def step(self, rom: Rom, state: Any, inbox: Any, rnd: int) -> Any:
        ph, i = self.sched.phase(rnd)
        s = self.sched
        if not self.compact:
            nbrs = set(_values(inbox))
            return self._next(ph, i, state, nbrs)
        color, cache = state
        if ph == "ag":
            if i == 0:
                cache = dict(inbox)
            else:
                cache = {u: decode_pair(ag_update(encode_pair(c, s.q), inbox[u] == 0))
                         for u, c in cache.items() if u in inbox}
            # cache now holds neighbors' colors at the start of this round
            nxt = self._next(ph, i, color, set(cache.values()))
            return (nxt, cache)
        return (self._next(ph, i, color, set(_values(inbox))), None)

    def _next(self, ph: str, i: int, color: int, nbrs: set[int]) -> int:
        s = self.sched
        if ph == "linial":
            return linial_step(color, nbrs, (), s.linial[i])
        if ph == "ag":
            mine = encode_pair(color, s.q)
            conflicted = any(c % s.q == mine.b for c in nbrs)
            return decode_pair(ag_update(mine, conflicted))
        return reduction_step(color, nbrs, s.q - 1 - i)

    def finished(self, states: dict, rnd: int) -> bool:
        return rnd >= self.sched.total


def ag_run(graph: Graph, model: RoundModel | None = None, compact: bool = False,
           faults: Iterable = ()) -> RunTrace:
    alg = AGPipeline(graph.n_bound, graph.delta_bound, compact)
    return engine.run(graph, alg, model, faults, max_rounds=max(1, alg.sched.total))


class AGOnly(Algorithm):
    """Plain AG(q) rounds on a given proper coloring in [0, q^2)."""
    name = "ag-only"

    def __init__(self, q: int, rounds: int) -> None:
        self.q = q
        self.rounds = rounds

    def init_state(self, rom: Rom) -> int:
        raise ValueError("AGOnly needs initial_states")

    def send(self, rom, state, rnd):
        return Msg(state, bits_for(self.q ** 2))

    def step(self, rom, state, inbox, rnd):
        mine = encode_pair(state, self.q)
        conflicted = any(c % self.q == mine.b for c in _values(inbox))
        return decode_pair(ag_update(mine, conflicted))

    def finished(self, states, rnd):
        return rnd >= self.rounds or all(c < self.q for c in states.values())


def ag_from_coloring(graph: Graph, coloring: dict[int, int], model: RoundModel | None = None,
                     q: int | None = None) -> tuple[RunTrace, int]:
    """Run AG from an arbitrary proper k-coloring; q defaults to the smallest
    prime with q > 2*delta and q^2 >= k. Stops once every vertex is final."""
    k = max(coloring.values(), default=0) + 1
    q = q or ag_modulus(graph.delta_bound, k)
    alg = AGOnly(q, 4 * q)
    return engine.run(graph, alg, model, max_rounds=4 * q, initial_states=coloring), q


# 3AG


class ThreeAG(Algorithm):
    name = "3ag"

    def __init__(self, p: int, budget: int) -> None:
        if not is_prime(p):
            raise ValueError(f"3AG modulus {p} must be prime")
        self.p = p
        self.budget = budget

    def init_state(self, rom: Rom) -> int:
        raise ValueError("ThreeAG needs initial_states")

    def send(self, rom, state, rnd):
        return Msg(state, bits_for(self.p ** 3))

    def step(self, rom, state, inbox, rnd):
        t = encode_triple(state, self.p)
        nbrs = [encode_triple(c, self.p) for c in _values(inbox)]
        b_conf = any(b_blocks(t, u) for u in nbrs)
        a_conf = any(u.a == t.a for u in nbrs)
        return decode_triple(three_ag_update(t, b_conf, a_conf, False))

    def finished(self, states, rnd):
        return rnd >= self.budget or all(c < self.p for c in states.values())


def three_ag_budget(p: int, delta: int, epsilon: float | None = None) -> int:
    if epsilon is None:
        if p < 2 * delta + 2:
            raise ValueError("plain 3AG needs p >= 2*delta+2")
        return 2 * p
    if not 0 < epsilon <= 1 or p < (1 + epsilon) * delta:
        raise ValueError("epsilon mode needs 0 < eps <= 1 and p >= (1+eps)*delta")
    return 2 * (1 + math.ceil(1 / epsilon)) * p


def three_ag_run(graph: Graph, p: int, epsilon: float | None = None,
                 initial: dict[int, int] | None = None,
                 model: RoundModel | None = None) -> RunTrace:
    """Run 3AG(p) from a proper coloring with colors < p^3 (IDs by default)."""
    budget = three_ag_budget(p, graph.delta_bound, epsilon)
    initial = {v: v for v in graph.vertices} if initial is None else initial
    if any(c >= p ** 3 for c in initial.values()):
        raise ValueError("initial palette exceeds p^3")
    return engine.run(graph, ThreeAG(p, budget), model, max_rounds=budget,
                      initial_states=initial)


# exact (Delta+1): 3AG(p) for high colors mixed with AG(N) for low colors


class ExactSpace:
    """Color space of the exact scheme.

    Values below 2N are AG(N) pairs <flag, residue> (flag*N + residue); values
    from 2N upward are 3AG(p) triples with index in [p, p^3). A triple that
    reaches <0,0,a> becomes the low value a.

    ``hold="strict"`` keeps a high vertex from finalizing while any low
    neighbor is working. ``hold="targeted"`` only does so when the value it
    would take is one of that neighbor's possible next values, which is all
    properness needs and converges much faster.
    """

    def __init__(self, delta: int, palette: int, epsilon: float = 0.5,
                 hold: str = "strict") -> None:
        if delta < 1:
            raise ValueError("exact scheme needs delta >= 1")
        if hold not in ("strict", "targeted"):
            raise ValueError(f"unknown hold rule {hold!r}")
        self.hold_rule = hold
        self.delta = delta
        self.n = delta + 1
        p = select_prime(math.ceil((1 + epsilon) * delta) + 1)
        while 2 * self.n + p ** 3 - p < palette:
            p = select_prime(p + 1)
        self.p = p
        self.size = 2 * self.n + p ** 3 - p

    def __repr__(self) -> str:
        return (f"ExactSpace(delta={self.delta}, N={self.n}, p={self.p}, size={self.size}, "
                f"hold={self.hold_rule})")

    def is_low(self, x: int) -> bool:
        return x < 2 * self.n

    def is_final(self, x: int) -> bool:
        return x < self.n

    def triple(self, x: int) -> ColorTriple:
        return encode_triple(x - 2 * self.n + self.p, self.p)

    def from_triple(self, t: ColorTriple) -> int:
        if t.c == 0 and t.b == 0:
            return t.a
        return decode_triple(t) - self.p + 2 * self.n

    def view(self, x: int) -> ColorTriple | None:
        """How a high vertex sees a neighbor: high triples as-is, final lows as
        <0,0,value>, working lows not at all."""
        if not self.is_low(x):
            return self.triple(x)
        if self.is_final(x):
            return ColorTriple(0, 0, x, self.p) if x < self.p else None
        return None

    def step(self, x: int, nbrs: Iterable[int]) -> int:
        nbrs = list(nbrs)
        n = self.n
        if self.is_low(x):
            conflicted = any(self.is_low(u) and u % n == x % n for u in nbrs)
            nxt = agn_update(ColorPair(x // n, x % n, n), conflicted, False, n)
            return nxt.a * n + nxt.b
        t = self.triple(x)
        hold = self.held(t, nbrs) or t.a >= 2 * n
        views = [w for w in (self.view(u) for u in nbrs) if w is not None]
        b_conf = any(b_blocks(t, w) for w in views)
        a_conf = any(w.a == t.a for w in views)
        return self.from_triple(three_ag_update(t, b_conf, a_conf, hold))

    def held(self, t: ColorTriple, nbrs: list[int]) -> bool:
        working = [u for u in nbrs if self.is_low(u) and not self.is_final(u)]
        if self.hold_rule == "strict":
            return bool(working)
        return any(t.a in self.successors(u) for u in working)

    def blocked(self, x: int, nbrs: Iterable[int]) -> tuple[bool, bool]:
        """Local (b-block, a-block) test bits; OR-ing both endpoints' bits
        reproduces ``step`` on a line graph."""
        nbrs = list(nbrs)
        n = self.n
        if self.is_low(x):
            c = any(self.is_low(u) and u % n == x % n for u in nbrs)
            return c, c
        t = self.triple(x)
        hold = self.held(t, nbrs)
        views = [w for w in (self.view(u) for u in nbrs) if w is not None]
        b_conf = any(b_blocks(t, w) for w in views)
        a_conf = any(w.a == t.a for w in views)
        return (b_conf or (hold and t.b == 0)), (a_conf or hold)

    def apply_bits(self, x: int, b_block: bool, a_block: bool) -> int:
        n = self.n
        if self.is_low(x):
            nxt = agn_update(ColorPair(x // n, x % n, n), b_block, False, n)
            return nxt.a * n + nxt.b
        t = self.triple(x)
        force = t.a >= 2 * n
        return self.from_triple(three_ag_update(t, b_block, a_block, force))

    def successors(self, x: int) -> set[int]:
        n = self.n
        if self.is_low(x):
            if self.is_final(x):
                return {x}
            return {x % n, n + (x + 1) % n}
        t = self.triple(x)
        c, b, a, p = t.c, t.b, t.a, t.p
        if c != 0:
            opts = [ColorTriple(0, b, a, p), ColorTriple(c, (b + c) % p, a, p)]
        else:
            opts = [ColorTriple(0, 0, a, p), ColorTriple(0, b, (a + b) % p, p)]
        return {self.from_triple(o) for o in opts}


class Sequence(Algorithm):
    """Stages run back to back on a fixed schedule.

    ``stages`` is a list of (algorithm, rounds, bridge); ``bridge`` (or the
    identity) turns the state reached so far into the stage's first state.
    The last stage may stop early through its own ``finished``.
    """

    def __init__(self, name: str, first: Callable[[Rom], Any],
                 stages: list[tuple[Algorithm, int, Callable | None]]) -> None:
        self.name = name
        self.first = first
        kept: list[tuple[Algorithm, int, Callable | None]] = []
        pending: list[Callable] = []
        for alg, rounds, bridge in stages:
            if bridge is not None:
                pending.append(bridge)
            if rounds > 0:
                kept.append((alg, rounds, _compose(pending)))
                pending = []
        if not kept:
            raise ValueError("Sequence needs a stage with at least one round")
        self.stages = kept
        self.starts = []
        t = 0
        for _, rounds, _ in kept:
            self.starts.append(t)
            t += rounds
        self.total = t
        self.uses_ids = any(a.uses_ids for a, _, _ in kept)

    def locate(self, rnd: int) -> tuple[int, int]:
        k = max(i for i, s in enumerate(self.starts) if s < rnd) if rnd > 0 else 0
        return k, rnd - self.starts[k]

    def init_state(self, rom):
        return (0, self.stages[0][2](self.first(rom)))

    def phase_bits(self, rnd):
        k, local = self.locate(rnd)
        return self.stages[k][0].phase_bits(local)

    def send(self, rom, state, rnd):
        k, local = self.locate(rnd)
        return self.stages[k][0].send(rom, state[1], local)

    def step(self, rom, state, inbox, rnd):
        k, local = self.locate(rnd)
        alg, rounds, _ = self.stages[k]
        inner = alg.step(rom, state[1], inbox, local)
        if local == rounds and k + 1 < len(self.stages):
            return (k + 1, self.stages[k + 1][2](inner))
        return (k, inner)

    def output(self, state):
        return self.stages[state[0]][0].output(state[1])

    def finished(self, states, rnd):
        k, local = self.locate(rnd)
        alg, rounds, _ = self.stages[k]
        if k + 1 < len(self.stages):
            return False
        return local >= rounds or alg.finished({v: s[1] for v, s in states.items()}, local)


def _compose(fns: list[Callable]) -> Callable:
    def run_all(x):
        for f in fns:
            x = f(x)
        return x
    return run_all


class ExactStage(Algorithm):
    name = "exact"

    def __init__(self, space: ExactSpace, budget: int) -> None:
        self.space = space
        self.budget = budget

    def init_state(self, rom):
        raise ValueError("ExactStage needs initial_states")

    def send(self, rom, state, rnd):
        return Msg(state, bits_for(self.space.size))

    def step(self, rom, state, inbox, rnd):
        return self.space.step(state, _values(inbox))

    def finished(self, states, rnd):
        return rnd >= self.budget or all(self.space.is_final(c) for c in states.values())


class ZeroStage(Algorithm):
    """Degree bound 0: every vertex takes color 0 in one silent round."""
    name = "zero"

    def init_state(self, rom):
        return 0

    def send(self, rom, state, rnd):
        return None

    def step(self, rom, state, inbox, rnd):
        return 0

    def finished(self, states, rnd):
        return True


class LinialOnly(Algorithm):
    """Fixed list of Linial steps (proper or defect-tolerant) from IDs."""
    name = "linial"

    def __init__(self, steps: list[LinialParams]) -> None:
        self.steps = steps

    def init_state(self, rom):
        return rom.id

    def phase_bits(self, rnd):
        return bits_for(self.steps[rnd - 1].m)

    def send(self, rom, state, rnd):
        return Msg(state, bits_for(self.steps[rnd - 1].m))

    def step(self, rom, state, inbox, rnd):
        return linial_step(state, set(_values(inbox)), (), self.steps[rnd - 1])

    def finished(self, states, rnd):
        return rnd >= len(self.steps)


@dataclass
class ExactResult:
    coloring: dict[int, int]
    space: ExactSpace | None
    trace: RunTrace
    linial_rounds: int = 0

    @property
    def rounds(self) -> int:
        return self.trace.rounds


def exact_budget(space: ExactSpace) -> int:
    return 12 * (space.p + space.n) + 20


def exact_algorithm(n_bound: int, delta: int) -> tuple[Algorithm, ExactSpace | None, int]:
    """(algorithm, color space, Linial rounds) for the full exact pipeline."""
    if delta == 0:
        return ZeroStage(), None, 0
    steps = reduction_schedule(n_bound, delta)
    palette = steps[-1].target if steps else n_bound
    space = ExactSpace(delta, palette)
    budget = exact_budget(space)
    seq = Sequence("exact", lambda rom: rom.id,
                   [(LinialOnly(steps), len(steps), None), (ExactStage(space, budget), budget, None)])
    return seq, space, len(steps)


def exact_delta_plus_one(graph: Graph, model: RoundModel | None = None,
                         initial: dict[int, int] | None = None) -> ExactResult:
    """Proper (delta+1)-coloring without standard reduction.

    From IDs by default (Linial rounds first); ``initial`` starts the mixed
    stage directly from a given proper coloring.
    """
    delta = graph.delta_bound
    if initial is not None and delta > 0:
        space = ExactSpace(delta, max(initial.values(), default=0) + 1)
        budget = exact_budget(space)
        tr = engine.run(graph, ExactStage(space, budget), model, max_rounds=budget,
                        initial_states=initial)
        return ExactResult(dict(tr.final_outputs), space, tr)
    alg, space, lin = exact_algorithm(graph.n_bound, delta)
    total = alg.total if isinstance(alg, Sequence) else 1
    tr = engine.run(graph, alg, model, max_rounds=total)
    return ExactResult(dict(tr.final_outputs), space, tr, lin)


# defective and arbdefective coloring


@dataclass(frozen=True)
class DefectivePlan:
    steps: tuple[LinialParams, ...]
    zero: bool  # p >= delta: one class, no rounds
    defect_bound: int

    @property
    def palette(self) -> int | None:
        if self.zero:
            return 1
        return self.steps[-1].target if self.steps else None


def defective_plan(n_bound: int, delta: int, p: int) -> DefectivePlan:
    """Proper Linial steps to O(delta^2), then one step accepting a point where
    at most p-1 neighbor polynomials agree (defect <= p-1)."""
    if p < 1:
        raise ValueError("defective coloring needs p >= 1")
    if p >= delta:
        return DefectivePlan((), True, delta)
    steps = list(reduction_schedule(n_bound, delta))
    m = steps[-1].target if steps else n_bound
    if p > 1:
        last = linial_params(m, delta, 0, tolerance=p - 1)
        if last.target < m:
            steps.append(last)
    bound = steps[-1].tolerance if steps else 0
    return DefectivePlan(tuple(steps), False, bound)


@dataclass
class DefectiveResult:
    coloring: dict[int, int]
    palette: int
    defect_bound: int
    rounds: int
    trace: RunTrace | None = None


def defective_coloring(graph: Graph, p: int, model: RoundModel | None = None) -> DefectiveResult:
    plan = defective_plan(graph.n_bound, graph.delta_bound, p)
    if plan.zero:
        return DefectiveResult({v: 0 for v in graph.vertices}, 1, plan.defect_bound, 0)
    if not plan.steps:
        return DefectiveResult({v: v for v in graph.vertices}, graph.n_bound, 0, 0)
    tr = engine.run(graph, LinialOnly(list(plan.steps)), model, max_rounds=len(plan.steps))
    return DefectiveResult(dict(tr.final_outputs), plan.palette, plan.defect_bound, tr.rounds, tr)


class ArbLoop(Algorithm):
    """State: (psi0, current pair value, first round it was final or None;
    0 when it starts final)."""
    name = "arbdefective"

    def __init__(self, q: int, p: int, rounds: int) -> None:
        self.q = q
        self.p = p
        self.rounds = rounds

    def start(self, psi0: int) -> tuple[int, int, int | None]:
        return (psi0, psi0, 0 if psi0 < self.q else None)

    def init_state(self, rom):
        raise ValueError("ArbLoop needs initial_states")

    def send(self, rom, state, rnd):
        return Msg((state[0], state[1]), 2 * bits_for(self.q ** 2))

    def step(self, rom, state, inbox, rnd):
        psi0, cur, fin = state
        mine = encode_pair(cur, self.q)
        count = sum(1 for (o0, oc) in _values(inbox) if o0 != psi0 and oc % self.q == mine.b)
        nxt = arb_update(mine, count, self.p)
        if nxt.final and fin is None:
            fin = rnd
        return (psi0, decode_pair(nxt), fin)

    def finished(self, states, rnd):
        return rnd >= self.rounds


@dataclass
class ArbdefectiveResult:
    colors: dict[int, int]  # final second coordinate b
    psi0: dict[int, int]
    finalized_at: dict[int, int | None]
    orientation: dict[tuple[int, int], int]  # undirected edge -> head
    out_degree: dict[int, int]  # same-final-color out-degree
    psi0_degree: dict[int, int]  # same-psi0 neighbors
    q: int
    p: int
    loop_rounds: int
    defect_bound: int
    trace: RunTrace = field(repr=False, default=None)

    @property
    def all_final(self) -> bool:
        return all(f is not None for f in self.finalized_at.values())

    @property
    def initial_defect(self) -> int:
        return max(self.psi0_degree.values(), default=0)


def arb_loop_rounds(delta: int, p: int) -> int:
    return 2 * math.ceil(delta / p) + 1


def arbdefective_algorithm(n_bound: int, delta: int, p: int) -> tuple[Sequence, ArbLoop, DefectivePlan]:
    if not 1 <= p <= max(delta, 1):
        raise ValueError("arbdefective coloring needs 1 <= p <= delta")
    plan = defective_plan(n_bound, delta, p)
    k = plan.palette or n_bound
    q = select_prime(max(2 * math.ceil(delta / p) + 2, ceil_sqrt(k)))
    loop = ArbLoop(q, p, arb_loop_rounds(delta, p))
    first = (lambda rom: 0) if plan.zero else (lambda rom: rom.id)
    seq = Sequence("arbdefective", first,
                   [(LinialOnly(list(plan.steps)), len(plan.steps), None),
                    (loop, loop.rounds, loop.start)])
    return seq, loop, plan


def arbdefective_color(graph: Graph, p: int, model: RoundModel | None = None) -> ArbdefectiveResult:
    seq, loop, plan = arbdefective_algorithm(graph.n_bound, graph.delta_bound, p)
    tr = engine.run(graph, seq, model, max_rounds=seq.total)
    return arbdefective_result(graph, tr, loop, plan)


def arbdefective_result(graph: Graph, tr: RunTrace, loop: ArbLoop, plan: DefectivePlan) -> ArbdefectiveResult:
    final = {v: s[1] for v, s in tr.final_states.items()}
    q = loop.q
    psi0 = {v: s[0] for v, s in final.items()}
    fin = {v: s[2] for v, s in final.items()}
    colors = {v: s[1] % q for v, s in final.items()}
    orient = {}
    for u, v in graph.edges():
        fu = math.inf if fin[u] is None else fin[u]
        fv = math.inf if fin[v] is None else fin[v]
        if fu < fv:
            orient[(u, v)] = u
        elif fv < fu:
            orient[(u, v)] = v
        else:
            orient[(u, v)] = max(u, v)
    outdeg = {v: 0 for v in graph.vertices}
    for (u, v), head in orient.items():
        if colors[u] == colors[v]:
            outdeg[u if head == v else v] += 1
    same0 = {v: sum(1 for u in graph.neighbors(v) if psi0[u] == psi0[v]) for v in graph.vertices}
    return ArbdefectiveResult(colors, psi0, fin, orient, outdeg, same0, q, loop.p, loop.rounds,
                              plan.defect_bound, tr)
