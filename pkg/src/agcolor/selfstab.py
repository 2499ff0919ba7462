"""Fully-dynamic self-stabilizing coloring, MIS, maximal matching and edge
coloring.

Every vertex keeps only its RAM (a color, plus an MIS flag or status) and
recomputes it each round from its neighbors' RAM. Corrupted or inconsistent
RAM is repaired by resetting to the ROM-derived initial color.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Iterable

from .algebra import ag_successors, ag_update, decode_pair, encode_pair
from .engine import Algorithm, FaultEvent, Msg, Rom, corrupt, topology
from .graph import Graph, GraphError, TopologyEvent
from .linial import IntervalTable, interval_table, mod_linial
from .pipelines import ExactSpace, bits_for

ERROR = "error"
VALID = "valid"

MIS = "MIS"
NOTMIS = "NOTMIS"
UNDECIDED = "Undecided"
STATUSES = (MIS, NOTMIS, UNDECIDED)


def check_error(my_color: Any, neighbor_colors: Iterable[Any], palette: int | None = None) -> str:
    """ERROR iff the color is shared with a neighbor (or lies outside the palette)."""
    if palette is not None and not (isinstance(my_color, int) and 0 <= my_color < palette):
        return ERROR
    return ERROR if my_color in set(neighbor_colors) else VALID


@dataclass(frozen=True)
class SSParams:
    """ROM-derived constants shared by every vertex."""
    n_bound: int
    delta: int  # effective degree bound used for the tables (0: trivial)
    table: IntervalTable | None
    space: ExactSpace | None  # set for the exact variant

    @property
    def exact(self) -> bool:
        return self.space is not None

    @property
    def q(self) -> int:
        return self.table.q

    @property
    def palette(self) -> int:
        return self.table.palette if self.table is not None else 1

    def initial_color(self, vid: int) -> int:
        return self.table.initial_color(vid) if self.table is not None else 0

    def final(self, color: int) -> bool:
        if self.table is None:
            return color == 0
        if self.space is not None:
            return self.space.is_final(color)
        return 0 <= color < self.q

    @property
    def stabilization_bound(self) -> int:
        """Rounds after the last fault within which every color is final in I_0
        (AG variant: r + 1 + q)."""
        if self.table is None:
            return 1
        return self.table.r + 1 + self.q


@lru_cache(maxsize=None)
def ss_params(n_bound: int, delta: int, exact: bool = False) -> SSParams:
    d = min(delta, n_bound - 1)
    if d < 1:
        return SSParams(n_bound, 0, None, None)
    if not exact:
        return SSParams(n_bound, d, interval_table(n_bound, d), None)
    base = interval_table(n_bound, d)
    space = ExactSpace(d, base.sizes[0])
    return SSParams(n_bound, d, interval_table(n_bound, d, i0_size=space.size), space)


def ss_coloring_round(color: int, neighbor_colors: Iterable[int], vid: int,
                      params: SSParams) -> int:
    """One round of the self-stabilizing O(Δ)-coloring (AG in I_0)."""
    nbrs = list(neighbor_colors)
    if params.table is None:
        return 0
    tab = params.table
    if check_error(color, nbrs, tab.palette) == ERROR:
        return tab.initial_color(vid)
    j = tab.interval_of(color)
    same = [c for c in nbrs if tab.interval_of(c) == j]
    if j >= 2:
        return mod_linial(color, same, (), tab)
    q = tab.q
    if j == 1:
        forb = set()
        for c in nbrs:
            if tab.interval_of(c) == 0:
                forb.update(decode_pair(s) for s in ag_successors(encode_pair(c, q)))
        return mod_linial(color, same, forb, tab)
    mine = encode_pair(color, q)
    conflicted = any(c % q == mine.b for c in same)
    return decode_pair(ag_update(mine, conflicted))


def ss_exact_round(color: int, neighbor_colors: Iterable[int], vid: int,
                   params: SSParams) -> int:
    """Like ss_coloring_round, but I_0 runs the mixed 3AG / AG(Δ+1) scheme."""
    nbrs = list(neighbor_colors)
    if params.table is None:
        return 0
    tab, space = params.table, params.space
    if check_error(color, nbrs, tab.palette) == ERROR:
        return tab.initial_color(vid)
    j = tab.interval_of(color)
    same = [c for c in nbrs if tab.interval_of(c) == j]
    if j >= 2:
        return mod_linial(color, same, (), tab)
    if j == 1:
        forb = set()
        for c in nbrs:
            if tab.interval_of(c) == 0:
                forb.update(space.successors(c))
        return mod_linial(color, same, forb, tab)
    return space.step(color, same)


def ss_mis_mu_round(color: int, neighbor_pairs: Iterable[tuple[int, int]]) -> int:
    """mu = 1 iff every neighbor with a smaller color has mu = 0."""
    return int(all(mu == 0 for c, mu in neighbor_pairs if c < color))


def ss_mis_status_round(color: int, status: str, neighbor_pairs: Iterable[tuple[int, str]]) -> str:
    pairs = list(neighbor_pairs)
    if status not in STATUSES:
        status = UNDECIDED
    mis_nbr = any(s == MIS for _, s in pairs)
    if status == MIS:
        return UNDECIDED if mis_nbr else MIS
    if status == UNDECIDED and mis_nbr:
        return NOTMIS
    if status == NOTMIS:
        if mis_nbr:
            return NOTMIS
        status = UNDECIDED  # and may join right away
    if all(color < c for c, s in pairs if s == UNDECIDED):
        return MIS
    return UNDECIDED


def reconcile_virtual(u: int, v: int, copy_u: Any, copy_v: Any) -> Any:
    """Both endpoints end up with the copy held by the smaller ID."""
    return copy_u if u < v else copy_v


# engine algorithms


class SSColoring(Algorithm):
    def __init__(self, n_bound: int, delta: int, exact: bool = False) -> None:
        self.params = ss_params(n_bound, delta, exact)
        self.name = "ss-exact" if exact else "ss-coloring"
        self._round = ss_exact_round if exact else ss_coloring_round

    def init_state(self, rom: Rom) -> int:
        return self.params.initial_color(rom.id)

    def send(self, rom, state, rnd):
        return Msg(state, bits_for(self.params.palette))

    def step(self, rom, state, inbox, rnd):
        return self._round(state, _values(inbox), rom.id, self.params)


class SSMis(Algorithm):
    """Coloring plus MIS; state (color, flag) with flag a mu bit or a status."""

    def __init__(self, n_bound: int, delta: int, variant: str = "status", exact: bool = False) -> None:
        if variant not in ("status", "mu"):
            raise ValueError(f"unknown MIS variant {variant!r}")
        self.variant = variant
        self.params = ss_params(n_bound, delta, exact)
        self._round = ss_exact_round if exact else ss_coloring_round
        self.name = f"ss-mis-{variant}"

    def init_state(self, rom):
        return (self.params.initial_color(rom.id), UNDECIDED if self.variant == "status" else 0)

    def send(self, rom, state, rnd):
        return Msg(state, bits_for(self.params.palette) + 2)

    def step(self, rom, state, inbox, rnd):
        color, flag = state
        pairs = list(_values(inbox))
        new_color = self._round(color, [c for c, _ in pairs], rom.id, self.params)
        if self.variant == "mu":
            return (new_color, ss_mis_mu_round(color, pairs))
        return (new_color, ss_mis_status_round(color, flag, pairs))

    def in_mis(self, state) -> bool:
        return state[1] == (MIS if self.variant == "status" else 1)


def edge_id(u: int, v: int, n_bound: int) -> int:
    a, b = (u, v) if u < v else (v, u)
    return a * n_bound + b


class SSLine(Algorithm):
    """Self-stabilizing edge coloring (exact, 2Δ-1 colors) or maximal matching
    by simulating one virtual vertex per edge at both endpoints.

    State: {neighbor: copy of the shared edge's RAM}. Each round a vertex
    broadcasts all its copies; for edge (v,u) both endpoints take the smaller
    ID's copy as the edge's own RAM and the two endpoints' copies of the other
    incident edges as its line-graph neighborhood, so they compute the same
    result. Copies that disagree (one endpoint was corrupted) count as an
    error and reset the edge.
    """
    uses_ids = True

    def __init__(self, n_bound: int, delta: int, problem: str = "edge-color") -> None:
        if problem not in ("edge-color", "mm"):
            raise ValueError(f"unknown line-graph problem {problem!r}")
        self.problem = problem
        self.n_bound = n_bound
        self.line_delta = max(0, 2 * delta - 2)
        self.params = ss_params(n_bound * n_bound, self.line_delta, problem == "edge-color")
        self._round = ss_exact_round if problem == "edge-color" else ss_coloring_round
        self.name = f"ss-{problem}"

    def initial(self, v: int, u: int) -> Any:
        c = self.params.initial_color(edge_id(v, u, self.n_bound))
        return c if self.problem == "edge-color" else (c, UNDECIDED)

    def init_state(self, rom):
        return {u: self.initial(rom.id, u) for u in rom.ports}

    def corrupt(self, rom, state, value):
        if isinstance(value, dict):
            new = dict(state)
            new.update({u: x for u, x in value.items() if u in rom.ports})
            return new
        return {u: value for u in state}

    def send(self, rom, state, rnd):
        per = bits_for(self.params.palette) + (2 if self.problem == "mm" else 0)
        live = {u: x for u, x in state.items() if u in rom.ports}
        return Msg(live, max(1, len(live)) * per)

    def step(self, rom, state, inbox, rnd):
        me = rom.id
        mine = {u: state.get(u, self.initial(me, u)) for u in rom.ports}
        out = {}
        for u in rom.ports:
            theirs = inbox.get(u, {})
            if theirs.get(me, mine[u]) != mine[u]:
                # the two copies of this edge disagree: a detected error, so
                # both endpoints reset it to its ID color
                out[u] = self.initial(me, u)
                continue
            own = reconcile_virtual(me, u, mine[u], theirs.get(me, mine[u]))
            others = [mine[w] for w in rom.ports if w != u]
            others += [x for w, x in theirs.items() if w != me]
            eid = edge_id(me, u, self.n_bound)
            if self.problem == "edge-color":
                out[u] = self._round(own, others, eid, self.params)
            else:
                color, status = own if _is_mm_ram(own) else (own, UNDECIDED)
                pairs = [x if _is_mm_ram(x) else (x, UNDECIDED) for x in others]
                out[u] = (self._round(color, [c for c, _ in pairs], eid, self.params),
                          ss_mis_status_round(color, status, pairs))
        return out

    def output(self, state):
        if self.problem == "edge-color":
            return dict(state)
        return {u: s[1] == MIS for u, s in state.items()}


def _is_mm_ram(x: Any) -> bool:
    return isinstance(x, tuple) and len(x) == 2


def _values(inbox):
    return inbox.values() if isinstance(inbox, dict) else inbox


def line_outputs(graph: Graph, outputs: dict[int, dict]) -> dict[tuple[int, int], Any]:
    """Edge values as held by the smaller endpoint (the authoritative copy)."""
    return {(u, v): outputs[u][v] for u, v in graph.edges()}


# fault scripts


def random_ram(rng: random.Random, alg: Algorithm) -> Any:
    """Arbitrary RAM contents for ``alg``, sometimes outside the legal range."""
    pal = alg.params.palette
    color = rng.randrange(pal + max(8, pal // 8))
    if isinstance(alg, SSColoring):
        return color
    if isinstance(alg, SSMis):
        flag = rng.choice(STATUSES) if alg.variant == "status" else rng.randrange(2)
        return (color, flag)
    if alg.problem == "edge-color":
        return color
    return (color, rng.choice(STATUSES))


def random_fault_script(graph: Graph, alg: Algorithm, rng: random.Random, n_faults: int,
                        first: int = 1, last: int = 10, churn: float = 0.3,
                        sites: list[int] | None = None) -> list[FaultEvent]:
    """RAM corruptions (and, with probability ``churn`` each, a valid topology
    event) at rounds in [first, last]. Corruption targets come from ``sites``
    when given."""
    g = graph
    script: list[FaultEvent] = []
    rounds = sorted(rng.randint(first, last) for _ in range(n_faults))
    for rnd in rounds:
        if rng.random() < churn:
            ev = _random_topology(g, rng, rnd)
            if ev is not None:
                try:
                    g = g.apply(ev)
                    if ev.kind == "remove-vertex":
                        # topology events apply before same-round corruptions
                        script = [f for f in script
                                  if not (f.kind == "corrupt" and f.round == rnd and f.target == ev.payload)]
                    script.append(topology(ev))
                    continue
                except GraphError:
                    pass
        pool = sites if sites is not None else g.vertices
        pool = [v for v in pool if v in g]
        if not pool:
            continue
        v = rng.choice(pool)
        if isinstance(alg, SSLine):
            nbrs = g.neighbors(v)
            if not nbrs:
                continue
            value = {u: random_ram(rng, alg) for u in rng.sample(nbrs, rng.randint(1, len(nbrs)))}
        else:
            value = random_ram(rng, alg)
        script.append(corrupt(rnd, v, value))
    return script


def _random_topology(g: Graph, rng: random.Random, rnd: int) -> TopologyEvent | None:
    kind = rng.choice(TopologyEvent.KINDS)
    verts = g.vertices
    if kind == "add-vertex":
        free = [v for v in range(g.n_bound) if v not in g]
        return TopologyEvent(rnd, kind, rng.choice(free)) if free else None
    if kind == "remove-vertex":
        return TopologyEvent(rnd, kind, rng.choice(verts)) if len(verts) > 1 else None
    if kind == "add-edge":
        open_ = [v for v in verts if g.degree(v) < g.delta_bound]
        if len(open_) < 2:
            return None
        for _ in range(20):
            u, v = rng.sample(open_, 2)
            if not g.has_edge(u, v):
                return TopologyEvent(rnd, kind, (min(u, v), max(u, v)))
        return None
    edges = list(g.edges())
    return TopologyEvent(rnd, kind, rng.choice(edges)) if edges else None
