import random

import pytest
from hypothesis import given, strategies as st

from agcolor import engine
from agcolor.algebra import ColorPair, decode_pair
from agcolor.engine import corrupt
from agcolor.graph import Graph, build_graph
from agcolor.oracles import bfs_distances, is_mis, is_mm, is_proper_coloring, is_proper_edge_coloring
from agcolor.selfstab import (ERROR, MIS, NOTMIS, UNDECIDED, VALID, SSColoring, SSLine, SSMis,
                              check_error, line_outputs, random_fault_script, random_ram,
                              reconcile_virtual, ss_coloring_round, ss_exact_round, ss_mis_mu_round,
                              ss_mis_status_round, ss_params)

from conftest import graphs


def star(k):
    return Graph.from_edges(k + 1, k, range(k + 1), [(0, i) for i in range(1, k + 1)])


def test_check_error():
    assert check_error(5, {5, 7}) == ERROR
    assert check_error(5, {7, 9}) == VALID
    assert check_error(5, set()) == VALID
    assert check_error(50, set(), palette=40) == ERROR
    assert check_error("junk", set(), palette=40) == ERROR


def test_collision_resets_to_id_color():
    P = ss_params(30, 3)
    c = P.table.lo(0) + 4
    assert ss_coloring_round(c, [c], 7, P) == P.initial_color(7)


def test_i0_conflict_advances_pair():
    P = ss_params(30, 3)
    q = P.q
    mine = decode_pair(ColorPair(2, 3, q))
    other = decode_pair(ColorPair(1, 3, q))
    assert ss_coloring_round(mine, [other], 0, P) == decode_pair(ColorPair(2, (3 + 2) % q, q))


def settle(alg, g, faults=(), extra=0):
    P = alg.params
    q = P.q if P.table is not None else 1
    last = max((f.round for f in faults), default=0)
    return engine.run(g, alg, faults=faults, max_rounds=last + P.stabilization_bound + 3 * q + 5 + extra)


def test_triangle_recovers_from_random_corruption():
    g = build_graph("complete", 3, 2)
    alg = SSColoring(3, 2)
    P = alg.params
    for seed in range(100):
        rng = random.Random(seed)
        faults = [corrupt(1, v, random_ram(rng, alg)) for v in g.vertices]
        tr = settle(alg, g, faults)
        for rec in tr.records[1:]:
            assert is_proper_coloring(g, rec.outputs)
        final_at = tr.outputs(1 + P.stabilization_bound)
        assert all(P.final(c) for c in final_at.values())


def test_exact_variant_ends_in_delta_plus_one():
    for g in (build_graph("random-capped", 30, 4, seed=1), build_graph("cycle", 9, 2), star(4)):
        alg = SSColoring(g.n_bound, g.delta_bound, exact=True)
        rng = random.Random(3)
        faults = random_fault_script(g, alg, rng, 4, 1, 5, churn=0.0)
        tr = settle(alg, g, faults, extra=40)
        assert set(tr.final_outputs.values()) <= set(range(g.delta_bound + 1))
        assert all(is_proper_coloring(tr.graph_at(r.round), r.outputs) for r in tr.records)


def test_high_color_waits_for_working_low_neighbor():
    P = ss_params(40, 3, exact=True)
    space = P.space
    n = space.n
    x = next(x for x in range(2 * n, space.size)
             if space.triple(x).c == 0 and space.triple(x).b != 0)
    assert ss_exact_round(x, [n + 1], 0, P) >= 2 * n


def test_single_vertex_exact_from_any_ram():
    g = Graph.from_edges(5, 2, [0], [])
    alg = SSColoring(5, 2, exact=True)
    for value in (0, 3, 17, 10 ** 6, -4):
        tr = engine.run(g, alg, faults=[corrupt(1, 0, value)], max_rounds=80)
        assert tr.final_outputs[0] in range(3)
        assert tr.records[-2].outputs == tr.records[-1].outputs


def test_mu_rules():
    assert ss_mis_mu_round(1, [(4, 1), (7, 1)]) == 1
    assert ss_mis_mu_round(5, [(2, 1), (7, 0)]) == 0


def test_mu_triangle_single_member():
    g = build_graph("complete", 3, 2)
    alg = SSMis(3, 2, "mu")
    tr = settle(alg, g)
    P = alg.params
    assert sum(s[1] for s in tr.final_outputs.values()) == 1
    rnd = P.stabilization_bound + g.delta_bound + 1
    assert tr.outputs(rnd) == tr.final_outputs


def test_status_rules():
    assert ss_mis_status_round(3, MIS, [(4, MIS)]) == UNDECIDED
    assert ss_mis_status_round(3, UNDECIDED, []) == MIS
    assert ss_mis_status_round(3, UNDECIDED, [(1, MIS)]) == NOTMIS
    assert ss_mis_status_round(3, NOTMIS, [(5, UNDECIDED)]) == MIS
    assert ss_mis_status_round(3, "bogus", [(1, UNDECIDED)]) == UNDECIDED


def test_mis_member_unaffected_by_far_faults():
    g = build_graph("random-capped", 60, 3, seed=9)
    alg = SSMis(60, 3)
    base = settle(alg, g)
    members = [v for v, s in base.final_outputs.items() if s[1] == MIS]
    v = members[0]
    far = [u for u, d in bfs_distances(g, [v]).items() if d >= 3]
    rng = random.Random(1)
    T = base.rounds + 1
    faults = [corrupt(T, u, random_ram(rng, alg)) for u in rng.sample(far, 5)]
    states = dict(base.final_states)
    tr = engine.run(g, alg, faults=[corrupt(1, u, s) for u, s in states.items()] + [
        corrupt(2 + f.round - T, f.target, f.value) for f in faults], max_rounds=60)
    assert all(rec.outputs[v][1] == MIS for rec in tr.records[1:])
    assert is_mis(g, [u for u, s in tr.final_outputs.items() if s[1] == MIS])


def test_reconcile():
    assert reconcile_virtual(1, 2, 5, 5) == 5
    assert reconcile_virtual(1, 2, 5, 9) == 5
    assert reconcile_virtual(4, 2, 5, 9) == 9


def _matching(g, outputs):
    return [e for e, m in line_outputs(g, outputs).items() if m]


def test_mm_on_triangle_with_corruption():
    g = build_graph("complete", 3, 2)
    alg = SSLine(3, 2, "mm")
    tr = settle(alg, g, [corrupt(3, 1, {0: (0, MIS), 2: (5, MIS)})])
    assert is_mm(g, _matching(g, tr.final_outputs))


def test_line_graph_small_cases():
    one = build_graph("path", 2, 1)
    mm = engine.run(one, SSLine(2, 1, "mm"), max_rounds=3)
    assert _matching(one, mm.final_outputs) == [(0, 1)]
    col = engine.run(one, SSLine(2, 1), max_rounds=3)
    assert line_outputs(one, col.final_outputs) == {(0, 1): 0}
    p4 = build_graph("path", 4, 2)
    assert is_mm(p4, _matching(p4, settle(SSLine(4, 2, "mm"), p4).final_outputs))
    s = star(4)
    colors = line_outputs(s, settle(SSLine(5, 4), s).final_outputs)
    assert is_proper_edge_coloring(s, colors) and set(colors.values()) <= set(range(7))


@given(graphs(max_n=14, max_delta=4), st.integers(0, 1000))
def test_line_copies_agree_every_round(g, seed):
    alg = SSLine(g.n_bound, g.delta_bound)
    faults = random_fault_script(g, alg, random.Random(seed), 3, 1, 4, churn=0.3)
    tr = engine.run(g, alg, faults=faults, max_rounds=12)
    for rec in tr.records:
        h = tr.graph_at(rec.round)
        for u, v in h.edges():
            assert rec.outputs[u][v] == rec.outputs[v][u]
        assert is_proper_edge_coloring(h, line_outputs(h, rec.outputs))


@given(graphs(max_n=40, max_delta=6), st.integers(0, 10 ** 6), st.booleans())
def test_coloring_proper_every_round_under_churn(g, seed, exact):
    alg = SSColoring(g.n_bound, g.delta_bound, exact)
    rng = random.Random(seed)
    faults = random_fault_script(g, alg, rng, 5, 1, 6, churn=0.4)
    tr = settle(alg, g, faults, extra=20 if exact else 0)
    for rec in tr.records:
        assert is_proper_coloring(tr.graph_at(rec.round), rec.outputs)
    P = alg.params
    last = tr.last_fault_round or 0
    assert all(P.final(c) for c in tr.outputs(min(tr.rounds, last + P.stabilization_bound)).values()) \
        or exact


def test_params_degenerate():
    P = ss_params(1, 3)
    assert P.table is None and P.palette == 1 and P.final(0)
    with pytest.raises(ValueError):
        SSMis(5, 2, variant="sometimes")
