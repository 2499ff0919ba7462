import pytest
from hypothesis import given, strategies as st

from agcolor.graph import (Graph, GraphError, TopologyEvent, apply_topology_event, build_graph,
                           dumps, load, loads)

from conftest import FIXTURES, graphs


def test_cycle_of_three_is_triangle():
    g = build_graph("cycle", 3, 2, seed=0)
    assert g.vertices == [0, 1, 2]
    assert sorted(g.edges()) == [(0, 1), (0, 2), (1, 2)]


def test_path_of_two_is_single_edge():
    assert list(build_graph("path", 2, 1).edges()) == [(0, 1)]


def test_random_capped_golden():
    g = build_graph("random-capped", 50, 8, seed=7)
    assert g.max_degree() <= 8
    assert g == load(FIXTURES / "random_capped_50_8_seed7.txt")


def test_remove_edge_from_triangle():
    g = build_graph("complete", 3, 2)
    h = apply_topology_event(g, TopologyEvent(1, "remove-edge", (0, 1)))
    assert sorted(h.edges()) == [(0, 2), (1, 2)]
    assert sorted(g.edges()) == [(0, 1), (0, 2), (1, 2)]  # original untouched


def test_add_isolated_vertex():
    g = Graph.from_edges(3, 1, [0, 1], [(0, 1)])
    h = g.apply(TopologyEvent(1, "add-vertex", 2))
    assert h.vertices == [0, 1, 2] and h.neighbors(2) == []


def test_add_edge_over_cap_rejected():
    g = Graph.from_edges(3, 1, [0, 1, 2], [(0, 1)])
    with pytest.raises(GraphError):
        g.apply(TopologyEvent(1, "add-edge", (0, 2)))


@pytest.mark.parametrize("event", [
    TopologyEvent(1, "add-vertex", 0),
    TopologyEvent(1, "add-vertex", 9),
    TopologyEvent(1, "remove-vertex", 5),
    TopologyEvent(1, "add-edge", (0, 0)),
    TopologyEvent(1, "add-edge", (0, 1)),
    TopologyEvent(1, "remove-edge", (1, 2)),
])
def test_invalid_events_rejected(event):
    g = Graph.from_edges(3, 2, [0, 1, 2], [(0, 1)])
    with pytest.raises(GraphError):
        g.apply(event)


def test_unknown_event_kind():
    with pytest.raises(GraphError):
        TopologyEvent(1, "teleport", 0)


def test_remove_vertex_drops_incident_edges():
    g = build_graph("complete", 4, 3)
    h = g.apply(TopologyEvent(2, "remove-vertex", 1))
    assert 1 not in h
    assert all(1 not in e for e in h.edges())
    assert len(list(h.edges())) == 3


def test_fixture_errors():
    with pytest.raises(GraphError):
        loads("")
    with pytest.raises(GraphError):
        loads("3 2\n0 1 2\n")


@given(graphs(max_n=30, max_delta=8))
def test_generated_graphs_respect_cap_and_roundtrip(g):
    assert g.max_degree() <= g.delta_bound
    for u, v in g.edges():
        assert u < v and g.has_edge(v, u)
    assert loads(dumps(g)) == g


@given(st.integers(1, 40), st.integers(1, 10), st.integers(0, 99))
def test_generator_is_deterministic(n, delta, seed):
    assert build_graph("random-capped", n, delta, seed) == build_graph("random-capped", n, delta, seed)
