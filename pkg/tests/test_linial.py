import itertools

import pytest
from hypothesis import given, strategies as st

from agcolor.algebra import ColorPair, ag_successors, decode_pair, is_prime
from agcolor.graph import build_graph
from agcolor.linial import (LinialError, cole_vishkin_3color, cv_fold, interval_table, linial_params,
                            linial_step, mod_linial, reduction_schedule)
from agcolor.oracles import is_proper_coloring

from conftest import graphs


def scan_q(m, delta, forbidden=0):
    """Brute force: first prime q that admits some degree d."""
    q = 2
    while True:
        if is_prime(q) and any(q ** (d + 1) >= m and q >= d * delta + 2 * forbidden + 1
                               for d in range(1, 64)):
            return q
        q += 1


def test_params_for_cubic_palette():
    p = linial_params(1331, 4)
    assert (p.q, p.d) == (11, 2) == (scan_q(1331, 4), 2)
    assert p.q ** (p.d + 1) >= 1331 and p.q >= p.d * 4 + 1


@pytest.mark.parametrize("m,delta,f", [(169, 2, 4), (1000, 3, 6), (50, 5, 10), (10 ** 5, 8, 0)])
def test_params_match_scan_and_invariant(m, delta, f):
    p = linial_params(m, delta, f)
    assert p.q == scan_q(m, delta, f)
    assert p.q >= p.d * delta + 2 * f + 1 and p.q ** (p.d + 1) >= m


def test_small_palette_needs_no_step():
    assert reduction_schedule(25, 2) == []
    assert reduction_schedule(9, 2) == []
    assert len(reduction_schedule(10 ** 6, 3)) >= 1


def test_zero_color_alone_stays_zero():
    assert linial_step(0, set(), set(), linial_params(25, 2)) == 0


def _poly(color, q, d):
    digits = [(color // q ** i) % q for i in range(d + 1)]
    return lambda x: sum(c * x ** i for i, c in enumerate(digits)) % q


def test_step_against_two_neighbors_brute_force():
    params = linial_params(25, 2)
    assert (params.q, params.d) == (5, 1)
    mine = _poly(7, 5, 1)
    others = [_poly(c, 5, 1) for c in (0, 6)]
    want = next(x * 5 + mine(x) for x in range(5) if all(g(x) != mine(x) for g in others))
    assert linial_step(7, {0, 6}, set(), params) == want


def test_improper_input_rejected():
    with pytest.raises(LinialError):
        linial_step(3, {3, 4}, set(), linial_params(25, 2))
    with pytest.raises(LinialError):
        linial_step(30, set(), set(), linial_params(25, 2))


@given(graphs(max_n=40, max_delta=6))
def test_reduction_schedule_keeps_coloring_proper(g):
    colors = {v: v for v in g.vertices}
    m = g.n_bound
    for step in reduction_schedule(g.n_bound, g.delta_bound):
        assert step.m == m
        colors = {v: linial_step(colors[v], {colors[u] for u in g.neighbors(v)}, (), step)
                  for v in g.vertices}
        assert is_proper_coloring(g, colors)
        assert all(0 <= c < step.target for c in colors.values())
        m = step.target


@given(st.integers(2, 6), st.data())
def test_forbidden_colors_avoided(delta, data):
    f = 2 * delta
    params = linial_params(200, delta, f)
    me = data.draw(st.integers(0, 199))
    nbrs = set(data.draw(st.lists(st.integers(0, 199).filter(lambda c: c != me), max_size=delta)))
    forb = set(data.draw(st.lists(st.integers(0, params.target - 1), max_size=f)))
    out = linial_step(me, nbrs, forb, params)
    assert out not in forb
    x, y = divmod(out, params.q)
    assert all(_poly(c, params.q, params.d)(x) != y for c in nbrs)


def test_interval_table_small():
    t = interval_table(16, 2)
    assert t.sizes[0] == 121 == t.steps[1].q ** 2
    assert t.r == 1 and t.q == 11
    assert t.bounds[0] == (0, 120) and t.bounds[1] == (121, 136)
    assert t.initial_color(3) == 124


def test_interval_table_degenerate_when_ids_already_small():
    t = interval_table(121, 2)
    assert t.r == 1


@pytest.mark.parametrize("n,delta", [(n, d) for n in (50, 500, 5000, 10 ** 6) for d in (2, 3, 8, 16)
                                     if d < n])
def test_interval_chain_monotone(n, delta):
    t = interval_table(n, delta)
    assert list(t.t) == sorted(t.t) and len(set(t.t)) == len(t.t)
    assert t.sizes[-1] == n
    for j in range(1, t.r + 1):
        assert t.steps[j].m <= t.sizes[j] and t.steps[j].target <= t.sizes[j - 1]


def test_mod_linial_from_ids():
    t = interval_table(200, 3)
    r = t.r
    vid = 17
    got = mod_linial(t.initial_color(vid), [], [], t)
    assert got == t.lo(r - 1) + linial_step(vid, set(), set(), t.steps[r])
    with pytest.raises(LinialError):
        mod_linial(0, [], [], t)


def test_mod_linial_avoids_ag_successors_on_small_paths():
    # path u - v (- w): u leaves I_1 while v (and w) hold I_0 pairs; every
    # neighbor pair's possible next colors must be avoided
    t = interval_table(30, 2)
    q = t.q
    for k in (1, 2):
        for pairs in itertools.combinations(range(0, q * q, 7), k):
            forb = set()
            for c in pairs:
                forb |= {decode_pair(s) for s in ag_successors(ColorPair(c // q, c % q, q))}
            for start in range(t.lo(1), t.lo(1) + t.sizes[1]):
                assert mod_linial(start, [], forb, t) not in forb


def test_cv_single_and_pair():
    assert cole_vishkin_3color({"x": 12}, {"x": None})[0] == {"x": 0}
    colors, rounds = cole_vishkin_3color({"a": 5, "b": 9}, {"a": "b", "b": None})
    assert colors["a"] != colors["b"] and set(colors.values()) <= {0, 1, 2}
    assert colors == {"a": 0, "b": 1} and rounds == 5


def test_cv_triangle_uses_three_colors():
    colors, _ = cole_vishkin_3color({0: 0, 1: 1, 2: 2}, {0: 1, 1: 2, 2: 0})
    assert sorted(colors.values()) == [0, 1, 2]


def test_cv_rejects_branching():
    with pytest.raises(LinialError):
        cole_vishkin_3color({0: 0, 1: 1, 2: 2}, {0: 2, 1: 2, 2: None})
    with pytest.raises(LinialError):
        cv_fold(4, 4)


@given(st.integers(1, 60), st.booleans(), st.integers(0, 10 ** 6))
def test_cv_proper_on_paths_and_cycles(n, cyc, seed):
    import random
    ids = random.Random(seed).sample(range(10 ** 6), n)
    order = list(range(n))
    succ = {i: (i + 1 if i + 1 < n else (0 if cyc and n > 1 else None)) for i in order}
    colors, rounds = cole_vishkin_3color(dict(enumerate(ids)), succ)
    assert set(colors.values()) <= {0, 1, 2}
    for i, s in succ.items():
        if s is not None:
            assert colors[i] != colors[s]
