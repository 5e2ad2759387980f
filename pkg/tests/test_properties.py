import itertools

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from kout import graph as G
from kout.connectivity import components, inter_component_edges, spanning_forest
from kout.mapreduce import ROUNDS, final_intake, simulate
from kout.naming import decode, make_scheme, xor_names
from kout.protocol import run_protocol, verify_forest
from kout.rng import RngStream
from kout.sampling import expected_k_out_sample, k_out_sample, p_sample, sample_masks

from oracles import cut_edges, dfs_labels, has_cycle

SETTINGS = settings(max_examples=60, deadline=None,
                    suppress_health_check=[HealthCheck.too_slow])
seeds = st.integers(0, 2 ** 63 - 1)


@st.composite
def graphs(draw, max_n=24):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=3 * n)) if pairs else []
    # feed pairs in random orientation and order to exercise canonicalisation
    flips = draw(st.lists(st.booleans(), min_size=len(chosen), max_size=len(chosen)))
    return n, [(v, u) if f else (u, v) for (u, v), f in zip(chosen, flips)]


def assert_well_formed(g):
    e = g.edge_array
    assert (e[:, 0] < e[:, 1]).all()
    assert len({tuple(x) for x in e.tolist()}) == g.m
    assert e.tolist() == sorted(e.tolist())
    for v in range(g.n):
        nb = g.neighbors(v).tolist()
        assert nb == sorted(nb) and len(nb) == g.degree(v) == g.degrees[v]
        assert all(g.has_edge(v, u) for u in nb)
    assert int(g.degrees.sum()) == 2 * g.m


# --- graphs ---------------------------------------------------------------


@SETTINGS
@given(graphs())
def test_new_graph_well_formed(data):
    n, pairs = data
    g = G.new_graph(n, pairs)
    assert_well_formed(g)
    assert set(g.edges) == {G.canonical(u, v) for u, v in pairs}


@SETTINGS
@given(graphs())
def test_edge_list_round_trip(data):
    g = G.new_graph(*data)
    text = "\n".join([str(g.n)] + [f"{u} {v}" for u, v in g.edges]) + "\n"
    assert G.parse_edge_list(text) == g


@SETTINGS
@given(st.integers(2, 6), st.integers(1, 8), st.sampled_from(["path", "star", "random"]), seeds)
def test_leafy_tree_degrees(t, k, shape, seed):
    n = 2 * k * t
    g = G.gen_leafy_tree(n, k, shape, seed=seed)
    assert_well_formed(g)
    assert int((g.degrees >= 2 * k).sum()) == n // (2 * k)
    assert int((g.degrees == 1).sum()) == n - n // (2 * k)


@SETTINGS
@given(st.integers(2, 5), st.integers(2, 6))
def test_two_cliques_matching_cut(q, k):
    n = 2 * k * q
    g = G.gen_two_cliques_matching(n, k)
    assert_well_formed(g)
    match = set(G.matching_edges(n, k))
    assert len(match) == n // k
    assert components(n, [e for e in g.edges if e not in match]).component_count == 2


@SETTINGS
@given(st.integers(3, 40), st.integers(1, 6), st.floats(0, 1), seeds)
def test_other_generators_well_formed(n, d, p, seed):
    d = min(d, (n - 1) // 2)
    for g in (G.gen_circulant(n, max(d, 1)), G.gen_gnp(n, p, seed=seed),
              G.gen_clique_plus_small_cliques(32 * d, d)):
        assert_well_formed(g)


# --- sampling -------------------------------------------------------------


@SETTINGS
@given(graphs(), st.integers(1, 6), seeds)
def test_sampling_deterministic(data, k, seed):
    g = G.new_graph(*data)
    assert k_out_sample(g, k, RngStream(seed)) == k_out_sample(g, k, RngStream(seed))
    assert expected_k_out_sample(g, k, RngStream(seed)) == \
        expected_k_out_sample(g, k, RngStream(seed))
    assert p_sample(g, 0.3, RngStream(seed)) == p_sample(g, 0.3, RngStream(seed))


@SETTINGS
@given(graphs(), st.integers(1, 6), seeds)
def test_k_out_cardinality_and_degeneracy(data, k, seed):
    g = G.new_graph(*data)
    s = k_out_sample(g, k, RngStream(seed))
    counts = s.chooser_counts()
    assert counts.tolist() == np.minimum(k, g.degrees).tolist()
    present = s.by_u | s.by_v
    assert s.mask.tolist() == present.tolist()
    assert s.edges <= set(g.edges)
    # orient every sampled edge away from a chooser: out-degree <= k
    out = np.zeros(g.n, dtype=int)
    for (u, v), bu in zip(g.edge_array[s.mask].tolist(), s.by_u[s.mask]):
        out[u if bu else v] += 1
    assert (out <= k).all()


@SETTINGS
@given(graphs(), st.integers(1, 5), st.integers(0, 4), seeds)
def test_nested_samples(data, k, extra, seed):
    g = G.new_graph(*data)
    small = k_out_sample(g, k, RngStream(seed))
    big = k_out_sample(g, k + extra, RngStream(seed))
    assert small.edges <= big.edges
    assert (small.by_u <= big.by_u).all() and (small.by_v <= big.by_v).all()


@SETTINGS
@given(graphs(), st.integers(1, 5), st.lists(seeds, min_size=1, max_size=4))
def test_batched_masks_match_single(data, k, seeds_):
    g = G.new_graph(*data)
    masks = sample_masks(g, "k-out", k, np.array(seeds_, dtype=np.uint64))
    for row, s in zip(masks, seeds_):
        assert row.tolist() == k_out_sample(g, k, RngStream(s)).mask.tolist()


# --- connectivity ---------------------------------------------------------


@SETTINGS
@given(graphs(32))
def test_components_match_dfs(data):
    n, pairs = data
    g = G.new_graph(n, pairs)
    p = components(n, g.edges)
    assert p.component_id.tolist() == dfs_labels(n, list(g.edges))
    assert int(p.component_sizes.sum()) == n
    assert inter_component_edges(g, p)[0] == 0


@SETTINGS
@given(graphs(), st.integers(1, 4), seeds, st.data())
def test_monotone_under_added_edges(data, k, seed, draw):
    g = G.new_graph(*data)
    s = set(k_out_sample(g, k, RngStream(seed)).edges)
    rest = sorted(set(g.edges) - s)
    more = set(draw.draw(st.lists(st.sampled_from(rest), unique=True))) if rest else set()
    before = inter_component_edges(g, components(g.n, s))[0]
    after = inter_component_edges(g, components(g.n, s | more))[0]
    assert after <= before


@SETTINGS
@given(graphs())
def test_spanning_forest(data):
    n, pairs = data
    g = G.new_graph(n, pairs)
    f = spanning_forest(n, g.edges)
    assert f.edges <= set(g.edges) and not has_cycle(n, f.edges)
    assert components(n, f.edges).same_as(components(n, g.edges))
    assert len(f) == n - components(n, g.edges).component_count


# --- naming ---------------------------------------------------------------

kinds = st.sampled_from(["bch", "random"])


@SETTINGS
@given(kinds, graphs(16), graphs(16), st.integers(0, 100))
def test_xor_symmetric_difference(kind, a, b, seed):
    s = make_scheme(kind, 16, 2, seed=seed)
    A = set(G.new_graph(16, a[1]).edges)
    B = set(G.new_graph(16, b[1]).edges)
    assert xor_names(s, A ^ B) == xor_names(s, A) ^ xor_names(s, B)


@SETTINGS
@given(kinds, graphs(32), st.integers(0, 100), st.data())
def test_cut_law(kind, data, seed, draw):
    n, pairs = data
    n = max(n, 2)
    g = G.new_graph(n, pairs)
    s = make_scheme(kind, n, 2, seed=seed)
    sk = s.vertex_sketches(g)
    C = set(draw.draw(st.lists(st.integers(0, n - 1), unique=True)))
    folded = 0
    for v in C:
        folded ^= sk[v]
    boundary = cut_edges(g.edges, C)
    assert folded == xor_names(s, boundary)
    if len(boundary) == 1:
        assert folded == s.name(*next(iter(boundary)))


@SETTINGS
@given(kinds, st.integers(4, 40), st.integers(1, 4), st.integers(0, 50), st.data())
def test_decode_round_trip(kind, n, r, seed, draw):
    if kind == "random":
        n = min(n, 16)
    s = make_scheme(kind, n, r, seed=seed)
    pairs = list(itertools.combinations(range(n), 2))
    S = set(draw.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=r)))
    assert decode(s, xor_names(s, S), r) == S


# --- protocol and mapreduce -----------------------------------------------


@settings(max_examples=25, deadline=None)
@given(graphs(20), st.integers(1, 4), st.integers(1, 4), seeds)
def test_protocol_success_implies_valid_forest(data, k, r, seed):
    n, pairs = data
    if n < 2:
        return
    g = G.new_graph(n, pairs)
    out = run_protocol(g, k, r, "bch", seed)
    assert out.success == (out.referee_success and verify_forest(g, out))
    if out.success:
        assert out.forest.edges <= set(g.edges)
        assert components(n, out.forest.edges).same_as(components(n, g.edges))


@settings(max_examples=25, deadline=None)
@given(graphs(20), st.integers(1, 4), seeds)
def test_mapreduce_four_rounds(data, k, seed):
    n, pairs = data
    g = G.new_graph(n, pairs)
    forest, traces = simulate(g, k, 10 ** 9, seed)
    assert len(traces) == ROUNDS == 4
    assert verify_forest(g, forest)
    part = components(n, k_out_sample(g, k, RngStream(seed)).edges)
    cross = inter_component_edges(g, part)[0]
    assert final_intake(traces, n) <= 2 * cross + 2 * max(n - 1, 0)
