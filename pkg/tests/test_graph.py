import itertools

import numpy as np
import pytest

from kout import graph as G
from kout.connectivity import brute_force_edge_connectivity, components
from kout.errors import BadParameters, GenerationFailed, ParseError, SelfLoop, VertexOutOfRange

from oracles import dfs_labels


def assert_simple(g: G.Graph):
    e = g.edge_array
    assert (e[:, 0] < e[:, 1]).all()
    assert len({tuple(x) for x in e.tolist()}) == g.m
    assert [tuple(x) for x in e.tolist()] == sorted(tuple(x) for x in e.tolist())
    deg = [0] * g.n
    for u, v in g.edges:
        deg[u] += 1
        deg[v] += 1
    assert g.degrees.tolist() == deg
    for v in range(g.n):
        nb = g.neighbors(v).tolist()
        assert nb == sorted(nb) and len(nb) == deg[v]


class TestNewGraph:
    def test_dedup_reversed_pair(self):
        g = G.new_graph(3, [(0, 1), (1, 0), (1, 2)])
        assert g.edges == ((0, 1), (1, 2))

    def test_self_loop(self):
        with pytest.raises(SelfLoop):
            G.new_graph(2, [(0, 0)])

    def test_out_of_range(self):
        with pytest.raises(VertexOutOfRange):
            G.new_graph(2, [(0, 2)])
        with pytest.raises(VertexOutOfRange):
            G.new_graph(2, [(-1, 1)])

    def test_edgeless(self):
        g = G.new_graph(4, [])
        assert g.m == 0 and g.degrees.tolist() == [0, 0, 0, 0]

    def test_immutable(self):
        g = G.new_graph(3, [(0, 1)])
        with pytest.raises(ValueError):
            g.edge_array[0, 0] = 2

    def test_edge_id_and_membership(self):
        g = G.new_graph(4, [(2, 3), (0, 1)])
        assert g.edge_id(3, 2) == 1
        assert g.has_edge(1, 0) and not g.has_edge(0, 2) and not g.has_edge(0, 0)


class TestGenerators:
    def test_two_cliques_example(self):
        g = G.gen_two_cliques_matching(12, 4)
        assert g.m == 2 * 15 + 3
        assert set(G.matching_edges(12, 4)) == {(0, 6), (1, 7), (2, 8)}
        for i in range(6):
            for j in range(i + 1, 6):
                assert g.has_edge(i, j) and g.has_edge(6 + i, 6 + j)
        assert_simple(g)

    def test_two_cliques_precondition(self):
        with pytest.raises(BadParameters):
            G.gen_two_cliques_matching(6, 3)
        with pytest.raises(BadParameters):
            G.gen_two_cliques_matching(8, 1)

    @pytest.mark.parametrize("n,k", [(12, 4), (60, 4), (64, 8), (30, 5)])
    def test_two_cliques_matching_is_a_cut(self, n, k):
        g = G.gen_two_cliques_matching(n, k)
        match = set(G.matching_edges(n, k))
        assert len(match) == n // k
        rest = [e for e in g.edges if e not in match]
        assert len(set(dfs_labels(n, rest))) == 2

    def test_leafy_tree_examples(self):
        g = G.gen_leafy_tree(16, 2, "path")
        assert g.m == 15
        assert g.degrees[:4].tolist() == [4, 5, 5, 4]
        g8 = G.gen_leafy_tree(8, 2, "path")
        assert g8.m == 7 and G.leafy_tree_internal_edges(8, 2) == [(0, 1)]

    @pytest.mark.parametrize("shape", ["path", "star", "random"])
    @pytest.mark.parametrize("n,k", [(16, 2), (64, 4), (96, 3), (256, 8)])
    def test_leafy_tree_degrees(self, shape, n, k):
        g = G.gen_leafy_tree(n, k, shape, seed=5)
        t = n // (2 * k)
        assert g.n == n and g.m == n - 1
        assert int((g.degrees >= 2 * k).sum()) == t
        assert int((g.degrees == 1).sum()) == n - t
        assert len(set(dfs_labels(n, g.edges))) == 1
        assert_simple(g)

    def test_leafy_tree_preconditions(self):
        with pytest.raises(BadParameters):
            G.gen_leafy_tree(10, 2)
        with pytest.raises(BadParameters):
            G.gen_leafy_tree(4, 2)

    def test_clique_plus_small(self):
        g = G.gen_clique_plus_small_cliques(64, 2)
        assert g.m == 496 + 16 == 64 ** 2 // 8
        assert len(set(dfs_labels(64, g.edges))) == 17
        with pytest.raises(BadParameters):
            G.gen_clique_plus_small_cliques(48, 2)

    def test_circulant(self):
        c5 = G.gen_circulant(5, 1)
        assert c5.edges == G.cycle_graph(5).edges
        assert set(G.gen_circulant(6, 2).degrees.tolist()) == {4}
        assert brute_force_edge_connectivity(G.gen_circulant(8, 2)) == 4
        with pytest.raises(BadParameters):
            G.gen_circulant(6, 3)

    @pytest.mark.parametrize("n", range(3, 11))
    def test_circulant_edge_connectivity(self, n):
        for d in range(1, 4):
            if d >= n / 2:
                continue
            assert brute_force_edge_connectivity(G.gen_circulant(n, d)) == 2 * d

    def test_gnp_extremes(self):
        assert G.gen_gnp(10, 0.0, seed=1).m == 0
        assert G.gen_gnp(10, 1.0, seed=1).m == 45

    def test_gnp_seeded(self):
        assert G.gen_gnp(30, 0.3, seed=4) == G.gen_gnp(30, 0.3, seed=4)

    def test_random_regular(self):
        g = G.gen_random_regular(8, 3, seed=1)
        assert g.degrees.tolist() == [3] * 8
        assert_simple(g)
        with pytest.raises(BadParameters):
            G.gen_random_regular(7, 3, seed=1)

    def test_random_regular_rejection_cap(self):
        # a 7-regular graph on 8 vertices is K_8: reachable, but with one attempt
        # the pairing almost never comes out simple
        with pytest.raises(GenerationFailed):
            for s in range(50):
                G.gen_random_regular(8, 7, seed=s, max_attempts=1)

    def test_almost_regular_degree_window(self):
        g = G.gen_almost_regular(200, 8, seed=3)
        assert g.degrees.min() >= 8 and g.degrees.max() <= 16
        assert_simple(g)


FAMILY_SAMPLES = [
    G.complete_graph(7), G.path_graph(9), G.cycle_graph(10), G.star_graph(6),
    G.gen_two_cliques_matching(24, 4), G.gen_leafy_tree(32, 2, "random", seed=2),
    G.gen_clique_plus_small_cliques(64, 2), G.gen_circulant(20, 3),
    G.gen_gnp(40, 0.2, seed=9), G.gen_random_regular(16, 4, seed=2),
    G.gen_almost_regular(64, 4, seed=1), G.new_graph(5, []),
]


@pytest.mark.parametrize("g", FAMILY_SAMPLES, ids=repr)
def test_roundtrip_and_simple(g, tmp_path):
    assert_simple(g)
    p = tmp_path / "g.txt"
    G.write_edge_list(g, p)
    assert G.read_edge_list(p) == g
    assert b"\r" not in p.read_bytes()


class TestEdgeListFormat:
    def test_parse(self):
        g = G.parse_edge_list("3\n0 1\n1 2\n")
        assert g.n == 3 and g.edges == ((0, 1), (1, 2))

    def test_circulant_roundtrip(self, tmp_path):
        g = G.gen_circulant(8, 2)
        G.write_edge_list(g, tmp_path / "c.txt")
        assert G.read_edge_list(tmp_path / "c.txt") == g

    def test_out_of_range(self):
        with pytest.raises(VertexOutOfRange):
            G.parse_edge_list("2\n0 2\n")

    @pytest.mark.parametrize("text", ["", "x\n", "3\n0\n", "3\n0 1 2\n", "3\na b\n"])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            G.parse_edge_list(text)

    def test_self_loop(self):
        with pytest.raises(SelfLoop):
            G.parse_edge_list("3\n1 1\n")

    def test_writer_is_canonical(self, tmp_path):
        g = G.new_graph(4, [(3, 1), (2, 0)])
        G.write_edge_list(g, tmp_path / "w.txt")
        assert (tmp_path / "w.txt").read_text() == "4\n0 2\n1 3\n"


def test_components_match_dfs_on_families():
    for g in FAMILY_SAMPLES:
        part = components(g.n, g.edges)
        assert part.component_id.tolist() == dfs_labels(g.n, g.edges)


def test_log2ceil():
    assert [G.log2ceil(x) for x in (1, 2, 3, 4, 5, 400, 1024)] == [1, 1, 2, 2, 3, 9, 10]
    assert all(G.log2ceil(x) == max(1, (x - 1).bit_length()) for x in range(1, 3000))


def test_edge_arrays_sorted_for_all_pairs():
    g = G.complete_graph(6)
    assert g.edges == tuple(itertools.combinations(range(6), 2))
    assert np.array_equal(g.indptr, np.arange(0, 31, 5))
