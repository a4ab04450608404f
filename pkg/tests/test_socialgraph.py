"""Follow-graph statistics and centralities: hand-checked cases plus
property-based comparison against the brute-force oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graph_oracles import (
    assortativity as oracle_assortativity,
    betweenness as oracle_betweenness,
    closeness as oracle_closeness,
    clustering as oracle_clustering,
    eigenvector as oracle_eigenvector,
    mean_distance as oracle_mean_distance,
    reciprocity as oracle_reciprocity,
    scc_sizes as oracle_scc_sizes,
)
from teamswitch.errors import DegenerateGraph, NoEdges
from teamswitch.socialgraph import (
    CentralityKind,
    CentralityScores,
    build_graph,
    centrality,
    clustering_coefficient,
    degree_assortativity,
    degree_histogram,
    eigenvector_scores,
    graph_stats,
    mean_distance,
    reciprocity,
    single_source_distances,
    strongly_connected_components,
    top_k,
)


def names(indices):
    return [f"n{i}" for i in indices]


def graph_from(n, int_edges):
    return build_graph([(f"n{u}", f"n{v}") for u, v in int_edges], nodes=names(range(n)))


class TestBuildGraph:
    def test_nodes_sorted_and_indexed(self):
        g = build_graph([("b", "a"), ("c", "a")])
        assert g.nodes == ("a", "b", "c")
        assert g.index == {"a": 0, "b": 1, "c": 2}

    def test_duplicates_and_self_loops_dropped(self):
        g = build_graph([("a", "b"), ("a", "b"), ("b", "b")])
        assert g.m == 1
        assert list(g.edges()) == [(0, 1)]

    def test_declared_isolated_nodes_kept(self):
        g = build_graph([("a", "b")], nodes=["a", "b", "z"])
        assert g.n == 3
        assert g.out_degrees().tolist() == [1, 0, 0]

    def test_undeclared_endpoint_rejected(self):
        with pytest.raises(ValueError):
            build_graph([("a", "mystery")], nodes=["a", "b"])


class TestStatsHandCases:
    def test_two_cycle(self):
        g = build_graph([("a", "b"), ("b", "a")])
        s = graph_stats(g)
        assert (s.n, s.m) == (2, 2)
        assert s.c == 1.0
        assert s.S == 1.0
        assert s.ell == 1.0
        assert s.C == 0.0
        assert s.r == 1.0
        assert s.a == 0.0  # constant degrees: zero variance

    def test_directed_triangle(self):
        g = build_graph([("a", "b"), ("b", "c"), ("c", "a")])
        s = graph_stats(g)
        assert s.S == 1.0
        assert s.ell == pytest.approx(1.5)  # three pairs at 1, three at 2
        assert s.C == 1.0
        assert s.r == 0.0

    def test_chain_mean_distance_ignores_unreachable(self):
        g = graph_from(3, [(0, 1), (1, 2)])
        # finite ordered pairs: 0->1 (1), 0->2 (2), 1->2 (1)
        assert mean_distance(g) == pytest.approx(4.0 / 3.0)

    def test_empty_graph_rejected(self):
        with pytest.raises(DegenerateGraph):
            graph_stats(build_graph([]))

    def test_single_node_stats(self):
        g = build_graph([], nodes=["a"])
        s = graph_stats(g)
        assert (s.n, s.m, s.c, s.S) == (1, 0, 0.0, 1.0)
        assert (s.ell, s.C, s.r, s.a) == (0.0, 0.0, 0.0, 0.0)

    def test_scc_partition(self):
        g = graph_from(5, [(0, 1), (1, 0), (2, 3), (3, 4), (4, 2)])
        comps = strongly_connected_components(g)
        sizes = sorted(len(c) for c in comps)
        assert sizes == [2, 3]
        assert sorted(i for comp in comps for i in comp) == list(range(5))

    def test_distances(self):
        g = graph_from(4, [(0, 1), (1, 2)])
        d = single_source_distances(g, 0)
        assert d[0] == 0 and d[1] == 1 and d[2] == 2 and np.isinf(d[3])


class TestCentralityHandCases:
    def test_path_betweenness(self):
        g = graph_from(3, [(0, 1), (1, 2)])
        scores = centrality(g, CentralityKind.BETWEENNESS).scores
        assert scores == {"n0": 0.0, "n1": 1.0, "n2": 0.0}

    def test_closeness_definition(self):
        g = graph_from(3, [(0, 1), (1, 2)])
        scores = centrality(g, CentralityKind.CLOSENESS).scores
        assert scores["n0"] == pytest.approx(2.0 / 3.0)
        assert scores["n1"] == pytest.approx(1.0)
        assert scores["n2"] == 0.0

    def test_degree_kinds(self):
        g = graph_from(3, [(0, 1), (2, 1)])
        assert centrality(g, CentralityKind.IN_DEGREE).scores["n1"] == 2.0
        assert centrality(g, CentralityKind.OUT_DEGREE).scores["n1"] == 0.0
        assert centrality(g, CentralityKind.DEGREE).scores["n1"] == 2.0

    def test_eigenvector_symmetric_complete(self):
        n = 4
        edges = [(i, j) for i in range(n) for j in range(n) if i != j]
        g = graph_from(n, edges)
        values = eigenvector_scores(g)
        assert np.allclose(values, 1.0)

    def test_eigenvector_needs_edges(self):
        with pytest.raises(NoEdges):
            eigenvector_scores(build_graph([], nodes=["a", "b"]))

    def test_eigenvector_start_vector_validated(self):
        g = build_graph([("a", "b")])
        with pytest.raises(ValueError):
            eigenvector_scores(g, start=np.array([1.0, -1.0]))

    def test_parse_kind(self):
        assert CentralityKind.parse(" In-Degree ") is CentralityKind.IN_DEGREE
        with pytest.raises(ValueError):
            CentralityKind.parse("pagerank")

    def test_top_k_tie_breaks_by_id(self):
        scores = CentralityScores(CentralityKind.DEGREE,
                                  {"b": 1.0, "a": 1.0, "c": 2.0})
        assert top_k(scores, 3) == [("c", 2.0), ("a", 1.0), ("b", 1.0)]
        with pytest.raises(ValueError):
            top_k(scores, 0)

    def test_degree_histogram_bins_consecutive(self):
        g = graph_from(4, [(0, 1), (0, 2), (0, 3), (1, 2)])
        hist = degree_histogram(g, CentralityKind.OUT_DEGREE)
        assert hist == [(0, 2), (1, 1), (2, 0), (3, 1)]
        with pytest.raises(ValueError):
            degree_histogram(g, CentralityKind.CLOSENESS)


@st.composite
def small_digraphs(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    possible = [(u, v) for u in range(n) for v in range(n) if u != v]
    edges = draw(st.sets(st.sampled_from(possible)) if possible else st.just(set()))
    return n, set(edges)


@settings(max_examples=120, deadline=None)
@given(small_digraphs())
def test_stats_match_oracles(case):
    n, edges = case
    g = graph_from(n, edges)
    s = graph_stats(g)
    assert s.n == n and s.m == len(edges)
    assert s.c == pytest.approx(len(edges) / n)
    assert s.S == pytest.approx(max(oracle_scc_sizes(n, edges)) / n)
    assert s.ell == pytest.approx(oracle_mean_distance(n, edges), abs=1e-12)
    assert s.C == pytest.approx(oracle_clustering(n, edges), abs=1e-12)
    assert s.r == pytest.approx(oracle_reciprocity(edges), abs=1e-12)
    assert s.a == pytest.approx(oracle_assortativity(n, edges), abs=1e-12)
    assert 0.0 <= s.S <= 1.0 and 0.0 <= s.C <= 1.0 and 0.0 <= s.r <= 1.0
    assert -1.0 - 1e-12 <= s.a <= 1.0 + 1e-12


@settings(max_examples=80, deadline=None)
@given(small_digraphs())
def test_path_centralities_match_oracles(case):
    n, edges = case
    g = graph_from(n, edges)
    bc = [centrality(g, CentralityKind.BETWEENNESS).scores[f"n{i}"] for i in range(n)]
    assert np.allclose(bc, oracle_betweenness(n, edges), atol=1e-9)
    cl = [centrality(g, CentralityKind.CLOSENESS).scores[f"n{i}"] for i in range(n)]
    assert np.allclose(cl, oracle_closeness(n, edges), atol=1e-9)


@settings(max_examples=80, deadline=None)
@given(small_digraphs())
def test_eigenvector_matches_dense_oracle(case):
    n, edges = case
    if not edges:
        return
    g = graph_from(n, edges)
    ours = eigenvector_scores(g, tol=1e-13)
    assert np.allclose(ours, oracle_eigenvector(n, edges), atol=1e-9)


def test_reciprocity_and_clustering_standalone():
    g = build_graph([("a", "b"), ("b", "a"), ("b", "c")])
    assert reciprocity(g) == pytest.approx(2.0 / 3.0)
    assert clustering_coefficient(g) == 0.0
    assert degree_assortativity(build_graph([])) == 0.0
