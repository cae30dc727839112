"""Tests for the increasing de Bruijn graph service."""

import itertools
from math import comb

import networkx as nx
import pytest

from lab.exceptions import InvalidDimensionError, InvalidEdgeError, InvalidInputError, RankRangeError, ResourceError
from lab.services.debruijn import IncreasingWord, build_graph, edge_to_word, rank, unrank, word_to_edge

SMALL_GRAPHS = [(k, m) for m in range(1, 9) for k in range(1, m + 1) if comb(m, k) <= 500]


class TestBuildGraph:

    def test_k1_edges_are_all_increasing_pairs(self):
        graph = build_graph(1, 4)
        assert graph.vertex_count == 4
        assert graph.edge_count == 6
        assert len(list(graph.edges())) == 6

    def test_d23_has_one_edge(self):
        graph = build_graph(2, 3)
        assert set(graph.vertices()) == {(1, 2), (1, 3), (2, 3)}
        assert list(graph.edges()) == [((1, 2), (2, 3))]

    def test_single_vertex_graph(self):
        graph = build_graph(3, 3)
        assert graph.vertex_count == 1
        assert list(graph.edges()) == []

    @pytest.mark.parametrize("k,m", [(0, 3), (4, 3), (-1, 2)])
    def test_invalid_dimensions(self, k, m):
        with pytest.raises(InvalidDimensionError):
            build_graph(k, m)

    def test_vertex_budget(self):
        with pytest.raises(ResourceError) as excinfo:
            build_graph(3, 20, vertex_budget=100)
        assert excinfo.value.details["vertex_count"] == comb(20, 3)

    @pytest.mark.parametrize("k,m", SMALL_GRAPHS)
    def test_edges_match_overlap_rule(self, k, m):
        graph = build_graph(k, m)
        words = list(itertools.combinations(range(1, m + 1), k))
        expected = {
            (u, v) for u in words for v in words
            if v[:-1] == u[1:] and v[-1] > u[-1]
        }
        assert {(tuple(u), tuple(v)) for u, v in graph.edges()} == expected
        assert graph.edge_count == comb(m, k + 1)

    def test_rank_order_is_topological(self):
        graph = build_graph(3, 7)
        assert all(u < v for u, v in graph.edge_ranks())
        assert nx.is_directed_acyclic_graph(graph.to_networkx())


class TestRanking:

    def test_first_word(self):
        assert unrank(0, 2, 3) == (1, 2)

    def test_round_trip(self):
        graph = build_graph(3, 6)
        assert [graph.rank(graph.unrank(i)) for i in range(graph.vertex_count)] == list(range(20))

    def test_unrank_covers_all_pairs(self):
        assert {unrank(i, 2, 4) for i in range(6)} == set(itertools.combinations(range(1, 5), 2))

    def test_module_level_rank(self):
        assert rank((2, 3), 3) == 2

    def test_out_of_range(self):
        with pytest.raises(RankRangeError):
            unrank(6, 2, 4)

    def test_word_must_increase(self):
        with pytest.raises(InvalidInputError):
            IncreasingWord((2, 2))

    def test_word_outside_alphabet(self):
        with pytest.raises(InvalidInputError):
            build_graph(2, 3).rank((1, 4))


class TestAdjacency:

    def test_successors(self):
        graph = build_graph(2, 4)
        assert graph.successors((1, 2)) == [(2, 3), (2, 4)]
        assert graph.successors((3, 4)) == []
        assert build_graph(3, 5).successors((1, 3, 4)) == [(3, 4, 5)]

    def test_predecessors(self):
        assert build_graph(2, 4).predecessors((2, 4)) == [(1, 2)]

    @pytest.mark.parametrize("k,m", SMALL_GRAPHS)
    def test_rank_adjacency_matches_word_adjacency(self, k, m):
        graph = build_graph(k, m)
        for index in range(graph.vertex_count):
            word = graph.unrank(index)
            assert graph.successor_ranks(index) == [graph.rank(w) for w in graph.successors(word)]
            assert sorted(graph.predecessor_ranks(index)) == sorted(graph.rank(w) for w in graph.predecessors(word))

    def test_implicit_adjacency_matches_materialized(self, settings):
        graph = build_graph(2, 6)
        materialized = [graph.successor_ranks(i) for i in range(graph.vertex_count)]
        settings.RUNLAB = {**settings.RUNLAB, "MATERIALIZE_LIMIT": 0}
        implicit = build_graph(2, 6)
        assert [implicit.successor_ranks(i) for i in range(implicit.vertex_count)] == materialized


class TestLineGraph:

    def test_edge_to_word(self):
        graph = build_graph(2, 3)
        assert edge_to_word(graph, ((1, 2), (2, 3))) == (1, 2, 3)
        assert word_to_edge(graph, (1, 2, 3)) == ((1, 2), (2, 3))

    @pytest.mark.parametrize("k,m", SMALL_GRAPHS)
    def test_bijection(self, k, m):
        graph = build_graph(k, m)
        images = {graph.edge_to_word(u, v) for u, v in graph.edges()}
        assert images == set(itertools.combinations(range(1, m + 1), k + 1))
        assert all(graph.word_to_edge(graph.edge_to_word(u, v)) == (u, v) for u, v in graph.edges())

    def test_edge_index_matches_edge_ranks(self):
        graph = build_graph(2, 6)
        for index in range(graph.edge_count):
            u, v = graph.edge_ranks_of_index(index)
            assert graph.edge_index_of_ranks(u, v) == index

    def test_non_edge(self):
        with pytest.raises(InvalidEdgeError):
            build_graph(2, 4).edge_to_word((1, 2), (1, 3))

    def test_word_of_wrong_length(self):
        with pytest.raises(InvalidEdgeError):
            build_graph(2, 4).word_to_edge((1, 2))


def test_summary_and_csv():
    graph = build_graph(2, 3)
    assert graph.summary() == {"k": 2, "m": 3, "vertex_count": 3, "edge_count": 1}
    assert graph.edge_list_csv() == "source_rank,target_rank\n0,2\n"
