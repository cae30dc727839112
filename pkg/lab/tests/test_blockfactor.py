"""Tests for grid functions and exact run probabilities."""

from fractions import Fraction
from math import comb

import numpy as np
import pytest

from lab.constants import EVENT_CONSTANT, EVENT_DECREASING, EVENT_INCREASING, NOISE_CONTINUOUS, RUN_EVENTS
from lab.exceptions import InvalidInputError, ResourceError
from lab.services.blockfactor import (
    GridFunction,
    ProcessSpec,
    coloring_from_function,
    derived_sign_function,
    exact_run_probability,
    mono_path_count,
    naive_run_count,
    value_run_probability,
    window_run_counts,
)
from lab.services.coloring import VertexColoring, chromatic_coloring
from lab.services.debruijn import build_graph


def diagonal():
    """f(x_1, x_2) = 1 iff x_1 = x_2 on {1,2}^2."""
    return GridFunction.from_callable(2, 2, lambda z: int(z[0] == z[1]), r=2)


def identity(M):
    return GridFunction.from_table(1, M, list(range(1, M + 1)))


class TestGridFunction:

    def test_table_order_has_first_coordinate_fastest(self):
        f = GridFunction.from_callable(2, 3, lambda z: 10 * z[0] + z[1])
        assert f.index((2, 1)) == 1
        assert f.index((1, 2)) == 3
        assert f.table[:4] == (11, 21, 31, 12)
        assert list(f.points())[3] == (1, 2)

    def test_diagonal_table(self):
        assert diagonal().table == (1, 0, 0, 1)

    def test_rationals(self):
        f = GridFunction.from_table(1, 2, ["1/2", "4/2"])
        assert f.table == (Fraction(1, 2), 2)
        assert f.to_dict()["table"] == ["1/2", 2]

    def test_wrong_table_length(self):
        with pytest.raises(InvalidInputError):
            GridFunction.from_table(2, 2, [0, 1, 0], r=2)

    def test_value_outside_colors(self):
        with pytest.raises(InvalidInputError):
            GridFunction.from_table(1, 2, [0, 2], r=2)

    def test_coordinate_outside_grid(self):
        with pytest.raises(InvalidInputError):
            identity(3)((4,))

    def test_value_codes_preserve_order(self):
        f = GridFunction.from_table(1, 4, ["3/2", -1, 7, "3/2"])
        codes, values = f.value_codes()
        assert values == [-1, Fraction(3, 2), 7]
        assert codes.tolist() == [1, 0, 2, 1]

    def test_evaluate_codes(self):
        f = GridFunction.from_callable(2, 3, lambda z: (z[0] + z[1]) % 2, r=2)
        points = np.array([[1, 1], [1, 2], [3, 2]])
        assert f.evaluate_codes(points).tolist() == [0, 1, 1]


class TestExactRunProbability:

    @pytest.mark.parametrize("k,M,ell", [(1, 3, 4), (2, 2, 2), (3, 2, 5)])
    def test_constant_function(self, k, M, ell):
        assert exact_run_probability(GridFunction.constant(k, M), EVENT_CONSTANT, ell).probability == 1

    def test_diagonal_indicator(self):
        report = exact_run_probability(diagonal(), EVENT_CONSTANT, 2)
        assert (report.favorable_count, report.total_count) == (4, 8)
        assert report.probability == Fraction(1, 2)

    def test_identity_runs(self):
        assert exact_run_probability(identity(2), EVENT_CONSTANT, 2).probability == Fraction(1, 2)
        assert exact_run_probability(identity(3), EVENT_INCREASING, 2).probability == Fraction(1, 3)
        assert exact_run_probability(identity(3), EVENT_DECREASING, 3).probability == Fraction(1, 27)

    @pytest.mark.parametrize("event", RUN_EVENTS)
    def test_single_window(self, event):
        assert exact_run_probability(diagonal(), event, 1).probability == 1

    def test_process_spec(self):
        spec = ProcessSpec(diagonal(), NOISE_CONTINUOUS)
        assert exact_run_probability(spec, EVENT_CONSTANT, 2).probability == Fraction(1, 2)

    def test_counts_beyond_int64(self):
        report = exact_run_probability(identity(2), EVENT_CONSTANT, 63)
        assert report.total_count == 2 ** 63
        assert report.favorable_count == 2
        assert report.to_dict()["total_count"] == str(2 ** 63)

    def test_state_budget(self):
        with pytest.raises(ResourceError):
            exact_run_probability(GridFunction.constant(3, 4), EVENT_CONSTANT, 10, state_budget=100)

    def test_unknown_event(self):
        with pytest.raises(InvalidInputError):
            exact_run_probability(diagonal(), "sideways", 2)

    def test_batch_counts_match_single(self):
        rng = np.random.default_rng(5)
        tables = rng.integers(0, 3, size=(6, 9))
        batched = window_run_counts(tables, 3, 2, 3)
        single = [window_run_counts(t, 3, 2, 3)[0] for t in tables]
        assert batched == single

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_naive_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 4))
        M = int(rng.integers(2, 5))
        ell = int(rng.integers(1, 4))
        f = GridFunction.random(k, M, int(rng.integers(1, 4)), rng)
        for event in RUN_EVENTS:
            assert exact_run_probability(f, event, ell).favorable_count == naive_run_count(f, event, ell).favorable_count

    def test_naive_limit(self):
        with pytest.raises(ResourceError):
            naive_run_count(identity(10), EVENT_CONSTANT, 8, limit=1000)


class TestDerivedSignFunction:

    def test_identity_signs(self):
        g = derived_sign_function(identity(2))
        assert (g.k, g.M) == (2, 2)
        assert g((1, 2)) == 1
        assert g((2, 1)) == -1
        assert g((1, 1)) == g((2, 2)) == 0

    def test_constant_is_zero(self):
        assert set(derived_sign_function(GridFunction.constant(2, 3)).table) == {0}

    @pytest.mark.parametrize("seed", range(5))
    def test_constant_run_is_zero_run(self, seed):
        rng = np.random.default_rng(seed)
        f = GridFunction.random(2, 3, 3, rng)
        for ell in (2, 3, 4):
            direct = exact_run_probability(f, EVENT_CONSTANT, ell).probability
            assert value_run_probability(derived_sign_function(f), 0, ell - 1) == direct

    def test_empty_run(self):
        assert value_run_probability(identity(3), 1, 0) == 1

    def test_absent_value(self):
        assert value_run_probability(identity(3), 9, 2) == 0


class TestMonoPathCount:

    def test_single_edge(self):
        graph = build_graph(2, 3)
        assert mono_path_count(VertexColoring.uniform(graph), 2) == 1

    def test_all_edges(self):
        graph = build_graph(2, 4)
        assert mono_path_count(VertexColoring.uniform(graph), 2) == 4
        assert mono_path_count(VertexColoring.uniform(graph), 3) == 1

    def test_proper_coloring_has_no_edge_paths(self):
        _chi, proper = chromatic_coloring(build_graph(2, 4))
        assert mono_path_count(proper, 2) == 0

    def test_single_vertices(self):
        graph = build_graph(3, 6)
        assert mono_path_count(VertexColoring.uniform(graph), 1) == comb(6, 3)

    def test_coloring_from_function(self):
        f = GridFunction.from_callable(2, 4, lambda z: int(z[0] + 1 == z[1]), r=2)
        vc = coloring_from_function(f)
        graph = build_graph(2, 4)
        assert vc.colors == tuple(int(w[0] + 1 == w[1]) for w in graph.vertices())

    def test_permuted_coloring(self):
        f = GridFunction.from_callable(2, 3, lambda z: z[0], r=None)
        vc = coloring_from_function(f, y=(3, 2, 1))
        # word (a_1, a_2) gets y_{a_1} = 4 - a_1, coded 3 - a_1
        graph = build_graph(2, 3)
        assert vc.colors == tuple(3 - w[0] for w in graph.vertices())
