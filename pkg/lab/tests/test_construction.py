"""Tests for the four-case construction and its constant-window check."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from lab.checkers.impossibility_checker import ImpossibilityChecker, RunBoundChecker, constant_windows
from lab.constants import EVENT_CONSTANT, MODE_EXHAUSTIVE, MODE_SAMPLED
from lab.exceptions import ConstructionViolationError, InvalidDimensionError, InvalidInputError
from lab.services.blockfactor import RunReport, exact_run_probability
from lab.services.coloring import VertexColoring, find_mono_path, search_coloring
from lab.services.construction import FourCaseRule, alpha, construct_h
from lab.services.debruijn import build_graph
from lab.services.simulation import mc_estimate


class TestConstructH:

    def test_alpha(self):
        assert alpha(1, 3) == 0
        assert alpha(3, 2) == 1
        assert alpha(2, 2) == 1

    def test_four_cases(self, avoiding_coloring):
        h = construct_h(avoiding_coloring)
        graph = build_graph(3, 9)
        for word in graph.vertices():
            assert h(word) == avoiding_coloring.color_of(graph, word)
            assert h(word[::-1]) == h(word)
        assert h((4, 4, 7)) == 0
        assert h((2, 5, 2)) == 0
        assert h((2, 1, 3)) == 0
        assert h((1, 3, 2)) == 1

    def test_vectorized_matches_scalar(self, avoiding_coloring):
        h = construct_h(avoiding_coloring)
        points = np.array(list(itertools.product(range(1, 10), repeat=3)))
        assert h.rule.vectorized(points).tolist() == [h(tuple(p)) for p in points]

    def test_materialize(self, avoiding_coloring):
        table = construct_h(avoiding_coloring).materialize()
        assert table.is_tabular
        assert len(table.table) == 9 ** 3
        assert set(table.table) <= {0, 1}

    def test_rejects_small_k(self):
        graph = build_graph(2, 5)
        with pytest.raises(InvalidDimensionError):
            construct_h(VertexColoring.uniform(graph))

    def test_rejects_three_colors(self):
        graph = build_graph(3, 5)
        with pytest.raises(InvalidInputError):
            construct_h(VertexColoring(3, 5, 3, [0] * graph.vertex_count))


class TestImpossibility:

    def test_exhaustive(self, avoiding_coloring):
        result = ImpossibilityChecker().check(construct_h(avoiding_coloring))
        assert result.mode == MODE_EXHAUSTIVE
        assert result.passed
        assert result.counts == {"tuples_checked": 362880, "violations": 0}

    def test_sampled_is_seeded(self, avoiding_coloring):
        h = construct_h(avoiding_coloring)
        first = ImpossibilityChecker().check(h, mode=MODE_SAMPLED, samples=20000, seed=3)
        second = ImpossibilityChecker().check(h, mode=MODE_SAMPLED, samples=20000, seed=3, threads=4)
        assert first.passed and second.passed
        assert first.to_dict() == second.to_dict()

    @pytest.mark.slow
    def test_million_sampled_tuples(self, avoiding_coloring):
        result = ImpossibilityChecker().check(
            construct_h(avoiding_coloring), mode=MODE_SAMPLED, samples=10 ** 6, seed=2024,
        )
        assert result.passed
        assert result.counts["violations"] == 0

    def test_monotone_tuple_of_a_uniform_coloring_is_constant(self):
        rule = FourCaseRule(VertexColoring.uniform(build_graph(3, 9)))
        tuples = np.array([list(range(1, 10)), [1, 2, 3, 4, 5, 6, 7, 9, 8]])
        assert constant_windows(rule, tuples).tolist() == [True, False]

    def test_rejects_coloring_with_mono_path(self):
        h = construct_h(VertexColoring.uniform(build_graph(3, 9)))
        with pytest.raises(InvalidInputError):
            ImpossibilityChecker().check(h)

    def test_too_few_coordinates(self):
        outcome = search_coloring(3, 6, 2, 3)
        assert find_mono_path(build_graph(3, 6), outcome.coloring, 3) is None
        result = ImpossibilityChecker().check(construct_h(outcome.coloring))
        assert not result.hypothesis_met
        assert result.passed

    def test_rejects_tabular_function(self, avoiding_coloring):
        with pytest.raises(InvalidInputError):
            ImpossibilityChecker().check(construct_h(avoiding_coloring).materialize())

    def test_violations_count_every_hit(self, avoiding_coloring, monkeypatch):
        monkeypatch.setattr(
            "lab.checkers.impossibility_checker.constant_windows", lambda rule, tuples: tuples[:, 0] == 1,
        )
        result = ImpossibilityChecker().check(construct_h(avoiding_coloring))
        assert not result.passed
        assert result.counts == {"tuples_checked": 362880, "violations": math.factorial(8)}
        assert result.counterexample == list(range(1, 10))
        assert result.failure_kind == ConstructionViolationError.kind

    def test_sampled_violations_are_summed(self, avoiding_coloring, monkeypatch):
        monkeypatch.setattr(
            "lab.checkers.impossibility_checker.constant_windows", lambda rule, tuples: np.ones(len(tuples), bool),
        )
        result = ImpossibilityChecker().check(
            construct_h(avoiding_coloring), mode=MODE_SAMPLED, samples=5000, seed=8, threads=2,
        )
        assert result.counts == {"tuples_checked": 5000, "violations": 5000}


class TestRunBound:

    def test_exact_probability_below_distinct_bound(self, avoiding_coloring):
        result = RunBoundChecker().check(construct_h(avoiding_coloring))
        assert result.mode == MODE_EXHAUSTIVE
        assert result.passed, result.messages
        details = result.details
        assert details["windows"] == 7
        assert details["distinct_bound"] == 1 - Fraction(math.factorial(9), 9 ** 9)
        assert details["quadratic_bound"] == 9
        assert details["probability"] <= details["distinct_bound"]
        assert result.counts["total"] == 9 ** 9

    def test_monte_carlo_agrees_with_exact(self, avoiding_coloring):
        h = construct_h(avoiding_coloring)
        exact = exact_run_probability(h, EVENT_CONSTANT, 7).probability
        estimate = mc_estimate(h, EVENT_CONSTANT, 7, 50000, seed=12)
        spread = math.sqrt(float(exact * (1 - exact)) / 50000)
        assert abs(float(estimate.estimate - exact)) <= 5 * spread

    def test_sampled(self, avoiding_coloring):
        result = RunBoundChecker().check(construct_h(avoiding_coloring), mode=MODE_SAMPLED, samples=20000, seed=6)
        assert result.mode == MODE_SAMPLED
        assert result.passed
        assert result.details["seed"] == 6
        assert result.counts["samples"] == 20000

    def test_small_grid_bound_is_trivial(self):
        outcome = search_coloring(3, 6, 2, 3)
        result = RunBoundChecker().check(construct_h(outcome.coloring))
        assert result.details["distinct_bound"] == 1
        assert result.passed

    def test_probability_above_bound_fails(self, avoiding_coloring, monkeypatch):
        monkeypatch.setattr(
            "lab.checkers.impossibility_checker.exact_run_probability",
            lambda h, event, ell: RunReport(event, ell, h.k, h.M, h.M ** (ell + h.k - 1), h.M ** (ell + h.k - 1)),
        )
        result = RunBoundChecker().check(construct_h(avoiding_coloring))
        assert not result.passed
        assert result.failure_kind == ConstructionViolationError.kind

    def test_rejects_coloring_with_mono_path(self):
        with pytest.raises(InvalidInputError):
            RunBoundChecker().check(construct_h(VertexColoring.uniform(build_graph(3, 9))))
