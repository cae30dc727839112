"""Tests for seeded streams and Monte Carlo estimates."""

from fractions import Fraction

import numpy as np
import pytest

from lab.constants import (
    EVENT_CONSTANT,
    EVENT_DECREASING,
    EVENT_INCREASING,
    MC_ACCEPTANCE_SIGMAS,
    NOISE_CONTINUOUS,
    NOISE_DISCRETE,
    RUN_EVENTS,
)
from lab.exceptions import InvalidInputError
from lab.services.blockfactor import GridFunction, ProcessSpec, exact_run_probability
from lab.services.construction import construct_h
from lab.services.simulation import count_run_hits, draw_noise, mc_estimate
from lab.services.streams import chunk_sizes, generate_seed, resolve_seed, stream


def diagonal():
    return GridFunction.from_callable(2, 2, lambda z: int(z[0] == z[1]), r=2)


class TestStreams:

    def test_same_seed_same_draws(self):
        assert stream(42, 3).integers(0, 100, 10).tolist() == stream(42, 3).integers(0, 100, 10).tolist()

    def test_chunks_are_distinct(self):
        assert stream(42, 0).integers(0, 2 ** 32, 4).tolist() != stream(42, 1).integers(0, 2 ** 32, 4).tolist()

    def test_generated_seed_is_64_bit(self):
        assert 0 <= generate_seed() < 2 ** 64

    @pytest.mark.parametrize("seed", [-1, 2 ** 64])
    def test_seed_range(self, seed):
        with pytest.raises(InvalidInputError):
            resolve_seed(seed)

    def test_chunk_sizes(self):
        assert chunk_sizes(10, 4) == [4, 4, 2]
        assert chunk_sizes(8, 4) == [4, 4]


class TestNoise:

    @pytest.mark.parametrize("noise", [NOISE_DISCRETE, NOISE_CONTINUOUS])
    def test_noise_stays_on_grid(self, noise):
        points = draw_noise(stream(1), 5000, 3, 4, noise)
        assert points.shape == (5000, 3)
        assert set(np.unique(points).tolist()) == {1, 2, 3, 4}

    def test_count_run_hits(self):
        f = GridFunction.from_table(1, 3, [1, 2, 3])
        points = np.array([[1, 2, 3], [3, 2, 1], [2, 2, 2], [1, 3, 3]])
        assert count_run_hits(f, points, EVENT_INCREASING, 3) == 1
        assert count_run_hits(f, points, EVENT_DECREASING, 3) == 1
        assert count_run_hits(f, points, EVENT_CONSTANT, 3) == 1
        assert count_run_hits(f, points, EVENT_CONSTANT, 1) == 4


class TestMonteCarlo:

    def test_constant_function(self):
        estimate = mc_estimate(GridFunction.constant(2, 5), EVENT_CONSTANT, 3, 1000, seed=7)
        assert estimate.estimate == 1
        assert estimate.std_error == 0

    def test_diagonal_indicator(self):
        estimate = mc_estimate(diagonal(), EVENT_CONSTANT, 2, 10 ** 5, seed=2024)
        assert estimate.within(Fraction(1, 2), MC_ACCEPTANCE_SIGMAS)
        assert abs(estimate.std_error - 0.00158) < 0.0001

    def test_reproducible(self):
        first = mc_estimate(diagonal(), EVENT_CONSTANT, 3, 5000, seed=11)
        second = mc_estimate(diagonal(), EVENT_CONSTANT, 3, 5000, seed=11)
        assert first.to_dict() == second.to_dict()

    def test_independent_of_threads(self):
        single = mc_estimate(diagonal(), EVENT_CONSTANT, 3, 5000, seed=11, chunk_size=700)
        many = mc_estimate(diagonal(), EVENT_CONSTANT, 3, 5000, seed=11, chunk_size=700, threads=4)
        assert single.hits == many.hits

    def test_continuous_noise_agrees_with_exact(self):
        f = GridFunction.random(2, 3, 2, np.random.default_rng(4))
        exact = exact_run_probability(f, EVENT_CONSTANT, 3).probability
        estimate = mc_estimate(ProcessSpec(f, NOISE_CONTINUOUS), EVENT_CONSTANT, 3, 50000, seed=5)
        assert estimate.noise == NOISE_CONTINUOUS
        assert estimate.within(exact, MC_ACCEPTANCE_SIGMAS)

    def test_rule_backed_function(self, avoiding_coloring):
        h = construct_h(avoiding_coloring)
        exact = exact_run_probability(h.materialize(), EVENT_CONSTANT, 3).probability
        estimate = mc_estimate(h, EVENT_CONSTANT, 3, 50000, seed=6)
        assert estimate.within(exact, MC_ACCEPTANCE_SIGMAS)

    def test_generated_seed_reproduces(self):
        first = mc_estimate(diagonal(), EVENT_CONSTANT, 2, 2000)
        again = mc_estimate(diagonal(), EVENT_CONSTANT, 2, 2000, seed=first.seed)
        assert first.hits == again.hits

    def test_report_uses_strings_for_seed(self):
        data = mc_estimate(diagonal(), EVENT_CONSTANT, 2, 100, seed=2 ** 63 + 1).to_dict()
        assert data["seed"] == str(2 ** 63 + 1)

    def test_needs_samples(self):
        with pytest.raises(InvalidInputError):
            mc_estimate(diagonal(), EVENT_CONSTANT, 2, 0)

    @pytest.mark.slow
    @pytest.mark.parametrize("instance", range(20))
    def test_calibration(self, instance):
        rng = np.random.default_rng(100 + instance)
        k = int(rng.integers(1, 4))
        M = int(rng.integers(2, 6))
        f = GridFunction.random(k, M, int(rng.integers(2, 4)), rng)
        event = RUN_EVENTS[instance % 3]
        ell = int(rng.integers(2, 4))
        exact = exact_run_probability(f, event, ell).probability
        estimate = mc_estimate(f, event, ell, 10 ** 5, seed=instance)
        assert estimate.within(exact, MC_ACCEPTANCE_SIGMAS)
        assert mc_estimate(f, event, ell, 10 ** 5, seed=instance).hits == estimate.hits
