"""Tests for tower arithmetic and the explicit run-bound constants."""

import math
from fractions import Fraction

import mpmath
import pytest

from lab.exceptions import InvalidDimensionError
from lab.services.bounds import (
    M_for,
    iterated_log2,
    p_lower,
    render_number,
    theorem3_constants,
    tower,
    trichotomy_p_lower,
)


class TestTower:

    def test_level_one_is_identity(self):
        assert tower(1, 7).value == 7

    def test_integer_tower(self):
        assert tower(3, 4).value == 65536
        assert tower(3, 4).is_exact

    def test_real_argument(self):
        value = tower(2, Fraction(5, 2)).value
        assert isinstance(value, mpmath.mpf)
        assert abs(value - mpmath.sqrt(32)) < mpmath.mpf("1e-12")
        assert render_number(value, 4) == "5.657"

    def test_log_consistency(self):
        t = tower(4, 3)
        assert t.value == 2 ** 256
        assert t.log2().value == tower(3, 3).value == 256

    def test_symbolic_above_bit_limit(self):
        t = tower(5, 4)
        assert not t.materialized
        assert t.pending_levels == 1
        assert t.to_dict()["symbolic"] == "2^2^2^2^(4)"
        assert t.log_chain()[0] == "2^65536"

    def test_bit_limit_is_inclusive(self):
        assert tower(2, 10 ** 6 - 1).value.bit_length() == 10 ** 6
        assert not tower(2, 10 ** 6).materialized
        assert tower(2, 10, max_bits=11).value == 1024
        assert not tower(2, 11, max_bits=11).materialized

    @pytest.mark.parametrize("smaller,larger", [
        ((3, 4), (3, 5)),
        ((3, 4), (4, 4)),
        ((4, 4), (5, 4)),
        ((3, 5), (4, 3)),
    ])
    def test_monotone(self, smaller, larger):
        assert tower(*smaller) < tower(*larger)

    def test_equal_towers(self):
        assert tower(2, 4) == tower(1, 16)

    def test_level_zero(self):
        with pytest.raises(InvalidDimensionError):
            tower(0, 3)

    def test_iterated_log(self):
        assert abs(iterated_log2(65536, 2) - 4) < mpmath.mpf("1e-25")
        assert iterated_log2(1, 2) == mpmath.mpf("-inf")


class TestConstants:

    def test_m_for_desk_scale(self):
        assert M_for(2, 2, 2).value == 4
        assert M_for(3, 2, 2).value == 16
        assert M_for(4, 2, 3).value == 2 ** 256

    def test_m_for_needs_k2(self):
        with pytest.raises(InvalidDimensionError):
            M_for(1, 2, 2)

    def test_p_lower(self):
        report = p_lower(2, 2, 2)
        assert report.p_lower == Fraction(1, 64)
        data = report.to_dict()
        assert data["M"] == "4"
        assert data["p_lower"] == "1/64"
        assert data["log2_p_lower"] == "-6"

    def test_p_lower_k3(self):
        assert p_lower(3, 2, 2).p_lower == Fraction(1, 65536)

    def test_single_window_run(self):
        report = p_lower(2, 1, 5)
        assert report.M.value == 1
        assert report.p_lower == 1

    def test_huge_p_lower_stays_symbolic(self):
        report = p_lower(5, 2, 3)
        assert report.p_lower is None
        assert report.log2_p.startswith("-6*")

    def test_trichotomy_constant(self):
        # three sign values, one more coordinate, one window fewer
        assert trichotomy_p_lower(2, 2).p_lower == p_lower(3, 1, 3).p_lower

    def test_trichotomy_needs_two_windows(self):
        with pytest.raises(InvalidDimensionError):
            trichotomy_p_lower(2, 1)


class TestConstruction:

    def test_k4_is_vacuous(self):
        report = theorem3_constants(4)
        assert report.vacuous
        assert abs(report.theorem3_M.value - mpmath.mpf(2) ** mpmath.sqrt(2)) < mpmath.mpf("1e-12")
        assert 53 < report.theorem3_bound < 55

    def test_k8_is_astronomically_small(self):
        report = theorem3_constants(8)
        assert not report.vacuous
        assert not report.theorem3_M.materialized
        assert report.to_dict()["theorem3_M_tower"]["levels"] == 6

    @pytest.mark.parametrize("k", [3, 4, 5, 6, 7, 8])
    def test_bound_positive(self, k):
        report = theorem3_constants(k)
        assert report.theorem3_M.materialized == (k <= 6)
        if report.theorem3_M.materialized:
            assert report.theorem3_bound > 0
            log2_bound = mpmath.mpf(report.log2_theorem3_bound)
            assert mpmath.almosteq(mpmath.mpf(2) ** log2_bound, report.theorem3_bound, rel_eps=1e-6)
        else:
            assert report.theorem3_bound is None
            assert not report.vacuous
            head, _, tail = report.log2_theorem3_bound.partition("-")
            assert abs(float(head) - math.log2(9 * k * k)) < 1e-9
            assert tail

    def test_rejects_small_k(self):
        with pytest.raises(InvalidDimensionError):
            theorem3_constants(2)
