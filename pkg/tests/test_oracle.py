"""Unit tests for the exact univariate minimization oracle."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from socfopt.oracle import companion_root_clusters, count_roots, global_min
from socfopt.poly import IntervalSpec, SparsePoly

from helpers import HALF_LINE, ONE_THREE, UNIT, gen_sparse

FULL = IntervalSpec.full_line()


def P(*terms):
    return SparsePoly.from_terms(terms)


class TestExactMinima:
    def test_shifted_square_interior(self):
        # (t - 1)^2 + 2
        f = P((2, 1), (1, -2), (0, 3))
        res = global_min(f, HALF_LINE)
        assert res.min_exact == 2
        assert res.min_value == 2.0
        assert math.isclose(res.argmin, 1.0, abs_tol=1e-9)

    def test_minimum_at_left_endpoint(self):
        f = P((1, 1), (0, 1))  # t + 1, increasing
        res = global_min(f, HALF_LINE)
        assert res.min_exact == 1 and res.argmin == 0.0

    def test_minimum_at_right_endpoint(self):
        f = P((1, -1), (0, 1))  # 1 - t, decreasing
        res = global_min(f, UNIT)
        assert res.min_exact == 0 and res.argmin == 1.0

    def test_right_half_line_endpoint(self):
        # (t - 1)^2 + 2 is increasing past 1, so on [3, inf) the min sits at 3.
        f = P((2, 1), (1, -2), (0, 3))
        res = global_min(f, IntervalSpec.right_half_line(3.0))
        assert res.min_exact == 6 and res.argmin == 3.0

    def test_compact_interior(self):
        f = P((2, 1), (1, -4), (0, 5))  # (t - 2)^2 + 1
        res = global_min(f, ONE_THREE)
        assert res.min_exact == 1 and res.argmin == 2.0

    def test_full_line_even(self):
        f = P((4, 1), (0, -7))  # t^4 - 7, min at 0
        res = global_min(f, FULL)
        assert res.min_exact == -7 and res.argmin == 0.0

    def test_rational_coefficients(self):
        # (t - 1/2)^2 = t^2 - t + 1/4 with exact rational minimizer
        f = P((2, Fraction(1)), (1, Fraction(-1)), (0, Fraction(1, 4)))
        res = global_min(f, HALF_LINE)
        assert res.min_exact == 0
        assert math.isclose(res.argmin, 0.5, abs_tol=1e-9)

    def test_constant_polynomial(self):
        res = global_min(SparsePoly.constant(Fraction(5)), HALF_LINE)
        assert res.min_exact == 5 and res.argmin == 0.0

    def test_zero_polynomial_rejected(self):
        with pytest.raises(ValueError):
            global_min(SparsePoly.zero(), HALF_LINE)
        with pytest.raises(ValueError):
            count_roots(SparsePoly.zero(), HALF_LINE)


class TestUnboundedDetection:
    def test_negative_leading_half_line(self):
        res = global_min(P((1, -1)), HALF_LINE)
        assert res.min_value == -math.inf and res.argmin is None

    def test_odd_degree_full_line(self):
        res = global_min(P((3, 1), (0, 4)), FULL)
        assert res.min_value == -math.inf and res.argmin is None

    def test_negative_even_full_line(self):
        res = global_min(P((2, -1), (0, 10)), FULL)
        assert res.min_value == -math.inf

    def test_bounded_interval_never_unbounded(self):
        res = global_min(P((3, -5), (0, 1)), UNIT)
        assert res.min_value == -4.0  # attained at t = 1


class TestRootCounting:
    def test_multiplicity_counted(self):
        # (t - 1)^2 (t - 3) = t^3 - 5 t^2 + 7 t - 3
        f = P((3, 1), (2, -5), (1, 7), (0, -3))
        assert count_roots(f, HALF_LINE) == 3
        assert count_roots(f, UNIT) == 2
        assert count_roots(f, IntervalSpec.right_half_line(2.0)) == 1
        assert count_roots(f, FULL) == 3

    def test_no_real_roots(self):
        assert count_roots(P((2, 1), (0, 1)), FULL) == 0

    def test_root_list_reported_by_oracle(self):
        f = P((2, 1), (1, -2), (0, 1))  # (t - 1)^2
        res = global_min(f, HALF_LINE)
        assert len(res.root_list) == 1
        loc, mult = res.root_list[0]
        assert mult == 2 and math.isclose(loc, 1.0, abs_tol=1e-9)

    def test_root_outside_interval_ignored(self):
        f = P((1, 1), (0, 1))  # root at -1
        assert count_roots(f, HALF_LINE) == 0
        assert count_roots(f, FULL) == 1


class TestFloatCoefficientPath:
    def test_companion_clusters(self):
        # (t - 1.5)^2 (t + 2.0)
        f = P((3, 1.0), (2, -1.0), (1, -3.75), (0, 4.5))
        clusters = companion_root_clusters(f)
        locs = sorted(r for r, _ in clusters)
        assert len(clusters) == 2
        assert math.isclose(locs[0], -2.0, abs_tol=1e-6)
        assert math.isclose(locs[1], 1.5, abs_tol=1e-6)
        assert dict((round(r, 3), m) for r, m in clusters)[1.5] == 2

    def test_float_minimum_no_exact_value(self):
        f = P((2, 1.0), (1, -3.0), (0, 2.25))  # (t - 1.5)^2
        res = global_min(f, HALF_LINE)
        assert res.min_exact is None
        assert abs(res.min_value) <= 1e-9
        assert math.isclose(res.argmin, 1.5, abs_tol=1e-6)

    def test_float_count_roots(self):
        f = P((2, 1.0), (1, -3.0), (0, 2.25))
        assert count_roots(f, HALF_LINE) == 2


class TestMinimumIsGlobal:
    @pytest.mark.parametrize("seed", [21, 22, 23])
    def test_oracle_value_lower_bounds_samples(self, seed):
        rng = random.Random(seed)
        for interval in (HALF_LINE, UNIT, ONE_THREE):
            f, res = gen_sparse(rng, k=2, degcap=12, interval=interval)
            lo, hi = {
                "half_line": (0.0, 30.0),
                "unit_interval": (0.0, 1.0),
                "compact": (1.0, 3.0),
            }[interval.kind]
            ts = np.linspace(lo, hi, 20001)
            coeffs = np.array(f.coeffs_dense(), dtype=float)
            vals = np.polynomial.polynomial.polyval(ts, coeffs)
            margin = 1e-9 * max(1.0, float(np.max(np.abs(vals))))
            assert res.min_value <= float(np.min(vals)) + margin
            if res.argmin is not None and interval.contains(res.argmin):
                direct = float(f.eval(res.argmin))
                assert math.isclose(direct, res.min_value, rel_tol=1e-9, abs_tol=1e-9)
