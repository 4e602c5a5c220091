"""Unit tests for weighted-square cone builders and preconditioning."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from socfopt.cones import (
    MomentVector,
    assemble_banded,
    banded_to_cliques,
    bound_value,
    build_banded,
    build_bound_primal,
    build_full_line,
    build_membership,
    build_moment_dual,
    default_k,
    expand_banded,
    moments_from_solution,
    pick_radius,
    weight_system,
)
from socfopt.poly import IntervalSpec, SparsePoly
from socfopt.sdp import solve

from helpers import HALF_LINE, ONE_THREE, UNIT, solve_to_optimal

FULL = IntervalSpec.full_line()


def P(*terms):
    return SparsePoly.from_terms(terms)


class TestWeightSystem:
    def test_half_line_shift_chain(self):
        system = weight_system(HALF_LINE, d=6, k=2)
        assert len(system) == 3
        assert [wb.shift for wb in system] == [0, 1, 2]
        assert all(wb.weight.degree() == 0 for wb in system)
        assert all(wb.k == 2 for wb in system)

    def test_unit_interval_two_weights(self):
        system = weight_system(UNIT, d=4, k=1)
        degs = sorted(wb.weight.degree() for wb in system)
        # weights 1 (shifts 0..2) and 1 - t (shifts 0..1)
        assert degs == [0, 0, 0, 1, 1]

    def test_compact_four_weights(self):
        system = weight_system(ONE_THREE, d=4, k=1)
        assert len(system) == 8  # 3 + 2 + 2 + 1 shifted copies
        degs = sorted(wb.weight.degree() for wb in system)
        assert degs == [0, 0, 0, 1, 1, 1, 1, 2]

    def test_right_half_line_weights(self):
        system = weight_system(IntervalSpec.right_half_line(0.5), d=4, k=1)
        degs = sorted(wb.weight.degree() for wb in system)
        assert degs == [0, 0, 0, 1, 1]

    def test_degrees_never_exceed_d(self):
        for interval in (HALF_LINE, UNIT, ONE_THREE, IntervalSpec.right_half_line(2.0)):
            for k in (1, 2):
                for d in (2 * k, 2 * k + 1, 2 * k + 4):
                    for wb in weight_system(interval, d=d, k=k):
                        assert wb.multiplier_degree() + 2 * wb.k <= d

    def test_boundary_degenerates_to_two_blocks(self):
        system = weight_system(HALF_LINE, d=4, k=2)
        assert len(system) == 2
        assert (system[0].k, system[1].k) == (2, 1)
        assert system[1].multiplier().support() == (1,)
        system = weight_system(UNIT, d=2, k=1)
        assert len(system) == 2
        assert system[1].weight.degree() == 1  # the 1 - t factor

    def test_custom_shifts(self):
        system = weight_system(HALF_LINE, d=8, k=2, shifts=(4, 0))
        assert [wb.shift for wb in system] == [0, 4]

    def test_custom_shift_validation(self):
        with pytest.raises(ValueError):
            weight_system(UNIT, d=6, k=1, shifts=(0, 1))
        with pytest.raises(ValueError):
            weight_system(HALF_LINE, d=6, k=1, shifts=())
        with pytest.raises(ValueError):
            weight_system(HALF_LINE, d=6, k=1, shifts=(5,))
        with pytest.raises(ValueError):
            weight_system(HALF_LINE, d=4, k=2, shifts=(0,))

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            weight_system(HALF_LINE, d=4, k=0)
        with pytest.raises(ValueError):
            weight_system(HALF_LINE, d=1, k=1)
        with pytest.raises(ValueError):
            weight_system(FULL, d=4, k=1)


class TestPickRadius:
    def test_unit_interval_identity(self):
        assert pick_radius(P((8, 1), (0, 1)), UNIT) == 1.0

    def test_always_power_of_two(self):
        for f in (P((2, 1), (1, -16), (0, 64)), P((3, 0.001), (0, 5)), P((1, 1))):
            for iv in (HALF_LINE, ONE_THREE, IntervalSpec.right_half_line(3.0)):
                r = pick_radius(f, iv)
                assert r > 0 and math.log2(r) == int(math.log2(r))

    def test_half_line_tracks_minimizer(self):
        # (t - 8)^2 has its action near 8.
        assert pick_radius(P((2, 1), (1, -16), (0, 64)), HALF_LINE) == 8.0

    def test_right_half_line_at_least_endpoint(self):
        r = pick_radius(P((2, 1), (0, 1)), IntervalSpec.right_half_line(3.0))
        assert r >= 4.0

    def test_compact_balanced_keeps_unit(self):
        # Coefficients that grow with degree: scaling up only inflates the
        # normalisation constant, so the radius stays at one.
        f = P((4, 5), (2, -26), (0, 25))
        assert pick_radius(f, ONE_THREE) == 1.0

    def test_compact_small_lead_scales_up(self):
        # max |c_e| R^e ties across R = 1, 2, 4; the tie goes to the largest.
        f = P((2, Fraction(1, 64)), (0, 1))
        assert pick_radius(f, ONE_THREE) == 4.0

    def test_compact_small_domain(self):
        f = P((2, 1), (0, 1))
        assert pick_radius(f, IntervalSpec.compact(0.125, 0.5)) == 0.5


class TestMomentVector:
    def test_dirac_and_pair(self):
        v = MomentVector.dirac(2.0, 3)
        assert v.values == (1.0, 2.0, 4.0, 8.0)
        assert v.pair(P((2, 1), (0, 1))) == 5.0
        assert v.degree() == 3 and v[1] == 2.0

    def test_hankel_section(self):
        v = MomentVector((1.0, 2.0, 4.0, 8.0))
        h = v.hankel_section(SparsePoly.constant(1), k=1)
        assert np.allclose(h, [[1, 2], [2, 4]])
        ht = v.hankel_section(P((1, 1)), k=1)  # multiplier t
        assert np.allclose(ht, [[2, 4], [4, 8]])

    def test_dirac_hankel_is_psd_rank_one(self):
        v = MomentVector.dirac(1.5, 4)
        h = v.hankel_section(SparsePoly.constant(1), k=2)
        evals = np.linalg.eigvalsh(h)
        assert evals.min() >= -1e-12
        assert sum(e > 1e-9 for e in evals) == 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            MomentVector(())


class TestBoundBuilder:
    def test_quadratic_bound_solves_to_two(self):
        f = P((2, 1), (1, -2), (0, 3))  # (t - 1)^2 + 2
        problem = build_bound_primal(f, 1, HALF_LINE)
        assert problem.sense == "maximize" and problem.scalars == ("lambda",)
        sol = solve(problem)
        assert sol.status == "Optimal"
        assert math.isclose(bound_value(problem, sol), 2.0, abs_tol=1e-6)

    def test_degree_padding_to_2k(self):
        problem = build_bound_primal(P((1, 1), (0, 1)), 1, HALF_LINE)
        assert problem.meta["d"] == 2
        sol = solve(problem)
        assert math.isclose(bound_value(problem, sol), 1.0, abs_tol=1e-6)

    def test_boundary_block_sizes(self):
        problem = build_bound_primal(P((2, 1), (0, 1)), 1, HALF_LINE)
        assert problem.block_sizes() == (2, 1)

    def test_chain_block_count(self):
        f = P((6, 1), (1, -1), (0, 2))
        problem = build_bound_primal(f, 1, HALF_LINE)
        assert problem.block_sizes() == (2, 2, 2, 2, 2)  # shifts 0..4

    def test_validation(self):
        f = P((2, 1), (0, 1))
        with pytest.raises(ValueError):
            build_bound_primal(f, 0, HALF_LINE)
        with pytest.raises(ValueError):
            build_bound_primal(SparsePoly.zero(), 1, HALF_LINE)
        with pytest.raises(ValueError):
            build_bound_primal(f, 1, FULL)
        with pytest.raises(ValueError):
            build_bound_primal(f, 1, HALF_LINE, d=1)
        with pytest.raises(ValueError):
            build_bound_primal(f, 2, HALF_LINE, d=3)

    def test_bound_value_rejects_membership(self):
        problem = build_membership(P((2, 1), (1, -2), (0, 1)), 1, HALF_LINE)
        sol = solve(problem)
        with pytest.raises(ValueError):
            bound_value(problem, sol)


class TestMembershipBuilder:
    def test_structure_and_feasibility(self):
        f = P((2, 1), (1, -2), (0, 1))  # (t - 1)^2
        problem = build_membership(f, 1, HALF_LINE)
        assert problem.sense == "feasibility"
        assert problem.meta["radius"] == 1.0  # membership keeps original units
        sol = solve(problem)
        assert sol.status == "Optimal"

    def test_shift_restriction_recorded(self):
        f = P((4, 3), (3, -4), (0, 1))
        problem = build_membership(f, 1, HALF_LINE, shifts=(0, 2))
        assert problem.meta["diagnostic_shifts"] == (0, 2)
        assert len(problem.blocks) == 2

    def test_validation(self):
        with pytest.raises(ValueError):
            build_membership(P((2, 1), (0, 1)), 2, HALF_LINE)  # 2k > d
        with pytest.raises(ValueError):
            build_membership(SparsePoly.zero(), 1, HALF_LINE)
        with pytest.raises(ValueError):
            build_membership(P((2, 1), (0, 1)), 1, FULL)


class TestMomentBuilder:
    def test_scalars_and_normalization_row(self):
        f = P((2, 1), (1, -2), (0, 3))
        problem = build_moment_dual(f, 1, interval=HALF_LINE)
        assert problem.scalars == ("v0", "v1", "v2")
        first = problem.constraints[0]
        assert first.scalar_entries == ((0, 1.0),) and first.rhs == 1.0

    def test_moment_optimum_matches_bound(self):
        f = P((2, 1), (1, -2), (0, 3))
        problem = build_moment_dual(f, 1, interval=HALF_LINE)
        sol = solve(problem)
        assert sol.status == "Optimal"
        assert math.isclose(bound_value(problem, sol), 2.0, abs_tol=1e-6)
        v = moments_from_solution(problem, sol)
        assert math.isclose(v[0], 1.0, abs_tol=1e-9)
        # The minimiser concentrates at t = 1.
        assert math.isclose(v[1], 1.0, abs_tol=1e-4)

    def test_moments_rejects_bound_problem(self):
        f = P((2, 1), (0, 1))
        problem = build_bound_primal(f, 1, HALF_LINE)
        sol = solve(problem)
        with pytest.raises(ValueError):
            moments_from_solution(problem, sol)

    def test_validation(self):
        f = P((2, 1), (0, 1))
        with pytest.raises(ValueError):
            build_moment_dual(f, 1, interval=FULL)
        with pytest.raises(ValueError):
            build_moment_dual(f, 1, d=1, interval=HALF_LINE)


class TestFullLine:
    def test_pair_of_half_line_problems(self):
        f = P((4, 1), (1, -1), (0, 1))
        pos, neg = build_full_line(f, 2)
        assert pos.meta["kind"] == neg.meta["kind"] == "membership"
        # The reflected problem encodes f(-t).
        assert neg.meta["input_support"] == pos.meta["input_support"]
        sol_pos = solve_to_optimal(pos)
        sol_neg = solve_to_optimal(neg)
        assert sol_pos.status == "Optimal" and sol_neg.status == "Optimal"


class TestBanded:
    def test_block_sizes_and_bandwidth(self):
        f = P((6, 1), (5, -2), (2, 1), (1, 1), (0, 2))
        problem = build_banded(f, 1)
        assert problem.block_sizes() == (4, 3)  # e + 1 and e for d = 6
        assert problem.meta["bandwidth"] == 3
        # d + 1 coefficient rows plus one zero-pin per out-of-band entry.
        n_band_rows = sum(1 for c in problem.constraints if c.label.startswith("band"))
        assert len(problem.constraints) == 7 + n_band_rows
        assert n_band_rows == 4

    def test_odd_degree_sizes(self):
        f = P((5, 1), (0, 1))
        problem = build_banded(f, 1)
        assert problem.block_sizes() == (3, 3)

    def test_requires_high_degree(self):
        with pytest.raises(ValueError):
            build_banded(P((2, 1), (0, 1)), 1)

    def test_expand_matches_shift_chain(self):
        f = P((6, 1), (5, -2), (2, 1), (1, 1), (0, 2))
        expanded = expand_banded(build_banded(f, 1))
        assert expanded.block_sizes() == (2, 2, 2, 2, 2)
        assert expanded.meta["kind"] == "membership"
        direct = build_membership(f, 1, HALF_LINE)
        assert expanded.block_sizes() == direct.block_sizes()

    def test_expand_rejects_other_kinds(self):
        with pytest.raises(ValueError):
            expand_banded(build_membership(P((2, 1), (0, 1)), 1, HALF_LINE))

    def test_banded_bound_solve_agrees_with_chain(self):
        f = P((4, 1), (3, -4), (0, 2))  # min 2 - 27/256... solver agreement only
        banded = build_banded(f, 1, bound=True)
        chain = expand_banded(banded)
        sb = solve_to_optimal(banded)
        sc = solve_to_optimal(chain)
        assert sb.status == sc.status == "Optimal"
        assert abs(bound_value(banded, sb) - bound_value(chain, sc)) <= 1e-6

    def test_assemble_banded_roundtrip(self):
        f = P((6, 1), (0, 2))
        problem = build_banded(f, 1)
        k = 1
        cliques = [np.eye(k + 1) * (i + 1) for i in range(5)]
        A, B = assemble_banded(problem, cliques)
        assert A.shape == (4, 4) and B.shape == (3, 3)
        # Even shifts 0, 2, 4 land in A; odd shifts 1, 3 land in B.
        assert A[0, 0] == 1.0 and B[0, 0] == 2.0
        with pytest.raises(ValueError):
            assemble_banded(problem, cliques[:3])
        with pytest.raises(ValueError):
            assemble_banded(problem, [np.eye(3)] * 5)

    def test_banded_to_cliques_reconstructs(self):
        m = np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]])
        pieces = banded_to_cliques(m, k=1)
        total = np.zeros_like(m)
        for i, piece in pieces:
            n = piece.shape[0]
            total[i : i + n, i : i + n] += piece
            assert np.linalg.eigvalsh(piece).min() >= -1e-12
        assert np.allclose(total, m, atol=1e-12)

    def test_banded_to_cliques_validation(self):
        with pytest.raises(ValueError):
            banded_to_cliques(np.array([[1.0, 0.0, 5.0], [0.0, 1.0, 0.0], [5.0, 0.0, 1.0]]), k=1)
        with pytest.raises(ValueError):
            banded_to_cliques(np.array([[1.0, 2.0], [2.0, 1.0]]), k=1)


class TestDefaultK:
    def test_counts_support_pairs(self):
        assert default_k(P((2, 1), (1, -2), (0, 3))) == 1
        assert default_k(P((8, 1), (5, 1), (3, 1), (2, 1), (0, 1))) == 2
        assert default_k(P((1, 1))) == 1  # support {1, 0} -> n = 1
        assert default_k(P((9, 1), (7, 1), (5, 1), (3, 1), (2, 1), (1, 1), (0, 1))) == 3
