"""Unit tests for SDPA sparse-format export and import."""

from __future__ import annotations

import math

import pytest

from socfopt.cones import build_bound_primal, build_membership, build_moment_dual
from socfopt.poly import IntervalSpec, SparsePoly
from socfopt.sdp import solve
from socfopt.sdpa import dumps_sdpa, loads_sdpa, read_sdpa, write_sdpa

HALF_LINE = IntervalSpec.half_line()
UNIT = IntervalSpec.unit_interval()


def P(*terms):
    return SparsePoly.from_terms(terms)


def roundtrip_optimum(problem):
    original = solve(problem)
    imported = loads_sdpa(dumps_sdpa(problem))
    back = solve(imported)
    return original, back


class TestHeaders:
    def test_sense_and_offset_emitted(self):
        problem = build_bound_primal(P((2, 1), (1, -2), (0, 3)), 1, HALF_LINE)
        text = dumps_sdpa(problem)
        assert "*SENSE maximize" in text
        assert "*OFFSET" in text

    def test_moment_problem_sense(self):
        problem = build_moment_dual(P((2, 1), (0, 1)), 1, interval=HALF_LINE)
        assert "*SENSE minimize" in dumps_sdpa(problem)

    def test_block_sizes_line(self):
        problem = build_bound_primal(P((2, 1), (0, 1)), 1, HALF_LINE)
        lines = [l for l in dumps_sdpa(problem).splitlines() if not l.startswith("*")]
        nblocks = int(lines[1])
        sizes = [int(t) for t in lines[2].split()]
        assert len(sizes) == nblocks
        assert sizes == list(problem.block_sizes())


class TestRoundtrip:
    def test_bound_problem(self):
        problem = build_bound_primal(P((2, 1), (1, -2), (0, 3)), 1, HALF_LINE)
        original, back = roundtrip_optimum(problem)
        assert original.status == back.status == "Optimal"
        assert original.primal_value == back.primal_value  # identical presolve

    def test_unit_interval_bound(self):
        problem = build_bound_primal(P((3, 4), (1, -3), (0, 1)), 1, UNIT)
        original, back = roundtrip_optimum(problem)
        assert back.status == "Optimal"
        assert abs(original.primal_value - back.primal_value) <= 1e-7

    def test_moment_problem(self):
        problem = build_moment_dual(P((2, 1), (1, -2), (0, 3)), 1, interval=HALF_LINE)
        original, back = roundtrip_optimum(problem)
        assert back.status == "Optimal"
        assert abs(original.primal_value - back.primal_value) <= 1e-7

    def test_feasibility_membership(self):
        problem = build_membership(P((2, 1), (1, -2), (0, 1)), 1, HALF_LINE)
        text = dumps_sdpa(problem)
        assert "*SENSE feasibility" in text
        back = solve(loads_sdpa(text))
        assert back.status == "Optimal"

    def test_offset_restores_constant(self):
        problem = build_moment_dual(P((2, 1), (1, -2), (0, 3)), 1, interval=HALF_LINE)
        imported = loads_sdpa(dumps_sdpa(problem))
        # v0 elimination folds constants into the objective offset.
        sol = solve(problem)
        back = solve(imported)
        assert math.isclose(sol.primal_value, back.primal_value, abs_tol=1e-8)


class TestParsing:
    def test_negative_sizes_taken_dense(self):
        text = "\n".join(
            [
                "1",
                "1",
                "-2",
                "1.0",
                "0 1 1 2 0.5",
                "1 1 1 1 1.0",
                "1 1 2 2 1.0",
            ]
        )
        problem = loads_sdpa(text)
        assert problem.block_sizes() == (2,)
        # max X01 subject to trace X = 1 is 1/2, at X = all-halves.
        sol = solve(problem)
        assert math.isclose(sol.primal_value, 0.5, abs_tol=1e-6)

    def test_lower_triangle_entries_folded(self):
        text = "\n".join(["1", "1", "2", "1.0", "0 1 2 1 0.5", "1 1 1 1 1.0", "1 1 2 2 1.0"])
        problem = loads_sdpa(text)
        entry = problem.objective.entries[0]
        assert (entry[1], entry[2]) == (0, 1)

    def test_braces_and_commas_tolerated(self):
        text = "\n".join(["1", "1", "{2}", "1.0,", "1 1 1 1 1.0", "1 1 2 2 1.0"])
        problem = loads_sdpa(text)
        assert problem.block_sizes() == (2,)

    def test_index_validation(self):
        base = ["1", "1", "2", "1.0"]
        with pytest.raises(ValueError):
            loads_sdpa("\n".join(base + ["1 2 1 1 1.0"]))  # block out of range
        with pytest.raises(ValueError):
            loads_sdpa("\n".join(base + ["1 1 3 1 1.0"]))  # entry outside block
        with pytest.raises(ValueError):
            loads_sdpa("\n".join(base + ["2 1 1 1 1.0"]))  # matrix out of range
        with pytest.raises(ValueError):
            loads_sdpa("1 1")  # truncated

    def test_unknown_sense_rejected(self):
        text = "\n".join(["*SENSE sideways", "1", "1", "1", "0.0", "1 1 1 1 1.0"])
        with pytest.raises(ValueError):
            loads_sdpa(text)


class TestFileWrappers:
    def test_write_and_read(self, tmp_path):
        problem = build_bound_primal(P((2, 1), (1, -2), (0, 3)), 1, HALF_LINE)
        path = write_sdpa(problem, tmp_path / "problem.dat-s")
        assert path.exists()
        back = read_sdpa(path)
        a = solve(problem)
        b = solve(back)
        assert a.primal_value == b.primal_value
