"""Unit tests for Gram certificate extraction, verification, serialization."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from socfopt.certify import (
    GramCertificate,
    assemble_theorem_shape,
    extract,
    theorem_shape,
    verify,
)
from socfopt.cones import build_banded, build_bound_primal, build_membership, build_moment_dual
from socfopt.poly import IntervalSpec, SparsePoly
from socfopt.sdp import SolverSettings, solve

HALF_LINE = IntervalSpec.half_line()
ONE_THREE = IntervalSpec.compact(1.0, 3.0)


def P(*terms):
    return SparsePoly.from_terms(terms)


def membership_certificate():
    f = P((2, 1), (1, -2), (0, 1))  # (t - 1)^2
    problem = build_membership(f, 1, HALF_LINE)
    sol = solve(problem)
    assert sol.status == "Optimal"
    return f, extract(sol, problem)


class TestExtraction:
    def test_square_recovers_rank_one_gram(self):
        f, cert = membership_certificate()
        assert cert.bound == 0.0
        assert cert.interval == HALF_LINE
        assert len(cert.parts) == 1
        part = cert.parts[0]
        assert part.weight.degree() == 0 and part.shift == 0
        assert np.allclose(part.gram, [[1.0, -1.0], [-1.0, 1.0]], atol=1e-5)

    def test_linear_bound_certificate(self):
        # min of t on the half line is 0, witnessed by t = t * 1^2.
        problem = build_bound_primal(P((1, 1)), 1, HALF_LINE)
        sol = solve(problem)
        cert = extract(sol, problem)
        assert abs(cert.bound) <= 1e-7
        shifted = [p for p in cert.parts if p.shift == 1]
        assert shifted and shifted[0].size() == 1
        assert math.isclose(float(shifted[0].gram[0, 0]), 1.0, abs_tol=1e-5)

    def test_compact_interval_bound(self):
        # min of t on [1, 3] is 1, and the unique degree-2 witness is
        # t - 1 = (1/2)(t - 1)^2 + (1/2)(t - 1)(3 - t): both parts must appear.
        f = P((1, 1))
        problem = build_bound_primal(f, 1, ONE_THREE)
        sol = solve(problem)
        cert = extract(sol, problem)
        assert math.isclose(cert.bound, 1.0, abs_tol=1e-6)
        assert cert.interval == ONE_THREE
        degs = sorted(p.weight.degree() for p in cert.parts)
        assert degs == [0, 2]
        weighted = [p for p in cert.parts if p.weight.degree() == 2][0]
        assert math.isclose(float(weighted.gram[0, 0]), 0.5, abs_tol=1e-5)
        report = verify(cert, f)
        assert report["ok"] and report["min_eig"] >= -1e-8

    def test_banded_bound_extraction(self):
        f = P((6, 1), (0, 2))
        problem = build_banded(f, 1, bound=True)
        sol = solve(problem)
        cert = extract(sol, problem)
        assert math.isclose(cert.bound, 2.0, abs_tol=1e-5)
        # Clique pieces have size k + 1 except the trailing corner pieces.
        sizes = {p.size() for p in cert.parts}
        assert sizes <= {1, 2} and 2 in sizes
        assert verify(cert, f)["ok"]

    def test_rejects_moment_problems(self):
        f = P((2, 1), (0, 1))
        problem = build_moment_dual(f, 1, interval=HALF_LINE)
        sol = solve(problem)
        with pytest.raises(ValueError):
            extract(sol, problem)

    def test_rejects_non_optimal_solutions(self):
        f = P((2, 1), (1, -2), (0, 3))
        problem = build_bound_primal(f, 1, HALF_LINE)
        sol = solve(problem, SolverSettings(max_iter=2))
        assert sol.status != "Optimal"
        with pytest.raises(ValueError):
            extract(sol, problem)

    def test_rejects_indefinite_blocks(self):
        f = P((2, 1), (1, -2), (0, 1))
        problem = build_membership(f, 1, HALF_LINE)
        sol = solve(problem)
        doctored = list(np.array(b, dtype=float, copy=True) for b in sol.block_values)
        doctored[0][0, 0] = -1.0
        bad = dataclasses.replace(sol, block_values=tuple(doctored))
        with pytest.raises(ValueError, match="not certifiable"):
            extract(bad, problem)


class TestVerification:
    def test_float_and_exact_agree(self):
        f, cert = membership_certificate()
        report = verify(cert, f)
        assert report["ok"] and report["coeff_residual"] <= 1e-6
        exact_report = verify(cert, f, exact=True)
        assert exact_report["ok"] and exact_report["coeff_residual"] <= 1e-6

    def test_reassembled_polynomial_matches(self):
        f, cert = membership_certificate()
        diff = cert.polynomial() - f.to_float()
        assert diff.max_norm() <= 1e-6

    def test_perturbed_gram_fails(self):
        f, cert = membership_certificate()
        part = cert.parts[0]
        bumped = np.array(part.gram, copy=True)
        bumped[0, 0] += 1e-3
        broken = dataclasses.replace(
            cert, parts=(part._replace(gram=bumped),) + cert.parts[1:]
        )
        report = verify(broken, f)
        assert not report["ok"]
        assert report["coeff_residual"] >= 1e-4

    def test_negative_gram_reported(self):
        f = P((2, 1), (0, 0.5))
        cert = GramCertificate(
            parts=(
                type(membership_certificate()[1].parts[0])(
                    weight=SparsePoly.constant(1),
                    shift=0,
                    gram=np.array([[0.5, 0.0], [0.0, -0.5]]),
                ),
            ),
            interval=HALF_LINE,
            bound=0.0,
        )
        report = verify(cert, f)
        assert report["min_eig"] <= -0.4
        assert not report["ok"]


class TestTheoremShape:
    def test_single_square(self):
        f, cert = membership_certificate()
        triples = theorem_shape(cert)
        assert len(triples) == 1
        square, mono, weight = triples[0]
        assert square.degree() == 1
        assert float(square.leading_coeff()) > 0
        assert mono.support() == (0,) and weight.degree() == 0
        reassembled = assemble_theorem_shape(triples)
        assert (reassembled - f.to_float()).max_norm() <= 1e-6

    def test_compact_interval_shape_reassembles(self):
        f = P((2, 1), (1, -4), (0, 6))
        problem = build_bound_primal(f, 1, ONE_THREE)
        cert = extract(solve(problem), problem)
        triples = theorem_shape(cert)
        target = f.to_float() - SparsePoly.constant(cert.bound)
        assert (assemble_theorem_shape(triples) - target).max_norm() <= 1e-5

    def test_indefinite_raises(self):
        f, cert = membership_certificate()
        part = cert.parts[0]
        bad = dataclasses.replace(
            cert, parts=(part._replace(gram=np.array([[1.0, 0.0], [0.0, -1.0]])),)
        )
        with pytest.raises(ValueError):
            theorem_shape(bad)


class TestSerialization:
    def test_json_roundtrip(self):
        f, cert = membership_certificate()
        text = cert.to_json(indent=2)
        back = GramCertificate.from_json(text)
        assert back.bound == cert.bound
        assert back.interval == cert.interval
        assert len(back.parts) == len(cert.parts)
        for a, b in zip(cert.parts, back.parts):
            assert a.shift == b.shift
            assert np.allclose(a.gram, b.gram)
        assert verify(back, f)["ok"]

    def test_from_dict_validates_gram_shape(self):
        f, cert = membership_certificate()
        data = cert.to_dict()
        data["parts"][0]["gram"] = [[1.0, 0.0]]
        with pytest.raises(ValueError):
            GramCertificate.from_dict(data)
