"""Shared instance generators and solver wrappers for the test suite.

Random draws are fully determined by the seeds baked into each test; the
generator applies structural filters only (support size, finiteness of the
reference minimum, magnitude caps), so reruns replay the same instances.
"""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

from socfopt.oracle import OracleResult, global_min
from socfopt.poly import IntervalSpec, SparsePoly
from socfopt.sdp import SolverSettings, solve

HALF_LINE = IntervalSpec.half_line()
UNIT = IntervalSpec.unit_interval()
ONE_THREE = IntervalSpec.compact(1.0, 3.0)

_LOWER_BOUNDED_KINDS = ("half_line", "right_half_line", "full_line")


def gen_sparse(
    rng,
    k: int,
    degcap: int,
    interval: IntervalSpec,
    min_cap: float = 1e5,
    min_degree: int = 0,
) -> tuple[SparsePoly, OracleResult]:
    """Random (2k+1)-term polynomial with a finite reference minimum.

    Coefficients are dyadic rationals in [-10, 10]; on unbounded intervals
    the leading coefficient is flipped positive so the minimum is finite.
    Instances whose reference minimum is infinite or exceeds ``min_cap`` in
    magnitude are redrawn (enormous optima push any relative tolerance past
    what double-precision solves can resolve).
    """
    while True:
        exps = rng.sample(range(1, degcap + 1), 2 * k)
        terms = [(0, Fraction(rng.randint(-160, 160), 16))]
        for e in exps:
            c = Fraction(rng.randint(-160, 160), 16)
            if c == 0:
                c = Fraction(1, 16)
            terms.append((e, c))
        top = max(exps)
        if interval.kind in _LOWER_BOUNDED_KINDS:
            terms = [(e, abs(c) if e == top else c) for e, c in terms]
        if terms[0][1] == 0:
            continue
        f = SparsePoly.from_terms(terms, tol=0.0)
        if f.degree() < min_degree:
            continue
        if len(set(f.support()) | {0}) != 2 * k + 1:
            continue
        res = global_min(f, interval)
        if res.min_value == float("-inf") or abs(res.min_value) > min_cap:
            continue
        return f, res


def solve_to_optimal(problem, settings: SolverSettings | None = None):
    """Solve with a short retry ladder; return the first Optimal solution.

    Falls back to the last attempt if nothing converges, so callers can
    still inspect the status.
    """
    base = settings if settings is not None else SolverSettings()
    sol = solve(problem, base)
    if sol.status == "Optimal":
        return sol
    for retry in (
        replace(base, step_fraction=0.90),
        replace(base, init_scale=1.0),
    ):
        cand = solve(problem, retry)
        if cand.status == "Optimal":
            return cand
    return sol


def rel_err(value: float, reference: float) -> float:
    return abs(value - reference) / (1.0 + abs(reference))
