"""Extreme rays of the cone of sparse polynomials nonnegative on the half line.

An extreme ray is pinned down by a root pattern: distinct positive locations
``xi_1 > ... > xi_r`` with even multiplicities ``b_1, ..., b_r`` summing to
``n``, where ``n + 1`` is the number of monomials allowed by the support.  The
ray's coefficients are signed cofactors of a confluent alternant matrix, and
the ray factors as the root pattern's polynomial times a Schur polynomial
restricted to one free variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .oracle import count_roots
from .poly import IntervalSpec, SparsePoly
from .schur import (
    MultiplicityVector,
    Partition,
    confluent_alternant,
    schur_restrict,
    strict_to_partition,
)

DEGENERATE_TOL = 1e-10


# ---------------------------------------------------------------------------
# Root patterns


@dataclass(frozen=True)
class RootPattern:
    """Distinct positive root locations paired with multiplicities."""

    locations: tuple
    multiplicities: tuple[int, ...]

    def __post_init__(self) -> None:
        locs = tuple(self.locations)
        mults = tuple(int(b) for b in self.multiplicities)
        if len(locs) != len(mults):
            raise ValueError("locations and multiplicities must have equal length")
        if not locs:
            raise ValueError("root pattern must contain at least one root")
        if any(b <= 0 for b in mults):
            raise ValueError("multiplicities must be positive")
        for i, x in enumerate(locs):
            if not x > 0:
                raise ValueError(f"root locations must be positive, got {x!r}")
            for y in locs[i + 1 :]:
                if x == y:
                    raise ValueError("root locations must be distinct")
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "multiplicities", mults)

    @classmethod
    def of(cls, pairs: Sequence[tuple]) -> "RootPattern":
        locs = tuple(p[0] for p in pairs)
        mults = tuple(p[1] for p in pairs)
        return cls(locs, mults)

    def total(self) -> int:
        return sum(self.multiplicities)

    def all_even(self) -> bool:
        return all(b % 2 == 0 for b in self.multiplicities)

    def polynomial(self) -> SparsePoly:
        """prod_i (t - xi_i)^{b_i} as a SparsePoly."""
        out = SparsePoly.constant(1)
        lin_cache = {}
        for x, b in zip(self.locations, self.multiplicities):
            if x not in lin_cache:
                lin_cache[x] = SparsePoly.from_terms([(1, 1), (0, -x)], tol=0.0)
            lin = lin_cache[x]
            for _ in range(b):
                out = out * lin
        return out

    def expanded_points(self) -> list:
        """Each location repeated according to its multiplicity."""
        pts = []
        for x, b in zip(self.locations, self.multiplicities):
            pts.extend([x] * b)
        return pts


# ---------------------------------------------------------------------------
# Ray construction


def extreme_ray_from_roots(exponents: Sequence[int], pattern: RootPattern) -> SparsePoly:
    """Polynomial spanning the extreme ray with the given support and roots.

    ``exponents`` lists the allowed monomial exponents (n + 1 of them, all
    distinct and nonnegative); the pattern must place exactly n roots.  The
    coefficient of the j-th exponent is the signed first-row cofactor of the
    confluent alternant built on the remaining exponents, normalised so the
    leading coefficient is +1.
    """
    mu = tuple(sorted({int(e) for e in exponents}, reverse=True))
    if len(mu) != len(exponents):
        raise ValueError("exponents must be distinct")
    if mu[-1] < 0:
        raise ValueError("exponents must be nonnegative")
    n = len(mu) - 1
    if pattern.total() != n:
        raise ValueError(
            f"pattern places {pattern.total()} roots but the support admits {n}"
        )
    b = MultiplicityVector.of(*pattern.multiplicities)
    y = list(pattern.locations)
    cofactors = []
    for j in range(len(mu)):
        rest = Partition.of(*(mu[:j] + mu[j + 1 :]))
        minor = confluent_alternant(rest, b, y)
        cofactors.append((-1) ** j * minor)
    lead = cofactors[0]
    if all(isinstance(c, (int, Fraction)) for c in cofactors):
        # Exact cofactors: zero tests are decisive, and relative comparisons
        # would misfire because minors of different total degree legitimately
        # differ by many orders of magnitude.
        if all(c == 0 for c in cofactors):
            raise ValueError("degenerate root pattern: every cofactor vanishes")
        if lead == 0:
            raise ValueError("degenerate root pattern: leading cofactor vanishes")
    else:
        scale = max(abs(float(c)) for c in cofactors)
        if scale == 0 or all(abs(float(c)) < DEGENERATE_TOL * scale for c in cofactors):
            raise ValueError("degenerate root pattern: every cofactor vanishes")
        if abs(float(lead)) < DEGENERATE_TOL * scale:
            raise ValueError("degenerate root pattern: leading cofactor vanishes")
    if isinstance(lead, (int, Fraction)) and all(
        isinstance(c, (int, Fraction)) for c in cofactors
    ):
        coeffs = [Fraction(c) / Fraction(lead) for c in cofactors]
    else:
        coeffs = [float(c) / float(lead) for c in cofactors]
    return SparsePoly.from_terms(list(zip(mu, coeffs)), tol=0.0)


# ---------------------------------------------------------------------------
# Verification


def _minimax_scale(f: SparsePoly, g: SparsePoly) -> float:
    """min over gamma of max-norm of (f - gamma * g), computed exactly.

    The objective is piecewise linear in gamma; its minimiser lies where two
    of the lines |f_e - gamma g_e| cross, so scanning all pairwise crossover
    points is exhaustive.
    """
    exps = sorted(set(f.support()) | set(g.support()), reverse=True)
    pairs = [(float(f.coeff(e)), float(g.coeff(e))) for e in exps]
    candidates = [0.0]
    for i in range(len(pairs)):
        fi, gi = pairs[i]
        if gi != 0:
            candidates.append(fi / gi)
        for j in range(i + 1, len(pairs)):
            fj, gj = pairs[j]
            # |fi - gamma gi| = |fj - gamma gj| crossings
            if gi != gj:
                candidates.append((fi - fj) / (gi - gj))
            if gi != -gj:
                candidates.append((fi + fj) / (gi + gj))
    best = None
    for gamma in candidates:
        val = max(abs(fi - gamma * gi) for fi, gi in pairs)
        if best is None or val < best:
            best = val
    return best if best is not None else 0.0


def verify_extreme_factorization(
    f: SparsePoly, pattern: RootPattern
) -> tuple[float, SparsePoly]:
    """Residual of matching f against its predicted factorisation.

    The prediction is ``prod (t - xi_i)^{b_i}`` times the Schur polynomial of
    the staircase-complement shape restricted to one free variable at the
    pattern's points.  Returns ``(residual, predicted)`` where the residual is
    the best relative max-norm distance over scalar multiples of the
    prediction.
    """
    exps = sorted(set(f.support()) | {0}, reverse=True)
    mu = Partition.of(*exps)
    lam = strict_to_partition(mu)
    restricted = schur_restrict(lam, pattern.expanded_points())
    predicted = pattern.polynomial() * restricted
    if predicted.is_zero():
        raise ValueError("predicted factorisation vanishes identically")
    residual = _minimax_scale(f, predicted) / max(1.0, f.max_norm())
    return residual, predicted


def check_root_count(
    f: SparsePoly, interval: Optional[IntervalSpec] = None
) -> tuple[bool, int, int]:
    """Whether f has the maximal root count an extreme ray must attain.

    Counts roots with multiplicity on the open positive axis (or the supplied
    interval) and compares with n = (number of support exponents incl. 0) - 1.
    Returns ``(satisfies, count, required)``.
    """
    if interval is None:
        interval = IntervalSpec.half_line()
    required = len(set(f.support()) | {0}) - 1
    count = count_roots(f, interval)
    return count >= required, count, required
