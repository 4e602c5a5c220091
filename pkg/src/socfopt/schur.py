"""Schur polynomials: evaluation, dense expansion, and confluent alternants.

Three routes into the same family of objects, kept deliberately independent so
they can cross-check each other:

* generalized-alternant determinants divided by Vandermonde factors,
* the determinant in complete homogeneous symmetric polynomials,
* confluent alternants (derivative row groups) and their product form.

All determinants run in double precision by default; matrices whose entries
are `int`/`Fraction` are evaluated in exact rational arithmetic instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .poly import SparsePoly

#: Points closer than this (relative to the largest magnitude) are treated as
#: coincident by schur_eval and sent down the expansion path.
COINCIDENCE_RTOL = 1e-6

#: Default budget for the dense monomial expansion.
MAX_EXPAND_WEIGHT = 20
MAX_EXPAND_NVARS = 8


@dataclass(frozen=True)
class Partition:
    """Weakly decreasing tuple of nonnegative integers."""

    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        prev = None
        for p in self.parts:
            if not isinstance(p, int) or p < 0:
                raise ValueError(f"bad part {p!r}")
            if prev is not None and p > prev:
                raise ValueError("parts must be weakly decreasing")
            prev = p

    @staticmethod
    def of(*parts: int) -> "Partition":
        return Partition(tuple(parts))

    def weight(self) -> int:
        return sum(self.parts)

    def length(self) -> int:
        """Number of nonzero parts."""
        return sum(1 for p in self.parts if p > 0)

    def trimmed(self) -> tuple[int, ...]:
        return tuple(p for p in self.parts if p > 0)

    def is_strict(self) -> bool:
        return all(self.parts[i] > self.parts[i + 1] for i in range(len(self.parts) - 1))


@dataclass(frozen=True)
class MultiplicityVector:
    """Positive integer multiplicities attached to a list of points."""

    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("empty multiplicity vector")
        for m in self.entries:
            if not isinstance(m, int) or m < 1:
                raise ValueError(f"multiplicities must be positive integers, got {m!r}")

    @staticmethod
    def of(*entries: int) -> "MultiplicityVector":
        return MultiplicityVector(tuple(entries))

    def total(self) -> int:
        return sum(self.entries)


def strict_to_partition(mu: Partition) -> Partition:
    """Subtract the staircase (N-1, ..., 1, 0) from a strictly decreasing mu."""
    if not mu.is_strict():
        raise ValueError("exponent tuple must be strictly decreasing")
    n = len(mu.parts)
    return Partition(tuple(mu.parts[i] - (n - 1 - i) for i in range(n)))


# ---------------------------------------------------------------------------
# Determinants (exact or double precision)


def _all_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values)


def det_exact(rows: Sequence[Sequence]) -> Fraction:
    """Determinant by fraction-preserving Gaussian elimination."""
    n = len(rows)
    a = [[Fraction(v) for v in row] for row in rows]
    sign = 1
    det = Fraction(1)
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if a[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            sign = -sign
        piv = a[col][col]
        det *= piv
        inv = 1 / piv
        for r in range(col + 1, n):
            factor = a[r][col] * inv
            if factor == 0:
                continue
            row_r = a[r]
            row_c = a[col]
            for c in range(col, n):
                row_r[c] -= factor * row_c[c]
    return sign * det


def _det(rows: Sequence[Sequence]):
    flat = [v for row in rows for v in row]
    if _all_exact(flat):
        return det_exact(rows)
    return complex(np.linalg.det(np.array(rows, dtype=complex))) if any(
        isinstance(v, complex) for v in flat
    ) else float(np.linalg.det(np.array(rows, dtype=float)))


# ---------------------------------------------------------------------------
# Complete homogeneous symmetric values


def homogeneous_table(points: Sequence, max_m: int) -> list:
    """Values h_0, ..., h_max_m at the given points (any multiset).

    Uses the one-point-at-a-time recurrence from the generating function
    prod_i 1/(1 - x_i z); exact for exact inputs.
    """
    exact = _all_exact(points)
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    h = [one] + [zero] * max_m
    for x in points:
        for m in range(1, max_m + 1):
            h[m] = h[m] + x * h[m - 1]
    return h


def schur_value_jt(lam: Partition, points: Sequence):
    """Schur value at an arbitrary point multiset via the determinant in h's.

    Valid for repeated points, which is where the alternant ratio degenerates.
    """
    core = lam.trimmed()
    ell = len(core)
    if ell == 0:
        return Fraction(1) if _all_exact(points) else 1.0
    if ell > len(points):
        return Fraction(0) if _all_exact(points) else 0.0
    h = homogeneous_table(points, core[0] + ell)
    zero = h[0] - h[0]
    rows = [[(h[core[i] - i + j] if core[i] - i + j >= 0 else zero) for j in range(ell)] for i in range(ell)]
    return _det(rows)


# ---------------------------------------------------------------------------
# Evaluation


def _pad(lam: Partition, n: int) -> tuple[int, ...]:
    if lam.length() > n:
        raise ValueError("partition has more nonzero parts than variables")
    return tuple(list(lam.parts[:n]) + [0] * max(0, n - len(lam.parts)))


def schur_eval(lam: Partition, x: Sequence):
    """Evaluate the Schur polynomial at the point x.

    Distinct points: ratio of the generalized alternant det(x_i^(lam_j + n-1-j))
    to the Vandermonde determinant.  Near-coincident points: evaluated through
    the monomial expansion when it fits the budget, else through the
    h-determinant (both are removable-singularity-free).
    """
    n = len(x)
    if n == 0:
        return 1 if lam.weight() == 0 else 0
    if lam.length() > n:
        return Fraction(0) if _all_exact(x) else 0.0
    scale = max((abs(v) for v in x), default=0)
    mindiff = min((abs(x[i] - x[j]) for i in range(n) for j in range(i + 1, n)), default=None)
    distinct = mindiff is None or mindiff >= COINCIDENCE_RTOL * max(scale, 1e-30)
    if distinct:
        padded = _pad(lam, n)
        mu = [padded[j] + (n - 1 - j) for j in range(n)]
        num = _det([[x[i] ** m for m in mu] for i in range(n)])
        van = None
        for i in range(n):
            for j in range(i + 1, n):
                d = x[i] - x[j]
                van = d if van is None else van * d
        if van is None:
            van = 1
        return num / van
    try:
        expansion = schur_expand(lam, n)
    except ValueError:
        return schur_value_jt(lam, x)
    total = None
    for expo, coef in expansion.items():
        term = coef
        for xi, e in zip(x, expo):
            term = term * xi**e
        total = term if total is None else total + term
    if total is None:
        return Fraction(0) if _all_exact(x) else 0.0
    return total


# ---------------------------------------------------------------------------
# Dense expansion


@lru_cache(maxsize=None)
def _monomial_indices(nvars: int, degree: int, radix: int) -> np.ndarray:
    """Flat (mixed-radix) indices of all exponent tuples of the given degree."""
    if nvars == 1:
        return np.array([degree], dtype=np.int64)
    out = []
    for lead in range(degree + 1):
        rest = _monomial_indices(nvars - 1, degree - lead, radix)
        out.append(lead * radix ** (nvars - 1) + rest)
    return np.concatenate(out)


@lru_cache(maxsize=None)
def _h_product(indices: tuple[int, ...], nvars: int, radix: int) -> tuple:
    """Expansion of prod_i h_{indices[i]} as (flat index array, coeff array)."""
    if not indices:
        return (np.zeros(1, dtype=np.int64), np.ones(1, dtype=np.int64))
    prefix_idx, prefix_coef = _h_product(indices[:-1], nvars, radix)
    h_idx = _monomial_indices(nvars, indices[-1], radix)
    raw_idx = (prefix_idx[:, None] + h_idx[None, :]).ravel()
    raw_coef = np.repeat(prefix_coef, len(h_idx))
    merged_idx, inverse = np.unique(raw_idx, return_inverse=True)
    merged_coef = np.zeros(len(merged_idx), dtype=np.int64)
    np.add.at(merged_coef, inverse, raw_coef)
    return (merged_idx, merged_coef)


def schur_expand(
    lam: Partition,
    nvars: int,
    max_weight: int = MAX_EXPAND_WEIGHT,
    max_nvars: int = MAX_EXPAND_NVARS,
) -> dict[tuple[int, ...], int]:
    """Dense monomial expansion {exponent tuple: integer coefficient}.

    Computed by the determinant in complete homogeneous symmetric polynomials,
    so nonnegativity of the resulting coefficients is a property of the math,
    not of the algorithm.  Raises when the (configurable) budget is exceeded.
    """
    if lam.weight() > max_weight or nvars > max_nvars:
        raise ValueError(
            f"expansion budget exceeded (weight {lam.weight()} > {max_weight} "
            f"or nvars {nvars} > {max_nvars})"
        )
    if nvars < 1:
        raise ValueError("need at least one variable")
    core = lam.trimmed()
    ell = len(core)
    if ell > nvars:
        return {}
    if ell == 0:
        return {(0,) * nvars: 1}
    # Intermediate h-products reach single-variable exponents up to |lam|,
    # even though the final expansion stays within lam_0 per variable.
    radix = lam.weight() + 1
    # Leibniz sum over the h-determinant, grouped by the multiset of h indices.
    multiset_sign: dict[tuple[int, ...], int] = {}
    for perm in itertools.permutations(range(ell)):
        inv = 0
        for i in range(ell):
            for j in range(i + 1, ell):
                if perm[i] > perm[j]:
                    inv += 1
        sign = -1 if inv % 2 else 1
        indices = []
        ok = True
        for i in range(ell):
            m = core[i] - i + perm[i]
            if m < 0:
                ok = False
                break
            if m > 0:
                indices.append(m)
        if not ok:
            continue
        key = tuple(sorted(indices))
        multiset_sign[key] = multiset_sign.get(key, 0) + sign
    accum: dict[int, int] = {}
    for key in sorted(multiset_sign):
        coef = multiset_sign[key]
        if coef == 0:
            continue
        idx, vals = _h_product(key, nvars, radix)
        for i, v in zip(idx.tolist(), vals.tolist()):
            accum[i] = accum.get(i, 0) + coef * v
    out: dict[tuple[int, ...], int] = {}
    for flat, coef in accum.items():
        if coef == 0:
            continue
        expo = []
        rem = flat
        for _ in range(nvars):
            expo.append(rem % radix)
            rem //= radix
        out[tuple(reversed(expo))] = coef
    return out


# ---------------------------------------------------------------------------
# Confluent alternants


def falling_factorial(m: int, j: int) -> int:
    out = 1
    for i in range(j):
        out *= m - i
    return out


def _derivative_row(exponents: Sequence[int], y, order: int) -> list:
    """Row of j-th derivatives of the monomials t^m evaluated at y."""
    row = []
    for m in exponents:
        if order > m:
            row.append(0 * y)
        else:
            row.append(falling_factorial(m, order) * y ** (m - order))
    return row


def confluent_alternant(mu: Partition, b: MultiplicityVector, y: Sequence):
    """Alternant determinant with derivative row groups.

    Column j holds the monomial t^mu_j; for each point y_i the matrix gets
    rows of derivatives of order 0..b_i-1 evaluated at y_i.  Requires
    sum(b) == len(mu.parts).
    """
    if not mu.is_strict():
        raise ValueError("exponent tuple must be strictly decreasing")
    if len(y) != len(b.entries):
        raise ValueError("one point per multiplicity entry required")
    if b.total() != len(mu.parts):
        raise ValueError(
            f"multiplicities sum to {b.total()} but the alternant has {len(mu.parts)} columns"
        )
    rows = []
    for point, mult in zip(y, b.entries):
        for order in range(mult):
            rows.append(_derivative_row(mu.parts, point, order))
    return _det(rows)


def product_decomposition(mu: Partition, b: MultiplicityVector, y: Sequence):
    """Factor the confluent alternant as c * vb * slb.

    c collects the derivative-row normalizations, vb is the multiplicity-
    weighted Vandermonde factor prod_{i<j} (y_i - y_j)^(b_i b_j), and slb is
    the Schur value at y taken with multiplicity.
    """
    if b.total() != len(mu.parts):
        raise ValueError("multiplicities must sum to the number of parts of mu")
    c = 1
    for mult in b.entries:
        sign = -1 if (mult * (mult - 1) // 2) % 2 else 1
        # Confluent Vandermonde normalisation: product of factorials
        # 1! * 2! * ... * (mult-1)! accumulated per derivative-row group.
        fac = 1
        cum = 1
        for i in range(1, mult):
            cum *= i
            fac *= cum
        c *= sign * fac
    vb = None
    for i in range(len(y)):
        for j in range(i + 1, len(y)):
            d = (y[i] - y[j]) ** (b.entries[i] * b.entries[j])
            vb = d if vb is None else vb * d
    if vb is None:
        vb = 1
    lam = strict_to_partition(mu)
    points = [p for point, mult in zip(y, b.entries) for p in [point] * mult]
    slb = schur_value_jt(lam, points)
    return c, vb, slb


# ---------------------------------------------------------------------------
# Univariate restriction


def schur_restrict(lam: Partition, values: Sequence) -> SparsePoly:
    """Coefficients in t of the Schur polynomial evaluated at (t, values...).

    Exact inputs give exact Fraction coefficients via Newton interpolation at
    integer nodes; float inputs are interpolated at scaled roots of unity.
    """
    core = lam.trimmed()
    if len(core) > 1 + len(values):
        return SparsePoly.zero()
    if not core:
        return SparsePoly.constant(1)
    deg = core[0]
    if _all_exact(values):
        nodes = list(range(deg + 1))
        vals = [schur_value_jt(lam, [Fraction(tau)] + list(values)) for tau in nodes]
        # Newton divided differences, then expand to the monomial basis.
        coeffs = [Fraction(v) for v in vals]
        table = list(coeffs)
        newton = [table[0]]
        for level in range(1, deg + 1):
            for i in range(deg, level - 1, -1):
                table[i] = (table[i] - table[i - 1]) / (nodes[i] - nodes[i - level])
            newton.append(table[level])
        poly = [Fraction(0)] * (deg + 1)
        poly[0] = newton[deg]
        for level in range(deg - 1, -1, -1):
            # poly <- poly * (t - nodes[level]) + newton[level]
            for i in range(deg, 0, -1):
                poly[i] = poly[i - 1] - nodes[level] * poly[i]
            poly[0] = newton[level] - nodes[level] * poly[0]
        return SparsePoly.from_terms([(i, c) for i, c in enumerate(poly) if c != 0], tol=0.0)
    scale = max(1.0, max((abs(complex(v)) for v in values), default=1.0))
    m = deg + 1
    omega = np.exp(2j * np.pi * np.arange(m) / m)
    vals = np.array(
        [schur_value_jt(lam, [scale * w] + [complex(v) for v in values]) for w in omega],
        dtype=complex,
    )
    # vals[j] = sum_i (c_i scale^i) omega^{ij} with omega = e^{+2 pi i/m}, so the
    # coefficient vector is the forward DFT of vals divided by m.
    coeffs = np.fft.fft(vals) / m / scale ** np.arange(m)
    mag = float(np.max(np.abs(coeffs))) or 1.0
    pairs = [(i, float(c.real)) for i, c in enumerate(coeffs) if abs(c) > 1e-10 * mag]
    return SparsePoly.from_terms(pairs, tol=0.0)
