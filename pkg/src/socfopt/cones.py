"""Semidefinite formulations for shifted sums-of-squares cones.

A polynomial nonnegative on an interval is modelled as a sum of weighted
squares: each summand is ``t^shift * weight(t) * sigma(t)`` with ``sigma`` a
sum of squares of degree at most ``2k``, so ``sigma`` carries a PSD Gram
matrix of size ``k + 1``.  Matching coefficients of the target polynomial
against this ansatz yields an equality-constrained semidefinite problem over
many small blocks.  This module builds those problems (membership tests,
lower bounds, moment-side duals, and a banded two-variable reformulation)
as immutable :class:`BlockSdp` values; solving lives in :mod:`socfopt.sdp`.

All builders precondition by substituting ``t = radius * u`` and dividing by
a power-of-two coefficient scale, so the solver always sees O(1) data; the
preconditioning is recorded in ``meta`` and undone by
:func:`bound_value` / :func:`moments_from_solution` and by certificate
extraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .poly import IntervalSpec, SparsePoly

SENSES = ("maximize", "minimize", "feasibility")

# Largest exponent of 2 allowed in |coef| * radius^degree, to stay far from
# double overflow when substituting t = radius * u.
_MAX_SCALED_LOG2 = 280.0


# ---------------------------------------------------------------------------
# Problem containers


@dataclass(frozen=True)
class BlockSpec:
    """One PSD block variable: its matrix size and a debug label."""

    size: int
    label: str = ""

    def __post_init__(self) -> None:
        if self.size <= 0:
            raise ValueError("block size must be positive")


@dataclass(frozen=True)
class Constraint:
    """Affine equality row.

    ``entries`` are ``(block, i, j, coef)`` with ``i <= j``; the row value is
    ``sum coef * X[i, j]`` counting off-diagonal entries twice (symmetric
    inner product), plus ``sum coef * z`` over ``scalar_entries``.
    """

    entries: tuple[tuple[int, int, int, float], ...] = ()
    scalar_entries: tuple[tuple[int, float], ...] = ()
    rhs: float = 0.0
    label: str = ""


@dataclass(frozen=True)
class Objective:
    """Linear functional with the same entry conventions as Constraint."""

    entries: tuple[tuple[int, int, int, float], ...] = ()
    scalar_entries: tuple[tuple[int, float], ...] = ()
    constant: float = 0.0


@dataclass(frozen=True)
class BlockSdp:
    """Immutable block-diagonal semidefinite problem."""

    blocks: tuple[BlockSpec, ...]
    scalars: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    objective: Objective
    sense: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.sense not in SENSES:
            raise ValueError(f"unknown sense {self.sense!r}")
        nb, ns = len(self.blocks), len(self.scalars)
        for row in tuple(self.constraints) + (self.objective,):
            for b, i, j, _ in row.entries:
                if not 0 <= b < nb:
                    raise ValueError(f"entry references undeclared block {b}")
                size = self.blocks[b].size
                if not 0 <= i <= j < size:
                    raise ValueError(
                        f"entry ({i},{j}) outside upper triangle of block {b} (size {size})"
                    )
            for s, _ in row.scalar_entries:
                if not 0 <= s < ns:
                    raise ValueError(f"entry references undeclared scalar {s}")
        if self.sense == "feasibility" and (
            self.objective.entries or self.objective.scalar_entries
        ):
            raise ValueError("feasibility problems must have an empty objective")

    def block_sizes(self) -> tuple[int, ...]:
        return tuple(b.size for b in self.blocks)

    def max_block_size(self) -> int:
        return max(self.block_sizes(), default=0)

    def row_value(self, row, block_values, scalar_values) -> float:
        total = 0.0
        for b, i, j, c in row.entries:
            v = float(block_values[b][i][j])
            total += c * v if i == j else 2.0 * c * v
        for s, c in row.scalar_entries:
            total += c * float(scalar_values[s])
        return total

    def constraint_residuals(self, block_values, scalar_values=()) -> list[float]:
        return [
            self.row_value(row, block_values, scalar_values) - row.rhs
            for row in self.constraints
        ]

    def objective_value(self, block_values, scalar_values=()) -> float:
        return (
            self.row_value(self.objective, block_values, scalar_values)
            + self.objective.constant
        )

    def describe(self) -> str:
        kind = self.meta.get("kind", "generic")
        return (
            f"{kind}: {len(self.blocks)} blocks (max size {self.max_block_size()}), "
            f"{len(self.scalars)} scalars, {len(self.constraints)} rows, {self.sense}"
        )


@dataclass(frozen=True)
class MomentVector:
    """Pseudo-moment sequence (v_0, ..., v_d)."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError("moment vector must be nonempty")

    def degree(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def pair(self, f: SparsePoly) -> float:
        """<f, v> = sum f_e v_e."""
        return sum(float(c) * self.values[e] for e, c in f.terms)

    def hankel_section(self, multiplier: SparsePoly, k: int):
        """(k+1) x (k+1) matrix with [i,j] = sum_h m_h v_{i+j+h}."""
        import numpy as np

        out = np.zeros((k + 1, k + 1))
        for h, c in multiplier.terms:
            for i in range(k + 1):
                for j in range(k + 1):
                    out[i, j] += float(c) * self.values[i + j + h]
        return out

    @staticmethod
    def dirac(t0: float, d: int) -> "MomentVector":
        return MomentVector(tuple(float(t0) ** i for i in range(d + 1)))


# ---------------------------------------------------------------------------
# Weight systems


@dataclass(frozen=True)
class WeightedBlock:
    """One summand of the ansatz: t^shift * weight(t) * (sos of degree 2k)."""

    weight: SparsePoly
    shift: int
    k: int
    label: str = ""

    def multiplier(self) -> SparsePoly:
        return self.weight.shift_exp(self.shift)

    def multiplier_degree(self) -> int:
        return self.weight.degree() + self.shift


def weight_system(
    interval: IntervalSpec, d: int, k: int, shifts: Optional[Sequence[int]] = None
) -> tuple[WeightedBlock, ...]:
    """Weighted-square summands whose span covers degree-d nonnegativity.

    For d > 2k each interval weight pairs with the monomial shifts that keep
    every summand's degree at most d.  At the boundary d == 2k the system
    degenerates to the classical two-term description: a full square part of
    degree 2k plus an interval weight times a square part of degree 2k - 2.
    """
    if k <= 0:
        raise ValueError("k must be a positive integer")
    if d < 2 * k:
        raise ValueError("d must be at least 2k")
    one = SparsePoly.constant(1)
    kind = interval.kind
    if kind == "full_line":
        raise ValueError("the full line has no single weight system; split into two half lines")

    if kind == "half_line":
        weights = [(one, "")]
    elif kind == "unit_interval":
        weights = [(one, ""), (SparsePoly.from_terms([(1, -1.0), (0, 1.0)]), "(1-t)")]
    elif kind == "compact":
        a, b = float(interval.a), float(interval.b)
        ta = SparsePoly.from_terms([(1, 1.0), (0, -a)])
        bt = SparsePoly.from_terms([(1, -1.0), (0, b)])
        weights = [(one, ""), (ta, "(t-a)"), (bt, "(b-t)"), (ta * bt, "(t-a)(b-t)")]
    elif kind == "right_half_line":
        a = float(interval.a)
        weights = [(one, ""), (SparsePoly.from_terms([(1, 1.0), (0, -a)]), "(t-a)")]
    else:  # pragma: no cover - IntervalSpec validates kinds
        raise ValueError(f"unknown interval kind {kind!r}")

    if d == 2 * k:
        if shifts is not None:
            raise ValueError("custom shifts require d > 2k")
        # Full square part + one weighted square part of lower degree.  On the
        # half line the weight is the bare shift t; elsewhere the interval's
        # top-degree weight.
        if kind == "half_line":
            boundary = [
                WeightedBlock(one, 0, k, "sq"),
                WeightedBlock(one, 1, k - 1, "t*sq"),
            ]
        else:
            w, lbl = weights[-1]
            boundary = [
                WeightedBlock(one, 0, k, "sq"),
                WeightedBlock(w, 0, k - 1, f"{lbl}*sq"),
            ]
        return tuple(boundary)

    if shifts is not None:
        if kind != "half_line":
            raise ValueError("custom shifts are only supported on the half line")
        chosen = sorted(set(int(s) for s in shifts))
        if not chosen:
            raise ValueError("shift set must be nonempty")
        if chosen[0] < 0 or chosen[-1] > d - 2 * k:
            raise ValueError(f"shifts must lie in 0..{d - 2 * k}")
        return tuple(WeightedBlock(one, s, k, f"t^{s}") for s in chosen)

    out = []
    for w, lbl in weights:
        top = d - 2 * k - w.degree()
        for s in range(top + 1):
            tag = f"t^{s}" if not lbl else (f"t^{s}*{lbl}" if s else lbl)
            out.append(WeightedBlock(w, s, k, tag))
    return tuple(out)


# ---------------------------------------------------------------------------
# Preconditioning helpers


def _pow2(x: float) -> float:
    """Round a positive float to the nearest power of two (exact scaling)."""
    if x <= 0 or not math.isfinite(x):
        return 1.0
    return 2.0 ** round(math.log2(x))


def _pow2_at_least(x: float) -> float:
    if x <= 0 or not math.isfinite(x):
        return 1.0
    return 2.0 ** math.ceil(math.log2(x))


def _critical_radius(f: SparsePoly) -> float:
    """Power-of-two bound beyond which f is monotone (no critical points).

    Uses the classical root bound 1 + max |c_e / c_d| applied to f', which is
    cheap and needs no root isolation.
    """
    df = f.derivative()
    if df.is_zero() or df.degree() == 0:
        return 1.0
    lead = abs(float(df.leading_coeff()))
    ratio = max(abs(float(c)) for _, c in df.terms[1:]) / lead if len(df.terms) > 1 else 0.0
    return _pow2_at_least(1.0 + ratio)


def _grid_argmin_radius(f: SparsePoly, lo: float = 1.0) -> float:
    """Power of two (>= max(1, lo)) near the dyadic grid point where f is smallest.

    A worst-case monotonicity bound badly overestimates the interesting
    region for sparse inputs (substituting t = R*u multiplies the degree-e
    coefficient by R^e, so an oversized R wipes out the low-degree terms).
    Scanning f on powers of two up to that bound locates the neighbourhood
    of the minimiser directly; rounding it to a power of two keeps the
    substitution exact in binary floating point.
    """
    hi = _critical_radius(f)
    j_lo = 0 if lo <= 1.0 else int(math.floor(math.log2(lo)))
    j_hi = int(math.ceil(math.log2(hi))) + 1
    best_t, best_v = 1.0, math.inf
    for j in range(j_lo, j_hi + 1):
        t = 2.0**j
        try:
            val = float(f(t))
        except OverflowError:
            val = math.inf
        if math.isfinite(val) and val < best_v:
            best_t, best_v = t, val
    # Radii below one are never useful: the data is already coefficient-bounded
    # there, while dividing by R^e underflows the high-degree terms.
    return max(best_t, max(1.0, _pow2_at_least(lo)))


def _coeff_argmin_radius(f: SparsePoly, cap: float) -> float:
    """Largest power of two <= cap minimising max_e |c_e| * R^e.

    Substituting t = R*u multiplies the degree-e coefficient by R^e, and the
    recovered optimum inherits the solver tolerance multiplied by the
    normalisation constant max_e |c_e R^e|, so keeping that constant small
    directly controls the accuracy of the unscaled value.  The constant is
    nondecreasing in R, and larger radii normalise the domain better, so the
    scan keeps the largest radius on a tie.
    """
    if not f.terms:
        return 1.0
    best_r, best_c = 1.0, math.inf
    for j in range(int(round(math.log2(cap))) + 1):
        r = 2.0**j
        try:
            c = max(abs(float(coef)) * r**e for e, coef in f.terms)
        except OverflowError:
            break
        if math.isfinite(c) and c <= best_c:
            best_r, best_c = r, c
    return best_r


def pick_radius(f: SparsePoly, interval: IntervalSpec) -> float:
    """Substitution radius R so that t = R*u puts the action near u in [0,1]."""
    kind = interval.kind
    if kind == "unit_interval":
        return 1.0
    if kind == "compact":
        cap = _pow2_at_least(float(interval.b))
        r = cap if cap <= 1.0 else _coeff_argmin_radius(f, cap)
    elif kind == "right_half_line":
        a = float(interval.a)
        r = max(_grid_argmin_radius(f, lo=a), _pow2_at_least(a))
    else:
        r = _grid_argmin_radius(f)
    # Guard against overflow of |c| * R^e.
    d = f.degree()
    if d > 0 and r > 1.0:
        top = math.log2(max(abs(float(c)) for _, c in f.terms) + 1e-300)
        max_log_r = (_MAX_SCALED_LOG2 - top) / d
        if math.log2(r) > max_log_r:
            r = 2.0 ** max(0.0, math.floor(max_log_r))
    return r


def _scaled_interval(interval: IntervalSpec, radius: float) -> IntervalSpec:
    if radius == 1.0:
        return interval
    kind = interval.kind
    if kind == "half_line":
        return interval
    if kind == "compact":
        return IntervalSpec.compact(float(interval.a) / radius, float(interval.b) / radius)
    if kind == "right_half_line":
        return IntervalSpec.right_half_line(float(interval.a) / radius)
    raise ValueError(f"cannot rescale interval kind {interval.kind!r}")


def _precondition(
    f: SparsePoly, interval: IntervalSpec, normalize: bool, use_radius: bool = True
) -> tuple[SparsePoly, IntervalSpec, float, float]:
    """Return (scaled f, scaled interval, scale, radius) with f = scale * g(t/radius)."""
    radius = pick_radius(f, interval) if (normalize and use_radius) else 1.0
    scaled_terms = [(e, float(c) * radius**e) for e, c in f.terms]
    scale = _pow2(max(abs(c) for _, c in scaled_terms)) if normalize else 1.0
    g = SparsePoly.from_terms([(e, c / scale) for e, c in scaled_terms], tol=0.0)
    return g, _scaled_interval(interval, radius), scale, radius


# ---------------------------------------------------------------------------
# Coefficient-matching rows


def _coefficient_rows(
    system: Sequence[WeightedBlock], g: SparsePoly, d: int
) -> list[Constraint]:
    """One equality row per coefficient of t^0..t^d matching g."""
    per_exponent: dict[int, list[tuple[int, int, int, float]]] = {e: [] for e in range(d + 1)}
    for bidx, wb in enumerate(system):
        mult = wb.multiplier()
        for i in range(wb.k + 1):
            for j in range(i, wb.k + 1):
                for h, c in mult.terms:
                    per_exponent[i + j + h].append((bidx, i, j, float(c)))
    rows = []
    for e in range(d + 1):
        rows.append(
            Constraint(
                entries=tuple(sorted(per_exponent[e])),
                rhs=float(g.coeff(e)),
                label=f"coeff t^{e}",
            )
        )
    return rows


def _base_meta(kind, f, interval, k, d, system, scaled, scale, radius, shifts=None) -> dict:
    original_system = weight_system(interval, d, k, shifts)
    if len(original_system) != len(system):
        raise AssertionError("weight systems for original and scaled interval must align")
    return {
        "kind": kind,
        "interval": interval,
        "k": k,
        "d": d,
        "weights": tuple((wb.weight, wb.shift, wb.k) for wb in original_system),
        "scaled_weights": tuple((wb.weight, wb.shift, wb.k) for wb in system),
        "scaled_interval": scaled,
        "scale": scale,
        "radius": radius,
        "input_support": f.support(),
    }


# ---------------------------------------------------------------------------
# Builders


def build_membership(
    f: SparsePoly,
    k: int,
    interval: IntervalSpec,
    shifts: Optional[Sequence[int]] = None,
    normalize: bool = True,
) -> BlockSdp:
    """Feasibility problem: does f lie in the interval's weighted-square cone?

    The cone has degree d = deg f.  ``shifts`` restricts the half-line shift
    set (diagnostic mode); by default all shifts 0..d-2k are present.
    """
    if k <= 0:
        raise ValueError("k must be a positive integer")
    if f.is_zero():
        raise ValueError("membership of the zero polynomial is trivial; need f != 0")
    d = f.degree()
    if 2 * k > d:
        raise ValueError(
            f"2k = {2 * k} exceeds deg f = {d}: use dense degree-2k cone "
            f"(pad the degree, e.g. the bound builder with d = 2k)"
        )
    if interval.kind == "full_line":
        raise ValueError("full-line membership needs two half-line problems; see build_full_line")
    # Membership keeps the original coordinate (radius 1): feasibility is
    # scale-invariant and unscaled Gram blocks are easier to read.
    g, scaled_iv, scale, radius = _precondition(f, interval, normalize, use_radius=False)
    system = weight_system(scaled_iv, d, k, shifts)
    rows = _coefficient_rows(system, g, d)
    blocks = tuple(BlockSpec(wb.k + 1, wb.label) for wb in system)
    meta = _base_meta("membership", f, interval, k, d, system, scaled_iv, scale, radius, shifts)
    if shifts is not None:
        meta["diagnostic_shifts"] = tuple(sorted(set(int(s) for s in shifts)))
    return BlockSdp(
        blocks=blocks,
        scalars=(),
        constraints=tuple(rows),
        objective=Objective(),
        sense="feasibility",
        meta=meta,
    )


def build_bound_primal(
    f: SparsePoly,
    k: int,
    interval: IntervalSpec,
    d: Optional[int] = None,
    normalize: bool = True,
) -> BlockSdp:
    """Maximize lambda with f - lambda in the interval's cone of degree d.

    d defaults to deg f, silently padded up to 2k so low-degree inputs use
    the dense boundary system.  The optimum in original units is recovered by
    :func:`bound_value` (the row data is preconditioned).
    """
    if k <= 0:
        raise ValueError("k must be a positive integer")
    if f.is_zero():
        raise ValueError("cannot bound the zero polynomial")
    if interval.kind == "full_line":
        raise ValueError("full-line bounds combine two half-line problems; see the cli")
    if d is None:
        d = max(f.degree(), 2 * k)
    if d < f.degree():
        raise ValueError("d must be at least deg f")
    if d < 2 * k:
        raise ValueError("d must be at least 2k")
    g, scaled_iv, scale, radius = _precondition(f, interval, normalize)
    system = weight_system(scaled_iv, d, k)
    rows = _coefficient_rows(system, g, d)
    # f - lambda: the constant-coefficient row gains the lambda variable.
    r0 = rows[0]
    rows[0] = Constraint(
        entries=r0.entries,
        scalar_entries=((0, 1.0),),
        rhs=r0.rhs,
        label=r0.label,
    )
    blocks = tuple(BlockSpec(wb.k + 1, wb.label) for wb in system)
    meta = _base_meta("bound", f, interval, k, d, system, scaled_iv, scale, radius)
    nsupp = len(set(f.support()) | {0})
    meta["sparse_exact"] = nsupp <= 2 * k + 1
    return BlockSdp(
        blocks=blocks,
        scalars=("lambda",),
        constraints=tuple(rows),
        objective=Objective(scalar_entries=((0, 1.0),)),
        sense="maximize",
        meta=meta,
    )


def build_moment_dual(
    f: SparsePoly,
    k: int,
    d: Optional[int] = None,
    interval: IntervalSpec = IntervalSpec.half_line(),
    normalize: bool = True,
) -> BlockSdp:
    """Minimize <f, v> over pseudo-moments with PSD weighted Hankel sections.

    Free scalars v_0..v_d with v_0 = 1; for every weighted block of the
    interval's system, a PSD variable H linked by H[i,j] = sum of multiplier
    coefficients times v_{i+j+h}.  Moments are recovered in original units by
    :func:`moments_from_solution`.
    """
    if k <= 0:
        raise ValueError("k must be a positive integer")
    if f.is_zero():
        raise ValueError("cannot take moments against the zero polynomial")
    if interval.kind == "full_line":
        raise ValueError("full-line moment problems are not defined; split into half lines")
    if d is None:
        d = max(f.degree(), 2 * k)
    if d < f.degree():
        raise ValueError("d must be at least deg f")
    if d < 2 * k:
        raise ValueError("d must be at least 2k")
    g, scaled_iv, scale, radius = _precondition(f, interval, normalize)
    system = weight_system(scaled_iv, d, k)
    blocks = tuple(BlockSpec(wb.k + 1, f"H[{wb.label}]") for wb in system)
    scalars = tuple(f"v{i}" for i in range(d + 1))
    rows = [
        Constraint(scalar_entries=((0, 1.0),), rhs=1.0, label="moment normalization")
    ]
    for bidx, wb in enumerate(system):
        mult = wb.multiplier()
        for i in range(wb.k + 1):
            for j in range(i, wb.k + 1):
                diag = 1.0 if i == j else 0.5
                svec = tuple((i + j + h, -float(c)) for h, c in mult.terms)
                rows.append(
                    Constraint(
                        entries=((bidx, i, j, diag),),
                        scalar_entries=svec,
                        label=f"link {wb.label}[{i},{j}]",
                    )
                )
    objective = Objective(
        scalar_entries=tuple((e, float(c)) for e, c in sorted(g.terms))
    )
    meta = _base_meta("moment", f, interval, k, d, system, scaled_iv, scale, radius)
    return BlockSdp(
        blocks=blocks,
        scalars=scalars,
        constraints=tuple(rows),
        objective=objective,
        sense="minimize",
        meta=meta,
    )


def build_full_line(f: SparsePoly, k: int) -> tuple[BlockSdp, BlockSdp]:
    """Membership on the whole line as the pair (f(t), f(-t)) on the half line.

    f is nonnegative on the line exactly when both problems are feasible; a
    full-line lower bound is the smaller of the two half-line bounds.
    """
    half = IntervalSpec.half_line()
    return (
        build_membership(f, k, half),
        build_membership(f.substitute_neg(), k, half),
    )


def build_banded(f: SparsePoly, k: int, bound: bool = False, normalize: bool = True) -> BlockSdp:
    """Half-line membership via two banded PSD variables instead of many blocks.

    Writes f = basis_A' * A * basis_A + t * basis_B' * B * basis_B where A and
    B have bandwidth 2k+1: size (e+1, e) for deg f = 2e, (e+1, e+1) for
    deg f = 2e+1.  Out-of-band entries are pinned to zero by equality rows.
    With ``bound=True`` the constant coefficient gains a maximized scalar.
    """
    if k <= 0:
        raise ValueError("k must be a positive integer")
    if f.is_zero():
        raise ValueError("need f != 0")
    d = f.degree()
    if d <= 2 * k:
        raise ValueError("the banded form requires deg f > 2k")
    e = d // 2
    size_a = e + 1
    size_b = e if d % 2 == 0 else e + 1
    g, _, scale, radius = _precondition(
        f, IntervalSpec.half_line(), normalize, use_radius=bound
    )
    per_exponent: dict[int, list[tuple[int, int, int, float]]] = {m: [] for m in range(d + 1)}
    for i in range(size_a):
        for j in range(i, min(i + k, size_a - 1) + 1):
            per_exponent[i + j].append((0, i, j, 1.0))
    for i in range(size_b):
        for j in range(i, min(i + k, size_b - 1) + 1):
            per_exponent[i + j + 1].append((1, i, j, 1.0))
    rows = []
    for m in range(d + 1):
        rows.append(
            Constraint(
                entries=tuple(sorted(per_exponent[m])),
                scalar_entries=((0, 1.0),) if (bound and m == 0) else (),
                rhs=float(g.coeff(m)),
                label=f"coeff t^{m}",
            )
        )
    for name, bidx, size in (("A", 0, size_a), ("B", 1, size_b)):
        for i in range(size):
            for j in range(i + k + 1, size):
                rows.append(
                    Constraint(
                        entries=((bidx, i, j, 1.0),),
                        label=f"band {name}[{i},{j}]",
                    )
                )
    meta = {
        "kind": "banded_bound" if bound else "banded_membership",
        "interval": IntervalSpec.half_line(),
        "k": k,
        "d": d,
        "banded_sizes": (size_a, size_b),
        "bandwidth": 2 * k + 1,
        "scale": scale,
        "radius": radius,
        "input_support": f.support(),
    }
    return BlockSdp(
        blocks=(BlockSpec(size_a, "banded A"), BlockSpec(size_b, "banded B")),
        scalars=("lambda",) if bound else (),
        constraints=tuple(rows),
        objective=Objective(scalar_entries=((0, 1.0),)) if bound else Objective(),
        sense="maximize" if bound else "feasibility",
        meta=meta,
    )


def expand_banded(problem: BlockSdp) -> BlockSdp:
    """Rewrite a banded problem over its clique blocks of size k+1.

    Clique i of variable A covers indices {i..i+k} and contributes the shift
    t^{2i}; clique i of B contributes t^{2i+1}.  The result coincides row for
    row with the plain shifted-block formulation.
    """
    meta = problem.meta
    if meta.get("kind") not in ("banded_membership", "banded_bound"):
        raise ValueError("expand_banded expects a problem built by build_banded")
    k, d = meta["k"], meta["d"]
    size_a, size_b = meta["banded_sizes"]
    expect_a = d // 2 + 1
    expect_b = d // 2 if d % 2 == 0 else d // 2 + 1
    if (size_a, size_b) != (expect_a, expect_b):
        raise ValueError(
            f"parity/size mismatch: banded sizes {(size_a, size_b)} do not fit degree {d}"
        )
    shifts_a = [2 * i for i in range(size_a - k)]
    shifts_b = [2 * i + 1 for i in range(size_b - k)]
    if sorted(shifts_a + shifts_b) != list(range(d - 2 * k + 1)):
        raise ValueError("parity/size mismatch: clique shifts do not cover 0..d-2k")
    one = SparsePoly.constant(1)
    system = tuple(
        WeightedBlock(one, s, k, f"t^{s}") for s in sorted(shifts_a + shifts_b)
    )
    g = SparsePoly.from_terms(
        [(row_index, row.rhs) for row_index, row in enumerate(problem.constraints[: d + 1])],
        tol=0.0,
    )
    rows = _coefficient_rows(system, g, d)
    bound = meta["kind"] == "banded_bound"
    if bound:
        r0 = rows[0]
        rows[0] = Constraint(r0.entries, ((0, 1.0),), r0.rhs, r0.label)
    new_meta = dict(meta)
    new_meta["kind"] = "bound" if bound else "membership"
    new_meta["scaled_interval"] = IntervalSpec.half_line()
    new_meta["weights"] = tuple((wb.weight, wb.shift, wb.k) for wb in system)
    new_meta["expanded_from_banded"] = True
    return BlockSdp(
        blocks=tuple(BlockSpec(wb.k + 1, wb.label) for wb in system),
        scalars=problem.scalars,
        constraints=tuple(rows),
        objective=problem.objective,
        sense=problem.sense,
        meta=new_meta,
    )


def assemble_banded(problem: BlockSdp, clique_values: Sequence) -> tuple:
    """Sum clique-block values back into the two banded matrices (A, B).

    ``clique_values`` are matrices for the blocks of ``expand_banded(problem)``
    in order (even shifts ascending interleaved with odd as built there).
    """
    import numpy as np

    meta = problem.meta
    if meta.get("kind") not in ("banded_membership", "banded_bound"):
        raise ValueError("assemble_banded expects a problem built by build_banded")
    k = meta["k"]
    size_a, size_b = meta["banded_sizes"]
    shifts = sorted(
        [2 * i for i in range(size_a - k)] + [2 * i + 1 for i in range(size_b - k)]
    )
    if len(clique_values) != len(shifts):
        raise ValueError(
            f"expected {len(shifts)} clique blocks, got {len(clique_values)}"
        )
    A = np.zeros((size_a, size_a))
    B = np.zeros((size_b, size_b))
    for s, val in zip(shifts, clique_values):
        val = np.asarray(val, dtype=float)
        if val.shape != (k + 1, k + 1):
            raise ValueError(f"clique block for shift {s} must be {(k + 1, k + 1)}")
        i0 = s // 2
        if s % 2 == 0:
            A[i0 : i0 + k + 1, i0 : i0 + k + 1] += val
        else:
            B[i0 : i0 + k + 1, i0 : i0 + k + 1] += val
    return A, B


def banded_to_cliques(matrix, k: int) -> list:
    """Split a PSD banded matrix into PSD clique-supported summands.

    Column-by-column peeling: the rank-one term built from column i is
    supported on {i..i+k} because of the band, and subtracting it keeps the
    remainder PSD.  Small negative eigenvalues are projected away first.
    """
    import numpy as np

    m = np.asarray(matrix, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("matrix must be square")
    band_err = max(
        (abs(m[i, j]) for i in range(n) for j in range(n) if abs(i - j) > k),
        default=0.0,
    )
    scale = max(1.0, float(np.abs(m).max()))
    if band_err > 1e-6 * scale:
        raise ValueError(f"matrix is not banded to tolerance: |out-of-band| = {band_err:.3g}")
    m = (m + m.T) / 2.0
    evals, evecs = np.linalg.eigh(m)
    if evals.min() < -1e-6 * scale:
        raise ValueError(f"matrix is not PSD to tolerance: min eigenvalue {evals.min():.3g}")
    if evals.min() < 0:
        m = (evecs * np.maximum(evals, 0.0)) @ evecs.T
        m = (m + m.T) / 2.0
    for i in range(n):
        for j in range(n):
            if abs(i - j) > k:
                m[i, j] = 0.0
    out = []
    rem = m.copy()
    for i in range(n):
        top = min(i + k, n - 1)
        col = rem[i : top + 1, i].copy()
        diag = col[0]
        piece = np.zeros((top - i + 1, top - i + 1))
        if diag > 1e-14 * scale:
            u = col / math.sqrt(diag)
            piece = np.outer(u, u)
            rem[i : top + 1, i : top + 1] -= piece
        rem[i, :] = 0.0
        rem[:, i] = 0.0
        out.append((i, piece))
    return out


# ---------------------------------------------------------------------------
# Solution post-processing


def bound_value(problem: BlockSdp, solution) -> float:
    """Optimum in original units, undoing the builder's preconditioning."""
    kind = problem.meta.get("kind")
    if kind not in ("bound", "moment", "banded_bound"):
        raise ValueError(f"no bound to recover from a {kind!r} problem")
    return problem.meta["scale"] * float(solution.primal_value)


def moments_from_solution(problem: BlockSdp, solution) -> MomentVector:
    """Moment vector in original units (v_i = radius^i * scaled value)."""
    if problem.meta.get("kind") != "moment":
        raise ValueError("moments_from_solution expects a moment problem")
    radius = problem.meta["radius"]
    vals = [float(v) * radius**i for i, v in enumerate(solution.scalar_values)]
    return MomentVector(tuple(vals))


def default_k(f: SparsePoly) -> int:
    """Smallest k whose (2k+1)-monomial theory covers f's support."""
    n = len(set(f.support()) | {0}) - 1
    return max(1, n // 2)
