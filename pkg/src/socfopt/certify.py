"""Checkable nonnegativity certificates recovered from solved Gram problems.

A certificate for ``f`` on an interval is a list of parts, each a triple
``(weight, shift, gram)``: a weight polynomial fixed by the interval, a
monomial shift exponent, and a symmetric PSD matrix over the basis
``1, t, ..., t^k``.  The parts sum to ``f - bound``:

    f(t) - bound  =  sum_parts  weight(t) * t^shift * basis(t)' gram basis(t)

so positive-semidefiniteness of every gram block exhibits ``f >= bound`` on
the interval by inspection.  ``extract`` pulls a certificate out of an
optimal solver solution (undoing the builder's scaling so everything is in
the caller's original units), ``verify`` re-checks the identity and the
eigenvalue bounds independently, and ``theorem_shape`` rewrites the parts as
an explicit sum of weighted squares.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .cones import BlockSdp, banded_to_cliques, bound_value
from .poly import IntervalSpec, SparsePoly
from .sdp import STATUS_OPTIMAL, SdpSolution

# Eigenvalues of a solution block in [-EIG_CLIP_TOL, 0) are treated as
# roundoff and projected to zero; anything below that is a refusal to
# certify, not a repair.
EIG_CLIP_TOL = 1e-8
# verify(): the reassembled polynomial must match f - bound coefficientwise
# to VERIFY_COEFF_TOL * (1 + max |coeff of f|), and every gram must be PSD
# down to -VERIFY_EIG_TOL.
VERIFY_COEFF_TOL = 1e-6
VERIFY_EIG_TOL = 1e-8
# Denominator cap for the exact-arithmetic verification mode.
EXACT_DENOMINATOR = 10**6
# Parts whose gram is this small relative to the largest part carry no
# information at solver tolerance and are dropped during extraction.
_DROP_REL = 1e-9


class CertificatePart(NamedTuple):
    """One weighted Gram summand: ``weight(t) * t**shift * basis' gram basis``."""

    weight: SparsePoly
    shift: int
    gram: np.ndarray

    def size(self) -> int:
        return self.gram.shape[0]

    def polynomial(self) -> SparsePoly:
        """Expand this part to an ordinary polynomial (float coefficients)."""
        return _expand_part(self.weight, self.shift, self.gram)


@dataclass(frozen=True)
class GramCertificate:
    """A weighted sum-of-squares witness that ``f - bound >= 0`` on ``interval``."""

    parts: tuple[CertificatePart, ...]
    interval: IntervalSpec
    bound: float

    def polynomial(self) -> SparsePoly:
        """The sum of all parts; should equal ``f - bound``."""
        total = SparsePoly.zero()
        for part in self.parts:
            total = total + part.polynomial()
        return total

    # -- serialization ------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "bound": float(self.bound),
            "interval": self.interval.to_dict(),
            "parts": [
                {
                    "weight": part.weight.to_dict()["terms"],
                    "shift": int(part.shift),
                    "gram": [[float(v) for v in row] for row in part.gram],
                }
                for part in self.parts
            ],
        }

    @staticmethod
    def from_dict(data: dict) -> "GramCertificate":
        parts = []
        for entry in data["parts"]:
            gram = np.array(entry["gram"], dtype=float)
            if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
                raise ValueError("gram blocks must be square matrices")
            parts.append(
                CertificatePart(
                    weight=SparsePoly.from_dict({"terms": entry["weight"]}),
                    shift=int(entry["shift"]),
                    gram=gram,
                )
            )
        return GramCertificate(
            parts=tuple(parts),
            interval=IntervalSpec.from_dict(data["interval"]),
            bound=float(data["bound"]),
        )

    def to_json(self, indent: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @staticmethod
    def from_json(text: str) -> "GramCertificate":
        return GramCertificate.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Extraction from solver output


def _psd_clip(mat: np.ndarray, label: str) -> np.ndarray:
    """Project roundoff-negative eigenvalues to zero; refuse real violations."""
    sym = (mat + mat.T) / 2.0
    evals, evecs = np.linalg.eigh(sym)
    low = float(evals.min()) if evals.size else 0.0
    if low < -EIG_CLIP_TOL:
        raise ValueError(
            f"solution not certifiable: {label} has eigenvalue {low:.3g} "
            f"below -{EIG_CLIP_TOL:g}"
        )
    if low < 0.0:
        sym = (evecs * np.maximum(evals, 0.0)) @ evecs.T
        sym = (sym + sym.T) / 2.0
    return sym


def _unscale_gram(
    gram: np.ndarray, scale: float, radius: float, shift: int, weight_degree: int
) -> np.ndarray:
    """Map a gram block of the scaled problem back to original units.

    The builders solve for g(u) = f(R u)/c; a block at shift s under a
    weight of degree w contributes c * R^(-s-w) * D^-1 Q D^-1 with
    D = diag(R^0..R^m) once rewritten in t = R u.
    """
    m = gram.shape[0]
    inv_d = radius ** -np.arange(m, dtype=float)
    factor = scale / radius ** (shift + weight_degree)
    out = factor * (gram * inv_d[:, None] * inv_d[None, :])
    return (out + out.T) / 2.0


def extract(solution: SdpSolution, problem: BlockSdp) -> GramCertificate:
    """Build a certificate from an optimal solve of a Gram-side problem.

    Accepts membership, bound, and banded problems.  Gram blocks are
    symmetrized and projected onto the PSD cone (eigenvalues in
    ``[-EIG_CLIP_TOL, 0)`` only; worse violations raise).  Parts that are
    numerically zero relative to the largest part are dropped.
    """
    meta = problem.meta
    kind = meta.get("kind")
    if kind in ("moment",):
        raise ValueError("moment problems are dual-side; certificates need a Gram problem")
    if kind not in ("membership", "bound", "banded_membership", "banded_bound"):
        raise ValueError(f"cannot extract a certificate from a {kind!r} problem")
    if solution.status != STATUS_OPTIMAL:
        raise ValueError(
            f"solution not certifiable: solver status is {solution.status!r}, need Optimal"
        )
    scale = float(meta["scale"])
    radius = float(meta["radius"])

    raw_parts: list[tuple[SparsePoly, int, np.ndarray]] = []
    if kind in ("membership", "bound"):
        weights = meta["weights"]
        if len(weights) != len(solution.block_values):
            raise ValueError("solution block count does not match the weight system")
        for (weight, shift, _k), block in zip(weights, solution.block_values):
            clipped = _psd_clip(np.asarray(block, dtype=float), f"block at shift {shift}")
            raw_parts.append((weight, shift, clipped))
    else:
        one = SparsePoly.constant(1)
        k = int(meta["k"])
        names = ("even-shift banded block", "odd-shift banded block")
        for offset, (block, name) in enumerate(zip(solution.block_values, names)):
            clipped = _psd_clip(np.asarray(block, dtype=float), name)
            for start, piece in banded_to_cliques(clipped, k):
                raw_parts.append((one, 2 * start + offset, piece))

    parts = []
    for weight, shift, gram in raw_parts:
        unscaled = _unscale_gram(gram, scale, radius, shift, weight.degree())
        parts.append(CertificatePart(weight=weight, shift=shift, gram=unscaled))

    largest = max((float(np.abs(p.gram).max()) for p in parts if p.size()), default=0.0)
    cutoff = _DROP_REL * (1.0 + largest)
    kept = tuple(
        p for p in parts if p.size() and float(np.abs(p.gram).max()) > cutoff
    )

    if kind in ("bound", "banded_bound"):
        bound = bound_value(problem, solution)
    else:
        bound = 0.0
    return GramCertificate(parts=kept, interval=meta["interval"], bound=bound)


# ---------------------------------------------------------------------------
# Independent verification


def _expand_part(weight: SparsePoly, shift: int, gram: np.ndarray) -> SparsePoly:
    m = gram.shape[0]
    acc: dict[int, float] = {}
    for i in range(m):
        for j in range(m):
            e = i + j
            acc[e] = acc.get(e, 0.0) + float(gram[i, j])
    quad = SparsePoly.from_terms(acc.items(), tol=0.0)
    return weight * quad.shift_exp(shift)


def _expand_part_exact(weight: SparsePoly, shift: int, gram: Sequence[Sequence[Fraction]]):
    m = len(gram)
    acc: dict[int, Fraction] = {}
    for i in range(m):
        for j in range(m):
            e = i + j
            acc[e] = acc.get(e, Fraction(0)) + gram[i][j]
    total: dict[int, Fraction] = {}
    for we, wc in weight.terms:
        wc = wc if isinstance(wc, (int, Fraction)) else Fraction(wc)
        for e, c in acc.items():
            key = we + e + shift
            total[key] = total.get(key, Fraction(0)) + Fraction(wc) * c
    return total


def verify(cert: GramCertificate, f: SparsePoly, exact: bool = False) -> dict:
    """Re-check a certificate against ``f`` without trusting the solver.

    Returns ``{"coeff_residual", "min_eig", "ok"}``: the largest
    coefficientwise gap between the reassembled sum and ``f - bound``, the
    smallest eigenvalue over all gram blocks, and whether both are within
    tolerance (``VERIFY_COEFF_TOL`` scaled by ``1 + max|coeff of f|``, and
    ``-VERIFY_EIG_TOL``).

    With ``exact=True`` the gram entries are rounded to rationals with
    denominator at most ``EXACT_DENOMINATOR`` and the polynomial identity is
    evaluated in exact rational arithmetic, so the reported residual carries
    no floating-point error of its own.
    """
    min_eig = 0.0
    for part in cert.parts:
        sym = (part.gram + part.gram.T) / 2.0
        evals = np.linalg.eigvalsh(sym)
        if evals.size:
            min_eig = min(min_eig, float(evals.min()))

    if exact:
        total: dict[int, Fraction] = {}
        for part in cert.parts:
            rounded = [
                [Fraction(float(v)).limit_denominator(EXACT_DENOMINATOR) for v in row]
                for row in part.gram
            ]
            for e, c in _expand_part_exact(part.weight, part.shift, rounded).items():
                total[e] = total.get(e, Fraction(0)) + c
        target: dict[int, Fraction] = {
            e: (c if isinstance(c, (int, Fraction)) else Fraction(c))
            for e, c in f.terms
        }
        target[0] = target.get(0, Fraction(0)) - Fraction(cert.bound)
        residual = 0.0
        for e in set(total) | set(target):
            gap = total.get(e, Fraction(0)) - target.get(e, Fraction(0))
            residual = max(residual, abs(float(gap)))
    else:
        assembled = cert.polynomial()
        target_poly = f.to_float() - SparsePoly.constant(float(cert.bound))
        diff = assembled - target_poly
        residual = diff.max_norm()

    ok = residual <= VERIFY_COEFF_TOL * (1.0 + f.max_norm()) and min_eig >= -VERIFY_EIG_TOL
    return {"coeff_residual": float(residual), "min_eig": float(min_eig), "ok": bool(ok)}


# ---------------------------------------------------------------------------
# Sum-of-squares normal form


def theorem_shape(
    cert: GramCertificate, eig_tol: float = VERIFY_EIG_TOL
) -> list[tuple[SparsePoly, SparsePoly, SparsePoly]]:
    """Rewrite the certificate as explicit squares: ``sum square^2 * mono * weight``.

    Each gram block is eigendecomposed and every positive eigenpair becomes
    one triple ``(square, nonneg_coeff_poly, weight)`` where ``square`` is a
    polynomial of degree at most the block size minus one (sign-normalized
    to a positive leading coefficient, with the eigenvalue's square root
    folded in), ``nonneg_coeff_poly`` is the monomial ``t**shift``, and
    ``weight`` is the part's interval weight.  Eigenvalues below ``-eig_tol``
    raise; those in ``[-eig_tol, 0]`` are discarded as roundoff.
    """
    out: list[tuple[SparsePoly, SparsePoly, SparsePoly]] = []
    for part in cert.parts:
        sym = (part.gram + part.gram.T) / 2.0
        evals, evecs = np.linalg.eigh(sym)
        top = float(evals.max()) if evals.size else 0.0
        for idx in range(evals.size):
            lam = float(evals[idx])
            if lam < -eig_tol:
                raise ValueError(
                    f"gram block at shift {part.shift} is not PSD: eigenvalue {lam:.3g}"
                )
            if lam <= max(eig_tol, 1e-12 * max(top, 1.0)):
                continue
            vec = math.sqrt(lam) * evecs[:, idx]
            tol = 1e-13 * float(np.abs(vec).max())
            square = SparsePoly.from_terms(
                [(i, float(vec[i])) for i in range(vec.size)], tol=tol
            )
            if square.is_zero():
                continue
            if float(square.leading_coeff()) < 0:
                square = -square
            out.append((square, SparsePoly.monomial(part.shift), part.weight))
    return out


def assemble_theorem_shape(
    triples: Sequence[tuple[SparsePoly, SparsePoly, SparsePoly]],
) -> SparsePoly:
    """Sum ``square^2 * mono * weight`` back into one polynomial."""
    total = SparsePoly.zero()
    for square, mono, weight in triples:
        total = total + (square * square * mono * weight)
    return total
