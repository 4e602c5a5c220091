"""Sparse univariate polynomials and the intervals they are optimized over.

Polynomials are stored as ordered (exponent, coefficient) pairs with strictly
decreasing exponents and no explicit zeros.  Coefficients are floats on the
numeric path; `int` / `Fraction` coefficients are accepted everywhere and kept
exact, which is what the root-counting oracle and certificate verification
rely on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Coeff = Union[int, float, Fraction]

#: Coefficients with magnitude below this are dropped after float arithmetic.
DEFAULT_COEFF_TOL = 1e-14


def _is_exact(c: Coeff) -> bool:
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


def _clean_terms(pairs: Iterable[tuple[int, Coeff]], tol: float) -> tuple[tuple[int, Coeff], ...]:
    merged: dict[int, Coeff] = {}
    for exp, coef in pairs:
        exp = int(exp)
        if exp < 0:
            raise ValueError(f"negative exponent {exp}")
        merged[exp] = merged.get(exp, 0) + coef
    kept = []
    for exp in sorted(merged, reverse=True):
        c = merged[exp]
        if _is_exact(c):
            if c == 0:
                continue
        elif abs(c) <= tol:
            continue
        kept.append((exp, c))
    return tuple(kept)


@dataclass(frozen=True)
class SparsePoly:
    """Immutable sparse polynomial in one variable."""

    terms: tuple[tuple[int, Coeff], ...]

    def __post_init__(self) -> None:
        last = None
        for exp, coef in self.terms:
            if not isinstance(exp, int) or exp < 0:
                raise ValueError(f"bad exponent {exp!r}")
            if last is not None and exp >= last:
                raise ValueError("exponents must be strictly decreasing")
            if coef == 0:
                raise ValueError("zero coefficient stored")
            last = exp

    # -- construction -------------------------------------------------

    @staticmethod
    def from_terms(pairs: Iterable[tuple[int, Coeff]], tol: float = DEFAULT_COEFF_TOL) -> "SparsePoly":
        """Build from (exponent, coefficient) pairs; merges duplicates, drops tiny floats."""
        return SparsePoly(_clean_terms(pairs, tol))

    @staticmethod
    def from_coeffs(coeffs: Sequence[Coeff], tol: float = DEFAULT_COEFF_TOL) -> "SparsePoly":
        """Build from a dense ascending coefficient list [c0, c1, ...]."""
        return SparsePoly.from_terms(list(enumerate(coeffs)), tol)

    @staticmethod
    def zero() -> "SparsePoly":
        return SparsePoly(())

    @staticmethod
    def constant(c: Coeff) -> "SparsePoly":
        return SparsePoly.from_terms([(0, c)])

    @staticmethod
    def monomial(exp: int, coef: Coeff = 1) -> "SparsePoly":
        return SparsePoly.from_terms([(exp, coef)])

    # -- inspection ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        if not self.terms:
            raise ValueError("zero polynomial has no degree")
        return self.terms[0][0]

    def leading_coeff(self) -> Coeff:
        if not self.terms:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.terms[0][1]

    def support(self) -> tuple[int, ...]:
        """Exponents with nonzero coefficient, descending."""
        return tuple(exp for exp, _ in self.terms)

    def coeff(self, exp: int) -> Coeff:
        for e, c in self.terms:
            if e == exp:
                return c
            if e < exp:
                break
        return 0

    def max_norm(self) -> float:
        return max((abs(c) for _, c in self.terms), default=0.0)

    def coeffs_dense(self) -> list[Coeff]:
        """Ascending dense coefficient list of length degree()+1 (empty for 0)."""
        if not self.terms:
            return []
        dense: list[Coeff] = [0] * (self.degree() + 1)
        for exp, coef in self.terms:
            dense[exp] = coef
        return dense

    def is_exact(self) -> bool:
        return all(_is_exact(c) for _, c in self.terms)

    # -- evaluation ---------------------------------------------------

    def eval(self, t: Coeff) -> Coeff:
        """Evaluate at t, with the convention 0**0 == 1."""
        total: Coeff = 0
        for exp, coef in self.terms:
            total += coef * t**exp
        return total

    def __call__(self, t: Coeff) -> Coeff:
        return self.eval(t)

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        return SparsePoly.from_terms(list(self.terms) + list(other.terms))

    def __neg__(self) -> "SparsePoly":
        return SparsePoly(tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        return self + (-other)

    def __mul__(self, other: "SparsePoly") -> "SparsePoly":
        pairs = [(e1 + e2, c1 * c2) for e1, c1 in self.terms for e2, c2 in other.terms]
        return SparsePoly.from_terms(pairs)

    def scale(self, s: Coeff) -> "SparsePoly":
        if s == 0:
            return SparsePoly.zero()
        return SparsePoly.from_terms([(e, c * s) for e, c in self.terms])

    def shift_exp(self, w: int) -> "SparsePoly":
        """Multiply by t**w."""
        if w < 0:
            raise ValueError("shift must be nonnegative")
        return SparsePoly(tuple((e + w, c) for e, c in self.terms))

    def derivative(self) -> "SparsePoly":
        return SparsePoly.from_terms([(e - 1, c * e) for e, c in self.terms if e > 0])

    def substitute_neg(self) -> "SparsePoly":
        """Return f(-t)."""
        return SparsePoly(tuple((e, c if e % 2 == 0 else -c) for e, c in self.terms))

    def to_exact(self) -> "SparsePoly":
        """Convert every coefficient to an exact Fraction (floats convert losslessly)."""
        return SparsePoly(tuple((e, Fraction(c)) for e, c in self.terms))

    def to_float(self) -> "SparsePoly":
        return SparsePoly(tuple((e, float(c)) for e, c in self.terms))

    # -- named operations ----------------------------------------------

    def descartes_positive_root_bound(self) -> int:
        """Number of sign changes in the coefficient sequence (Descartes bound
        on roots in (0, inf), counted with multiplicity)."""
        if not self.terms:
            raise ValueError("zero polynomial")
        changes = 0
        prev = None
        for _, coef in self.terms:
            sign = 1 if coef > 0 else -1
            if prev is not None and sign != prev:
                changes += 1
            prev = sign
        return changes

    def factor_out_zero_root(self) -> tuple[int, "SparsePoly"]:
        """Write f = t**w * q with q(0) != 0; returns (w, q)."""
        if not self.terms:
            raise ValueError("zero polynomial")
        w = self.terms[-1][0]
        return w, SparsePoly(tuple((e - w, c) for e, c in self.terms))

    # -- serialization ------------------------------------------------

    def to_dict(self) -> dict:
        return {"terms": [{"exp": e, "coef": float(c)} for e, c in self.terms]}

    @staticmethod
    def from_dict(data: dict) -> "SparsePoly":
        if not isinstance(data, dict) or "terms" not in data:
            raise ValueError("polynomial JSON must be an object with a 'terms' list")
        seen = set()
        pairs = []
        for entry in data["terms"]:
            exp = entry["exp"]
            if not isinstance(exp, int) or exp < 0:
                raise ValueError(f"bad exponent {exp!r}")
            if exp in seen:
                raise ValueError(f"duplicate exponent {exp}")
            seen.add(exp)
            coef = entry["coef"]
            # JSON distinguishes 1 from 1.0: integer coefficients stay exact
            # so downstream exact arithmetic remains available.
            if isinstance(coef, bool) or not isinstance(coef, (int, float)):
                raise ValueError(f"bad coefficient {coef!r}")
            pairs.append((exp, coef))
        return SparsePoly.from_terms(pairs, tol=0.0)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_json(text: str) -> "SparsePoly":
        return SparsePoly.from_dict(json.loads(text))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for exp, coef in self.terms:
            mono = "1" if exp == 0 else ("t" if exp == 1 else f"t^{exp}")
            if exp == 0:
                bits.append(f"{coef}")
            elif coef == 1:
                bits.append(mono)
            elif coef == -1:
                bits.append(f"-{mono}")
            else:
                bits.append(f"{coef}*{mono}")
        return " + ".join(bits).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# Intervals


_KINDS = ("half_line", "unit_interval", "compact", "right_half_line", "full_line")


@dataclass(frozen=True)
class IntervalSpec:
    """The domain a polynomial is bounded over.

    kind is one of: half_line [0, inf), unit_interval [0, 1],
    compact [a, b] with 0 <= a < b, right_half_line [a, inf) with a > 0,
    full_line (-inf, inf).
    """

    kind: str
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown interval kind {self.kind!r}")
        if self.kind == "compact":
            if not (0 <= self.a < self.b):
                raise ValueError("compact interval needs 0 <= a < b")
        if self.kind == "right_half_line" and not self.a > 0:
            raise ValueError("right half-line needs a > 0")

    @staticmethod
    def half_line() -> "IntervalSpec":
        return IntervalSpec("half_line")

    @staticmethod
    def unit_interval() -> "IntervalSpec":
        return IntervalSpec("unit_interval", 0.0, 1.0)

    @staticmethod
    def compact(a: float, b: float) -> "IntervalSpec":
        return IntervalSpec("compact", a, b)

    @staticmethod
    def right_half_line(a: float) -> "IntervalSpec":
        return IntervalSpec("right_half_line", a)

    @staticmethod
    def full_line() -> "IntervalSpec":
        return IntervalSpec("full_line")

    @staticmethod
    def parse(text: str) -> "IntervalSpec":
        """Parse 'R+', 'R', '[0,1]', '[a,b]' or '[a,inf)'."""
        s = text.strip().replace(" ", "")
        if s in ("R+", "r+", "[0,inf)", "[0,oo)"):
            return IntervalSpec.half_line()
        if s in ("R", "r", "(-inf,inf)"):
            return IntervalSpec.full_line()
        if s.startswith("[") and (s.endswith("]") or s.endswith(")")):
            inner = s[1:-1]
            parts = inner.split(",")
            if len(parts) != 2:
                raise ValueError(f"cannot parse interval {text!r}")
            lo = float(Fraction(parts[0]))
            if parts[1] in ("inf", "oo") and s.endswith(")"):
                if lo == 0:
                    return IntervalSpec.half_line()
                return IntervalSpec.right_half_line(lo)
            hi = float(Fraction(parts[1]))
            if lo == 0.0 and hi == 1.0:
                return IntervalSpec.unit_interval()
            return IntervalSpec.compact(lo, hi)
        raise ValueError(f"cannot parse interval {text!r}")

    def contains(self, t: float) -> bool:
        if self.kind == "half_line":
            return t >= 0
        if self.kind == "unit_interval":
            return 0 <= t <= 1
        if self.kind == "compact":
            return self.a <= t <= self.b
        if self.kind == "right_half_line":
            return t >= self.a
        return True

    def endpoints(self) -> tuple:
        """Finite endpoints, left to right."""
        if self.kind == "half_line":
            return (0,)
        if self.kind == "unit_interval":
            return (0, 1)
        if self.kind == "compact":
            return (self.a, self.b)
        if self.kind == "right_half_line":
            return (self.a,)
        return ()

    def is_bounded(self) -> bool:
        return self.kind in ("unit_interval", "compact")

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "compact":
            out["a"] = self.a
            out["b"] = self.b
        elif self.kind == "right_half_line":
            out["a"] = self.a
        return out

    @staticmethod
    def from_dict(data: dict) -> "IntervalSpec":
        kind = data["kind"]
        if kind == "compact":
            return IntervalSpec.compact(float(data["a"]), float(data["b"]))
        if kind == "right_half_line":
            return IntervalSpec.right_half_line(float(data["a"]))
        if kind == "unit_interval":
            return IntervalSpec.unit_interval()
        return IntervalSpec(kind)

    def describe(self) -> str:
        return {
            "half_line": "[0, inf)",
            "unit_interval": "[0, 1]",
            "compact": f"[{self.a:g}, {self.b:g}]",
            "right_half_line": f"[{self.a:g}, inf)",
            "full_line": "(-inf, inf)",
        }[self.kind]
