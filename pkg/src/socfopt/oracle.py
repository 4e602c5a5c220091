"""Certified global minima and root counts, independent of any SDP machinery.

Everything runs in exact rational arithmetic: float coefficients convert
losslessly to Fractions, square-free structure comes from Yun's algorithm,
real roots are located by Sturm sequences over primitive integer chains and
refined by exact bisection.  Inputs whose coefficients cannot be made
rational fall back to companion-matrix eigenvalues (about 1e-10 accuracy).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, inf
from typing import Optional, Sequence

import numpy as np

from .poly import IntervalSpec, SparsePoly

#: Isolating intervals are shrunk below this width before reporting a root.
REFINE_WIDTH = Fraction(1, 10**12)


@dataclass(frozen=True)
class OracleResult:
    """Outcome of exact minimization: value, location and roots inside I."""

    min_value: float
    argmin: Optional[float]
    root_list: tuple[tuple[float, int], ...]
    min_exact: Optional[Fraction] = None


# ---------------------------------------------------------------------------
# Dense integer polynomial helpers (ascending coefficient lists)


def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _dense_fractions(f: SparsePoly) -> list[Fraction]:
    dense = [Fraction(0)] * (f.degree() + 1)
    for exp, coef in f.terms:
        dense[exp] = Fraction(coef)
    return dense


def _to_int(p: Sequence[Fraction]) -> list[int]:
    """Scale by a positive rational to a primitive integer polynomial."""
    p = [Fraction(v) for v in p]
    if not p:
        return []
    den = 1
    for v in p:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in p]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return _trim(ints)


def _deriv(p: Sequence[int]) -> list[int]:
    return _trim([i * p[i] for i in range(1, len(p))])


def _eval_fraction(p: Sequence, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(list(p)):
        acc = acc * x + c
    return acc


def _sign_at(p: Sequence[int], x: Fraction) -> int:
    """Sign of p(x) via integer Horner; fast for dyadic x."""
    if not p:
        return 0
    num, den = x.numerator, x.denominator
    d = len(p) - 1
    if den & (den - 1) == 0:
        shift = den.bit_length() - 1
        acc = p[d]
        for i in range(d - 1, -1, -1):
            acc = acc * num + (p[i] << (shift * (d - i)))
    else:
        acc = p[d]
        powden = 1
        for i in range(d - 1, -1, -1):
            powden *= den
            acc = acc * num + p[i] * powden
    return (acc > 0) - (acc < 0)


def _divmod_frac(u: Sequence, v: Sequence) -> tuple[list[Fraction], list[Fraction]]:
    u = [Fraction(c) for c in u]
    v = [Fraction(c) for c in v]
    du, dv = len(u) - 1, len(v) - 1
    if dv < 0:
        raise ZeroDivisionError("polynomial division by zero")
    if du < dv:
        return [], u
    lead = v[dv]
    q = [Fraction(0)] * (du - dv + 1)
    r = list(u)
    for k in range(du - dv, -1, -1):
        q[k] = r[dv + k] / lead
        if q[k] != 0:
            for j in range(dv + 1):
                r[j + k] -= q[k] * v[j]
    return q, _trim(r)


def _div_exact(u: Sequence[int], v: Sequence[int]) -> list[int]:
    q, r = _divmod_frac(u, v)
    if r:
        raise ArithmeticError("division was expected to be exact")
    out = []
    for c in q:
        if c.denominator != 1:
            raise ArithmeticError("quotient was expected to be integral")
        out.append(int(c))
    return _trim(out)


def _neg_rem_primitive(u: Sequence[int], v: Sequence[int]) -> list[int]:
    """Primitive integer representative of -(u mod v); positive scaling only."""
    _, r = _divmod_frac(u, v)
    return _to_int([-c for c in r])


def _gcd_int(u: Sequence[int], v: Sequence[int]) -> list[int]:
    a, b = _trim(list(u)), _trim(list(v))
    while b:
        if len(b) == 1:
            a, b = b, []
            break
        _, r = _divmod_frac(a, b)
        a, b = b, _to_int(r)
    a = _to_int(a)
    if not a:
        return []
    if a[-1] < 0:
        a = [-c for c in a]
    if len(a) == 1:
        return [1]
    return a


def _yun(p: Sequence[int]) -> list[tuple[list[int], int]]:
    """Square-free decomposition p ~ prod factor^mult (positive scaling)."""
    p = _to_int([Fraction(c) for c in p])
    if len(p) <= 1:
        return []
    dp = _deriv(p)
    a = _gcd_int(p, dp)
    w = _div_exact(p, a)
    y = _div_exact(dp, a)
    z = _trim([yc - wc for yc, wc in zip_pad(y, _deriv(w))])
    out = []
    mult = 1
    while len(w) > 1:
        g = _gcd_int(w, z)
        if len(g) > 1:
            out.append((g, mult))
        w = _div_exact(w, g)
        y = _div_exact(z, g)
        z = _trim([yc - wc for yc, wc in zip_pad(y, _deriv(w))])
        mult += 1
    return out


def zip_pad(a: Sequence[int], b: Sequence[int]):
    n = max(len(a), len(b))
    for i in range(n):
        yield (a[i] if i < len(a) else 0, b[i] if i < len(b) else 0)


# ---------------------------------------------------------------------------
# Sturm machinery


def _sturm_chain(g: Sequence[int]) -> list[list[int]]:
    chain = [list(g)]
    dg = _deriv(g)
    if dg:
        chain.append(dg)
        while len(chain[-1]) > 1:
            nxt = _neg_rem_primitive(chain[-2], chain[-1])
            if not nxt:
                break
            chain.append(nxt)
    return chain


def _variations(chain: Sequence[Sequence[int]], x: Fraction) -> int:
    count = 0
    prev = 0
    for p in chain:
        s = _sign_at(p, x)
        if s == 0:
            continue
        if prev != 0 and s != prev:
            count += 1
        prev = s
    return count


def _count_half_open(chain, lo: Fraction, hi: Fraction) -> int:
    """Distinct roots in (lo, hi]; requires g(lo) != 0."""
    return _variations(chain, lo) - _variations(chain, hi)


def _isolate(chain, g: Sequence[int], lo: Fraction, hi: Fraction) -> list[tuple[Fraction, Fraction]]:
    out = []
    vlo, vhi = _variations(chain, lo), _variations(chain, hi)
    stack = [(lo, hi, vlo, vhi)]
    while stack:
        l, h, vl, vh = stack.pop()
        cnt = vl - vh
        if cnt <= 0:
            continue
        if cnt == 1:
            out.append((l, h))
            continue
        mid = (l + h) / 2
        vm = _variations(chain, mid)
        stack.append((l, mid, vl, vm))
        stack.append((mid, h, vm, vh))
    out.sort(key=lambda iv: iv[0])
    return out


def _refine(g: Sequence[int], lo: Fraction, hi: Fraction, width: Fraction = REFINE_WIDTH) -> Fraction:
    """One simple root of g in (lo, hi]; bisect until located within `width`."""
    if _sign_at(g, hi) == 0:
        return hi
    slo = _sign_at(g, lo)
    while hi - lo > width:
        mid = (lo + hi) / 2
        sm = _sign_at(g, mid)
        if sm == 0:
            return mid
        if sm == slo:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def _cauchy_bound(p: Sequence[int]) -> Fraction:
    """Power-of-two bound strictly beyond every real root."""
    lead = abs(p[-1])
    top = max(abs(c) for c in p)
    bound = 2 + top // lead  # integer ceiling of 1 + max|c_i|/|c_d|
    return Fraction(1 << int(bound).bit_length())


def _interval_window(interval: IntervalSpec, bound: Fraction) -> tuple[Fraction, Fraction, list[Fraction]]:
    """(lo, hi) for interior Sturm counting plus the closed finite endpoints."""
    if interval.kind == "half_line":
        return Fraction(0), bound, [Fraction(0)]
    if interval.kind == "unit_interval":
        return Fraction(0), Fraction(1), [Fraction(0), Fraction(1)]
    if interval.kind == "compact":
        a, b = Fraction(interval.a), Fraction(interval.b)
        return a, b, [a, b]
    if interval.kind == "right_half_line":
        a = Fraction(interval.a)
        return a, bound, [a]
    return -bound, bound, []


def _deflate_root(g: list[int], r: Fraction) -> list[int]:
    """Divide out (t - r) for a rational root r; returns a primitive chain input."""
    num, den = r.numerator, r.denominator
    q, rem = _divmod_frac(g, [-num, den])
    if rem:
        raise ArithmeticError("deflation point was not a root")
    return _to_int(q)


def _roots_with_multiplicity(f: SparsePoly, interval: IntervalSpec) -> tuple[int, tuple[tuple[float, int], ...]]:
    dense = _dense_fractions(f)
    factors = _yun(dense)
    total = 0
    found: list[tuple[Fraction, int]] = []
    for g, mult in factors:
        bound = _cauchy_bound(g)
        lo, hi, endpoints = _interval_window(interval, bound)
        work = list(g)
        for e in endpoints:
            if len(work) > 1 and _eval_fraction(work, e) == 0:
                total += mult
                found.append((e, mult))
                work = _deflate_root(work, e)
        if len(work) <= 1:
            continue
        lo_eff = max(lo, -_cauchy_bound(work))
        hi_eff = min(hi, _cauchy_bound(work))
        if lo_eff >= hi_eff:
            continue
        chain = _sturm_chain(work)
        for ivl, ivh in _isolate(chain, work, lo_eff, hi_eff):
            r = _refine(work, ivl, ivh)
            total += mult
            found.append((r, mult))
    found.sort(key=lambda rm: rm[0])
    return total, tuple((float(r), m) for r, m in found)


# ---------------------------------------------------------------------------
# Public interface


def count_roots(f: SparsePoly, interval: IntervalSpec) -> int:
    """Roots of f in the interval, counted with multiplicity.

    Exact Sturm count for rational coefficients; float coefficients are
    counted by clustering companion-matrix eigenvalues, since rationalizing
    them would split every multiple root.
    """
    if f.is_zero():
        raise ValueError("zero polynomial")
    if not f.is_exact():
        clusters = companion_root_clusters(f)
        return sum(m for r, m in clusters if interval.contains(r))
    try:
        total, _ = _roots_with_multiplicity(f, interval)
    except (TypeError, ValueError, OverflowError):
        clusters = companion_root_clusters(f)
        total = sum(m for r, m in clusters if interval.contains(r))
    return total


def global_min(f: SparsePoly, interval: IntervalSpec) -> OracleResult:
    """Exact global minimum of f over the interval.

    Returns -inf (argmin None) when f is unbounded below there.
    """
    if f.is_zero():
        raise ValueError("zero polynomial")
    if not f.is_exact():
        return _companion_min(f, interval)
    try:
        dense = _dense_fractions(f)
    except (TypeError, ValueError, OverflowError):
        return _companion_min(f, interval)
    dense = _trim(list(dense))
    _, roots = _roots_with_multiplicity(f, interval)
    deg = len(dense) - 1
    if deg == 0:
        start = interval.endpoints()
        arg = float(start[0]) if start else 0.0
        return OracleResult(float(dense[0]), arg, roots, dense[0])
    lead = dense[-1]
    if interval.kind in ("half_line", "right_half_line") and lead < 0:
        return OracleResult(-inf, None, roots)
    if interval.kind == "full_line" and (deg % 2 == 1 or lead < 0):
        return OracleResult(-inf, None, roots)
    candidates: list[Fraction] = [Fraction(e) for e in interval.endpoints()]
    dp = _to_int([c * i for i, c in enumerate(dense)][1:])
    if dp:
        for g, _ in _yun(dp) or [(dp, 1)]:
            if len(g) <= 1:
                continue
            bound = _cauchy_bound(g)
            lo, hi, endpoints = _interval_window(interval, bound)
            work = list(g)
            for e in endpoints:
                if len(work) > 1 and _eval_fraction(work, e) == 0:
                    work = _deflate_root(work, e)  # endpoint already a candidate
            if len(work) <= 1:
                continue
            lo_eff = max(lo, -_cauchy_bound(work))
            hi_eff = min(hi, _cauchy_bound(work))
            if lo_eff >= hi_eff:
                continue
            chain = _sturm_chain(work)
            for ivl, ivh in _isolate(chain, work, lo_eff, hi_eff):
                candidates.append(_refine(work, ivl, ivh))
    if not candidates:
        raise AssertionError("no candidate minimizers found")
    best_val: Optional[Fraction] = None
    best_arg: Optional[Fraction] = None
    for t in sorted(candidates):
        v = _eval_fraction(dense, t)
        if best_val is None or v < best_val:
            best_val, best_arg = v, t
    return OracleResult(float(best_val), float(best_arg), roots, best_val)


def companion_root_clusters(f: SparsePoly, tol: float = 1e-7) -> list[tuple[float, int]]:
    """Float roots from the companion matrix, clustered into (location, count).

    Cross-check for the Sturm path; also the fallback when coefficients are
    not rational.  Locations are accurate to roughly 1e-10 on tame inputs.
    """
    dense = [float(c) for c in f.coeffs_dense()]
    if not dense:
        raise ValueError("zero polynomial")
    coeffs = np.array(dense[::-1], dtype=float)
    roots = np.roots(coeffs)
    scale = max(1.0, float(np.max(np.abs(roots))) if len(roots) else 1.0)
    real = [z for z in roots if abs(z.imag) <= tol * scale]
    real.sort(key=lambda z: z.real)
    clusters: list[list[float]] = []
    for z in real:
        if clusters and abs(z.real - clusters[-1][-1]) <= tol * scale:
            clusters[-1].append(z.real)
        else:
            clusters.append([z.real])
    return [(float(np.mean(c)), len(c)) for c in clusters]


def _companion_min(f: SparsePoly, interval: IntervalSpec) -> OracleResult:
    dense = [float(c) for c in f.coeffs_dense()]
    deg = len(_trim(list(dense))) - 1
    if deg <= 0:
        start = interval.endpoints()
        arg = float(start[0]) if start else 0.0
        return OracleResult(dense[0] if dense else 0.0, arg, ())
    roots = tuple(
        (r, m) for r, m in companion_root_clusters(f) if interval.contains(r)
    )
    lead = dense[deg]
    if interval.kind in ("half_line", "right_half_line") and lead < 0:
        return OracleResult(-inf, None, roots)
    if interval.kind == "full_line" and (deg % 2 == 1 or lead < 0):
        return OracleResult(-inf, None, roots)
    dcoef = [i * dense[i] for i in range(1, deg + 1)]
    crit = np.roots(np.array(dcoef[::-1], dtype=float)) if len(dcoef) > 1 or dcoef[0] != 0 else []
    candidates = [float(e) for e in interval.endpoints()]
    for z in np.atleast_1d(crit):
        if abs(z.imag) <= 1e-10 * max(1.0, abs(z)) and interval.contains(z.real):
            candidates.append(float(z.real))
    if not candidates:
        candidates = [0.0]
    vals = [(f.eval(t), t) for t in candidates]
    v, t = min(vals, key=lambda p: (p[0], p[1]))
    return OracleResult(float(v), float(t), roots)
