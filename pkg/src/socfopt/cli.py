"""Command-line front end: bounds, certificates, moments, oracle, export, rays.

Every subcommand reads a polynomial as JSON (a file path, ``-`` for stdin,
or an inline ``{"terms": ...}`` literal), does its work through the library
modules, and emits a single JSON report on stdout (or to ``--out``).  Exit
codes: 0 success, 2 bad input, 3 numerical trouble, 4 infeasible.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import certify as certify_mod
from .cones import (
    BlockSdp,
    bound_value,
    build_banded,
    build_bound_primal,
    build_membership,
    build_moment_dual,
    default_k,
    moments_from_solution,
)
from .oracle import global_min
from .poly import IntervalSpec, SparsePoly
from .sdp import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_TROUBLE,
    SdpSolution,
    SolverSettings,
    residuals,
    solve,
)
from .sdpa import write_sdpa
from .xray import RootPattern, check_root_count, extreme_ray_from_roots, verify_extreme_factorization

SCHEMA = "socfopt/1"
EXIT_OK = 0
EXIT_PARSE = 2
EXIT_TROUBLE = 3
EXIT_INFEASIBLE = 4

# A stalled iterate only counts toward the weak-duality estimate when its
# relevant feasibility residual is below this gate.  The bound-side values
# of such iterates track the optimum to roughly the violation itself, so the
# gate also caps how far the reported estimate can sit from the truth.
_STALL_FEAS_GATE = 1e-5


class InputError(ValueError):
    """Bad user input (file, JSON, flag combination): exit code 2."""


# ---------------------------------------------------------------------------
# Bound driver


@dataclass(frozen=True)
class BoundOutcome:
    """What a lower-bound computation produced and how it got there.

    ``method`` is one of ``structural`` (unbounded below by inspection of
    the leading term), ``gram_primal`` (the weighted-squares problem solved
    cleanly), ``moment_dual`` (the Gram solve stalled but the moment form
    finished), ``stalled_estimate`` (neither finished; ``bound`` is the best
    dual estimate and ``status`` is NumericalTrouble), or ``full_line_pair``
    (minimum over the two half-line problems).
    """

    bound: float
    status: str
    method: str
    problem: Optional[BlockSdp] = None
    solution: Optional[SdpSolution] = None
    pieces: Optional[tuple] = None

    def iterations(self) -> int:
        if self.pieces is not None:
            return sum(p.iterations() for p in self.pieces)
        return self.solution.iterations if self.solution is not None else 0


def _structurally_unbounded(f: SparsePoly, interval: IntervalSpec) -> bool:
    if f.degree() == 0:
        return False
    lead = float(f.leading_coeff())
    if interval.kind == "full_line":
        return lead < 0 or f.degree() % 2 == 1
    if interval.kind in ("half_line", "right_half_line"):
        return lead < 0
    return False


def compute_bound(
    f: SparsePoly,
    k: int,
    interval: IntervalSpec,
    d: Optional[int] = None,
    settings: Optional[SolverSettings] = None,
) -> BoundOutcome:
    """Lower bound for f on the interval, as robustly as the tools allow.

    Solves the weighted-squares (Gram) problem first; if that run does not
    end Optimal, solves the moment form of the same relaxation (the two have
    equal optimal values) and uses its optimum; if both struggle, reports
    the best available dual estimate with NumericalTrouble status.  On the
    full line the bound is the minimum over the two half-line problems for
    f(t) and f(-t).
    """
    settings = settings or SolverSettings()
    if _structurally_unbounded(f, interval):
        return BoundOutcome(bound=-math.inf, status="UnboundedBelow", method="structural")

    if interval.kind == "full_line":
        half = IntervalSpec.half_line()
        pos = compute_bound(f, k, half, d=d, settings=settings)
        neg = compute_bound(f.substitute_neg(), k, half, d=d, settings=settings)
        worst = min((pos, neg), key=lambda p: p.bound)
        status = pos.status
        for piece in (pos, neg):
            if piece.status != STATUS_OPTIMAL:
                status = piece.status
        return BoundOutcome(
            bound=min(pos.bound, neg.bound),
            status=status,
            method="full_line_pair",
            problem=worst.problem,
            solution=worst.solution,
            pieces=(pos, neg),
        )

    problem = build_bound_primal(f, k, interval, d=d)
    solution = solve(problem, settings)
    if solution.status == STATUS_OPTIMAL:
        return BoundOutcome(
            bound=bound_value(problem, solution),
            status=STATUS_OPTIMAL,
            method="gram_primal",
            problem=problem,
            solution=solution,
        )

    dual_degree = d if d is not None else max(f.degree(), 2 * k)
    dual_problem = build_moment_dual(f, k, dual_degree, interval)
    dual_solution = solve(dual_problem, settings)
    if dual_solution.status == STATUS_OPTIMAL:
        return BoundOutcome(
            bound=bound_value(dual_problem, dual_solution),
            status=STATUS_OPTIMAL,
            method="moment_dual",
            problem=dual_problem,
            solution=dual_solution,
        )

    # Both forms stalled (these instances lack strict complementarity, which
    # caps how far double precision can push the primal).  Retry the Gram
    # problem from other starting configurations, then estimate the optimum
    # by weak duality: every candidate whose dual side is feasible to
    # tolerance yields an upper bound on the maximal lambda, and the moment
    # form's near-feasible minimizing iterate bounds it from the same side,
    # so the smallest such value is the sharpest available estimate.
    scale = float(problem.meta["scale"])
    gram_candidates = [solution]
    for alt in (
        replace(settings, step_fraction=0.90),
        replace(settings, init_scale=1.0),
    ):
        retry = solve(problem, alt)
        if retry.status == STATUS_OPTIMAL:
            return BoundOutcome(
                bound=bound_value(problem, retry),
                status=STATUS_OPTIMAL,
                method="gram_primal",
                problem=problem,
                solution=retry,
            )
        gram_candidates.append(retry)

    uppers: list[tuple[float, SdpSolution]] = []
    for cand in gram_candidates:
        res = residuals(problem, cand)
        if res["dual_infeas"] <= _STALL_FEAS_GATE and math.isfinite(cand.dual_value):
            uppers.append((scale * cand.dual_value, cand))
    moment_res = residuals(dual_problem, dual_solution)
    if moment_res["primal_infeas"] <= _STALL_FEAS_GATE and math.isfinite(
        dual_solution.primal_value
    ):
        uppers.append((bound_value(dual_problem, dual_solution), gram_candidates[0]))

    if uppers:
        estimate, best = min(uppers, key=lambda c: c[0])
    else:
        best = gram_candidates[0]
        estimate = scale * best.dual_value
        if not math.isfinite(estimate):
            estimate = scale * best.primal_value
    return BoundOutcome(
        bound=estimate,
        status=STATUS_TROUBLE,
        method="stalled_estimate",
        problem=problem,
        solution=best,
    )


# ---------------------------------------------------------------------------
# Shared plumbing


def _round_sig(x: float, digits: int = 12):
    """12-significant-digit JSON-safe number (inf/nan become strings)."""
    x = float(x)
    if math.isinf(x) or math.isnan(x):
        return str(x)
    return float(f"{x:.{digits}g}")


def load_polynomial(source: str) -> SparsePoly:
    """Polynomial from a JSON file path, '-' (stdin), or an inline literal."""
    try:
        if source == "-":
            text = sys.stdin.read()
        elif source.lstrip().startswith("{"):
            text = source
        else:
            text = Path(source).read_text()
    except OSError as exc:
        raise InputError(f"cannot read polynomial input: {exc}") from exc
    try:
        poly = SparsePoly.from_json(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"bad polynomial JSON: {exc}") from exc
    if poly.is_zero():
        raise InputError("the zero polynomial is not a useful input here")
    return poly


def _parse_interval(text: str) -> IntervalSpec:
    try:
        return IntervalSpec.parse(text)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _pick_k(args, f: SparsePoly) -> int:
    k = args.k if args.k is not None else default_k(f)
    if k < 1:
        raise InputError("k must be a positive integer")
    return k


def _settings_from(args) -> SolverSettings:
    kw = {}
    if getattr(args, "gap_tol", None) is not None:
        kw["gap_tol"] = args.gap_tol
    if getattr(args, "feas_tol", None) is not None:
        kw["feas_tol"] = args.feas_tol
    if getattr(args, "max_iter", None) is not None:
        kw["max_iter"] = args.max_iter
    return SolverSettings(**kw)


def _solver_stats(solution: Optional[SdpSolution]) -> Optional[dict]:
    if solution is None:
        return None
    return {
        "status": solution.status,
        "iterations": solution.iterations,
        "primal_value": _round_sig(solution.primal_value),
        "dual_value": _round_sig(solution.dual_value),
    }


def _emit(report: dict, out: Optional[str]) -> None:
    text = json.dumps(report, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _status_exit(status: str) -> int:
    if status == STATUS_TROUBLE:
        return EXIT_TROUBLE
    if status == STATUS_INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_OK


# ---------------------------------------------------------------------------
# Subcommands


def cmd_bound(args) -> int:
    t0 = time.perf_counter()
    f = load_polynomial(args.poly)
    interval = _parse_interval(args.interval)
    k = _pick_k(args, f)
    settings = _settings_from(args)
    if args.dual and args.banded:
        raise InputError("--dual and --banded are mutually exclusive")

    report = {
        "schema": SCHEMA,
        "command": "bound",
        "input": f.to_dict(),
        "interval": interval.to_dict(),
        "k": k,
        "d": args.d,
    }

    if args.banded:
        if interval.kind != "half_line":
            raise InputError("the banded formulation is specific to [0, inf)")
        problem = build_banded(f, k, bound=True)
        solution = solve(problem, settings)
        outcome = BoundOutcome(
            bound=bound_value(problem, solution) if solution.status == STATUS_OPTIMAL
            else float(problem.meta["scale"]) * solution.dual_value,
            status=solution.status,
            method="banded",
            problem=problem,
            solution=solution,
        )
    elif args.dual:
        dual_degree = args.d if args.d is not None else max(f.degree(), 2 * k)
        problem = build_moment_dual(f, k, dual_degree, interval)
        solution = solve(problem, settings)
        outcome = BoundOutcome(
            bound=bound_value(problem, solution),
            status=solution.status,
            method="moment_dual",
            problem=problem,
            solution=solution,
        )
    else:
        outcome = compute_bound(f, k, interval, d=args.d, settings=settings)

    report["status"] = outcome.status
    report["method"] = outcome.method
    if outcome.status == "UnboundedBelow":
        report["bound"] = "-inf"
        report["note"] = "unbounded below"
    else:
        report["bound"] = _round_sig(outcome.bound)
    report["solver"] = _solver_stats(outcome.solution)
    if outcome.pieces is not None:
        report["half_line_pieces"] = [
            {"bound": _round_sig(p.bound), "status": p.status, "solver": _solver_stats(p.solution)}
            for p in outcome.pieces
        ]

    if args.compare_oracle:
        oracle = global_min(f, interval)
        report["oracle"] = {
            "min_value": _round_sig(oracle.min_value),
            "argmin": None if oracle.argmin is None else _round_sig(oracle.argmin),
        }
        if math.isfinite(oracle.min_value) and math.isfinite(outcome.bound):
            report["gap"] = _round_sig(outcome.bound - oracle.min_value)
        elif not math.isfinite(oracle.min_value) and outcome.status == "UnboundedBelow":
            report["gap"] = 0.0

    if args.certify:
        if (
            outcome.problem is None
            or outcome.solution is None
            or outcome.solution.status != STATUS_OPTIMAL
            or outcome.problem.meta.get("kind") == "moment"
        ):
            report["certificate_error"] = (
                "no certifiable Gram solution available for this run"
            )
            report["timings"] = {"total_s": _round_sig(time.perf_counter() - t0, 6)}
            _emit(report, args.out)
            return EXIT_TROUBLE
        target = _certificate_target(f, interval, outcome)
        cert = certify_mod.extract(outcome.solution, outcome.problem)
        verification = certify_mod.verify(cert, target)
        if outcome.pieces is not None:
            report["certificate_of"] = "f(-t)" if target is not f else "f(t)"
        report["certificate"] = cert.to_dict()
        report["verification"] = verification

    report["timings"] = {"total_s": _round_sig(time.perf_counter() - t0, 6)}
    _emit(report, args.out)

    if outcome.status == "UnboundedBelow":
        return EXIT_OK
    return _status_exit(outcome.status)


def _certificate_target(f: SparsePoly, interval: IntervalSpec, outcome: BoundOutcome):
    """The polynomial a certificate from this outcome should reproduce.

    On the full line the kept problem is the worse half-line piece, which
    was built for either f(t) or f(-t); the second piece is the mirrored one.
    """
    if outcome.pieces is not None and outcome.problem is not None:
        if outcome.problem is outcome.pieces[1].problem:
            return f.substitute_neg()
    return f


def cmd_certify(args) -> int:
    t0 = time.perf_counter()
    f = load_polynomial(args.poly)
    interval = _parse_interval(args.interval)
    report = {
        "schema": SCHEMA,
        "command": "certify",
        "input": f.to_dict(),
        "interval": interval.to_dict(),
    }

    if args.check:
        try:
            cert = certify_mod.GramCertificate.from_json(Path(args.check).read_text())
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"cannot read certificate: {exc}") from exc
        verification = certify_mod.verify(cert, f, exact=args.exact)
        report["bound"] = _round_sig(cert.bound)
        report["verification"] = verification
        report["timings"] = {"total_s": _round_sig(time.perf_counter() - t0, 6)}
        _emit(report, args.out)
        return EXIT_OK if verification["ok"] else EXIT_TROUBLE

    k = _pick_k(args, f)
    report["k"] = k
    settings = _settings_from(args)
    if interval.kind == "full_line":
        raise InputError(
            "full-line certificates come in half-line pairs; certify f(t) and f(-t) on R+"
        )
    problem = build_bound_primal(f, k, interval, d=args.d)
    solution = solve(problem, settings)
    if solution.status != STATUS_OPTIMAL:
        report["status"] = solution.status
        report["solver"] = _solver_stats(solution)
        report["timings"] = {"total_s": _round_sig(time.perf_counter() - t0, 6)}
        _emit(report, args.out)
        return _status_exit(solution.status)

    cert = certify_mod.extract(solution, problem)
    verification = certify_mod.verify(cert, f, exact=args.exact)
    report["status"] = solution.status
    report["bound"] = _round_sig(cert.bound)
    report["verification"] = verification
    report["certificate"] = cert.to_dict()
    report["solver"] = _solver_stats(solution)
    if args.cert_out:
        Path(args.cert_out).write_text(cert.to_json(indent=2) + "\n")
        report["certificate_file"] = args.cert_out
    report["timings"] = {"total_s": _round_sig(time.perf_counter() - t0, 6)}
    _emit(report, args.out)
    return EXIT_OK if verification["ok"] else EXIT_TROUBLE


def cmd_moments(args) -> int:
    t0 = time.perf_counter()
    f = load_polynomial(args.poly)
    interval = _parse_interval(args.interval)
    k = _pick_k(args, f)
    d = args.d if args.d is not None else max(f.degree(), 2 * k)
    settings = _settings_from(args)
    problem = build_moment_dual(f, k, d, interval)
    solution = solve(problem, settings)
    report = {
        "schema": SCHEMA,
        "command": "moments",
        "input": f.to_dict(),
        "interval": interval.to_dict(),
        "k": k,
        "d": d,
        "status": solution.status,
        "solver": _solver_stats(solution),
    }
    if solution.status == STATUS_OPTIMAL:
        moments = moments_from_solution(problem, solution)
        report["bound"] = _round_sig(bound_value(problem, solution))
        report["moments"] = [_round_sig(v) for v in moments.values]
    report["timings"] = {"total_s": _round_sig(time.perf_counter() - t0, 6)}
    _emit(report, args.out)
    return _status_exit(solution.status)


def cmd_oracle(args) -> int:
    t0 = time.perf_counter()
    f = load_polynomial(args.poly)
    interval = _parse_interval(args.interval)
    result = global_min(f, interval)
    report = {
        "schema": SCHEMA,
        "command": "oracle",
        "input": f.to_dict(),
        "interval": interval.to_dict(),
        "min_value": _round_sig(result.min_value),
        "argmin": None if result.argmin is None else _round_sig(result.argmin),
        "roots": [[_round_sig(loc), mult] for loc, mult in result.root_list],
    }
    if result.min_exact is not None:
        report["min_exact"] = str(result.min_exact)
    report["timings"] = {"total_s": _round_sig(time.perf_counter() - t0, 6)}
    _emit(report, args.out)
    return EXIT_OK


def cmd_export(args) -> int:
    f = load_polynomial(args.poly)
    interval = _parse_interval(args.interval)
    k = _pick_k(args, f)
    if args.dual and args.banded:
        raise InputError("--dual and --banded are mutually exclusive")
    if args.membership:
        problem = build_membership(f, k, interval)
    elif args.dual:
        d = args.d if args.d is not None else max(f.degree(), 2 * k)
        problem = build_moment_dual(f, k, d, interval)
    elif args.banded:
        problem = build_banded(f, k, bound=True)
    else:
        problem = build_bound_primal(f, k, interval, d=args.d)
    write_sdpa(problem, args.out)
    report = {
        "schema": SCHEMA,
        "command": "export",
        "path": args.out,
        "kind": problem.meta.get("kind"),
        "blocks": list(problem.block_sizes()),
        "constraints": len(problem.constraints),
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def _parse_roots(text: str) -> RootPattern:
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" in chunk:
            loc_text, mult_text = chunk.split(":", 1)
            mult = int(mult_text)
        else:
            loc_text, mult = chunk, 1
        loc = Fraction(loc_text)
        loc = loc if loc.denominator != 1 else int(loc)
        pairs.append((loc, mult))
    if not pairs:
        raise InputError("need at least one root as loc or loc:mult")
    try:
        return RootPattern.of(pairs)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_xray(args) -> int:
    t0 = time.perf_counter()
    try:
        exponents = [int(e) for e in args.mu.split(",") if e.strip()]
    except ValueError as exc:
        raise InputError(f"bad exponent list: {exc}") from exc
    pattern = _parse_roots(args.roots)
    try:
        ray = extreme_ray_from_roots(exponents, pattern)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    residual, predicted = verify_extreme_factorization(ray, pattern)
    satisfies, count, required = check_root_count(ray)
    report = {
        "schema": SCHEMA,
        "command": "xray",
        "exponents": sorted(exponents, reverse=True),
        "roots": [[_round_sig(float(loc)), mult]
                  for loc, mult in zip(pattern.locations, pattern.multiplicities)],
        "polynomial": ray.to_float().to_dict(),
        "factorization": {
            "predicted": predicted.to_float().to_dict(),
            "residual": _round_sig(residual),
        },
        "root_count": {"count": count, "required": required, "maximal": satisfies},
        "timings": {"total_s": _round_sig(time.perf_counter() - t0, 6)},
    }
    _emit(report, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_common_solver_flags(sub) -> None:
    sub.add_argument("--gap-tol", dest="gap_tol", type=float, default=None,
                     help="relative duality-gap tolerance (default 1e-8)")
    sub.add_argument("--feas-tol", dest="feas_tol", type=float, default=None,
                     help="feasibility tolerance (default 1e-8)")
    sub.add_argument("--max-iter", dest="max_iter", type=int, default=None,
                     help="interior-point iteration cap (default 200)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socfopt",
        description="Lower bounds and nonnegativity certificates for sparse "
        "polynomials via shifted weighted-square cones.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", help="lower-bound a polynomial on an interval")
    p_bound.add_argument("poly", help="polynomial JSON (path, '-', or inline)")
    p_bound.add_argument("--k", type=int, default=None,
                         help="square degree parameter (default from support size)")
    p_bound.add_argument("--interval", default="R+", help="R+, R, [a,b], or [a,inf)")
    p_bound.add_argument("--d", type=int, default=None, help="cone degree (default deg f)")
    p_bound.add_argument("--dual", action="store_true", help="solve the moment form only")
    p_bound.add_argument("--banded", action="store_true", help="use the two-banded-matrix form")
    p_bound.add_argument("--compare-oracle", action="store_true", dest="compare_oracle",
                         help="also compute the exact minimum and report the gap")
    p_bound.add_argument("--certify", action="store_true",
                         help="attach a verified weighted-squares certificate")
    p_bound.add_argument("--out", default=None, help="write the JSON report here")
    _add_common_solver_flags(p_bound)
    p_bound.set_defaults(func=cmd_bound)

    p_cert = sub.add_parser("certify", help="produce or check a nonnegativity certificate")
    p_cert.add_argument("poly", help="polynomial JSON (path, '-', or inline)")
    p_cert.add_argument("--k", type=int, default=None)
    p_cert.add_argument("--interval", default="R+")
    p_cert.add_argument("--d", type=int, default=None)
    p_cert.add_argument("--check", default=None, metavar="CERT_JSON",
                        help="verify this certificate file instead of solving")
    p_cert.add_argument("--exact", action="store_true",
                        help="verify in exact rational arithmetic")
    p_cert.add_argument("--cert-out", dest="cert_out", default=None,
                        help="also write the bare certificate JSON here")
    p_cert.add_argument("--out", default=None)
    _add_common_solver_flags(p_cert)
    p_cert.set_defaults(func=cmd_certify)

    p_mom = sub.add_parser("moments", help="solve the moment form and print the moments")
    p_mom.add_argument("poly")
    p_mom.add_argument("--k", type=int, default=None)
    p_mom.add_argument("--interval", default="R+")
    p_mom.add_argument("--d", type=int, default=None)
    p_mom.add_argument("--out", default=None)
    _add_common_solver_flags(p_mom)
    p_mom.set_defaults(func=cmd_moments)

    p_oracle = sub.add_parser("oracle", help="exact global minimum on the interval")
    p_oracle.add_argument("poly")
    p_oracle.add_argument("--interval", default="R+")
    p_oracle.add_argument("--out", default=None)
    p_oracle.set_defaults(func=cmd_oracle)

    p_exp = sub.add_parser("export", help="write the chosen formulation as SDPA sparse")
    p_exp.add_argument("poly")
    p_exp.add_argument("--k", type=int, default=None)
    p_exp.add_argument("--interval", default="R+")
    p_exp.add_argument("--d", type=int, default=None)
    p_exp.add_argument("--dual", action="store_true")
    p_exp.add_argument("--banded", action="store_true")
    p_exp.add_argument("--membership", action="store_true",
                       help="export the feasibility problem instead of the bound")
    p_exp.add_argument("--out", required=True, help="output .dat-s path")
    p_exp.set_defaults(func=cmd_export)

    p_xray = sub.add_parser("xray", help="extreme ray from a support and a root pattern")
    p_xray.add_argument("--mu", required=True,
                        help="comma-separated support exponents, e.g. 0,3,4")
    p_xray.add_argument("--roots", required=True,
                        help="comma-separated roots loc or loc:mult, e.g. 1:2")
    p_xray.add_argument("--out", default=None)
    p_xray.set_defaults(func=cmd_xray)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
