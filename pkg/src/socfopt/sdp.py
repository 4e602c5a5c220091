"""Primal-dual interior-point solver for block-diagonal semidefinite problems.

Standard form after presolve: maximize <C, X> over block-diagonal X >= 0 with
<A_i, X> = b_i.  Free scalar variables are eliminated exactly by Gauss-Jordan
pivoting before the iteration starts, feasibility problems are wrapped into a
"maximize the identity slack" phase, and dependent equality rows are removed
by a rank-revealing QR.  The iteration itself is Mehrotra predictor-corrector
with Nesterov-Todd scaling; per-iteration cost is one small factorization per
block plus one Cholesky of the m x m Schur complement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .cones import BlockSdp, BlockSpec, Constraint, Objective

STATUS_OPTIMAL = "Optimal"
STATUS_INFEASIBLE = "Infeasible"
STATUS_UNBOUNDED = "Unbounded"
STATUS_TROUBLE = "NumericalTrouble"

_SQRT2 = math.sqrt(2.0)
_DIVERGENCE = 1e12
_STEP_COLLAPSE = 1e-3
_COLLAPSE_LIMIT = 3
_QR_THRESHOLD = 1e-10


@dataclass(frozen=True)
class SolverSettings:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.98
    init_scale: Optional[float] = None  # identity multiple for the first iterate

    @staticmethod
    def coerce(value) -> "SolverSettings":
        if value is None:
            return SolverSettings()
        if isinstance(value, SolverSettings):
            return value
        if isinstance(value, dict):
            return SolverSettings(**value)
        raise TypeError("settings must be a SolverSettings, dict, or None")


@dataclass(frozen=True)
class SdpSolution:
    """Solver output; block/scalar values refer to the problem as posed."""

    status: str
    primal_value: float
    dual_value: float
    gap: float
    block_values: tuple
    scalar_values: tuple[float, ...]
    iterations: int
    history: tuple = field(repr=False, default=())
    y: Optional[tuple] = field(repr=False, default=None)
    dual_block_values: Optional[tuple] = field(repr=False, default=None)
    feasibility_slack: Optional[float] = None

    def is_feasible_membership(self) -> bool:
        return self.feasibility_slack is not None and self.status == STATUS_OPTIMAL


# ---------------------------------------------------------------------------
# svec helpers (upper triangle, off-diagonal scaled by sqrt 2)


def _svec_layout(sizes: Sequence[int]):
    """Per-block (offset, index map) for packing symmetric matrices as vectors."""
    offsets = []
    pos = 0
    for n in sizes:
        offsets.append(pos)
        pos += n * (n + 1) // 2
    return offsets, pos


def _tri_index(n: int, i: int, j: int) -> int:
    """Position of (i, j), i <= j, in row-major upper-triangle order."""
    return i * n - i * (i - 1) // 2 + (j - i)


def _row_to_svec(entries, sizes, offsets, total) -> np.ndarray:
    v = np.zeros(total)
    for b, i, j, c in entries:
        pos = offsets[b] + _tri_index(sizes[b], i, j)
        v[pos] += c if i == j else _SQRT2 * c
    return v


def _svec_to_blocks(vec, sizes, offsets) -> list:
    mats = []
    for b, n in enumerate(sizes):
        m = np.zeros((n, n))
        pos = offsets[b]
        for i in range(n):
            for j in range(i, n):
                val = vec[pos]
                pos += 1
                if i == j:
                    m[i, i] = val
                else:
                    m[i, j] = m[j, i] = val / _SQRT2
        mats.append(m)
    return mats


def _blocks_to_svec(mats, sizes, offsets, total) -> np.ndarray:
    v = np.zeros(total)
    for b, n in enumerate(sizes):
        m = mats[b]
        pos = offsets[b]
        for i in range(n):
            for j in range(i, n):
                v[pos] = m[i, i] if i == j else _SQRT2 * m[i, j]
                pos += 1
    return v


def _pow2_scale(x: float) -> float:
    if x <= 0 or not math.isfinite(x):
        return 1.0
    return 2.0 ** round(math.log2(x))


# ---------------------------------------------------------------------------
# Presolve: scalar elimination, equilibration, dependent-row removal


class _Presolved:
    """Standard-form data plus the bookkeeping to map solutions back."""

    def __init__(self, problem: BlockSdp):
        self.problem = problem
        self.sizes = problem.block_sizes()
        self.offsets, self.total = _svec_layout(self.sizes)
        m = len(problem.constraints)
        p = len(problem.scalars)
        self.m_orig = m
        self.A = np.zeros((m, self.total))
        self.B = np.zeros((m, p))
        self.b = np.zeros(m)
        for r, row in enumerate(problem.constraints):
            self.A[r] = _row_to_svec(row.entries, self.sizes, self.offsets, self.total)
            for s, c in row.scalar_entries:
                self.B[r, s] += c
            self.b[r] = row.rhs
        self.b_orig = self.b.copy()
        self.cvec = _row_to_svec(
            problem.objective.entries, self.sizes, self.offsets, self.total
        )
        self.cs = np.zeros(p)
        for s, c in problem.objective.scalar_entries:
            self.cs[s] += c
        self.const = problem.objective.constant
        # Internal sense: always maximize.
        self.sign = -1.0 if problem.sense == "minimize" else 1.0
        self.infeasible_reason: Optional[str] = None

        self.U = np.eye(m)  # current rows = U @ original rows
        self.pivot_rows: list[int] = []
        self.pivot_cols: list[int] = []
        self._eliminate_scalars()
        if self.infeasible_reason is None:
            self._reduce_rows()

    # -- scalar elimination -------------------------------------------------

    def _eliminate_scalars(self) -> None:
        m, p = self.B.shape
        free = np.ones(m, dtype=bool)
        for col in range(p):
            cand = np.where(free)[0]
            if cand.size == 0:
                raise ValueError("more scalar variables than available pivot rows")
            vals = np.abs(self.B[cand, col])
            best = int(cand[int(np.argmax(vals))])
            if abs(self.B[best, col]) < 1e-12:
                raise ValueError(
                    f"scalar variable {self.problem.scalars[col]!r} has no usable pivot row"
                )
            piv = self.B[best, col]
            others = [r for r in range(m) if r != best and self.B[r, col] != 0.0]
            for r in others:
                mu = self.B[r, col] / piv
                self.A[r] -= mu * self.A[best]
                self.B[r] -= mu * self.B[best]
                self.b[r] -= mu * self.b[best]
                self.U[r] -= mu * self.U[best]
            free[best] = False
            self.pivot_rows.append(best)
            self.pivot_cols.append(col)
        # Substitute scalars out of the objective.
        self.nu = np.zeros(len(self.pivot_rows))
        for idx, (r, col) in enumerate(zip(self.pivot_rows, self.pivot_cols)):
            self.nu[idx] = self.cs[col] / self.B[r, col]
        self.cvec_red = self.cvec.copy()
        self.const_red = self.const
        for idx, r in enumerate(self.pivot_rows):
            if self.nu[idx] != 0.0:
                self.cvec_red -= self.nu[idx] * self.A[r]
                self.const_red += self.nu[idx] * self.b[r]
        self.nonpivot = sorted(set(range(m)) - set(self.pivot_rows))

    # -- dependent-row removal ----------------------------------------------

    def _reduce_rows(self) -> None:
        rows = np.array(self.nonpivot, dtype=int)
        Ared = self.A[rows]
        bred = self.b[rows]
        scales = np.array(
            [_pow2_scale(float(np.max(np.abs(r))) if np.any(r) else 1.0) for r in Ared]
        )
        Aeq = Ared / scales[:, None]
        beq = bred / scales
        if Aeq.shape[0] == 0:
            self.keep = rows[:0]
            self.keep_scales = scales[:0]
            self.Astd = Aeq
            self.bstd = beq
            return
        q, r, perm = scipy.linalg.qr(Aeq.T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        tol = _QR_THRESHOLD * (diag[0] if diag.size and diag[0] > 0 else 1.0)
        rank = int(np.sum(diag > tol))
        kept_local = np.sort(perm[:rank])
        dropped_local = np.sort(perm[rank:])
        if dropped_local.size:
            Akeep = Aeq[kept_local]
            for d in dropped_local:
                target = Aeq[d]
                if rank == 0:
                    resid = target
                    rhs_pred = 0.0
                else:
                    coef, *_ = np.linalg.lstsq(Akeep.T, target, rcond=None)
                    resid = target - Akeep.T @ coef
                    rhs_pred = float(coef @ beq[kept_local])
                if np.max(np.abs(resid), initial=0.0) > 1e-6:
                    # Not actually dependent at working precision; keep it.
                    kept_local = np.sort(np.append(kept_local, d))
                    Akeep = Aeq[kept_local]
                    rank += 1
                    continue
                if abs(beq[d] - rhs_pred) > 1e-7 * (1.0 + abs(beq[d])):
                    self.infeasible_reason = (
                        f"equality rows are inconsistent (row {rows[d]})"
                    )
                    return
        self.keep = rows[kept_local]
        self.keep_scales = scales[kept_local]
        self.Astd = Aeq[kept_local]
        self.bstd = beq[kept_local]

    # -- solution recovery ----------------------------------------------------

    def recover_scalars(self, xvec: np.ndarray) -> np.ndarray:
        z = np.zeros(len(self.problem.scalars))
        for r, col in zip(self.pivot_rows, self.pivot_cols):
            z[col] = (self.b[r] - self.A[r] @ xvec) / self.B[r, col]
        return z

    def recover_dual(self, y_std: np.ndarray) -> np.ndarray:
        """Internal-sense multipliers for the original rows.

        Pivot rows take the values forced by scalar stationarity (internal
        objective is sign * original); kept rows undo the equilibration; the
        elimination transform U maps everything back to the original rows.
        """
        yhat = np.zeros(self.m_orig)
        for r, col in zip(self.pivot_rows, self.pivot_cols):
            yhat[r] = self.sign * self.cs[col] / self.B[r, col]
        for i, g in enumerate(self.keep):
            yhat[g] = y_std[i] / self.keep_scales[i]
        return self.U.T @ yhat


# ---------------------------------------------------------------------------
# Core interior-point iteration


class _Core:
    def __init__(self, pre: _Presolved, settings: SolverSettings):
        self.pre = pre
        self.settings = settings
        self.sizes = pre.sizes
        self.m = pre.Astd.shape[0]
        self.n_total = sum(self.sizes)
        self.b = pre.bstd
        self.cvec = pre.sign * pre.cvec_red
        self.offsets = pre.offsets
        self.C = _svec_to_blocks(self.cvec, self.sizes, self.offsets)
        # Per-block stacked constraint tensors over the rows touching the block.
        self.touch: list[np.ndarray] = []
        self.tensors: list[np.ndarray] = []
        for bidx, n in enumerate(self.sizes):
            o = self.offsets[bidx]
            cols = slice(o, o + n * (n + 1) // 2)
            sub = pre.Astd[:, cols]
            nz = np.where(np.any(sub != 0.0, axis=1))[0]
            self.touch.append(nz)
            stack = np.zeros((len(nz), n, n))
            for t, r in enumerate(nz):
                pos = 0
                for i in range(n):
                    for j in range(i, n):
                        val = sub[r, pos]
                        pos += 1
                        if i == j:
                            stack[t, i, i] = val
                        else:
                            stack[t, i, j] = stack[t, j, i] = val / _SQRT2
            self.tensors.append(stack)

    # -- operators -----------------------------------------------------------

    def apply_A(self, mats) -> np.ndarray:
        out = np.zeros(self.m)
        for bidx in range(len(self.sizes)):
            nz = self.touch[bidx]
            if nz.size:
                out[nz] += np.tensordot(self.tensors[bidx], mats[bidx], axes=([1, 2], [1, 0]))
        return out

    def apply_At(self, y) -> list:
        out = []
        for bidx, n in enumerate(self.sizes):
            nz = self.touch[bidx]
            if nz.size:
                out.append(np.tensordot(y[nz], self.tensors[bidx], axes=(0, 0)))
            else:
                out.append(np.zeros((n, n)))
        return out

    # -- iteration -----------------------------------------------------------

    def run(self):
        # Overflow/invalid intermediates are tolerated and caught by the
        # explicit finiteness checks below, so keep numpy quiet here.
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return self._run_inner()

    def _run_inner(self):
        st = self.settings
        m = self.m
        if m == 0:
            return self._solve_unconstrained()
        if st.init_scale is not None:
            eta = float(st.init_scale)
        else:
            eta = 1.0 + float(np.max(np.abs(self.b))) if m else 1.0
        X = [eta * np.eye(n) for n in self.sizes]
        S = [eta * np.eye(n) for n in self.sizes]
        y = np.zeros(m)
        bnorm = 1.0 + float(np.max(np.abs(self.b), initial=0.0))
        cnorm = 1.0 + max(
            (float(np.max(np.abs(c))) for c in self.C if c.size), default=0.0
        )
        history = []
        collapse = 0
        status = STATUS_TROUBLE
        iters = 0
        best = None  # (merit, X, S, y) of the most converged iterate seen
        merit = np.inf
        for it in range(1, st.max_iter + 1):
            iters = it
            rp = self.b - self.apply_A(X)
            At_y = self.apply_At(y)
            Rd = [self.C[b] + S[b] - At_y[b] for b in range(len(self.sizes))]
            p0 = sum(float(np.sum(self.C[b] * X[b])) for b in range(len(self.sizes)))
            d0 = float(self.b @ y)
            xs = sum(float(np.sum(X[b] * S[b])) for b in range(len(self.sizes)))
            xrd = sum(float(np.sum(X[b] * Rd[b])) for b in range(len(self.sizes)))
            rpy = float(rp @ y)
            mu = xs / self.n_total
            pinf = float(np.max(np.abs(rp), initial=0.0)) / bnorm
            dinf = max(
                (float(np.max(np.abs(Rd[b]))) for b in range(len(self.sizes)) if Rd[b].size),
                default=0.0,
            ) / cnorm
            relgap = abs(p0 - d0) / (1.0 + abs(p0) + abs(d0))
            history.append(
                {
                    "iter": it,
                    "primal": p0,
                    "dual": d0,
                    "xs": xs,
                    "x_rd": xrd,
                    "rp_y": rpy,
                    "mu": mu,
                    "pinf": pinf,
                    "dinf": dinf,
                    "relgap": relgap,
                }
            )
            merit = max(pinf / st.feas_tol, dinf / st.feas_tol, relgap / st.gap_tol)
            if np.isfinite(merit) and (best is None or merit < best[0]):
                best = (merit, [x.copy() for x in X], [s.copy() for s in S], y.copy())
            if pinf <= st.feas_tol and dinf <= st.feas_tol and relgap <= st.gap_tol:
                status = STATUS_OPTIMAL
                break
            if p0 > _DIVERGENCE * bnorm and pinf <= 1e-4:
                status = STATUS_UNBOUNDED
                break
            if d0 < -_DIVERGENCE * cnorm and dinf <= 1e-4:
                status = STATUS_INFEASIBLE
                break

            try:
                scal = [self._nt_scaling(X[b], S[b]) for b in range(len(self.sizes))]
            except np.linalg.LinAlgError:
                status = STATUS_TROUBLE
                break
            W = [s[0] for s in scal]
            G = [s[1] for s in scal]
            Ginv = [s[2] for s in scal]
            v = [s[3] for s in scal]

            M = self._schur(W)
            if not np.isfinite(M).all():
                status = STATUS_TROUBLE
                break
            try:
                Mchol = self._chol_with_jitter(M)
            except np.linalg.LinAlgError:
                status = STATUS_TROUBLE
                break

            AWRW = self.apply_A([W[b] @ Rd[b] @ W[b] for b in range(len(self.sizes))])

            def build_direction(sigma_mu, cross_pair):
                """Direction for the scaled complementarity target.

                The target is sigma_mu*I - V^2, minus the symmetrized product
                of the scaled affine directions when a corrector pair is given
                (sigma_mu = 0 and no pair gives the plain predictor, whose
                primal part reduces to -X).
                """
                prim = []
                for b in range(len(self.sizes)):
                    nb = len(v[b])
                    if cross_pair is not None:
                        dxt = Ginv[b] @ cross_pair[0][b] @ Ginv[b].T
                        dst = G[b].T @ cross_pair[1][b] @ G[b]
                        target = -(dxt @ dst + dst @ dxt) / 2.0
                    else:
                        target = np.zeros((nb, nb))
                    idx = np.arange(nb)
                    target[idx, idx] += sigma_mu - v[b] ** 2
                    denom = (v[b][:, None] + v[b][None, :]) / 2.0
                    prim.append(G[b] @ (target / denom) @ G[b].T)
                rhs = self.apply_A(prim) + AWRW - rp
                if not np.isfinite(rhs).all():
                    return None
                dy = self._solve_refined(Mchol, M, rhs)
                At_dy = self.apply_At(dy)
                dS = [At_dy[b] - Rd[b] for b in range(len(self.sizes))]
                dX = [prim[b] - W[b] @ dS[b] @ W[b] for b in range(len(self.sizes))]
                dX = [(d + d.T) / 2 for d in dX]
                if any(not np.isfinite(d).all() for d in dX):
                    return None
                return dy, dS, dX

            aff = build_direction(0.0, None)
            if aff is None:
                status = STATUS_TROUBLE
                break
            dy_aff, dS_aff, dX_aff = aff

            ap_aff = min(1.0, self._max_step(X, dX_aff))
            ad_aff = min(1.0, self._max_step(S, dS_aff))
            mu_aff = max(
                0.0,
                sum(
                    float(
                        np.sum(
                            (X[b] + ap_aff * dX_aff[b]) * (S[b] + ad_aff * dS_aff[b])
                        )
                    )
                    for b in range(len(self.sizes))
                )
                / self.n_total,
            )
            ratio = mu_aff / mu if mu > 0 else 0.0
            if not np.isfinite(ratio):
                ratio = 1.0
            sigma = min(1.0, max(0.0, ratio)) ** 3

            corr = build_direction(sigma * mu, (dX_aff, dS_aff))
            if corr is None:
                status = STATUS_TROUBLE
                break
            dy, dS, dX = corr

            ap = min(1.0, st.step_fraction * self._max_step(X, dX))
            ad = min(1.0, st.step_fraction * self._max_step(S, dS))

            # Iterated correctors: re-center around the combined direction
            # while that keeps lengthening the step.
            for _ in range(2):
                again = build_direction(sigma * mu, (dX, dS))
                if again is None:
                    break
                ap_t = min(1.0, st.step_fraction * self._max_step(X, again[2]))
                ad_t = min(1.0, st.step_fraction * self._max_step(S, again[1]))
                if ap_t + ad_t <= ap + ad + 0.01:
                    break
                dy, dS, dX = again
                ap, ad = ap_t, ad_t
            if max(ap, ad) < _STEP_COLLAPSE:
                # The combined direction stalled; a pure centering step often
                # restores enough interiority to keep making progress.
                cent = build_direction(mu, None)
                if cent is not None:
                    ap_c = min(1.0, st.step_fraction * self._max_step(X, cent[2]))
                    ad_c = min(1.0, st.step_fraction * self._max_step(S, cent[1]))
                    if max(ap_c, ad_c) > max(ap, ad):
                        dy, dS, dX = cent
                        ap, ad = ap_c, ad_c
            history[-1]["alpha_p"] = ap
            history[-1]["alpha_d"] = ad
            if max(ap, ad) < _STEP_COLLAPSE:
                collapse += 1
                if collapse >= _COLLAPSE_LIMIT:
                    status = STATUS_TROUBLE
                    break
            else:
                collapse = 0
            X = [X[b] + ap * dX[b] for b in range(len(self.sizes))]
            X = [(x + x.T) / 2 for x in X]
            y = y + ad * dy
            S = [S[b] + ad * dS[b] for b in range(len(self.sizes))]
            S = [(s + s.T) / 2 for s in S]
        if status == STATUS_TROUBLE and best is not None and best[0] < merit:
            # Report the most converged iterate instead of a post-stall one.
            _, X, S, y = best
        return status, X, S, y, iters, history

    def _solve_unconstrained(self):
        # No equality rows: the maximum of <C, X> over X >= 0 is 0 if C <= 0.
        for c in self.C:
            if c.size and np.linalg.eigvalsh(c).max() > 1e-12:
                return (
                    STATUS_UNBOUNDED,
                    [np.zeros((n, n)) for n in self.sizes],
                    [np.zeros((n, n)) for n in self.sizes],
                    np.zeros(0),
                    0,
                    [],
                )
        X = [np.zeros((n, n)) for n in self.sizes]
        S = [-c for c in self.C]
        return STATUS_OPTIMAL, X, S, np.zeros(0), 0, []

    @staticmethod
    def _nt_scaling(X, S):
        try:
            F = np.linalg.cholesky(X)
            F_inv = scipy.linalg.solve_triangular(F, np.eye(F.shape[0]), lower=True)
        except np.linalg.LinAlgError:
            # X drifted to the cone boundary within roundoff; use a floored
            # eigenvalue square root as the factor instead of giving up.
            w, V = np.linalg.eigh((X + X.T) / 2)
            w = np.maximum(w, max(1e-14 * float(abs(w).max()), 1e-300))
            F = V * w**0.5
            F_inv = (w**-0.5)[:, None] * V.T
        mid = F.T @ S @ F
        mid = (mid + mid.T) / 2
        lam, Q = np.linalg.eigh(mid)
        lam = np.maximum(lam, 1e-300)
        G = F @ Q * lam ** -0.25
        Ginv = (lam**0.25)[:, None] * (Q.T @ F_inv)
        W = G @ G.T
        v = np.sqrt(lam)
        return W, G, Ginv, v

    def _schur(self, W) -> np.ndarray:
        M = np.zeros((self.m, self.m))
        for bidx in range(len(self.sizes)):
            nz = self.touch[bidx]
            if not nz.size:
                continue
            t = self.tensors[bidx]
            waw = np.einsum("ij,rjk,kl->ril", W[bidx], t, W[bidx], optimize=True)
            Mb = np.tensordot(t, waw, axes=([1, 2], [1, 2]))
            M[np.ix_(nz, nz)] += Mb
        return (M + M.T) / 2

    @staticmethod
    def _solve_refined(Mchol, M, rhs):
        """Equilibrated Cholesky solve with adaptive iterative refinement."""
        fac, d = Mchol
        dy = scipy.linalg.cho_solve(fac, rhs / d) / d
        for _ in range(3):
            resid = rhs - M @ dy
            if not np.isfinite(resid).all():
                break
            corr = scipy.linalg.cho_solve(fac, resid / d) / d
            dy = dy + corr
            if float(np.max(np.abs(corr))) <= 1e-14 * max(
                1.0, float(np.max(np.abs(dy)))
            ):
                break
        return dy

    @staticmethod
    def _chol_with_jitter(M):
        # Jacobi equilibration keeps the factorization well scaled even when
        # the raw Schur complement spans many orders of magnitude.
        d = np.sqrt(np.abs(np.diag(M)))
        if not np.isfinite(d).all() or not d.size:
            raise np.linalg.LinAlgError("Schur complement overflowed")
        d = np.maximum(d, 1e-150)
        Ms = M / d[:, None] / d[None, :]
        jitter = 0.0
        for attempt in range(8):
            try:
                fac = scipy.linalg.cho_factor(
                    Ms + jitter * np.eye(M.shape[0]), lower=True
                )
                return fac, d
            except (np.linalg.LinAlgError, ValueError):
                jitter = max(1e-15, jitter * 100.0)
        raise np.linalg.LinAlgError("Schur complement lost positive definiteness")

    @staticmethod
    def _max_step(mats, deltas) -> float:
        best = np.inf
        for m, d in zip(mats, deltas):
            if m.size == 0:
                continue
            try:
                L = np.linalg.cholesky(m)
                u = scipy.linalg.solve_triangular(L, d, lower=True)
                u = scipy.linalg.solve_triangular(L, u.T, lower=True)
            except np.linalg.LinAlgError:
                # Iterate is only semidefinite to roundoff; floor its spectrum
                # so the step computation stays defined.
                w, V = np.linalg.eigh((m + m.T) / 2)
                w = np.maximum(w, max(1e-14 * float(abs(w).max()), 1e-300))
                root_inv = V * w**-0.5
                u = root_inv.T @ d @ root_inv
            lam = np.linalg.eigvalsh((u + u.T) / 2).min()
            if lam < 0:
                best = min(best, -1.0 / lam)
        return float(best)


# ---------------------------------------------------------------------------
# Phase-I wrapper for feasibility problems


def _phase_one(problem: BlockSdp) -> BlockSdp:
    """max t over X = Z + t I with Z >= 0, capped by t + u = 1, u >= 0."""
    cap_block = len(problem.blocks)
    t_idx = len(problem.scalars)
    rows = []
    for row in problem.constraints:
        tr = sum(c for b, i, j, c in row.entries if i == j)
        scalar_entries = row.scalar_entries
        if tr != 0.0:
            scalar_entries = scalar_entries + ((t_idx, float(tr)),)
        rows.append(Constraint(row.entries, scalar_entries, row.rhs, row.label))
    rows.append(
        Constraint(
            entries=((cap_block, 0, 0, 1.0),),
            scalar_entries=((t_idx, 1.0),),
            rhs=1.0,
            label="slack cap",
        )
    )
    return BlockSdp(
        blocks=problem.blocks + (BlockSpec(1, "slack cap"),),
        scalars=problem.scalars + ("feasibility slack",),
        constraints=tuple(rows),
        objective=Objective(scalar_entries=((t_idx, 1.0),)),
        sense="maximize",
        meta={"kind": "phase_one", "wrapped": problem.meta.get("kind", "feasibility")},
    )


# ---------------------------------------------------------------------------
# Public API


def solve(problem: BlockSdp, settings=None) -> SdpSolution:
    """Solve a BlockSdp; see SolverSettings for tolerances.

    Feasibility problems report Optimal when a PSD solution exists (the
    identity-slack optimum ``feasibility_slack`` is >= -feas_tol) and
    Infeasible otherwise.
    """
    st = SolverSettings.coerce(settings)
    if problem.sense == "feasibility":
        wrapped = _phase_one(problem)
        inner = solve(wrapped, st)
        slack = inner.scalar_values[-1] if inner.scalar_values else float("nan")
        nb = len(problem.blocks)
        blocks = tuple(
            np.asarray(inner.block_values[b]) + slack * np.eye(problem.blocks[b].size)
            for b in range(nb)
        )
        if inner.status == STATUS_OPTIMAL:
            status = STATUS_OPTIMAL if slack >= -st.feas_tol else STATUS_INFEASIBLE
        else:
            status = inner.status
        return SdpSolution(
            status=status,
            primal_value=float(slack),
            dual_value=inner.dual_value,
            gap=inner.gap,
            block_values=blocks,
            scalar_values=inner.scalar_values[:-1],
            iterations=inner.iterations,
            history=inner.history,
            y=inner.y[:-1] if inner.y is not None else None,
            dual_block_values=(
                inner.dual_block_values[:nb] if inner.dual_block_values else None
            ),
            feasibility_slack=float(slack),
        )

    pre = _Presolved(problem)
    if pre.infeasible_reason is not None:
        nan = float("nan")
        return SdpSolution(
            status=STATUS_INFEASIBLE,
            primal_value=nan,
            dual_value=nan,
            gap=nan,
            block_values=tuple(np.zeros((n, n)) for n in pre.sizes),
            scalar_values=tuple(0.0 for _ in problem.scalars),
            iterations=0,
        )
    core = _Core(pre, st)
    status, X, S, y_std, iters, history = core.run()
    xvec = _blocks_to_svec(X, pre.sizes, pre.offsets, pre.total)
    scalars = pre.recover_scalars(xvec)
    y_internal = pre.recover_dual(np.asarray(y_std))
    y = pre.sign * y_internal
    primal = problem.objective_value(X, scalars)
    dual = float(pre.sign * (pre.b_orig @ y_internal) + problem.objective.constant)
    gap = abs(primal - dual) / (1.0 + abs(primal) + abs(dual))
    return SdpSolution(
        status=status,
        primal_value=float(primal),
        dual_value=dual,
        gap=float(gap),
        block_values=tuple(X),
        scalar_values=tuple(float(z) for z in scalars),
        iterations=iters,
        history=tuple(history),
        y=tuple(float(t) for t in y),
        dual_block_values=tuple(S),
    )


def residuals(problem: BlockSdp, solution: SdpSolution) -> dict:
    """Recompute feasibility measures from problem data and solution values.

    ``primal_infeas`` is the largest raw equality violation, ``min_eig`` the
    smallest eigenvalue over solution blocks.  ``dual_infeas`` checks the
    stationarity system against the stored multipliers; feasibility problems
    carry no dual claim and report 0.
    """
    res = problem.constraint_residuals(solution.block_values, solution.scalar_values)
    primal_infeas = max((abs(r) for r in res), default=0.0)
    min_eig = 0.0
    for mat in solution.block_values:
        m = np.asarray(mat, dtype=float)
        if m.size:
            min_eig = min(min_eig, float(np.linalg.eigvalsh((m + m.T) / 2).min()))
    dual_infeas = 0.0
    if (
        problem.sense != "feasibility"
        and solution.y is not None
        and solution.dual_block_values is not None
    ):
        sizes = problem.block_sizes()
        offsets, total = _svec_layout(sizes)
        aty = np.zeros(total)
        for r, row in enumerate(problem.constraints):
            if solution.y[r] != 0.0:
                aty += solution.y[r] * _row_to_svec(row.entries, sizes, offsets, total)
        cvec = _row_to_svec(problem.objective.entries, sizes, offsets, total)
        svec_S = _blocks_to_svec(
            [np.asarray(s) for s in solution.dual_block_values], sizes, offsets, total
        )
        sign = -1.0 if problem.sense == "minimize" else 1.0
        # maximize: A*(y) - C = S ; minimize: C - A*(y) = S.
        resid_vec = sign * (aty - cvec) - svec_S
        dual_infeas = float(np.max(np.abs(resid_vec), initial=0.0))
        cs = np.zeros(len(problem.scalars))
        for s, c in problem.objective.scalar_entries:
            cs[s] += c
        By = np.zeros(len(problem.scalars))
        for r, row in enumerate(problem.constraints):
            for s, c in row.scalar_entries:
                By[s] += c * solution.y[r]
        if len(problem.scalars):
            dual_infeas = max(dual_infeas, float(np.max(np.abs(By - cs))))
    return {
        "primal_infeas": float(primal_infeas),
        "dual_infeas": float(dual_infeas),
        "min_eig": float(min_eig),
    }
