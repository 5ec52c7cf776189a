"""Equality-constrained minimum one-norm solver with dual certificates.

Solves, for a dictionary D with full row rank and one or many targets y,

    min ||lambda||_1   s.t.   D lambda = y,

over real or complex coefficients (complex moduli make this a second-order
cone program).  The engine is a primal-dual scheme built on the Lagrange dual

    max Re <nu, y>   s.t.   |(D^dag nu)_i| <= 1  for all i:

* A log-barrier path  t * Re<nu, y> + sum_i log(1 - |(D^dag nu)_i|^2)  is
  followed in t by damped Newton steps over nu (16 or 32 real unknowns
  here).  Stationarity hands back the primal iterate
  lambda_i = (2/t) z_i / (1 - |z_i|^2) with z = D^dag nu, whose one-norm
  exceeds the dual value by at most ~2M/t.
* Once the path has identified the support (active disks |z_i| -> 1 and
  large candidate coefficients), the problem is finished combinatorially:
  the reduced problem on those columns is solved to high accuracy, its dual
  point is priced against the full dictionary, and columns violating
  |(D^dag nu)_i| <= 1 are pulled in (column generation).  For the coherent,
  highly degenerate frame dictionaries this crossover reaches gaps near
  machine precision where the barrier alone stalls in float64.

Every returned coefficient vector is exactly feasible (projected or refit on
its support) and every reported ``dual_objective`` comes from a dual point
rescaled into strict feasibility, so it is a rigorous lower bound on the true
optimum and ``gap`` a proven optimality certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_ITER = 200_000


@dataclass(frozen=True)
class SolverOptions:
    gap_target: float = 1e-9        # duality-gap acceptance (absolute/relative)
    final_decrement: float = 1e-7   # Newton decrement target at the last stage
    max_iter: int = DEFAULT_MAX_ITER   # total Newton iteration cap per target
    t_init: float = 8.0
    t_scale: float = 12.0           # barrier path multiplier per stage
    t_handoff: float = 2e6          # hand over to column generation past this
    t_cap: float = 3e11             # keeps 1 - |z|^2 above the QR noise floor
    residual_tol: float = 1e-8      # hard feasibility requirement on the output
    gap_tol: float = 1e-6           # certification threshold
    prune_tol: float = 1e-10
    colgen_rounds: int = 6


DEFAULT_OPTIONS = SolverOptions()


@dataclass
class SolveOutcome:
    """One solved target: dense coefficients plus optimality evidence."""

    coeffs: np.ndarray
    one_norm: float
    residual: float
    dual_objective: float
    gap: float
    iterations: int
    converged: bool
    dual_vector: np.ndarray = None


class SolverFailure(RuntimeError):
    """Non-convergence within the iteration cap; carries the best iterate."""

    def __init__(self, message: str, coeffs: np.ndarray, residual: float, iterations: int):
        super().__init__(message)
        self.coeffs = coeffs
        self.residual = residual
        self.iterations = iterations


class _Best:
    """Tracks the best (gap, primal, dual value, dual vector) seen so far."""

    def __init__(self):
        self.gap = math.inf
        self.lam = None
        self.dual = 0.0
        self.nu = None

    def offer(self, lam, norm, dual, nu):
        if norm - dual < self.gap:
            self.gap = norm - dual
            self.lam = lam
            self.dual = dual
            self.nu = nu

    def accepted(self, opt, norm_scale=1.0):
        return self.gap <= max(opt.gap_target, 1e-9 * norm_scale)


class BasisPursuitSolver:
    """Min one-norm solves against a fixed dictionary (factorized once)."""

    def __init__(self, D: np.ndarray, options: SolverOptions = DEFAULT_OPTIONS,
                 force_complex: bool = False):
        D = np.asarray(D)
        if (
            np.iscomplexobj(D)
            and not force_complex
            and (D.size == 0 or np.abs(D.imag).max() < 1e-14)
        ):
            D = np.ascontiguousarray(D.real)
        elif force_complex and not np.iscomplexobj(D):
            D = D.astype(complex)
        self.D = D
        self.is_real = not np.iscomplexobj(D)
        self.Dh = D.conj().T
        self._gram = D @ self.Dh
        self._chol = np.linalg.cholesky(self._gram)
        self.options = options
        self.d, self.m = D.shape

    # -- linear algebra helpers --------------------------------------------

    def gram_solve(self, B: np.ndarray) -> np.ndarray:
        """(D D^dag)^{-1} B via the cached Cholesky factor."""
        z = np.linalg.solve(self._chol, B)
        return np.linalg.solve(self._chol.conj().T, z)

    def project_feasible(self, lam: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Exact projection of coefficients onto {lambda : D lambda = y}."""
        return lam - self.Dh @ self.gram_solve(self.D @ lam - y)

    # -- main entry points ---------------------------------------------------

    def solve(self, y: np.ndarray, options: SolverOptions | None = None) -> SolveOutcome:
        return self.solve_batch(np.asarray(y).reshape(-1, 1), options)[0]

    def solve_batch(self, Y: np.ndarray, options: SolverOptions | None = None) -> list:
        """Solve one instance per column of Y (shape d x K)."""
        opt = options or self.options
        Y = np.asarray(Y)
        if Y.ndim != 2 or Y.shape[0] != self.d:
            raise ValueError(f"targets must have shape ({self.d}, K)")
        if self.is_real and np.iscomplexobj(Y):
            if Y.size and np.abs(Y.imag).max() > 1e-13:
                raise ValueError("complex target over a real dictionary")
            Y = np.ascontiguousarray(Y.real)
        return [self._solve_one(Y[:, k], opt) for k in range(Y.shape[1])]

    # -- the path + crossover driver ------------------------------------------

    def _solve_one(self, y: np.ndarray, opt: SolverOptions,
                   refine: bool = True, depth: int = 0) -> SolveOutcome:
        dtype = float if self.is_real else complex
        ynorm = float(np.linalg.norm(y))
        if ynorm <= 1e-14:
            zero = np.zeros(self.m, dtype=dtype)
            return SolveOutcome(zero, 0.0, 0.0, 0.0, 0.0, 0, True,
                                np.zeros(self.d, dtype=dtype))
        yn = (y / ynorm).astype(dtype, copy=False)

        nu = np.zeros(self.d, dtype=dtype)
        z = np.zeros(self.m, dtype=dtype)
        t = opt.t_init
        t_final = min(20.0 * self.m / opt.gap_target, opt.t_cap)
        iterations = 0
        best = _Best()
        # fast pass: with nu = z = 0 the snapshot candidates reduce to the
        # least-norm solution plus its polish/KKT finish, which certifies
        # most well-conditioned targets without touching the barrier path
        lam, norm, dual, dvec = self._stage_snapshot(yn, nu, z, 1.0)
        best.offer(lam, norm, dual, dvec)
        if best.accepted(opt, norm):
            return self._outcome(y, ynorm, best, iterations)
        refined = False
        while True:
            final_stage = t >= t_final
            target = opt.final_decrement if final_stage else 0.25
            nu, z, iterations, _ = self._center(
                yn, nu, t, opt, iterations, target_decrement=target
            )
            if t >= 1e3 or final_stage:
                lam, norm, dual, dvec = self._stage_snapshot(yn, nu, z, t, depth)
                best.offer(lam, norm, dual, dvec)
                if best.accepted(opt, norm):
                    break
                if refine and not refined and (t >= opt.t_handoff or final_stage):
                    refined = True
                    self._column_generation(yn, best, z, opt, depth)
                    if best.accepted(opt, norm):
                        break
            if final_stage or iterations >= opt.max_iter:
                break
            t = min(t * opt.t_scale, t_final)

        if refine and not best.accepted(opt) and best.lam is not None:
            self._column_generation(yn, best, z, opt, depth)
        outcome = self._outcome(y, ynorm, best, iterations)
        if outcome.residual > opt.residual_tol:
            raise SolverFailure(
                f"no feasible iterate after {iterations} Newton iterations "
                f"(best residual {outcome.residual:.3e})",
                outcome.coeffs, outcome.residual, iterations,
            )
        return outcome

    def _outcome(self, y, ynorm, best: _Best, iterations) -> SolveOutcome:
        lam = best.lam.copy()
        lam[np.abs(lam) < self.options.prune_tol / max(ynorm, 1e-30)] = 0.0
        coeffs = lam * ynorm
        residual = float(np.linalg.norm(self.D @ coeffs - y))
        one_norm = float(np.abs(coeffs).sum())
        dual = best.dual * ynorm
        return SolveOutcome(
            coeffs, one_norm, residual, dual, one_norm - dual, iterations,
            converged=(one_norm - dual) <= self.options.gap_tol,
            dual_vector=best.nu,
        )

    # -- column generation (exact finish on the discovered support) -----------

    def _reduced_solver(self, cols_matrix, yn, opt):
        """Solver for a column subset, row-reduced to the subset's range.

        Returns (solver, y_reduced, basis) or None when the target does not
        lie in the span of the chosen columns.
        """
        u, svals, _ = np.linalg.svd(cols_matrix, full_matrices=False)
        if svals.size == 0 or svals[0] == 0.0:
            return None
        rank = int((svals > 1e-8 * svals[0]).sum())
        while rank > 0:
            q = u[:, :rank]
            y_sub = q.conj().T @ yn
            if float(np.linalg.norm(yn - q @ y_sub)) > 1e-11:
                return None
            try:
                solver = BasisPursuitSolver(
                    q.conj().T @ cols_matrix, opt,
                    force_complex=np.iscomplexobj(cols_matrix),
                )
                return solver, y_sub, q
            except np.linalg.LinAlgError:
                rank -= 1  # gram still too ill-conditioned: trim further
        return None

    def _column_generation(self, yn, best: _Best, z, opt, depth=0):
        """Solve the reduced problem on the discovered support, price its dual
        against the full dictionary and grow the support along violations."""
        scale = float(np.abs(best.lam).max()) if best.lam is not None else 0.0
        if scale == 0.0:
            return
        support = set(np.flatnonzero(np.abs(best.lam) > 1e-7 * scale).tolist())
        support |= set(np.flatnonzero(np.abs(z) > 1.0 - 1e-3).tolist())
        for _ in range(opt.colgen_rounds):
            cols = np.array(sorted(support), dtype=int)
            if cols.size == 0 or cols.size >= self.m:
                return
            reduced = self._reduced_solver(self.D[:, cols], yn, opt)
            if reduced is None:
                return
            sub, y_sub, q = reduced
            try:
                out = sub._solve_one(y_sub, opt, refine=False, depth=depth + 1)
            except (SolverFailure, np.linalg.LinAlgError):
                return
            lam_full = np.zeros(self.m, dtype=best.lam.dtype)
            lam_full[cols] = out.coeffs
            if out.dual_vector is None:
                return
            nu = q @ out.dual_vector
            zfull = self.Dh @ nu
            over = float(np.abs(zfull).max())
            nu_feas = nu / over if over > 1.0 else nu
            dual = max(float(np.real(np.vdot(nu_feas, yn))), 0.0)
            best.offer(lam_full, out.one_norm, dual, nu_feas)
            if best.accepted(opt, out.one_norm):
                return
            violated = np.flatnonzero(np.abs(zfull) > 1.0 + 1e-11)
            new = [int(i) for i in violated if int(i) not in support]
            if not new:
                return
            new.sort(key=lambda i: -abs(zfull[i]))
            support |= set(new[: 4 * self.d])

    # -- barrier path ----------------------------------------------------------

    def _center(self, yn, nu, t, opt, iterations, target_decrement=0.25):
        """Damped Newton to the barrier optimum at parameter t.

        The barrier is self-concordant, so the damped step 1/(1+delta) makes
        guaranteed progress without an objective-value line search (which
        would drown in rounding once t * <nu, y> dominates the objective).
        """
        z = self.Dh @ nu
        stalled = False
        best = (math.inf, nu, z)
        no_progress = 0
        for _ in range(120):
            if iterations >= opt.max_iter:
                break
            iterations += 1
            s = np.abs(z) ** 2
            one_minus = np.maximum(1.0 - s, 1e-14)
            a = 1.0 / one_minus
            grad_c = t * yn - self.D @ (2.0 * a * z)
            if self.is_real:
                grad = grad_c
            else:
                grad = np.concatenate([grad_c.real, grad_c.imag])
            step, curvature = self._newton_system(z, a, grad)
            if curvature <= 0.0:
                break  # gradient vanished identically: centered
            decrement = math.sqrt(curvature)
            if decrement < 0.98 * best[0]:
                best = (decrement, nu, z)
                no_progress = 0
            else:
                # rounding noise floor: Newton has stopped contracting
                no_progress += 1
                if no_progress >= 8:
                    stalled = True
                    break
            if decrement <= target_decrement:
                break
            dnu = step if self.is_real else step[: self.d] + 1j * step[self.d :]
            dz = self.Dh @ dnu
            alpha_max = self._boundary_step(z, dz)
            alpha = alpha_max
            if decrement > 0.25:
                alpha = min(alpha_max, 1.0 / (1.0 + decrement))
                # far from the center the damped step is safe but tiny; while
                # t is small enough for the objective to be float-trustworthy,
                # probe the full fraction-to-boundary step first (real
                # dictionaries only: the complex paths are kept on the proven
                # short-step trajectory)
                if self.is_real and decrement > 1.0 and t <= 1e8:
                    f_now = self._objective(yn, nu, z, t)
                    trial = alpha_max
                    for _ in range(4):
                        if trial <= alpha:
                            break
                        z_try = z + trial * dz
                        if np.abs(z_try).max() < 1.0:
                            if self._objective(yn, nu + trial * dnu, z_try, t) > f_now:
                                alpha = trial
                                break
                        trial *= 0.5
            if alpha < 1e-11:
                stalled = True
                break
            nu = nu + alpha * dnu
            z = z + alpha * dz
        if best[0] < math.inf:
            nu, z = best[1], best[2]
        return nu, z, iterations, stalled

    @staticmethod
    def _objective(yn, nu, z, t):
        s = np.abs(z) ** 2
        if s.max() >= 1.0:
            return -math.inf
        return float(t * np.real(np.vdot(nu, yn)) + np.log1p(-s).sum())

    def _newton_system(self, z, a, grad):
        """Newton direction for the barrier Hessian H = B B^T.

        While the disk weights stay balanced the normal matrix H is formed
        directly and solved by Cholesky.  Deep in the path the weight ratio
        a_max/a_min blows up; there the direction comes from a QR
        factorization of the curvature factor B^T, whose conditioning is the
        ratio itself instead of its square.
        """
        deep = float(a.max() / a.min()) > 1e6
        if not deep:
            if self.is_real:
                weights = 2.0 * a + 4.0 * a * a * (z * z)
                hess = (self.D * weights) @ self.D.T
            else:
                gmat = (self.D * (2.0 * a)) @ self.Dh
                v = self.D * z
                vr = np.concatenate([v.real, v.imag], axis=0)
                hess = np.block(
                    [[gmat.real, -gmat.imag], [gmat.imag, gmat.real]]
                ) + (vr * (4.0 * a * a)) @ vr.T
            try:
                chol = np.linalg.cholesky(hess)
                step = np.linalg.solve(chol.T, np.linalg.solve(chol, grad))
                curvature = float(grad @ step)
                if curvature > 0.0 and np.isfinite(curvature):
                    return step, curvature
            except np.linalg.LinAlgError:
                pass
        if self.is_real:
            weights = 2.0 * a + 4.0 * a * a * (z * z)
            b = self.D * np.sqrt(weights)
        else:
            da = self.D * np.sqrt(2.0 * a)
            v = (self.D * z) * (2.0 * a)
            b = np.concatenate(
                [
                    np.concatenate([da.real, -da.imag, v.real], axis=1),
                    np.concatenate([da.imag, da.real, v.imag], axis=1),
                ],
                axis=0,
            )
        try:
            r = np.linalg.qr(b.T, mode="r")
            step = np.linalg.solve(r, np.linalg.solve(r.T, grad))
            curvature = float(grad @ step)
            if curvature > 0.0 and np.isfinite(curvature):
                return step, curvature
        except np.linalg.LinAlgError:
            pass
        # rank-deficient or rounding-broken system: fall back to a ridge
        hess = b @ b.T
        diag_scale = float(np.abs(np.diagonal(hess)).max()) or 1.0
        for attempt in range(3):
            ridge = diag_scale * (1e-12 * 100.0**attempt)
            try:
                step = np.linalg.solve(hess + ridge * np.eye(hess.shape[0]), grad)
            except np.linalg.LinAlgError:
                continue
            curvature = float(grad @ step)
            if curvature > 0.0 and np.isfinite(curvature):
                return step, curvature
        return grad / diag_scale, float(grad @ grad) / diag_scale

    @staticmethod
    def _boundary_step(z, dz):
        # fraction-to-boundary: 0.95 of the largest step keeping |z_i| < 1
        a2 = np.abs(dz) ** 2
        b = np.real(z.conj() * dz)
        c = np.abs(z) ** 2 - 1.0
        mask = a2 > 1e-30
        disc = np.sqrt(np.maximum(b[mask] ** 2 - a2[mask] * c[mask], 0.0))
        roots = (-b[mask] + disc) / a2[mask]
        alpha = float(min(1.0, 0.95 * roots.min())) if roots.size else 1.0
        return max(alpha, 0.0)

    # -- feasible primal/dual extraction ---------------------------------------

    def _primal_candidate(self, z, t):
        one_minus = np.maximum(1.0 - np.abs(z) ** 2, 1e-14)
        return (2.0 / t) * z / one_minus

    def _candidate_supports(self, z, cand):
        """Plausible optimal supports: disks active in the dual, and large
        coefficients of the barrier's primal candidate."""
        mags = np.abs(cand)
        lmax = mags.max() if mags.size else 0.0
        supports = []
        active = np.flatnonzero(np.abs(z) > 1.0 - 1e-5)
        if 0 < active.size <= 6 * self.d:
            supports.append(active)
        if lmax > 0:
            for thresh in (1e-3 * lmax, 1e-5 * lmax, 1e-7 * lmax):
                s = np.flatnonzero(mags > thresh)
                if 0 < s.size <= 8 * self.d:
                    supports.append(s)
        seen = set()
        unique = []
        for s in supports:
            key = s.tobytes()
            if key not in seen:
                seen.add(key)
                unique.append(s)
        return unique

    def _refit(self, yn, support, like):
        sol, *_ = np.linalg.lstsq(self.D[:, support], yn, rcond=None)
        resid = float(np.linalg.norm(self.D[:, support] @ sol - yn))
        lam = np.zeros_like(like)
        lam[support] = sol
        return lam, resid, float(np.abs(sol).sum())

    def _stage_snapshot(self, yn, nu, z, t, depth=0):
        """The best exactly feasible primal visible at this stage and the best
        proven dual bound.  Returns (coeffs, one_norm, dual, dual_vector).

        Primal candidates: the projection of the barrier iterate, refits on
        plausible supports, a reweighted-least-norm descent, and an
        active-set KKT Newton finish - the combination snaps onto degenerate
        optimal faces that any single recovery misses.
        """
        cand = self._primal_candidate(z, t)
        best_lam = self.project_feasible(cand, yn)
        best_norm = float(np.abs(best_lam).sum())
        for support in self._candidate_supports(z, cand):
            lam, resid, norm = self._refit(yn, support, cand)
            if resid <= 1e-11 and norm < best_norm:
                best_lam, best_norm = lam, norm
        polished = self._reweighted_polish(yn, best_lam)
        pol_norm = float(np.abs(polished).sum())
        if pol_norm < best_norm and np.linalg.norm(self.D @ polished - yn) <= 1e-11:
            best_lam, best_norm = polished, pol_norm
        dual, dvec = self._best_dual(yn, nu, z, best_lam)
        finish = self._kkt_finish(yn, self.Dh @ dvec, best_lam)
        if finish is not None:
            lam_kkt, nu_kkt = finish
            norm_kkt = float(np.abs(lam_kkt).sum())
            if (
                norm_kkt < best_norm
                and np.linalg.norm(self.D @ lam_kkt - yn) <= 1e-10
            ):
                best_lam, best_norm = lam_kkt, norm_kkt
            zmax = float(np.abs(self.Dh @ nu_kkt).max())
            vec = nu_kkt / zmax if zmax > 1.0 else nu_kkt
            val = float(np.real(np.vdot(vec, yn)))
            if val > dual:
                dual, dvec = val, vec
        return best_lam, best_norm, dual, dvec

    def _kkt_finish(self, yn, z, lam_guess, rounds=3):
        """Active-set Newton on the optimality system.

        With active set A guessed from the near-unit disks, the dual optimum
        and the primal masses solve the square nonlinear system

            |(D^dag nu)_j|^2 = 1           (j in A)
            y = sum_j mu_j z_j d_j         (stationarity),

        which Newton polishes to machine precision from the barrier's
        estimates; negative masses signal a wrong active-set guess and evict
        their columns.  On success the primal lambda_j = mu_j z_j and the
        refined dual certify each other essentially exactly.
        """
        tried = set()
        for tol in (1e-4, 1e-3, 5e-3):
            active = np.flatnonzero(np.abs(z) > 1.0 - tol)
            key = active.tobytes()
            if key in tried or active.size == 0 or active.size > 6 * self.d:
                continue
            tried.add(key)
            guess_nu = None
            for _ in range(rounds):
                if active.size == 0:
                    break
                solved = self._kkt_newton(yn, z, lam_guess, active, guess_nu)
                if solved is None:
                    break
                nu_new, mu, ok = solved
                if not ok:
                    break
                if mu.min() >= -1e-10:
                    z_a = self.D[:, active].conj().T @ nu_new
                    lam = np.zeros(self.m, dtype=complex if not self.is_real else float)
                    lam[active] = np.maximum(mu, 0.0) * z_a
                    return lam, nu_new
                keep = mu > -1e-10
                active = active[keep]
                guess_nu = nu_new
        return None

    def _kkt_newton(self, yn, z, lam_guess, active, guess_nu):
        da = self.D[:, active]
        k = active.size
        d = self.d
        nu0 = guess_nu
        if nu0 is None:
            # start from the least-squares dual consistent with the phases
            phases = z[active] / np.abs(z[active])
            nu0, *_ = np.linalg.lstsq(da.conj().T, phases, rcond=None)
        mu0 = np.abs(lam_guess[active])
        if self.is_real:
            x = np.concatenate([np.real(nu0), mu0])
        else:
            x = np.concatenate([np.real(nu0), np.imag(nu0), mu0])

        def unpack(xv):
            if self.is_real:
                return xv[:d], xv[d:]
            return xv[:d] + 1j * xv[d : 2 * d], xv[2 * d :]

        for _ in range(30):
            nu, mu = unpack(x)
            z_a = da.conj().T @ nu
            f1 = 0.5 * (np.abs(z_a) ** 2 - 1.0)
            f2 = yn - da @ (mu * z_a)
            if self.is_real:
                f = np.concatenate([f1, f2])
            else:
                f = np.concatenate([f1, f2.real, f2.imag])
            fnorm = float(np.linalg.norm(f))
            if fnorm <= 1e-13:
                return nu, mu, True
            g = np.conj(da * z_a[None, :])
            c = -(da * mu) @ da.conj().T
            b = -(da * z_a)
            if self.is_real:
                j1 = np.concatenate([g.T, np.zeros((k, k))], axis=1)
                j2 = np.concatenate([c, b], axis=1)
                jac = np.concatenate([np.real(j1), np.real(j2)], axis=0)
            else:
                j1 = np.concatenate([g.T.real, (1j * g).T.real, np.zeros((k, k))], axis=1)
                j2 = np.concatenate([c.real, (1j * c).real, b.real], axis=1)
                j3 = np.concatenate([c.imag, (1j * c).imag, b.imag], axis=1)
                jac = np.concatenate([j1, j2, j3], axis=0)
            try:
                dx = np.linalg.solve(jac, -f)
            except np.linalg.LinAlgError:
                try:
                    dx, *_ = np.linalg.lstsq(jac, -f, rcond=None)
                except np.linalg.LinAlgError:
                    return None
            if not np.all(np.isfinite(dx)):
                return None
            x = x + dx
            if float(np.linalg.norm(dx)) > 1e3:
                return None  # diverging: bad active set
        nu, mu = unpack(x)
        z_a = da.conj().T @ nu
        f1 = 0.5 * (np.abs(z_a) ** 2 - 1.0)
        f2 = yn - da @ (mu * z_a)
        resid = np.concatenate([f1, f2.real, f2.imag]) if not self.is_real else np.concatenate([f1, f2])
        return nu, mu, float(np.linalg.norm(resid)) <= 1e-11

    def _reweighted_polish(self, yn, lam0, iters=60):
        """Iteratively reweighted least-norm descent for min ||lam||_1 with
        D lam = yn: each step solves the weighted least-norm problem
        lam = W D^dag (D W D^dag)^{-1} yn with W = diag(|lam|), whose fixed
        points are one-norm stationary; warm-started near the optimal face it
        converges into it.  The result is re-projected, so it stays feasible
        to machine precision regardless of where the iteration stops."""
        scale = float(np.abs(lam0).max()) if lam0.size else 0.0
        if scale == 0.0:
            return lam0
        # coordinates this small never regrow under magnitude reweighting, so
        # restrict the iteration to the plausible support once identified
        keep = np.flatnonzero(np.abs(lam0) > 1e-8 * scale)
        if keep.size == 0:
            return lam0
        d_sub = self.D[:, keep]
        dh_sub = d_sub.conj().T
        lam = lam0[keep]
        eps = 1e-3 * scale
        eye = np.eye(self.d)
        for _ in range(iters):
            w = np.maximum(np.abs(lam), eps)
            gram = (d_sub * w) @ dh_sub
            try:
                rhs = np.linalg.solve(gram + (1e-14 * w.max()) * eye, yn)
            except np.linalg.LinAlgError:
                break
            new = w * (dh_sub @ rhs)
            if np.abs(new - lam).max() <= 1e-14 * scale:
                lam = new
                break
            lam = new
            eps = max(0.5 * eps, 1e-14 * scale)
        full = np.zeros_like(lam0)
        full[keep] = lam
        return self.project_feasible(full, yn)

    def _best_dual(self, yn, nu, z, lam):
        """The strongest proven lower bound available: the path iterate, a fit
        to the primal support phases, and a fit to the active-disk phases,
        each violation-polished and rescaled into strict feasibility."""
        candidates = [nu]
        support = np.flatnonzero(np.abs(lam) > 1e-9)
        if 0 < support.size <= 8 * self.d:
            phases = lam[support] / np.abs(lam[support])
            fit, *_ = np.linalg.lstsq(self.Dh[support, :], phases, rcond=None)
            candidates.append(self._dual_polish(fit, support))
        active = np.flatnonzero(np.abs(z) > 1.0 - 1e-3)
        if 0 < active.size <= 8 * self.d:
            phases = z[active] / np.abs(z[active])
            fit, *_ = np.linalg.lstsq(self.Dh[active, :], phases, rcond=None)
            candidates.append(self._dual_polish(fit, active))
        best_val, best_vec = 0.0, np.zeros_like(nu)
        for cand in candidates:
            zmax = float(np.abs(self.Dh @ cand).max()) if self.m else 0.0
            vec = cand / zmax if zmax > 1.0 else cand
            val = float(np.real(np.vdot(vec, yn)))
            if val > best_val:
                best_val, best_vec = val, vec
        return best_val, best_vec

    def _dual_polish(self, nu, pinned, rounds=12):
        """Reduce off-support disk violations of a dual candidate while pinning
        the phases on ``pinned`` coordinates.

        Corrections xi satisfy d_i^dag xi = 0 on the pinned set, so when the
        pinned set carries the primal support the objective Re<nu, y> is
        preserved exactly (y is a combination of those columns); shaving the
        violations then directly shrinks the feasibility rescaling loss.
        """
        for _ in range(rounds):
            z = self.Dh @ nu
            mags = np.abs(z)
            viol = np.flatnonzero(mags > 1.0 + 1e-12)
            viol = np.setdiff1d(viol, pinned, assume_unique=False)
            if viol.size == 0:
                break
            if viol.size > 8 * self.d:
                viol = viol[np.argsort(mags[viol])[-8 * self.d :]]
            overshoot = (mags[viol] - 1.0 + 1e-13) * (z[viol] / mags[viol])
            rows = np.concatenate([self.Dh[pinned, :], self.Dh[viol, :]], axis=0)
            rhs = np.concatenate([np.zeros(len(pinned), dtype=z.dtype), overshoot])
            xi, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
            nu = nu - xi
        return nu
