"""Closed-form secrecy beamforming for a fixed array shape.

For channels h_B and H_E = [h_E1 ... h_EM] the unclamped secrecy rate is a
monotone function of the generalized Rayleigh quotient of the Hermitian
pair

    A = h_B h_B^H + c I,    B = H_E H_E^H + c I,    c = sigma^2 / P_max,

so the optimal direction is the dominant generalized eigenvector of
(A, B), and the optimal beamformer transmits along it at full power.  The
eigenvector is computed by inverse-free power iteration: B is factorized
once (Cholesky) and each step solves B u_next = A u.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .secrecy import Beamformer

POWER_ITER_TOL = 1e-10
POWER_ITER_MAX = 500


class EigenSolveError(RuntimeError):
    "Raised when the power iteration fails to converge or B is singular."

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class HermitianPair:
    "Hermitian pair (A, B) with B positive definite."

    a_mat: np.ndarray
    b_mat: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a_mat, dtype=complex)
        b = np.asarray(self.b_mat, dtype=complex)
        for name, m in (("a_mat", a), ("b_mat", b)):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"{name} must be square")
            if np.max(np.abs(m - m.conj().T)) > 1e-12 * max(
                    1.0, float(np.max(np.abs(m)))):
                raise ValueError(f"{name} is not Hermitian")
        object.__setattr__(self, "a_mat", a)
        object.__setattr__(self, "b_mat", b)


def build_pair(h_b, h_e_matrix, sigma2, p_max) -> HermitianPair:
    "Assemble A = h_B h_B^H + cI and B = H_E H_E^H + cI with c = sigma2/P_max."
    if not p_max > 0:
        raise ValueError("p_max must be > 0")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be > 0")
    h_b = np.asarray(h_b, dtype=complex).ravel()
    h_e = np.asarray(h_e_matrix, dtype=complex)
    if h_e.ndim == 1:
        h_e = h_e[:, None]
    n = len(h_b)
    c = sigma2 / p_max
    a = np.outer(h_b, h_b.conj()) + c * np.eye(n)
    b = h_e @ h_e.conj().T + c * np.eye(n)
    # exact Hermitian symmetrization kills rounding asymmetry
    a = (a + a.conj().T) / 2.0
    b = (b + b.conj().T) / 2.0
    return HermitianPair(a_mat=a, b_mat=b)


def dominant_gen_eigvec(pair: HermitianPair, tol=POWER_ITER_TOL,
                        max_iter=POWER_ITER_MAX):
    """Dominant generalized eigenvector of (A, B), inverse-free iteration.

    Returns (w_dir, lambda_max) with ||w_dir|| = 1.  B is factorized once;
    each step applies u -> solve(B, A u) and then extracts the best Ritz
    pair from span{u, solve(B, A u)} (a two-dimensional Rayleigh-Ritz
    refinement, which keeps convergence healthy when the top generalized
    eigenvalues are close).  The deterministic start is the normalized
    all-ones vector, so degenerate pencils (A = B) return a reproducible
    direction.  Stops once the Rayleigh quotient has stabilized to `tol`
    relative change and the pencil residual ||A u - lam B u|| is below
    tol^(1/2)-scaled noise; raises EigenSolveError on factorization
    failure or non-convergence, carrying the last residual.
    """
    a, b = pair.a_mat, pair.b_mat
    n = a.shape[0]
    try:
        b_fac = cho_factor(b, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveError(f"B is not positive definite: {exc}") from exc
    a_scale = np.linalg.norm(a, ord="fro")
    # the attainable pencil residual is floored by B's conditioning
    chol_diag = np.abs(np.diag(b_fac[0])) ** 2
    cond_proxy = n * np.max(chol_diag) / np.min(chol_diag)
    eps = np.finfo(float).eps
    resid_target = a_scale * max(1e-9, 100.0 * eps * cond_proxy)
    u = np.ones(n, dtype=complex) / np.sqrt(n)
    lam = _rayleigh(a, b, u)
    residual = np.inf
    best_u, best_lam, best_res = u, lam, np.inf
    lam_history = [lam]
    for _ in range(max_iter):
        v = cho_solve(b_fac, a @ u, check_finite=False)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise EigenSolveError("power iteration hit the zero vector")
        u_new = v / norm
        lam_new = _rayleigh(a, b, u_new)
        residual = np.linalg.norm(a @ u_new - lam_new * (b @ u_new))
        # Rayleigh-Ritz on span{u, v}: accepted only when it lowers the
        # pencil residual (a noisy solve direction can fake a huge
        # quotient when B is nearly singular)
        v_perp = v - np.vdot(u, v) * u
        perp_norm = np.linalg.norm(v_perp)
        if perp_norm > 1e-14 * norm:
            q = np.column_stack([u, v_perp / perp_norm])
            a_small = q.conj().T @ (a @ q)
            b_small = q.conj().T @ (b @ q)
            a_small = (a_small + a_small.conj().T) / 2.0
            b_small = (b_small + b_small.conj().T) / 2.0
            try:
                _, vecs = eigh_2x2(a_small, b_small)
                u_ritz = q @ vecs[:, -1]
                u_ritz /= np.linalg.norm(u_ritz)
                lam_ritz = _rayleigh(a, b, u_ritz)
                res_ritz = np.linalg.norm(a @ u_ritz
                                          - lam_ritz * (b @ u_ritz))
                if res_ritz < residual:
                    u_new, lam_new, residual = u_ritz, lam_ritz, res_ritz
            except np.linalg.LinAlgError:
                pass
        u = u_new
        if residual < best_res:
            best_u, best_lam, best_res = u_new, lam_new, residual
        if abs(lam_new - lam) <= tol * abs(lam_new) \
                and residual <= resid_target:
            return u, float(lam_new)
        lam = lam_new
        lam_history.append(lam)
    # iteration budget exhausted: if the quotient plateaued (solve-noise
    # floor of an ill-conditioned pencil) the best iterate is the answer;
    # a still-trending quotient genuinely failed to converge
    span = min(50, len(lam_history) - 1)
    if span >= 10:
        tail = np.asarray(lam_history[-(span + 1):])
        total_variation = float(np.sum(np.abs(np.diff(tail))))
        drift = abs(tail[-1] - tail[0])
        scale = max(abs(tail[-1]), 1e-300)
        # a trending (still converging) sequence has drift ~ total
        # variation; noise-floor bouncing cancels and stays well below it
        plateaued = drift <= max(0.5 * total_variation, 1e-9 * scale)
        if plateaued:
            return best_u, float(best_lam)
    raise EigenSolveError(
        f"generalized eigeniteration did not converge in {max_iter} steps "
        f"(last residual {residual:.3e})", residual=float(residual))


def eigh_2x2(a_small, b_small):
    "Dense generalized eigendecomposition of the projected 2x2 pencil."
    from scipy.linalg import eigh

    return eigh(a_small, b_small)


def _rayleigh(a, b, u):
    return float((np.vdot(u, a @ u) / np.vdot(u, b @ u)).real)


def optimal_beamformer(h_b, h_e_matrix, sigma2, p_max) -> Beamformer:
    """Secrecy-optimal beamformer w* at full power for fixed shape.

    w* = sqrt(P_max) v_max / ||v_max||, phase-rotated so its largest-modulus
    entry is real nonnegative (the rate is phase invariant; the rotation
    makes the output deterministic).
    """
    pair = build_pair(h_b, h_e_matrix, sigma2, p_max)
    w_dir, _ = dominant_gen_eigvec(pair)
    k = int(np.argmax(np.abs(w_dir)))
    pivot = w_dir[k]
    if abs(pivot) > 0:
        w_dir = w_dir * (pivot.conjugate() / abs(pivot))
    w = np.sqrt(p_max) * w_dir / np.linalg.norm(w_dir)
    return Beamformer(w=w, p_max_w=float(p_max))
