"""Vectorized evaluator for the shape objective F(psi) and its gradient.

`FastObjective` precomputes everything that does not depend on psi (path
constants, the beamformer's per-column partial sums, frozen CSI terms) so
that the projected-gradient loop can evaluate a whole batch of psi values
cheaply.  The maths is identical to the reference path in
`shape_optimizer` / `channel`; the equivalence is property-tested.

Two interchangeable backends compute the batch: a pure-numpy one and a
numba-compiled one (used when numba imports cleanly and the
FLEXBEAM_NO_NUMBA environment variable is unset).
"""

import os

import numpy as np

from .geometry import BEND_EPSILON, DeformationModel
from .radiation import GAIN_DERIVATIVE_CAP

_MODEL_IDS = {
    DeformationModel.RIGID: 0,
    DeformationModel.ROTATE: 1,
    DeformationModel.BEND: 2,
    DeformationModel.FOLD: 3,
}

try:  # pragma: no cover - exercised implicitly by backend selection
    if os.environ.get("FLEXBEAM_NO_NUMBA"):
        raise ImportError("numba disabled via FLEXBEAM_NO_NUMBA")
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


class FastObjective:
    "Callable mapping a psi batch to (F, dF/dpsi) batches."

    def __init__(self, context, grad_cap=1e6):
        layout = context.layout
        self.model_id = _MODEL_IDS[layout.model]
        self.n_h = layout.n_h
        self.n_v = layout.n_v
        self.d = float(layout.spacing_m)
        pattern = context.pattern
        self.is_omni = pattern.kind == "omni"
        self.kappa = float(pattern.kappa)
        self.sigma2 = float(context.sigma2)
        self.grad_cap = float(grad_cap)
        self.psi_lo = float(layout.psi_min_rad)
        self.psi_hi = float(layout.psi_max_rad)

        # per-column constants (1-based i_h -> 0-based j)
        j = np.arange(self.n_h)
        self.cj = (2.0 * (j + 1) - self.n_h - 1) / 2.0
        if self.n_h > 1:
            self.kpj = 2.0 * j / (self.n_h - 1) - 1.0
        else:
            self.kpj = np.zeros(1)
        sj = np.where((j + 1) <= self.n_h / 2.0, -1.0, 1.0)
        if self.n_h % 2 == 1:
            sj[j + 1 == (self.n_h + 1) // 2] = 0.0
        self.sj = sj

        # columns sharing a boresight offset share gains; group them so the
        # kernel computes each distinct (g, dg) once per path
        if layout.model in (DeformationModel.RIGID, DeformationModel.ROTATE):
            keys = np.zeros(self.n_h)
        elif layout.model is DeformationModel.FOLD:
            keys = sj
        else:  # bend: one group per column
            keys = self.kpj
        uniq, inverse = np.unique(keys, return_inverse=True)
        self.col_group = inverse.astype(np.int64)
        first = np.zeros(len(uniq), dtype=np.int64)
        for gi in range(len(uniq)):
            first[gi] = int(np.argmax(inverse == gi))
        self.group_col = first

        # stacked per-path constants, Bob first then each Eve
        users = [context.bob_paths] + list(context.eve_paths)
        self.n_users = len(users)
        counts = [p.n_paths for p in users]
        self.user_start = np.concatenate([[0], np.cumsum(counts)]).astype(
            np.int64)
        alphas = np.concatenate([p.alphas for p in users])
        thetas = np.concatenate([p.thetas for p in users])
        phis = np.concatenate([p.phis for p in users])
        inv_sqrt_l = np.concatenate(
            [np.full(p.n_paths, 1.0 / np.sqrt(p.n_paths)) for p in users])
        self.coefc = np.conj(alphas * inv_sqrt_l).astype(np.complex128)
        self.phi_t = phis.astype(np.float64)
        lam = float(context.wavelength)
        two_pi_over_lam = 2.0 * np.pi / lam
        st, ct = np.sin(thetas), np.cos(thetas)
        self.ktx = (two_pi_over_lam * st * np.cos(phis)).astype(np.float64)
        self.kty = (two_pi_over_lam * st * np.sin(phis)).astype(np.float64)
        ktz = two_pi_over_lam * ct
        if self.is_omni:
            self.ktheta = np.ones(len(alphas))
        else:
            inside = (thetas >= 0.0) & (thetas <= np.pi / 2)
            self.ktheta = np.where(
                inside,
                np.sqrt(pattern.norm_constant * st ** self.kappa),
                0.0,
            )

        # per-path column-collapsed beamformer sums:
        # wtilde[t, j] = sum_v exp(+j ktz z_v) w[(j, v)]
        w = np.asarray(context.w.w, dtype=np.complex128)
        z_v = ((2.0 * (np.arange(self.n_v) + 1) - self.n_v - 1) / 2.0
               * self.d)
        ez_conj = np.exp(1j * ktz[:, None] * z_v[None, :])  # (T, N_v)
        w_grid = w.reshape(self.n_h, self.n_v)
        self.wtilde = np.ascontiguousarray(ez_conj @ w_grid.T)  # (T, N_h)

        # frozen CSI terms: estimate inner product fhat = s*f + xi*(e^H w)
        s_user = np.ones(self.n_users)
        ew_user = np.zeros(self.n_users, dtype=np.complex128)
        if context.csi_errors is not None:
            for i, err in enumerate(context.csi_errors):
                s_user[1 + i] = np.sqrt(1.0 - err.xi ** 2)
                ew_user[1 + i] = err.xi * np.vdot(err.error_vector, w)
        self.s_user = s_user
        self.ew_user = ew_user

    # -- backends ----------------------------------------------------------

    def __call__(self, psis):
        psis = np.atleast_1d(np.asarray(psis, dtype=np.float64))
        out_f = np.empty(len(psis))
        out_df = np.empty(len(psis))
        if _HAVE_NUMBA:
            _eval_batch_jit(
                psis, self.model_id, self.n_h, self.d, self.kappa,
                self.is_omni, self.cj, self.kpj, self.sj, self.col_group,
                self.group_col, self.user_start,
                self.coefc, self.phi_t, self.ktx, self.kty, self.ktheta,
                self.wtilde, self.s_user, self.ew_user, self.sigma2,
                self.grad_cap, GAIN_DERIVATIVE_CAP, out_f, out_df)
        else:
            self._eval_numpy(psis, out_f, out_df)
        return out_f, out_df

    def _column_geometry(self, psis):
        "off, doff, x, y, dx, dy arrays of shape (P, N_h)."
        p = len(psis)
        ps = psis[:, None]
        cj, kpj, sj, d = self.cj, self.kpj, self.sj, self.d
        if self.model_id == 0:  # rigid
            zero = np.zeros((p, self.n_h))
            return (zero, zero, zero,
                    np.broadcast_to(cj * d, (p, self.n_h)).copy(),
                    zero.copy(), zero.copy())
        if self.model_id == 1:  # rotate
            off = np.broadcast_to(ps, (p, self.n_h)).copy()
            doff = np.ones((p, self.n_h))
            x = -cj * d * np.sin(ps)
            y = cj * d * np.cos(ps)
            dx = -cj * d * np.cos(ps)
            dy = -cj * d * np.sin(ps)
            return off, doff, x, y, dx, dy
        if self.model_id == 2:  # bend
            off = kpj * ps
            doff = np.broadcast_to(kpj, (p, self.n_h)).copy()
            half = (self.n_h - 1) * d / 2.0
            x = np.empty((p, self.n_h))
            y = np.empty_like(x)
            dx = np.empty_like(x)
            dy = np.empty_like(x)
            for i, psi in enumerate(psis):
                if abs(psi) >= BEND_EPSILON:
                    radius = half / psi
                    xv = radius * (np.cos(kpj * psi) - 1.0)
                    yv = radius * np.sin(kpj * psi)
                    x[i] = xv
                    y[i] = yv
                    dx[i] = -xv / psi - radius * kpj * np.sin(kpj * psi)
                    dy[i] = -yv / psi + radius * kpj * np.cos(kpj * psi)
                else:
                    x[i] = half * (-(kpj ** 2) * psi / 2.0
                                   + kpj ** 4 * psi ** 3 / 24.0)
                    y[i] = half * kpj * (1.0 - (kpj * psi) ** 2 / 6.0
                                         + (kpj * psi) ** 4 / 120.0)
                    dx[i] = half * (-(kpj ** 2) / 2.0
                                    + kpj ** 4 * psi ** 2 / 8.0)
                    dy[i] = half * (-(kpj ** 3) * psi / 3.0
                                    + kpj ** 5 * psi ** 3 / 30.0)
            return off, doff, x, y, dx, dy
        # fold
        off = sj * ps
        doff = np.broadcast_to(sj, (p, self.n_h)).copy()
        x = -np.abs(cj) * d * np.sin(ps)
        y = cj * d * np.cos(ps)
        dx = -np.abs(cj) * d * np.cos(ps)
        dy = -cj * d * np.sin(ps)
        return off, doff, x, y, dx, dy

    def _eval_numpy(self, psis, out_f, out_df):
        off, doff, x, y, dx, dy = self._column_geometry(psis)
        phi_eff = self.phi_t[None, :, None] - off[:, None, :]
        if self.is_omni:
            g = np.ones_like(phi_eff)
            dg = np.zeros_like(phi_eff)
        else:
            q = np.cos(phi_eff)
            front = q > 0
            qs = np.where(front, q, 1.0)
            kth = self.ktheta[None, :, None]
            g = np.where(front, kth * np.power(qs, self.kappa / 2.0), 0.0)
            dg = np.where(
                front,
                kth * (self.kappa / 2.0)
                * np.power(qs, self.kappa / 2.0 - 1.0)
                * np.sin(phi_eff) * doff[:, None, :],
                0.0,
            )
            dg = np.clip(dg, -GAIN_DERIVATIVE_CAP, GAIN_DERIVATIVE_CAP)
        colphase = (self.ktx[None, :, None] * x[:, None, :]
                    + self.kty[None, :, None] * y[:, None, :])
        kdot = (self.ktx[None, :, None] * dx[:, None, :]
                + self.kty[None, :, None] * dy[:, None, :])
        base = (self.coefc[None, :, None] * self.wtilde[None, :, :]
                * np.exp(1j * colphase))
        f_terms = g * base
        u_terms = (dg + 1j * g * kdot) * base
        for i in range(len(psis)):
            s_e = 0.0
            sd_e = 0.0
            for u in range(self.n_users):
                lo, hi = self.user_start[u], self.user_start[u + 1]
                f_u = f_terms[i, lo:hi, :].sum()
                u_u = u_terms[i, lo:hi, :].sum()
                if u == 0:
                    f_b, u_b = f_u, u_u
                else:
                    f_e = self.s_user[u] * f_u + self.ew_user[u]
                    u_e = self.s_user[u] * u_u
                    s_e += abs(f_e) ** 2
                    sd_e += 2.0 * (u_e * np.conj(f_e)).real
            s_b = abs(f_b) ** 2
            sd_b = 2.0 * (u_b * np.conj(f_b)).real
            den = self.sigma2 + s_e
            out_f[i] = (self.sigma2 + s_b) / den
            grad = (sd_b * den - (self.sigma2 + s_b) * sd_e) / den ** 2
            out_df[i] = min(max(grad, -self.grad_cap), self.grad_cap)


def run_pga_fast(objective: FastObjective, starts, options):
    """Whole projected-gradient loop on the numba backend.

    Mirrors `shape_optimizer.maximize_scalar` step for step (same masking,
    same Adam/AdaGrad arithmetic); returns (psi_path, f_path, n_iters,
    converged).  Falls back to None when numba is unavailable so the caller
    can use the generic loop.
    """
    if not _HAVE_NUMBA:
        return None
    starts = np.asarray(starts, dtype=np.float64)
    n = len(starts)
    max_iter = options.max_iter
    psi_path = np.empty((max_iter + 1, n))
    f_path = np.empty((max_iter + 1, n))
    converged = np.zeros(n, dtype=np.bool_)
    method_id = 0 if options.method == "adam" else 1
    n_iters = _pga_loop_jit(
        starts, objective.psi_lo, objective.psi_hi,
        options.learning_rate, options.beta1, options.beta2,
        options.adam_eps, options.tol_psi_rad, max_iter, method_id,
        objective.model_id, objective.n_h, objective.d, objective.kappa,
        objective.is_omni, objective.cj, objective.kpj, objective.sj,
        objective.col_group, objective.group_col,
        objective.user_start, objective.coefc, objective.phi_t,
        objective.ktx, objective.kty, objective.ktheta, objective.wtilde,
        objective.s_user, objective.ew_user, objective.sigma2,
        objective.grad_cap, GAIN_DERIVATIVE_CAP, psi_path, f_path,
        converged)
    return (psi_path[:n_iters + 1], f_path[:n_iters + 1], n_iters,
            converged)


@njit(cache=True)
def _pga_loop_jit(starts, lo, hi, lr, beta1, beta2, eps, tol, max_iter,
                  method_id, model_id, n_h, d, kappa, is_omni, cj, kpj, sj,
                  col_group, group_col,
                  user_start, coefc, phi_t, ktx, kty, ktheta, wtilde,
                  s_user, ew_user, sigma2, grad_cap, gain_cap,
                  psi_path, f_path, converged):  # pragma: no cover
    n = len(starts)
    psi = starts.copy()
    m = np.zeros(n)
    v = np.zeros(n)
    active = np.ones(n, dtype=np.bool_)
    f_now = np.empty(n)
    g_now = np.empty(n)
    _eval_batch_jit(psi, model_id, n_h, d, kappa, is_omni, cj, kpj, sj,
                    col_group, group_col,
                    user_start, coefc, phi_t, ktx, kty, ktheta, wtilde,
                    s_user, ew_user, sigma2, grad_cap, gain_cap,
                    f_now, g_now)
    for i in range(n):
        psi_path[0, i] = psi[i]
        f_path[0, i] = f_now[i]
    t = 0
    while t < max_iter:
        any_active = False
        for i in range(n):
            if active[i]:
                any_active = True
                break
        if not any_active:
            break
        t += 1
        for i in range(n):
            g = g_now[i] if active[i] else 0.0
            if method_id == 0:
                m[i] = beta1 * m[i] + (1.0 - beta1) * g
                v[i] = beta2 * v[i] + (1.0 - beta2) * g * g
                m_hat = m[i] / (1.0 - beta1 ** t)
                v_hat = v[i] / (1.0 - beta2 ** t)
                step = lr * m_hat / (np.sqrt(v_hat) + eps)
            else:
                v[i] = v[i] + g * g
                step = lr * g / (np.sqrt(v[i]) + eps)
            proposed = psi[i] + step
            if proposed < lo:
                proposed = lo
            elif proposed > hi:
                proposed = hi
            moved = abs(proposed - psi[i])
            if active[i]:
                psi[i] = proposed
                if moved < tol:
                    active[i] = False
        _eval_batch_jit(psi, model_id, n_h, d, kappa, is_omni, cj, kpj, sj,
                        col_group, group_col,
                        user_start, coefc, phi_t, ktx, kty, ktheta, wtilde,
                        s_user, ew_user, sigma2, grad_cap, gain_cap,
                        f_now, g_now)
        for i in range(n):
            psi_path[t, i] = psi[i]
            f_path[t, i] = f_now[i]
    for i in range(n):
        converged[i] = not active[i]
    return t


@njit(cache=True)
def _eval_batch_jit(psis, model_id, n_h, d, kappa, is_omni, cj, kpj, sj,
                    col_group, group_col,
                    user_start, coefc, phi_t, ktx, kty, ktheta, wtilde,
                    s_user, ew_user, sigma2, grad_cap, gain_cap,
                    out_f, out_df):  # pragma: no cover - numpy twin tested
    n_users = len(user_start) - 1
    n_groups = len(group_col)
    off = np.empty(n_h)
    doff = np.empty(n_h)
    x = np.empty(n_h)
    y = np.empty(n_h)
    dx = np.empty(n_h)
    dy = np.empty(n_h)
    g_cache = np.empty(n_groups)
    dg_cache = np.empty(n_groups)
    half = (n_h - 1) * d / 2.0
    half_kappa = kappa / 2.0
    for p in range(len(psis)):
        psi = psis[p]
        sin_psi = np.sin(psi)
        cos_psi = np.cos(psi)
        for j in range(n_h):
            if model_id == 0:  # rigid
                off[j] = 0.0
                doff[j] = 0.0
                x[j] = 0.0
                y[j] = cj[j] * d
                dx[j] = 0.0
                dy[j] = 0.0
            elif model_id == 1:  # rotate
                off[j] = psi
                doff[j] = 1.0
                x[j] = -cj[j] * d * sin_psi
                y[j] = cj[j] * d * cos_psi
                dx[j] = -cj[j] * d * cos_psi
                dy[j] = -cj[j] * d * sin_psi
            elif model_id == 2:  # bend
                kp = kpj[j]
                off[j] = kp * psi
                doff[j] = kp
                if abs(psi) >= 1e-4:
                    radius = half / psi
                    xv = radius * (np.cos(kp * psi) - 1.0)
                    yv = radius * np.sin(kp * psi)
                    x[j] = xv
                    y[j] = yv
                    dx[j] = -xv / psi - radius * kp * np.sin(kp * psi)
                    dy[j] = -yv / psi + radius * kp * np.cos(kp * psi)
                else:
                    x[j] = half * (-(kp ** 2) * psi / 2.0
                                   + kp ** 4 * psi ** 3 / 24.0)
                    y[j] = half * kp * (1.0 - (kp * psi) ** 2 / 6.0
                                        + (kp * psi) ** 4 / 120.0)
                    dx[j] = half * (-(kp ** 2) / 2.0
                                    + kp ** 4 * psi ** 2 / 8.0)
                    dy[j] = half * (-(kp ** 3) * psi / 3.0
                                    + kp ** 5 * psi ** 3 / 30.0)
            else:  # fold
                s = sj[j]
                off[j] = s * psi
                doff[j] = s
                ca = abs(cj[j])
                x[j] = -ca * d * sin_psi
                y[j] = cj[j] * d * cos_psi
                dx[j] = -ca * d * cos_psi
                dy[j] = -cj[j] * d * sin_psi

        f_b = 0.0 + 0.0j
        u_b = 0.0 + 0.0j
        s_e = 0.0
        sd_e = 0.0
        for u in range(n_users):
            f_u = 0.0 + 0.0j
            u_u = 0.0 + 0.0j
            for t in range(user_start[u], user_start[u + 1]):
                if is_omni:
                    for gi in range(n_groups):
                        g_cache[gi] = 1.0
                        dg_cache[gi] = 0.0
                else:
                    # gains are shared by all columns in an offset group
                    for gi in range(n_groups):
                        jc = group_col[gi]
                        phie = phi_t[t] - off[jc]
                        q = np.cos(phie)
                        if q > 0.0 and ktheta[t] > 0.0:
                            qpow = q ** (half_kappa - 1.0)
                            g_cache[gi] = ktheta[t] * qpow * q
                            dg = (ktheta[t] * half_kappa * qpow
                                  * np.sin(phie) * doff[jc])
                            if dg > gain_cap:
                                dg = gain_cap
                            elif dg < -gain_cap:
                                dg = -gain_cap
                            dg_cache[gi] = dg
                        else:
                            g_cache[gi] = 0.0
                            dg_cache[gi] = 0.0
                for j in range(n_h):
                    g = g_cache[col_group[j]]
                    dg = dg_cache[col_group[j]]
                    colphase = ktx[t] * x[j] + kty[t] * y[j]
                    kdot = ktx[t] * dx[j] + kty[t] * dy[j]
                    zfac = (wtilde[t, j] * coefc[t]
                            * (np.cos(colphase) + 1j * np.sin(colphase)))
                    f_u += g * zfac
                    u_u += (dg + 1j * g * kdot) * zfac
            if u == 0:
                f_b = f_u
                u_b = u_u
            else:
                f_e = s_user[u] * f_u + ew_user[u]
                u_e = s_user[u] * u_u
                s_e += abs(f_e) ** 2
                sd_e += 2.0 * (u_e * np.conj(f_e)).real
        s_b = abs(f_b) ** 2
        sd_b = 2.0 * (u_b * np.conj(f_b)).real
        den = sigma2 + s_e
        out_f[p] = (sigma2 + s_b) / den
        grad = (sd_b * den - (sigma2 + s_b) * sd_e) / (den * den)
        if grad > grad_cap:
            grad = grad_cap
        elif grad < -grad_cap:
            grad = -grad_cap
        out_df[p] = grad
