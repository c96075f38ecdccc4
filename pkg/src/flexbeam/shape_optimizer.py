"""Shape-parameter optimization for a fixed beamformer.

With the beamformer held fixed, the unclamped secrecy rate is log2 of

    F(psi) = (sigma^2 + S_B(psi)) / (sigma^2 + S_E(psi)),

with S_B = |h_B(psi)^H w|^2 and S_E = sum_i |h_{E,i}(psi)^H w|^2 (the
colluding sum; M = 1 reduces to the single-Eve case).  F is maximized over
the feasible interval by Adam-stepped projected gradient ascent from
several deterministic starts; the best point visited by any start is
returned, which makes the result no worse than any start point even though
individual Adam trajectories are not monotone.

`objective_F` / `gradient_F` are the straightforward reference
implementations built on `channel.synthesize_channel`.
`gradient_F_closed_form` re-derives the same gradient from per-model
consolidated expressions and serves as an independent cross-check.
`pga_maximize` runs on a vectorized fast path that is property-tested
against the reference implementation.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _fastobj
from .channel import PathSet, apply_csi_error, synthesize_channel
from .geometry import ArrayLayout, DeformationModel
from .radiation import GAIN_DERIVATIVE_CAP, ElementPattern
from .secrecy import Beamformer


@dataclass(frozen=True)
class PgaOptions:
    "Projected-gradient-ascent settings (Adam step rule by default)."

    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    max_iter: int = 100
    tol_psi_rad: float = 1e-3 * np.pi / 180.0
    n_starts: int = 4
    grad_cap: float = 1e6
    method: str = "adam"  # "adam" or "adagrad"
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        for name in ("beta1", "beta2"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.max_iter < 1 or self.n_starts < 1:
            raise ValueError("max_iter and n_starts must be >= 1")
        if not self.tol_psi_rad > 0:
            raise ValueError("tol_psi_rad must be > 0")
        if not self.grad_cap > 0:
            raise ValueError("grad_cap must be > 0")
        if self.method not in ("adam", "adagrad"):
            raise ValueError("method must be 'adam' or 'adagrad'")


@dataclass(frozen=True)
class ShapeObjectiveContext:
    """Everything F(psi) depends on besides psi.

    All channel evaluations during one optimization reuse the same path
    sets and, when CSI error is configured, the same frozen per-Eve error
    vectors (csi_errors, one entry per eavesdropper).
    """

    w: Beamformer
    bob_paths: PathSet
    eve_paths: tuple
    layout: ArrayLayout
    pattern: ElementPattern
    sigma2: float
    wavelength: float
    csi_errors: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "eve_paths", tuple(self.eve_paths))
        if len(self.eve_paths) < 1:
            raise ValueError("need at least one eavesdropper PathSet")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be > 0")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be > 0")
        if self.csi_errors is not None:
            errs = tuple(self.csi_errors)
            if len(errs) != len(self.eve_paths):
                raise ValueError("need one CsiError per eavesdropper")
            object.__setattr__(self, "csi_errors", errs)


@dataclass(frozen=True)
class PgaResult:
    "Outcome of one multi-start projected gradient ascent."

    psi_star: float
    f_star: float
    start_index: int
    n_iters: int
    starts: np.ndarray
    psi_path: np.ndarray  # (n_iters + 1, n_starts), projected iterates
    f_path: np.ndarray
    converged: np.ndarray  # per-start flag


def _design_eve_channels(context: ShapeObjectiveContext, psi):
    "Eve channel realizations as seen by the optimizer (estimates if xi>0)."
    chans = [synthesize_channel(context.layout, context.pattern, p, psi,
                                context.wavelength)
             for p in context.eve_paths]
    if context.csi_errors is not None:
        chans = [apply_csi_error(ch, err)
                 for ch, err in zip(chans, context.csi_errors)]
    return chans


def _powers(context: ShapeObjectiveContext, psi):
    "S_B, S_E and their psi-derivatives at psi (reference path)."
    w = context.w.w
    hb = synthesize_channel(context.layout, context.pattern,
                            context.bob_paths, psi, context.wavelength)
    fb = np.vdot(hb.h, w)
    ub = np.vdot(hb.dh_dpsi, w)
    s_b = abs(fb) ** 2
    sd_b = 2.0 * (ub * np.conj(fb)).real
    s_e = 0.0
    sd_e = 0.0
    for ch in _design_eve_channels(context, psi):
        fe = np.vdot(ch.h, w)
        ue = np.vdot(ch.dh_dpsi, w)
        s_e += abs(fe) ** 2
        sd_e += 2.0 * (ue * np.conj(fe)).real
    return s_b, sd_b, s_e, sd_e


def objective_F(context: ShapeObjectiveContext, psi) -> float:
    "Fractional objective F(psi) > 0 from fresh channel synthesis."
    s_b, _, s_e, _ = _powers(context, psi)
    return float((context.sigma2 + s_b) / (context.sigma2 + s_e))


def gradient_F(context: ShapeObjectiveContext, psi,
               grad_cap: float = 1e6) -> float:
    "dF/dpsi by the quotient rule, capped at +-grad_cap."
    s_b, sd_b, s_e, sd_e = _powers(context, psi)
    den = context.sigma2 + s_e
    grad = (sd_b * den - (context.sigma2 + s_b) * sd_e) / den ** 2
    return float(np.clip(grad, -grad_cap, grad_cap))


# ---------------------------------------------------------------------------
# Consolidated per-model closed forms (independent gradient path)
# ---------------------------------------------------------------------------

def _closed_form_channel(layout: ArrayLayout, pattern: ElementPattern,
                         paths: PathSet, psi, wavelength):
    """h and dh/dpsi from the per-model consolidated expressions.

    Deliberately re-derived from scratch (explicit trig per model, no calls
    into `geometry`/`radiation`) so it can serve as an independent check of
    the assembled chain-rule gradient.
    """
    n_h, n_v, d = layout.n_h, layout.n_v, layout.spacing_m
    n = n_h * n_v
    i_h = np.arange(n) // n_v + 1
    i_v = np.arange(n) % n_v + 1
    c_h = (2 * i_h - n_h - 1) / 2.0
    c_v = (2 * i_v - n_v - 1) / 2.0
    if n_h > 1:
        kp = 2.0 * (i_h - 1) / (n_h - 1) - 1.0
    else:
        kp = np.zeros(n)
    s_fold = np.where(i_h <= n_h / 2.0, -1.0, 1.0)
    if n_h % 2 == 1:
        s_fold[i_h == (n_h + 1) // 2] = 0.0

    model = layout.model
    two_pi_over_lam = 2.0 * np.pi / wavelength
    if model is DeformationModel.ROTATE:
        doff = np.ones(n)
        off = np.full(n, float(psi))
        x = -c_h * d * np.sin(psi)
        y = c_h * d * np.cos(psi)
        dx = -c_h * d * np.cos(psi)
        dy = -c_h * d * np.sin(psi)
    elif model is DeformationModel.BEND:
        doff = kp
        off = kp * psi
        half = (n_h - 1) * d / 2.0
        if abs(psi) >= 1e-4:
            radius = half / psi
            x = radius * (np.cos(kp * psi) - 1.0)
            y = radius * np.sin(kp * psi)
            dx = -x / psi - radius * kp * np.sin(kp * psi)
            dy = -y / psi + radius * kp * np.cos(kp * psi)
        else:
            x = half * (-(kp ** 2) * psi / 2.0 + kp ** 4 * psi ** 3 / 24.0)
            y = half * kp * (1.0 - (kp * psi) ** 2 / 6.0
                             + (kp * psi) ** 4 / 120.0)
            dx = half * (-(kp ** 2) / 2.0 + kp ** 4 * psi ** 2 / 8.0)
            dy = half * (-(kp ** 3) * psi / 3.0 + kp ** 5 * psi ** 3 / 30.0)
    elif model is DeformationModel.FOLD:
        doff = s_fold
        off = s_fold * psi
        x = -np.abs(c_h) * d * np.sin(psi)
        y = c_h * d * np.cos(psi)
        dx = -np.abs(c_h) * d * np.cos(psi)
        dy = -c_h * d * np.sin(psi)
    else:  # rigid
        doff = np.zeros(n)
        off = np.zeros(n)
        x = np.zeros(n)
        y = c_h * d
        dx = np.zeros(n)
        dy = np.zeros(n)
    z = c_v * d

    h = np.zeros(n, dtype=complex)
    dh = np.zeros(n, dtype=complex)
    omni = pattern.kind == "omni"
    kappa = pattern.kappa
    big_g = pattern.norm_constant
    for alpha, theta, phi in zip(paths.alphas, paths.thetas, paths.phis):
        st, ct = np.sin(theta), np.cos(theta)
        kx = two_pi_over_lam * st * np.cos(phi)
        ky = two_pi_over_lam * st * np.sin(phi)
        kz = two_pi_over_lam * ct
        phase = kx * x + ky * y + kz * z
        a = np.exp(-1j * phase)
        kdot = kx * dx + ky * dy
        if omni:
            g = np.ones(n)
            dg = np.zeros(n)
        else:
            if 0.0 <= theta <= np.pi / 2:
                k_theta = np.sqrt(big_g * st ** kappa)
            else:
                k_theta = 0.0
            phi_eff = phi - off
            q = np.cos(phi_eff)
            front = q > 0
            qs = np.where(front, q, 1.0)
            g = np.where(front, k_theta * np.power(qs, kappa / 2.0), 0.0)
            dg = np.where(
                front,
                k_theta * (kappa / 2.0) * np.power(qs, kappa / 2.0 - 1.0)
                * np.sin(phi_eff) * doff,
                0.0,
            )
            dg = np.clip(dg, -GAIN_DERIVATIVE_CAP, GAIN_DERIVATIVE_CAP)
        h += alpha * g * a
        dh += alpha * (dg + g * (-1j * kdot)) * a
    scale = 1.0 / np.sqrt(paths.n_paths)
    return scale * h, scale * dh


def gradient_F_closed_form(context: ShapeObjectiveContext, psi,
                           grad_cap: float = 1e6) -> float:
    "dF/dpsi assembled from the per-model consolidated channel expressions."
    w = context.w.w
    hb, dhb = _closed_form_channel(context.layout, context.pattern,
                                   context.bob_paths, psi,
                                   context.wavelength)
    fb = np.vdot(hb, w)
    ub = np.vdot(dhb, w)
    s_b = abs(fb) ** 2
    sd_b = 2.0 * (ub * np.conj(fb)).real
    s_e = 0.0
    sd_e = 0.0
    for i, paths in enumerate(context.eve_paths):
        he, dhe = _closed_form_channel(context.layout, context.pattern,
                                       paths, psi, context.wavelength)
        if context.csi_errors is not None:
            err = context.csi_errors[i]
            scale = np.sqrt(1.0 - err.xi ** 2)
            he = scale * he + err.xi * err.error_vector
            dhe = scale * dhe
        fe = np.vdot(he, w)
        ue = np.vdot(dhe, w)
        s_e += abs(fe) ** 2
        sd_e += 2.0 * (ue * np.conj(fe)).real
    den = context.sigma2 + s_e
    grad = (sd_b * den - (context.sigma2 + s_b) * sd_e) / den ** 2
    return float(np.clip(grad, -grad_cap, grad_cap))


# ---------------------------------------------------------------------------
# Projected gradient ascent
# ---------------------------------------------------------------------------

def pga_start_points(psi_min, psi_max, n_starts,
                     extra_starts=()) -> np.ndarray:
    """Deterministic start set: n_starts points evenly spaced over the
    interval, the interval midpoint (appended when n_starts is even), and
    any warm starts handed in by the caller."""
    starts = list(np.linspace(psi_min, psi_max, n_starts)) \
        if n_starts > 1 else [0.5 * (psi_min + psi_max)]
    mid = 0.5 * (psi_min + psi_max)
    if not any(abs(s - mid) < 1e-15 for s in starts):
        starts.append(mid)
    for s in extra_starts:
        s = min(max(float(s), psi_min), psi_max)
        if not any(abs(s - t) < 1e-15 for t in starts):
            starts.append(s)
    return np.asarray(starts, dtype=float)


def maximize_scalar(f_df, psi_min, psi_max, options: PgaOptions,
                    extra_starts=()) -> PgaResult:
    """Multi-start projected ascent of a scalar objective on an interval.

    f_df maps a psi vector to (F vector, dF/dpsi vector); it is the test
    hook used to inject synthetic objectives.  Every iterate is projected
    into [psi_min, psi_max]; a start stops once its projected step falls
    below tol_psi_rad.  The returned point is the best iterate visited by
    any start (including the start points themselves), so the result is
    never worse than any start value.
    """
    starts = pga_start_points(psi_min, psi_max, options.n_starts,
                              extra_starts)
    n = len(starts)
    psi = starts.copy()
    m = np.zeros(n)
    v = np.zeros(n)
    active = np.ones(n, dtype=bool)

    f_now, g_now = f_df(psi)
    best_f = np.asarray(f_now, dtype=float).copy()
    best_psi = psi.copy()
    psi_path = [psi.copy()]
    f_path = [best_f.copy()]

    t = 0
    while t < options.max_iter and np.any(active):
        t += 1
        g = np.where(active, g_now, 0.0)
        if options.method == "adam":
            m = options.beta1 * m + (1.0 - options.beta1) * g
            v = options.beta2 * v + (1.0 - options.beta2) * g ** 2
            m_hat = m / (1.0 - options.beta1 ** t)
            v_hat = v / (1.0 - options.beta2 ** t)
            step = options.learning_rate * m_hat / (np.sqrt(v_hat)
                                                    + options.adam_eps)
        else:  # adagrad
            v = v + g ** 2
            step = options.learning_rate * g / (np.sqrt(v)
                                                + options.adam_eps)
        proposed = np.clip(psi + step, psi_min, psi_max)
        moved = np.abs(proposed - psi)
        psi = np.where(active, proposed, psi)
        newly_done = active & (moved < options.tol_psi_rad)
        active = active & ~newly_done

        f_now, g_now = f_df(psi)
        f_now = np.asarray(f_now, dtype=float)
        better = f_now > best_f
        best_f = np.where(better, f_now, best_f)
        best_psi = np.where(better, psi, best_psi)
        psi_path.append(psi.copy())
        f_path.append(f_now.copy())

    k = int(np.argmax(best_f))
    return PgaResult(
        psi_star=float(best_psi[k]),
        f_star=float(best_f[k]),
        start_index=k,
        n_iters=t,
        starts=starts,
        psi_path=np.asarray(psi_path),
        f_path=np.asarray(f_path),
        converged=~active,
    )


def pga_maximize(context: ShapeObjectiveContext, options: PgaOptions = None,
                 extra_starts: Sequence[float] = ()) -> PgaResult:
    """Maximize F(psi) over the layout's feasible interval.

    Runs the projected ascent on the vectorized objective evaluator;
    returns (psi_star, F_star, trace) with F(psi_star) no smaller than F
    at any start point (midpoint and warm starts included).
    """
    if options is None:
        options = PgaOptions()
    evaluator = _fastobj.FastObjective(context, grad_cap=options.grad_cap)
    lo = context.layout.psi_min_rad
    hi = context.layout.psi_max_rad
    starts = pga_start_points(lo, hi, options.n_starts, extra_starts)
    fast = _fastobj.run_pga_fast(evaluator, starts, options)
    if fast is None:
        return maximize_scalar(evaluator, lo, hi, options,
                               extra_starts=extra_starts)
    psi_path, f_path, n_iters, converged = fast
    # best iterate visited by each start, then best start overall
    best_rows = np.argmax(f_path, axis=0)
    cols = np.arange(len(starts))
    best_f = f_path[best_rows, cols]
    best_psi = psi_path[best_rows, cols]
    k = int(np.argmax(best_f))
    return PgaResult(
        psi_star=float(best_psi[k]),
        f_star=float(best_f[k]),
        start_index=k,
        n_iters=int(n_iters),
        starts=starts,
        psi_path=psi_path,
        f_path=f_path,
        converged=converged,
    )
