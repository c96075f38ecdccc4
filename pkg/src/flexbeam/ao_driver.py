"""Alternating optimization of the beamformer and the array shape.

One outer iteration updates the beamformer in closed form (dominant
generalized eigenvector at the current shape) and then re-optimizes the
shape by projected gradient ascent warm-started at the current shape, so
the design objective cannot decrease.  Baseline schemes fix one of the two
blocks:

* only_w:    shape frozen at the initial midpoint, beamformer optimized;
* only_psi:  beamformer frozen at maximum-ratio transmission toward Bob's
             initial channel, shape optimized;
* rigid_upa: beamformer-only on the rigid layout of the same dimensions.

When xi > 0 the eavesdropper channels used for every design decision are
the corrupted estimates (error vectors drawn once per run and frozen);
reported secrecy rates always use the true channels.
"""

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .beamformer import optimal_beamformer
from .channel import PathSet, apply_csi_error, draw_csi_error, \
    synthesize_channel
from .geometry import ArrayLayout, DeformationModel
from .radiation import ElementPattern
from .rng import make_rng
from .secrecy import Beamformer, secrecy_rate_colluding
from .shape_optimizer import PgaOptions, ShapeObjectiveContext, pga_maximize

CSI_RNG_STREAM = 1  # keeps CSI-error draws independent of path sampling


class AoError(RuntimeError):
    "A sub-step failed mid-run; carries the trace up to the failure."

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


class Scheme(str, Enum):
    JOINT = "joint"
    ONLY_W = "only_w"
    ONLY_PSI = "only_psi"
    RIGID_UPA = "rigid_upa"

    @classmethod
    def parse(cls, name) -> "Scheme":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "").replace("-", "")
        table = {"joint": cls.JOINT, "onlyw": cls.ONLY_W,
                 "onlypsi": cls.ONLY_PSI, "rigidupa": cls.RIGID_UPA}
        if key not in table:
            raise ValueError(f"unknown scheme {name!r}; expected one of "
                             "Joint, OnlyW, OnlyPsi, RigidUPA")
        return table[key]


@dataclass(frozen=True)
class Scenario:
    "One wiretap instance: geometry, pattern, budgets and channels."

    layout: ArrayLayout
    pattern: ElementPattern
    wavelength_m: float
    p_max_w: float
    sigma2_w: float
    bob_paths: PathSet
    eve_paths: tuple
    xi: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "eve_paths", tuple(self.eve_paths))
        if not self.wavelength_m > 0:
            raise ValueError("wavelength_m must be > 0")
        if not self.p_max_w > 0:
            raise ValueError("p_max_w must be > 0")
        if not self.sigma2_w > 0:
            raise ValueError("sigma2_w must be > 0")
        if len(self.eve_paths) < 1:
            raise ValueError("need at least one eavesdropper")
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError("xi must lie in [0, 1]")


@dataclass(frozen=True)
class AoOptions:
    k_ao: int = 100
    eps_ao: float = 1e-4

    def __post_init__(self):
        if self.k_ao < 1:
            raise ValueError("k_ao must be >= 1")
        if not self.eps_ao > 0:
            raise ValueError("eps_ao must be > 0")


@dataclass(frozen=True)
class AoIteration:
    k: int
    psi: float
    r_s: float                   # true-channel secrecy rate, clamped
    r_s_design: float            # estimated-CSI rate, clamped
    r_s_design_unclamped: float  # drives the stopping rule
    pga_iters: int


@dataclass(frozen=True)
class AoTrace:
    scheme: Scheme
    iterations: tuple
    final_w: Beamformer
    final_psi: float
    converged: bool

    @property
    def outer_iterations(self) -> int:
        return self.iterations[-1].k

    @property
    def final_rate(self) -> float:
        return self.iterations[-1].r_s


def _effective_layout(scenario: Scenario, scheme: Scheme) -> ArrayLayout:
    if scheme is Scheme.RIGID_UPA:
        return ArrayLayout(n_h=scenario.layout.n_h, n_v=scenario.layout.n_v,
                           spacing_m=scenario.layout.spacing_m,
                           model=DeformationModel.RIGID)
    return scenario.layout


def initialize(scenario: Scenario, scheme: Scheme = Scheme.JOINT):
    """Initial (w0, psi0): interval midpoint and full-power MRT toward
    Bob's channel there.  A zero Bob channel falls back to the normalized
    all-ones beamformer with a warning."""
    layout = _effective_layout(scenario, scheme)
    psi0 = 0.5 * (layout.psi_min_rad + layout.psi_max_rad)
    h_b = synthesize_channel(layout, scenario.pattern, scenario.bob_paths,
                             psi0, scenario.wavelength_m).h
    norm = np.linalg.norm(h_b)
    if norm > 0:
        direction = h_b / norm
    else:
        warnings.warn("Bob channel is zero at the initial shape; "
                      "falling back to the all-ones beamformer")
        direction = np.ones(layout.n_total, dtype=complex) \
            / np.sqrt(layout.n_total)
    w0 = Beamformer(w=np.sqrt(scenario.p_max_w) * direction,
                    p_max_w=scenario.p_max_w)
    return w0, psi0


def run_ao(scenario: Scenario, scheme=Scheme.JOINT,
           ao_options: Optional[AoOptions] = None,
           pga_options: Optional[PgaOptions] = None) -> AoTrace:
    "Run Algorithm-style alternating optimization for the given scheme."
    scheme = Scheme.parse(scheme)
    if ao_options is None:
        ao_options = AoOptions()
    if pga_options is None:
        pga_options = PgaOptions()
    layout = _effective_layout(scenario, scheme)
    pattern = scenario.pattern
    lam = scenario.wavelength_m
    sigma2 = scenario.sigma2_w

    w, psi = initialize(scenario, scheme)

    # frozen CSI errors, one per Eve, drawn once per run at the initial shape
    csi_errors = None
    if scenario.xi > 0.0:
        rng = make_rng(scenario.seed, stream=CSI_RNG_STREAM)
        csi_errors = tuple(
            draw_csi_error(rng, scenario.xi,
                           synthesize_channel(layout, pattern, p, psi, lam))
            for p in scenario.eve_paths)

    def eve_design_channels(psi_val):
        chans = [synthesize_channel(layout, pattern, p, psi_val, lam)
                 for p in scenario.eve_paths]
        if csi_errors is not None:
            chans = [apply_csi_error(ch, err)
                     for ch, err in zip(chans, csi_errors)]
        return chans

    def rates(w_val, psi_val):
        "True (reported) and design (estimated-CSI) secrecy results."
        h_b = synthesize_channel(layout, pattern, scenario.bob_paths,
                                 psi_val, lam).h
        true_cols = np.column_stack(
            [synthesize_channel(layout, pattern, p, psi_val, lam).h
             for p in scenario.eve_paths])
        true = secrecy_rate_colluding(h_b, true_cols, w_val, sigma2)
        if csi_errors is None:
            return true, true
        est_cols = np.column_stack(
            [ch.h for ch in eve_design_channels(psi_val)])
        design = secrecy_rate_colluding(h_b, est_cols, w_val, sigma2)
        return true, design

    true0, design0 = rates(w, psi)
    iterations = [AoIteration(k=0, psi=psi, r_s=true0.r_s,
                              r_s_design=design0.r_s,
                              r_s_design_unclamped=design0.r_s_unclamped,
                              pga_iters=0)]
    prev = design0.r_s_unclamped
    converged = False
    for k in range(1, ao_options.k_ao + 1):
        try:
            if scheme in (Scheme.JOINT, Scheme.ONLY_W, Scheme.RIGID_UPA):
                h_b = synthesize_channel(layout, pattern,
                                         scenario.bob_paths, psi, lam).h
                est = np.column_stack(
                    [ch.h for ch in eve_design_channels(psi)])
                w = optimal_beamformer(h_b, est, sigma2, scenario.p_max_w)
            pga_iters = 0
            if scheme in (Scheme.JOINT, Scheme.ONLY_PSI):
                ctx = ShapeObjectiveContext(
                    w=w, bob_paths=scenario.bob_paths,
                    eve_paths=scenario.eve_paths, layout=layout,
                    pattern=pattern, sigma2=sigma2, wavelength=lam,
                    csi_errors=csi_errors)
                res = pga_maximize(ctx, pga_options, extra_starts=(psi,))
                psi = res.psi_star
                pga_iters = res.n_iters
            true_r, design_r = rates(w, psi)
        except Exception as exc:
            partial = AoTrace(scheme=scheme, iterations=tuple(iterations),
                              final_w=w, final_psi=psi, converged=False)
            raise AoError(f"iteration {k} failed: {exc}", partial) from exc
        iterations.append(AoIteration(
            k=k, psi=psi, r_s=true_r.r_s, r_s_design=design_r.r_s,
            r_s_design_unclamped=design_r.r_s_unclamped,
            pga_iters=pga_iters))
        current = design_r.r_s_unclamped
        if scheme in (Scheme.ONLY_W, Scheme.RIGID_UPA):
            # one exact beamformer update is the fixed point for fixed psi
            converged = True
            break
        denom = max(abs(current), 1e-300)
        if abs(current - prev) / denom < ao_options.eps_ao:
            converged = True
            break
        prev = current
    return AoTrace(scheme=scheme, iterations=tuple(iterations), final_w=w,
                   final_psi=psi, converged=converged)
