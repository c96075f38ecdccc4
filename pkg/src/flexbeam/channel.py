"""Multipath channel synthesis for the deformable array.

A user's channel is built from L plane-wave paths, each with a complex gain
and an (elevation, azimuth) arrival direction:

    h(psi) = sqrt(1/L) * sum_l alpha_l * g(theta_l, phi_l, psi) (.) a(theta_l, phi_l, psi)

where g is the per-element pattern-gain vector, a the array steering vector
and (.) the Hadamard product.  The derivative dh/dpsi follows the product
rule, with da/dpsi = a * (-j k . dr/dpsi).  The imperfect-CSI model blends
the true channel with a psi-independent error vector.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import ArrayLayout, DeformationModel, boresight_offsets, \
    element_positions, position_derivatives
from .radiation import GAIN_DERIVATIVE_CAP, ElementPattern
from .rng import complex_normal

# Default angular sectors for path sampling; restricted to the element
# front half-space so the directional pattern keeps paths illuminated.
THETA_RANGE_DEFAULT = (np.pi / 12, np.pi / 2)
PHI_RANGE_DEFAULT = (-np.pi / 3, np.pi / 3)


@dataclass(frozen=True)
class PathSet:
    """Per-user multipath description.

    alphas: complex gains (L,); thetas/phis: elevation/azimuth radians (L,),
    restricted to theta in (0, pi/2), phi in (-pi/2, pi/2).
    """

    alphas: np.ndarray
    thetas: np.ndarray
    phis: np.ndarray
    distance_m: float

    def __post_init__(self):
        alphas = np.atleast_1d(np.asarray(self.alphas, dtype=complex))
        thetas = np.atleast_1d(np.asarray(self.thetas, dtype=float))
        phis = np.atleast_1d(np.asarray(self.phis, dtype=float))
        if not (len(alphas) == len(thetas) == len(phis)) or len(alphas) < 1:
            raise ValueError("alphas, thetas, phis must share length L >= 1")
        if np.any(thetas <= 0) or np.any(thetas >= np.pi / 2):
            raise ValueError("path elevations must lie in (0, pi/2)")
        if np.any(phis <= -np.pi / 2) or np.any(phis >= np.pi / 2):
            raise ValueError("path azimuths must lie in (-pi/2, pi/2)")
        if not self.distance_m > 0:
            raise ValueError("distance_m must be > 0")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "phis", phis)

    @property
    def n_paths(self) -> int:
        return len(self.alphas)


@dataclass(frozen=True)
class ChannelRealization:
    "Channel vector and its shape derivative at a given psi."

    h: np.ndarray
    dh_dpsi: np.ndarray
    psi_at: float


@dataclass(frozen=True)
class CsiError:
    """Frozen CSI corruption state for one user and one trial.

    xi in [0, 1] is the quality factor (0 = perfect CSI); error_vector is
    drawn once per trial, scaled to the reference channel's norm, and held
    fixed across every psi evaluation (so d error/d psi = 0 exactly).
    """

    xi: float
    error_vector: np.ndarray

    def __post_init__(self):
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError("xi must lie in [0, 1]")


def sample_paths(rng, distance_m, n_paths, g0_lin=1e-4, pathloss_exp=2.8,
                 theta_range=THETA_RANGE_DEFAULT,
                 phi_range=PHI_RANGE_DEFAULT) -> PathSet:
    """Draw a PathSet from the given generator.

    Gains are i.i.d. CN(0, g0 * distance^-pathloss_exp); elevations and
    azimuths are uniform over the supplied sector ranges.  All draws come
    from `rng`, so identical (rng state, parameters) give identical paths.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    if not distance_m > 0:
        raise ValueError("distance_m must be > 0")
    var = g0_lin * distance_m ** (-pathloss_exp)
    alphas = complex_normal(rng, n_paths, var=var)
    thetas = rng.uniform(theta_range[0], theta_range[1], size=n_paths)
    phis = rng.uniform(phi_range[0], phi_range[1], size=n_paths)
    return PathSet(alphas=alphas, thetas=thetas, phis=phis,
                   distance_m=float(distance_m))


def wavevector(theta, phi, wavelength) -> np.ndarray:
    "Far-field wavevector k(phi, theta) = (2 pi / lambda)[st*cp, st*sp, ct]."
    st, ct = np.sin(theta), np.cos(theta)
    return (2.0 * np.pi / wavelength) * np.array(
        [st * np.cos(phi), st * np.sin(phi), ct])


def steering_vector(layout: ArrayLayout, psi, theta, phi,
                    wavelength) -> np.ndarray:
    "Array manifold a_n = exp(-j k . r_n(psi)), shape (N,), unit modulus."
    k = wavevector(theta, phi, wavelength)
    r = element_positions(layout, psi)
    return np.exp(-1j * (r @ k))


def steering_phase_rate(layout: ArrayLayout, psi, theta, phi,
                        wavelength) -> np.ndarray:
    "Generic k . dr_n/dpsi per element, from the geometry derivatives."
    k = wavevector(theta, phi, wavelength)
    dr = position_derivatives(layout, psi)
    return dr @ k


def steering_phase_rate_closed_form(layout: ArrayLayout, psi, theta, phi,
                                    wavelength) -> np.ndarray:
    """Model-specific closed forms of k . dr_n/dpsi.

    Written out per deformation model as an independent expression of the
    same quantity as `steering_phase_rate`; the two must agree to machine
    precision (dual-path check).
    """
    layout.check_feasible(psi)
    d = layout.spacing_m
    two_pi_over_lam = 2.0 * np.pi / wavelength
    st, sp, cp = np.sin(theta), np.sin(phi), np.cos(phi)
    c_h = layout.c_h()
    model = layout.model
    if model is DeformationModel.RIGID:
        return np.zeros(layout.n_total)
    if model is DeformationModel.ROTATE:
        return -two_pi_over_lam * d * c_h * st * np.cos(phi - psi)
    if model is DeformationModel.BEND:
        kp = layout.bend_fraction()
        half_span = (layout.n_h - 1) * d / 2.0
        if abs(psi) >= 1e-4:
            radius = half_span / psi
            dx = -(radius / psi) * (np.cos(kp * psi) - 1.0) \
                - radius * kp * np.sin(kp * psi)
            dy = -(radius / psi) * np.sin(kp * psi) \
                + radius * kp * np.cos(kp * psi)
        else:
            dx = half_span * (-(kp ** 2) / 2.0 + kp ** 4 * psi ** 2 / 8.0)
            dy = half_span * (-(kp ** 3) * psi / 3.0
                              + kp ** 5 * psi ** 3 / 30.0)
        return two_pi_over_lam * (st * cp * dx + st * sp * dy)
    # fold: x uses -|C_h|, y uses C_h
    return two_pi_over_lam * d * (st * cp * (-np.abs(c_h)) * np.cos(psi)
                                  + st * sp * (-c_h) * np.sin(psi))


def steering_derivative(layout: ArrayLayout, psi, theta, phi,
                        wavelength) -> np.ndarray:
    "d a_n / d psi = a_n * (-j k . dr_n/dpsi), shape (N,)."
    a = steering_vector(layout, psi, theta, phi, wavelength)
    return a * (-1j * steering_phase_rate(layout, psi, theta, phi, wavelength))


def _batched_gains(layout, pattern, thetas, phis, offsets, d_offsets):
    "Gain matrix g and derivative dg over (L paths, N elements)."
    n = layout.n_total
    length = len(thetas)
    if pattern.kind == "omni":
        return np.ones((length, n)), np.zeros((length, n))
    kappa = pattern.kappa
    inside = (thetas >= 0.0) & (thetas <= np.pi / 2)
    k_theta = np.where(
        inside, np.sqrt(pattern.norm_constant * np.sin(thetas) ** kappa),
        0.0)[:, None]
    phi_eff = phis[:, None] - offsets[None, :]
    q = np.cos(phi_eff)
    front = q > 0
    qs = np.where(front, q, 1.0)
    g = np.where(front, k_theta * np.power(qs, kappa / 2.0), 0.0)
    dg = np.where(
        front,
        k_theta * (kappa / 2.0) * np.power(qs, kappa / 2.0 - 1.0)
        * np.sin(phi_eff) * d_offsets[None, :],
        0.0,
    )
    return g, np.clip(dg, -GAIN_DERIVATIVE_CAP, GAIN_DERIVATIVE_CAP)


def synthesize_channel(layout: ArrayLayout, pattern: ElementPattern,
                       paths: PathSet, psi, wavelength) -> ChannelRealization:
    """Channel vector h(psi) and derivative dh/dpsi for one user.

    h = sqrt(1/L) sum_l alpha_l (g_l (.) a_l);
    dh/dpsi = sqrt(1/L) sum_l alpha_l (dg_l (.) a_l + g_l (.) da_l).

    Vectorized over paths; agrees with the per-path composition of
    `gain_vector`, `steering_vector` and their derivatives (property-tested).
    """
    offsets, d_offsets = boresight_offsets(layout, psi)
    r = element_positions(layout, psi)
    dr = position_derivatives(layout, psi)
    st, ct = np.sin(paths.thetas), np.cos(paths.thetas)
    k_mat = (2.0 * np.pi / wavelength) * np.column_stack(
        [st * np.cos(paths.phis), st * np.sin(paths.phis), ct])  # (L, 3)
    phase = k_mat @ r.T  # (L, N)
    a = np.exp(-1j * phase)
    kdot = k_mat @ dr.T
    g, dg = _batched_gains(layout, pattern, paths.thetas, paths.phis,
                           offsets, d_offsets)
    weights = paths.alphas[:, None]
    scale = 1.0 / np.sqrt(paths.n_paths)
    h = scale * np.sum(weights * g * a, axis=0)
    dh = scale * np.sum(weights * (dg * a + g * a * (-1j * kdot)), axis=0)
    return ChannelRealization(h=h, dh_dpsi=dh, psi_at=float(psi))


def draw_csi_error(rng, xi, reference: ChannelRealization) -> CsiError:
    """Draw the trial's error vector, scaled so ||e|| = ||h_reference||.

    The scaling is done once, at the reference channel (the trial's initial
    shape); the vector is then held fixed for the whole trial.
    """
    if not 0.0 <= xi <= 1.0:
        raise ValueError("xi must lie in [0, 1]")
    n = len(reference.h)
    e = complex_normal(rng, n)
    norm_e = np.linalg.norm(e)
    target = np.linalg.norm(reference.h)
    if norm_e > 0:
        e = e * (target / norm_e)
    return CsiError(xi=float(xi), error_vector=e)


def apply_csi_error(real: ChannelRealization,
                    err: CsiError) -> ChannelRealization:
    """Estimated channel hhat = sqrt(1-xi^2) h + xi e, with
    dhhat/dpsi = sqrt(1-xi^2) dh/dpsi (the error does not move with psi)."""
    scale = np.sqrt(1.0 - err.xi ** 2)
    return ChannelRealization(
        h=scale * real.h + err.xi * err.error_vector,
        dh_dpsi=scale * real.dh_dpsi,
        psi_at=real.psi_at,
    )


def corrupt_csi(real: ChannelRealization, xi, rng) -> ChannelRealization:
    "Draw a fresh error vector for `real` and return the estimate."
    return apply_csi_error(real, draw_csi_error(rng, xi, real))
