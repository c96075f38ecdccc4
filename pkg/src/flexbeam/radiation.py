"""Element radiation patterns and the vectorized pattern-gain vector.

The directional element power pattern is

    G_E(theta, phi) = 2(kappa + 1) sin^kappa(theta) cos^kappa(phi)

on the front half-space (theta in [0, pi/2] and cos(phi) > 0) and zero
elsewhere; the amplitude pattern is its square root.  The cos(phi) <= 0
clamp keeps the power nonnegative for every kappa and matches the angular
region where the shape gradient is valid.  Deformation enters through the
per-element boresight offsets from `geometry`: element n sees the wave at
effective azimuth phi - offset[n].
"""

from dataclasses import dataclass

import numpy as np

from .geometry import ArrayLayout, boresight_offsets

# Per-element gain derivatives are clamped to this magnitude: for
# kappa < 2 the factor cos^(kappa/2 - 1) diverges at the pattern boundary.
GAIN_DERIVATIVE_CAP = 1e6


@dataclass(frozen=True)
class ElementPattern:
    """Element pattern: omnidirectional, or directional with sharpness kappa."""

    kind: str = "directional"  # "omni" or "directional"
    kappa: float = 4.0

    def __post_init__(self):
        if self.kind not in ("omni", "directional"):
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        if self.kind == "directional" and self.kappa < 0:
            raise ValueError("kappa must be >= 0")

    @property
    def norm_constant(self) -> float:
        "Peak power gain G = 2(kappa + 1)."
        return 2.0 * (self.kappa + 1.0)

    @classmethod
    def omni(cls) -> "ElementPattern":
        return cls(kind="omni", kappa=0.0)

    @classmethod
    def directional(cls, kappa: float) -> "ElementPattern":
        return cls(kind="directional", kappa=float(kappa))


def element_power_gain(pattern: ElementPattern, theta, phi):
    """Radiation power gain G_E(theta, phi); total function of direction.

    Omni returns 1 everywhere.  Directional returns
    G sin^kappa(theta) cos^kappa(phi) inside the front half-space and 0
    where theta > pi/2 or cos(phi) <= 0.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if pattern.kind == "omni":
        return np.ones(np.broadcast(theta, phi).shape)[()]
    st = np.sin(theta)
    cp = np.cos(phi)
    front = (theta >= 0) & (theta <= np.pi / 2) & (cp > 0) & (st >= 0)
    g = np.where(
        front,
        pattern.norm_constant
        * np.power(np.where(front, st, 1.0), pattern.kappa)
        * np.power(np.where(front, cp, 1.0), pattern.kappa),
        0.0,
    )
    return g[()]


def element_amplitude(pattern: ElementPattern, theta, phi):
    "Amplitude pattern A_E = sqrt(G_E); 0 wherever the power gain is 0."
    return np.sqrt(element_power_gain(pattern, theta, phi))


def gain_vector(layout: ArrayLayout, pattern: ElementPattern, theta, phi,
                psi) -> np.ndarray:
    """Pattern-gain vector g(theta, phi, psi), shape (N,), flat order.

    g_n = A_E(theta, phi - offset[n]) with the model's boresight offsets.
    Entries are real and nonnegative (returned as float array).
    """
    offsets, _ = boresight_offsets(layout, psi)
    return element_amplitude(pattern, theta, phi - offsets)


def gain_vector_derivative(layout: ArrayLayout, pattern: ElementPattern,
                           theta, phi, psi,
                           cap: float = GAIN_DERIVATIVE_CAP) -> np.ndarray:
    """d g_n / d psi, shape (N,), real.

    With phi'_n = phi - offset[n] and K_theta = sqrt(G sin^kappa theta),

        dg_n/dpsi = K_theta (kappa/2) cos^(kappa/2 - 1)(phi'_n)
                    sin(phi'_n) * d offset[n]/d psi,

    zero where cos(phi'_n) <= 0 or theta is outside [0, pi/2], and zero for
    omnidirectional elements.  Magnitudes are clamped to `cap` (the factor
    cos^(kappa/2 - 1) diverges at the boundary when kappa < 2).
    """
    offsets, d_offsets = boresight_offsets(layout, psi)
    n = layout.n_total
    if pattern.kind == "omni":
        return np.zeros(n)
    theta = float(theta)
    if not (0.0 <= theta <= np.pi / 2):
        return np.zeros(n)
    kappa = pattern.kappa
    k_theta = np.sqrt(pattern.norm_constant * np.sin(theta) ** kappa)
    phi_eff = phi - offsets
    q = np.cos(phi_eff)
    front = q > 0
    qs = np.where(front, q, 1.0)
    dg = np.where(
        front,
        k_theta * (kappa / 2.0) * np.power(qs, kappa / 2.0 - 1.0)
        * np.sin(phi_eff) * d_offsets,
        0.0,
    )
    return np.clip(dg, -cap, cap)
