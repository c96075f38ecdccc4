"""Flexible-array geometry.

Per-element 3D positions, effective boresight azimuth offsets, and their
derivatives with respect to the scalar shape parameter psi, for the rigid,
rotate, bend and fold deformation models.  The array is an N_h x N_v panel
with uniform spacing d; elements are flat-indexed in column-stacked order,
horizontal index major:

    flat = (i_h - 1) * N_v + (i_v - 1),   i_h in [1, N_h], i_v in [1, N_v].

All angles are radians.  Everything here is a pure function of its inputs.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

# Below this |psi| the bend model is evaluated via its flat-limit series to
# avoid the 1/psi blow-up in the curvature radius R = (N_h-1)d/(2 psi).
BEND_EPSILON = 1e-4

DEFAULT_INTERVALS = {
    "rigid": (-np.pi / 3, np.pi / 3),
    "rotate": (-np.pi / 3, np.pi / 3),
    "bend": (np.pi / 180, np.pi / 2),
    "fold": (-np.pi / 3, np.pi / 3),
}


class DeformationModel(str, Enum):
    RIGID = "rigid"
    ROTATE = "rotate"
    BEND = "bend"
    FOLD = "fold"

    @classmethod
    def parse(cls, name) -> "DeformationModel":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown deformation model {name!r}; expected one of "
                f"{[m.value for m in cls]}"
            ) from None


class FeasibilityError(ValueError):
    "Raised when psi falls outside the layout's feasible interval."


@dataclass(frozen=True)
class ElementIndex:
    """Grid index (i_h, i_v), both 1-based, with the flat position."""

    i_h: int
    i_v: int
    flat: int

    @classmethod
    def from_grid(cls, layout: "ArrayLayout", i_h: int, i_v: int) -> "ElementIndex":
        if not (1 <= i_h <= layout.n_h and 1 <= i_v <= layout.n_v):
            raise ValueError(f"grid index ({i_h}, {i_v}) outside "
                             f"[1,{layout.n_h}] x [1,{layout.n_v}]")
        return cls(i_h, i_v, (i_h - 1) * layout.n_v + (i_v - 1))

    @classmethod
    def from_flat(cls, layout: "ArrayLayout", flat: int) -> "ElementIndex":
        if not 0 <= flat < layout.n_total:
            raise ValueError(f"flat index {flat} outside [0, {layout.n_total - 1}]")
        return cls(flat // layout.n_v + 1, flat % layout.n_v + 1, flat)


@dataclass(frozen=True)
class ArrayLayout:
    """Panel dimensions, spacing, deformation model and feasible psi interval.

    Parameters
    ----------
    n_h, n_v : int
        Horizontal / vertical element counts (N = n_h * n_v).
    spacing_m : float
        Inter-element spacing d in meters.
    model : DeformationModel or str
        One of rigid / rotate / bend / fold.
    psi_min_rad, psi_max_rad : float, optional
        Feasible shape interval; model-specific defaults are applied when
        omitted (rotate/fold/rigid: +-60 deg; bend: [1 deg, 90 deg]).
    """

    n_h: int
    n_v: int
    spacing_m: float
    model: DeformationModel
    psi_min_rad: float = None
    psi_max_rad: float = None

    def __post_init__(self):
        object.__setattr__(self, "model", DeformationModel.parse(self.model))
        if self.n_h < 1 or self.n_v < 1:
            raise ValueError("n_h and n_v must be >= 1")
        if not self.spacing_m > 0:
            raise ValueError("spacing_m must be > 0")
        lo, hi = DEFAULT_INTERVALS[self.model.value]
        if self.psi_min_rad is None:
            object.__setattr__(self, "psi_min_rad", lo)
        if self.psi_max_rad is None:
            object.__setattr__(self, "psi_max_rad", hi)
        if self.psi_min_rad > self.psi_max_rad:
            raise ValueError("psi_min_rad must not exceed psi_max_rad")
        if self.model is DeformationModel.BEND and not self.psi_min_rad > 0:
            raise ValueError("bend model requires psi_min_rad > 0 "
                             "(curvature radius is singular at psi = 0)")

    @property
    def n_total(self) -> int:
        return self.n_h * self.n_v

    # --- per-element index helpers, flat (column-stacked) order ----------

    def i_h_array(self) -> np.ndarray:
        "1-based horizontal index per flat element."
        return np.arange(self.n_total) // self.n_v + 1

    def i_v_array(self) -> np.ndarray:
        "1-based vertical index per flat element."
        return np.arange(self.n_total) % self.n_v + 1

    def c_h(self) -> np.ndarray:
        "Horizontal half-offset coefficient C_h = (2 i_h - N_h - 1)/2."
        return (2 * self.i_h_array() - self.n_h - 1) / 2.0

    def c_v(self) -> np.ndarray:
        "Vertical half-offset coefficient C_v = (2 i_v - N_v - 1)/2."
        return (2 * self.i_v_array() - self.n_v - 1) / 2.0

    def bend_fraction(self) -> np.ndarray:
        "Bend tilt fraction K' = 2(i_h - 1)/(N_h - 1) - 1, in [-1, 1]."
        if self.n_h == 1:
            return np.zeros(self.n_total)
        return 2.0 * (self.i_h_array() - 1) / (self.n_h - 1) - 1.0

    def fold_sign(self) -> np.ndarray:
        """Fold half-panel sign per element: -1 on the first half
        (i_h <= N_h/2), +1 on the second, 0 for the central column of an
        odd-width panel (it stays undeformed)."""
        i_h = self.i_h_array()
        s = np.where(i_h <= self.n_h / 2.0, -1.0, 1.0)
        if self.n_h % 2 == 1:
            s[i_h == (self.n_h + 1) // 2] = 0.0
        return s

    def check_feasible(self, psi: float) -> None:
        if psi < self.psi_min_rad:
            raise FeasibilityError(
                f"psi = {psi} below psi_min_rad = {self.psi_min_rad}")
        if psi > self.psi_max_rad:
            raise FeasibilityError(
                f"psi = {psi} above psi_max_rad = {self.psi_max_rad}")


def _bend_xy(layout: ArrayLayout, psi: float):
    "Bend-model (x, y) per element, series-stabilized near psi = 0."
    kp = layout.bend_fraction()
    half_span = (layout.n_h - 1) * layout.spacing_m / 2.0  # R * psi
    if abs(psi) >= BEND_EPSILON:
        radius = half_span / psi
        x = radius * (np.cos(kp * psi) - 1.0)
        y = radius * np.sin(kp * psi)
    else:
        # flat-limit series: x -> 0, y -> C_h d  (half_span * kp == C_h d)
        x = half_span * (-(kp ** 2) * psi / 2.0 + kp ** 4 * psi ** 3 / 24.0)
        y = half_span * kp * (1.0 - (kp * psi) ** 2 / 6.0
                              + (kp * psi) ** 4 / 120.0)
    return x, y


def _bend_dxy(layout: ArrayLayout, psi: float):
    "Bend-model (dx/dpsi, dy/dpsi) per element, series-stabilized."
    kp = layout.bend_fraction()
    half_span = (layout.n_h - 1) * layout.spacing_m / 2.0
    if abs(psi) >= BEND_EPSILON:
        radius = half_span / psi
        x = radius * (np.cos(kp * psi) - 1.0)
        y = radius * np.sin(kp * psi)
        dx = -x / psi - radius * kp * np.sin(kp * psi)
        dy = -y / psi + radius * kp * np.cos(kp * psi)
    else:
        dx = half_span * (-(kp ** 2) / 2.0 + kp ** 4 * psi ** 2 / 8.0)
        dy = half_span * (-(kp ** 3) * psi / 3.0 + kp ** 5 * psi ** 3 / 30.0)
    return dx, dy


def element_positions(layout: ArrayLayout, psi: float) -> np.ndarray:
    """Per-element positions r_n(psi), shape (N, 3), meters, flat order.

    Rigid evaluates the rotate formula at psi = 0 regardless of psi.
    """
    layout.check_feasible(psi)
    d = layout.spacing_m
    c_h = layout.c_h()
    z = layout.c_v() * d
    model = layout.model
    if model is DeformationModel.RIGID:
        x = np.zeros_like(c_h)
        y = c_h * d
    elif model is DeformationModel.ROTATE:
        x = -c_h * d * np.sin(psi)
        y = c_h * d * np.cos(psi)
    elif model is DeformationModel.BEND:
        x, y = _bend_xy(layout, psi)
    else:  # fold
        x = -np.abs(c_h) * d * np.sin(psi)
        y = c_h * d * np.cos(psi)
    return np.column_stack([x, y, z])


def position_derivatives(layout: ArrayLayout, psi: float) -> np.ndarray:
    """d r_n / d psi, shape (N, 3), meters per radian, flat order.

    The z component is exactly zero for every model (deformation acts in
    the horizontal plane only).
    """
    layout.check_feasible(psi)
    d = layout.spacing_m
    c_h = layout.c_h()
    zeros = np.zeros_like(c_h)
    model = layout.model
    if model is DeformationModel.RIGID:
        dx = dy = zeros
    elif model is DeformationModel.ROTATE:
        dx = -c_h * d * np.cos(psi)
        dy = -c_h * d * np.sin(psi)
    elif model is DeformationModel.BEND:
        dx, dy = _bend_dxy(layout, psi)
    else:  # fold
        dx = -np.abs(c_h) * d * np.cos(psi)
        dy = -c_h * d * np.sin(psi)
    return np.column_stack([dx, dy, zeros])


def boresight_offsets(layout: ArrayLayout, psi: float):
    """Per-element boresight azimuth offsets and their psi-derivatives.

    Returns (offset, d_offset) arrays of shape (N,).  The effective azimuth
    seen by element n for a wave from azimuth phi is phi - offset[n]:

    * rotate: offset = psi everywhere (derivative 1);
    * bend:   offset = K'_h psi per column (derivative K'_h);
    * fold:   offset = -psi on the first half panel, +psi on the second
      (derivative -+1), 0 with derivative 0 for the central column of an
      odd-width panel;
    * rigid:  all zeros.
    """
    layout.check_feasible(psi)
    n = layout.n_total
    model = layout.model
    if model is DeformationModel.RIGID:
        return np.zeros(n), np.zeros(n)
    if model is DeformationModel.ROTATE:
        return np.full(n, float(psi)), np.ones(n)
    if model is DeformationModel.BEND:
        kp = layout.bend_fraction()
        return kp * psi, kp.copy()
    s = layout.fold_sign()
    return s * psi, s.copy()
