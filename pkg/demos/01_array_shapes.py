#!/usr/bin/env python3
"""Walk through the four panel deformation models.

Prints element positions and boresight offsets as the shape parameter
sweeps its feasible interval, and verifies the flat-array limits.
"""

import numpy as np

from flexbeam import ArrayLayout, boresight_offsets, element_positions, \
    position_derivatives

LAMBDA = 0.0107
D = LAMBDA / 2


def show(layout, psi):
    r = element_positions(layout, psi)
    off, doff = boresight_offsets(layout, psi)
    print(f"\n{layout.model.value} panel, psi = {np.degrees(psi):.1f} deg")
    print("  element positions (mm), columns left to right:")
    for j in range(layout.n_h):
        row = r[j * layout.n_v]
        print(f"    col {j + 1}: x={1e3 * row[0]:+7.3f}  "
              f"y={1e3 * row[1]:+7.3f}  boresight offset "
              f"{np.degrees(off[j * layout.n_v]):+6.1f} deg "
              f"(slope {doff[j * layout.n_v]:+.2f})")


def main():
    for model in ("rigid", "rotate", "bend", "fold"):
        layout = ArrayLayout(n_h=3, n_v=3, spacing_m=D, model=model)
        psi = 0.5 * (layout.psi_min_rad + layout.psi_max_rad)
        show(layout, psi)

    print("\nRotating the whole panel moves every element on a circle:")
    lay = ArrayLayout(3, 3, D, "rotate")
    for deg in (0, 20, 40, 60):
        r = element_positions(lay, np.radians(deg))
        print(f"  psi={deg:2d} deg -> corner element at "
              f"({1e3 * r[0, 0]:+.3f}, {1e3 * r[0, 1]:+.3f}) mm")

    print("\nBend flattens out as psi -> 0 (evaluated via its series):")
    bend = ArrayLayout(3, 3, D, "bend", psi_min_rad=1e-6)
    flat = element_positions(ArrayLayout(3, 3, D, "rotate"), 0.0)
    for psi in (0.5, 0.05, 5e-3, 5e-4, 5e-5):
        dev = np.max(np.abs(element_positions(bend, psi) - flat))
        print(f"  psi={psi:7.0e} rad -> max deviation from flat "
              f"{dev:.3e} m")

    print("\nAnalytic position slopes match finite differences:")
    h = 1e-6
    for model in ("rotate", "bend", "fold"):
        lay = ArrayLayout(4, 2, D, model)
        psi = 0.4
        fd = (element_positions(lay, psi + h)
              - element_positions(lay, psi - h)) / (2 * h)
        an = position_derivatives(lay, psi)
        err = np.max(np.abs(an - fd))
        print(f"  {model:6s}: max |analytic - fd| = {err:.2e} m/rad")


if __name__ == "__main__":
    main()
