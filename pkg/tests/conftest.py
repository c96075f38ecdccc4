import numpy as np
import pytest

from flexbeam import ArrayLayout, Beamformer, ElementPattern, \
    ShapeObjectiveContext, make_rng, sample_paths
from flexbeam.units import dbm_to_watts

WAVELENGTH = 0.0107
SPACING = WAVELENGTH / 2.0
SIGMA2 = float(dbm_to_watts(-92.0))
P_MAX = float(dbm_to_watts(0.0))

MODELS = ("rotate", "bend", "fold")
ALL_MODELS = ("rigid", "rotate", "bend", "fold")


def layout_for(model, n_h=3, n_v=3, spacing=SPACING, **kwargs):
    return ArrayLayout(n_h=n_h, n_v=n_v, spacing_m=spacing, model=model,
                       **kwargs)


def random_paths(rng, distance=50.0, n_paths=10):
    return sample_paths(rng, distance, n_paths)


def random_beamformer(rng, n, p_max=P_MAX):
    from flexbeam.rng import complex_normal

    w = complex_normal(rng, n)
    return Beamformer(w=np.sqrt(p_max) * w / np.linalg.norm(w),
                      p_max_w=p_max)


def random_context(seed, model="rotate", n_h=3, n_v=3, m_eves=1,
                   pattern=None, xi=0.0, n_paths=10, w=None):
    """Deterministic random ShapeObjectiveContext for oracle tests."""
    rng = make_rng(seed)
    layout = layout_for(model, n_h=n_h, n_v=n_v)
    if pattern is None:
        pattern = ElementPattern.directional(4.0)
    bob = random_paths(rng, 50.0, n_paths)
    eves = tuple(random_paths(rng, 80.0, n_paths) for _ in range(m_eves))
    if w is None:
        w = random_beamformer(rng, layout.n_total)
    csi_errors = None
    if xi > 0.0:
        from flexbeam.channel import draw_csi_error, synthesize_channel

        psi0 = 0.5 * (layout.psi_min_rad + layout.psi_max_rad)
        csi_errors = tuple(
            draw_csi_error(rng, xi, synthesize_channel(
                layout, pattern, p, psi0, WAVELENGTH))
            for p in eves)
    return ShapeObjectiveContext(w=w, bob_paths=bob, eve_paths=eves,
                                 layout=layout, pattern=pattern,
                                 sigma2=SIGMA2, wavelength=WAVELENGTH,
                                 csi_errors=csi_errors)


def interior_psi(rng, layout, margin=1e-3):
    lo = layout.psi_min_rad + margin
    hi = layout.psi_max_rad - margin
    return float(rng.uniform(lo, hi))


@pytest.fixture
def rng():
    return make_rng(12345)
