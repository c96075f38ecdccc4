import numpy as np
import pytest
from scipy import integrate

from flexbeam.radiation import ElementPattern, element_amplitude, \
    element_power_gain, gain_vector, gain_vector_derivative

from conftest import layout_for


class TestElementPowerGain:
    def test_boresight_peak(self):
        pat = ElementPattern.directional(4)
        assert element_power_gain(pat, np.pi / 2, 0.0) == pytest.approx(10.0)

    def test_back_halfspace_clamped(self):
        pat = ElementPattern.directional(4)
        assert element_power_gain(pat, np.pi / 2, np.pi) == 0.0
        assert element_power_gain(pat, np.pi / 2, np.pi / 2 + 1e-9) == 0.0
        # below the horizon (theta > pi/2) is clamped too
        assert element_power_gain(pat, np.pi / 2 + 0.1, 0.0) == 0.0

    def test_hand_value_kappa2(self):
        pat = ElementPattern.directional(2)
        expected = 6 * np.sin(np.pi / 4) ** 2 * np.cos(np.pi / 6) ** 2
        assert expected == pytest.approx(2.25)
        assert element_power_gain(pat, np.pi / 4, np.pi / 6) == \
            pytest.approx(expected, rel=1e-12)

    def test_omni_everywhere_one(self):
        pat = ElementPattern.omni()
        assert element_power_gain(pat, 0.3, 2.9) == 1.0
        assert element_power_gain(pat, np.pi - 0.1, -3.0) == 1.0

    def test_sphere_integral_constant_in_kappa(self):
        # front-half-space power integrates to 2 pi for every kappa
        for kappa in (0.0, 1.0, 2.0, 4.0, 6.5):
            pat = ElementPattern.directional(kappa)
            val, _ = integrate.dblquad(
                lambda phi, theta: element_power_gain(pat, theta, phi)
                * np.sin(theta),
                0.0, np.pi / 2, -np.pi / 2, np.pi / 2, epsrel=1e-6)
            assert val == pytest.approx(2 * np.pi, rel=1e-3)

    def test_bounded_by_peak(self):
        pat = ElementPattern.directional(3)
        thetas = np.linspace(0, np.pi, 41)
        phis = np.linspace(-np.pi, np.pi, 81)
        gains = element_power_gain(pat, thetas[:, None], phis[None, :])
        assert np.all(gains <= pat.norm_constant + 1e-12)
        assert gains.max() == pytest.approx(
            element_power_gain(pat, np.pi / 2, 0.0), rel=1e-6)

    def test_monotone_sharpening(self):
        # off-boresight ratio decreases as kappa grows
        theta, phi = np.pi / 2, 0.7
        ratios = []
        for kappa in (1, 2, 4, 8):
            pat = ElementPattern.directional(kappa)
            ratios.append(element_power_gain(pat, theta, phi)
                          / element_power_gain(pat, np.pi / 2, 0.0))
        assert all(b < a for a, b in zip(ratios, ratios[1:]))


class TestElementAmplitude:
    def test_sqrt_of_power(self):
        pat = ElementPattern.directional(4)
        assert element_amplitude(pat, np.pi / 2, 0.0) == \
            pytest.approx(np.sqrt(10.0))
        assert element_amplitude(pat, np.pi / 2, np.pi) == 0.0

    def test_hand_value(self):
        pat = ElementPattern.directional(4)
        expected = np.sqrt(10 * np.sin(np.pi / 3) ** 4 * np.cos(0.1) ** 4)
        assert element_amplitude(pat, np.pi / 3, 0.1) == \
            pytest.approx(expected, rel=1e-12)

    def test_omni(self):
        assert element_amplitude(ElementPattern.omni(), 1.0, -2.0) == 1.0


class TestGainVector:
    def test_rotate_zero_offset_uniform(self):
        lay = layout_for("rotate")
        pat = ElementPattern.directional(4)
        g = gain_vector(lay, pat, 1.1, 0.3, 0.0)
        assert np.allclose(g, element_amplitude(pat, 1.1, 0.3))

    def test_omni_all_ones(self):
        lay = layout_for("fold")
        g = gain_vector(lay, ElementPattern.omni(), 0.9, -0.2, 0.3)
        np.testing.assert_array_equal(g, np.ones(lay.n_total))

    def test_bend_columns_hand_oracle(self):
        lay = layout_for("bend", n_v=1)
        pat = ElementPattern.directional(4)
        g = gain_vector(lay, pat, np.pi / 2, 0.0, np.pi / 6)
        edge = np.sqrt(10 * np.cos(np.pi / 6) ** 4)
        np.testing.assert_allclose(g, [edge, np.sqrt(10.0), edge],
                                   rtol=1e-12)

    def test_flat_order_matches_boresight_offsets(self):
        lay = layout_for("fold", n_h=4, n_v=2)
        pat = ElementPattern.directional(3)
        g = gain_vector(lay, pat, 1.0, 0.15, 0.2)
        from flexbeam.geometry import boresight_offsets

        off, _ = boresight_offsets(lay, 0.2)
        expected = element_amplitude(pat, 1.0, 0.15 - off)
        np.testing.assert_allclose(g, expected, rtol=1e-14)


class TestGainVectorDerivative:
    def test_omni_zero(self):
        lay = layout_for("rotate")
        dg = gain_vector_derivative(lay, ElementPattern.omni(), 1.0, 0.1,
                                    0.2)
        np.testing.assert_array_equal(dg, np.zeros(lay.n_total))

    def test_bend_central_column_zero(self):
        lay = layout_for("bend", n_v=1)
        pat = ElementPattern.directional(4)
        dg = gain_vector_derivative(lay, pat, 1.2, 0.1, 0.3)
        assert dg[1] == 0.0
        assert dg[0] != 0.0

    def test_clamped_region_zero(self):
        lay = layout_for("rotate")
        pat = ElementPattern.directional(4)
        # effective azimuth beyond pi/2: gain and slope are both clamped
        dg = gain_vector_derivative(lay, pat, np.pi / 2, np.pi / 2 + 0.2,
                                    0.0)
        np.testing.assert_array_equal(dg, np.zeros(lay.n_total))

    def test_theta_outside_support(self):
        lay = layout_for("rotate")
        pat = ElementPattern.directional(4)
        dg = gain_vector_derivative(lay, pat, np.pi / 2 + 0.3, 0.0, 0.1)
        np.testing.assert_array_equal(dg, np.zeros(lay.n_total))

    def test_magnitude_cap(self):
        # kappa < 2 diverges at the pattern edge; cap bounds it
        lay = layout_for("rotate")
        pat = ElementPattern.directional(1)
        dg = gain_vector_derivative(lay, pat, np.pi / 2,
                                    np.pi / 2 - 1e-14, 0.0)
        assert np.all(np.abs(dg) <= 1e6)

    @pytest.mark.parametrize("model", ["rotate", "bend", "fold"])
    def test_finite_difference(self, model):
        lay = layout_for(model, n_h=4, n_v=2)
        pat = ElementPattern.directional(4)
        rng = np.random.default_rng(7)
        h = 1e-6
        checked = 0
        while checked < 8:
            theta = rng.uniform(0.2, np.pi / 2 - 0.05)
            phi = rng.uniform(-1.0, 1.0)
            psi = rng.uniform(lay.psi_min_rad + h, lay.psi_max_rad - h)
            from flexbeam.geometry import boresight_offsets

            off, _ = boresight_offsets(lay, psi)
            if np.min(np.cos(phi - off)) <= 0.01:
                continue
            fd = (gain_vector(lay, pat, theta, phi, psi + h)
                  - gain_vector(lay, pat, theta, phi, psi - h)) / (2 * h)
            an = gain_vector_derivative(lay, pat, theta, phi, psi)
            denom = np.maximum(np.maximum(np.abs(an), np.abs(fd)), 1e-9)
            assert np.max(np.abs(an - fd) / denom) < 1e-6
            checked += 1
