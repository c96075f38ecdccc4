import numpy as np
import pytest

from flexbeam._fastobj import FastObjective, run_pga_fast
from flexbeam.geometry import FeasibilityError
from flexbeam.radiation import ElementPattern
from flexbeam.rng import make_rng
from flexbeam.secrecy import Beamformer, secrecy_rate_colluding
from flexbeam.shape_optimizer import PgaOptions, ShapeObjectiveContext, \
    gradient_F, gradient_F_closed_form, maximize_scalar, objective_F, \
    pga_maximize, pga_start_points

from conftest import MODELS, interior_psi, random_context


class TestObjective:
    def test_identical_pathsets_give_unity(self):
        rng = make_rng(1)
        ctx = random_context(1)
        ctx = ShapeObjectiveContext(
            w=ctx.w, bob_paths=ctx.bob_paths, eve_paths=(ctx.bob_paths,),
            layout=ctx.layout, pattern=ctx.pattern, sigma2=ctx.sigma2,
            wavelength=ctx.wavelength)
        for psi in (-0.5, 0.0, 0.4):
            assert objective_F(ctx, psi) == pytest.approx(1.0, rel=1e-12)

    def test_zero_beamformer_gives_unity(self):
        base = random_context(2)
        ctx = ShapeObjectiveContext(
            w=Beamformer(w=np.zeros(9), p_max_w=base.w.p_max_w),
            bob_paths=base.bob_paths, eve_paths=base.eve_paths,
            layout=base.layout, pattern=base.pattern, sigma2=base.sigma2,
            wavelength=base.wavelength)
        assert objective_F(ctx, 0.2) == pytest.approx(1.0, rel=1e-15)

    @pytest.mark.parametrize("m_eves", [1, 3])
    def test_log2_equals_unclamped_rate(self, m_eves):
        from flexbeam.channel import synthesize_channel

        ctx = random_context(3, m_eves=m_eves)
        psi = 0.21
        h_b = synthesize_channel(ctx.layout, ctx.pattern, ctx.bob_paths,
                                 psi, ctx.wavelength).h
        h_e = np.column_stack(
            [synthesize_channel(ctx.layout, ctx.pattern, p, psi,
                                ctx.wavelength).h for p in ctx.eve_paths])
        rate = secrecy_rate_colluding(h_b, h_e, ctx.w, ctx.sigma2)
        assert np.log2(objective_F(ctx, psi)) == pytest.approx(
            rate.r_s_unclamped, abs=1e-12)

    def test_infeasible_psi_rejected(self):
        ctx = random_context(4)
        with pytest.raises(FeasibilityError):
            objective_F(ctx, 3.0)
        with pytest.raises(FeasibilityError):
            gradient_F(ctx, -3.0)

    def test_strictly_positive(self):
        ctx = random_context(5)
        values = [objective_F(ctx, p)
                  for p in np.linspace(ctx.layout.psi_min_rad,
                                       ctx.layout.psi_max_rad, 17)]
        assert all(v > 0 for v in values)


class TestGradient:
    def test_rigid_zero(self):
        ctx = random_context(6, model="rigid")
        assert gradient_F(ctx, 0.3) == 0.0
        assert gradient_F_closed_form(ctx, 0.3) == 0.0

    @pytest.mark.parametrize("model", MODELS)
    def test_finite_difference(self, model):
        h = 1e-6
        for seed in range(10):
            ctx = random_context(100 + seed, model=model)
            rng = make_rng(1000 + seed)
            psi = interior_psi(rng, ctx.layout)
            an = gradient_F(ctx, psi)
            fd = (objective_F(ctx, psi + h)
                  - objective_F(ctx, psi - h)) / (2 * h)
            f_mid = objective_F(ctx, psi)
            denom = max(abs(an), abs(fd), 1e-4 * (1 + abs(f_mid)))
            assert abs(an - fd) / denom < 1e-5

    @pytest.mark.parametrize("model", MODELS)
    def test_closed_form_dual_path(self, model):
        for seed in range(50):
            m_eves = 1 + seed % 3
            ctx = random_context(300 + seed, model=model, m_eves=m_eves)
            rng = make_rng(2000 + seed)
            psi = interior_psi(rng, ctx.layout)
            assembled = gradient_F(ctx, psi)
            closed = gradient_F_closed_form(ctx, psi)
            denom = max(abs(assembled), abs(closed), 1e-30)
            assert abs(assembled - closed) / denom < 1e-8

    def test_closed_form_with_csi_error(self):
        ctx = random_context(7, model="fold", m_eves=2, xi=0.4)
        psi = 0.17
        assembled = gradient_F(ctx, psi)
        closed = gradient_F_closed_form(ctx, psi)
        assert abs(assembled - closed) / max(abs(assembled), 1e-30) < 1e-8

    def test_interior_maximum_has_small_slope(self):
        ctx = random_context(8, model="rotate")
        lo, hi = ctx.layout.psi_min_rad, ctx.layout.psi_max_rad
        grid = np.arange(lo, hi, 1e-4)
        vals = FastObjective(ctx)(grid)[0]
        k = int(np.argmax(vals))
        if 0 < k < len(grid) - 1:  # interior maximum
            slopes = np.abs(FastObjective(ctx)(grid)[1])
            assert abs(gradient_F(ctx, grid[k])) < 1e-3 * slopes.max()

    def test_colluding_single_eve_reduction(self):
        ctx = random_context(9, m_eves=1)
        psi = 0.11
        # explicit single-Eve quotient derivative
        from flexbeam.channel import synthesize_channel

        w = ctx.w.w
        hb = synthesize_channel(ctx.layout, ctx.pattern, ctx.bob_paths,
                                psi, ctx.wavelength)
        he = synthesize_channel(ctx.layout, ctx.pattern, ctx.eve_paths[0],
                                psi, ctx.wavelength)
        s_b = abs(np.vdot(hb.h, w)) ** 2
        s_e = abs(np.vdot(he.h, w)) ** 2
        sd_b = 2 * (np.vdot(hb.dh_dpsi, w) * np.conj(np.vdot(hb.h, w))).real
        sd_e = 2 * (np.vdot(he.dh_dpsi, w) * np.conj(np.vdot(he.h, w))).real
        den = ctx.sigma2 + s_e
        single = (sd_b * den - (ctx.sigma2 + s_b) * sd_e) / den ** 2
        assert gradient_F(ctx, psi) == pytest.approx(single, rel=1e-12)

    def test_gradient_cap(self):
        ctx = random_context(10)
        assert abs(gradient_F(ctx, 0.1, grad_cap=1e-6)) <= 1e-6


class TestFastObjective:
    @pytest.mark.parametrize("model", ["rigid", "rotate", "bend", "fold"])
    def test_matches_reference(self, model):
        for seed in range(8):
            m_eves = 1 + seed % 3
            xi = 0.3 if seed % 2 else 0.0
            ctx = random_context(500 + seed, model=model, m_eves=m_eves,
                                 xi=xi)
            fast = FastObjective(ctx)
            rng = make_rng(3000 + seed)
            psis = np.array([interior_psi(rng, ctx.layout)
                             for _ in range(4)])
            f_fast, g_fast = fast(psis)
            for i, psi in enumerate(psis):
                assert f_fast[i] == pytest.approx(objective_F(ctx, psi),
                                                  rel=1e-12)
                g_ref = gradient_F(ctx, psi)
                assert g_fast[i] == pytest.approx(g_ref, rel=1e-10,
                                                  abs=1e-12)

    def test_omni_pattern(self):
        ctx = random_context(11, pattern=ElementPattern.omni())
        fast = FastObjective(ctx)
        f, g = fast(np.array([0.25]))
        assert f[0] == pytest.approx(objective_F(ctx, 0.25), rel=1e-12)
        assert g[0] == pytest.approx(gradient_F(ctx, 0.25), rel=1e-10)

    def test_numpy_twin_matches_jit(self):
        ctx = random_context(12, model="bend", m_eves=2)
        fast = FastObjective(ctx)
        psis = np.array([0.1, 0.5, 1.0])
        f_jit, g_jit = fast(psis)
        f_np = np.empty(3)
        g_np = np.empty(3)
        fast._eval_numpy(psis, f_np, g_np)
        np.testing.assert_allclose(f_jit, f_np, rtol=1e-12)
        np.testing.assert_allclose(g_jit, g_np, rtol=1e-10, atol=1e-12)


class TestPgaOptions:
    def test_defaults(self):
        o = PgaOptions()
        assert o.learning_rate == 0.01
        assert o.beta1 == 0.9 and o.beta2 == 0.999
        assert o.max_iter == 100 and o.n_starts == 4
        assert o.tol_psi_rad == pytest.approx(1e-3 * np.pi / 180)
        assert o.grad_cap == 1e6

    def test_validation(self):
        with pytest.raises(ValueError):
            PgaOptions(learning_rate=0.0)
        with pytest.raises(ValueError):
            PgaOptions(beta1=1.0)
        with pytest.raises(ValueError):
            PgaOptions(method="sgd")

    def test_start_points_include_midpoint_and_warm(self):
        starts = pga_start_points(-1.0, 1.0, 4, extra_starts=(0.33,))
        assert 0.0 in starts
        assert 0.33 in starts
        assert starts.min() >= -1.0 and starts.max() <= 1.0
        # warm starts outside the interval are projected in
        starts = pga_start_points(-1.0, 1.0, 3, extra_starts=(5.0,))
        assert 1.0 in starts


class TestPgaMaximize:
    def test_synthetic_quadratic_hook(self):
        target = 0.21

        def f_df(psis):
            psis = np.asarray(psis)
            return 5.0 - (psis - target) ** 2, -2.0 * (psis - target)

        res = maximize_scalar(f_df, -1.0, 1.0, PgaOptions())
        assert abs(res.psi_star - target) < 1e-3
        assert res.f_star == pytest.approx(5.0, abs=1e-5)

    def test_rigid_stays_at_start(self):
        ctx = random_context(13, model="rigid")
        res = pga_maximize(ctx, PgaOptions())
        assert res.psi_star in res.starts
        # zero gradient everywhere: every start is immediately converged
        assert res.n_iters == 1
        assert np.all(res.converged)

    @pytest.mark.parametrize("model", MODELS)
    def test_beats_dense_grid(self, model):
        ctx = random_context(600 + hash(model) % 50, model=model)
        res = pga_maximize(ctx, PgaOptions())
        grid = np.linspace(ctx.layout.psi_min_rad, ctx.layout.psi_max_rad,
                           2000)
        best_grid = FastObjective(ctx)(grid)[0].max()
        assert res.f_star >= best_grid * (1 - 0.01)

    def test_iterates_stay_feasible(self):
        ctx = random_context(14, model="bend")
        res = pga_maximize(ctx, PgaOptions())
        assert np.all(res.psi_path >= ctx.layout.psi_min_rad - 1e-15)
        assert np.all(res.psi_path <= ctx.layout.psi_max_rad + 1e-15)

    def test_selection_beats_every_start(self):
        ctx = random_context(15, model="fold")
        res = pga_maximize(ctx, PgaOptions(), extra_starts=(0.1, -0.2))
        f_starts = FastObjective(ctx)(res.starts)[0]
        assert res.f_star >= f_starts.max() - 1e-12

    def test_midpoint_guarantee(self):
        ctx = random_context(16)
        res = pga_maximize(ctx, PgaOptions())
        mid = 0.5 * (ctx.layout.psi_min_rad + ctx.layout.psi_max_rad)
        assert res.f_star >= objective_F(ctx, mid) - 1e-12

    def test_jit_loop_matches_python_loop(self):
        ctx = random_context(17, model="rotate", m_eves=2)
        opts = PgaOptions()
        fast = FastObjective(ctx, grad_cap=opts.grad_cap)
        starts = pga_start_points(ctx.layout.psi_min_rad,
                                  ctx.layout.psi_max_rad, opts.n_starts,
                                  (0.3,))
        out = run_pga_fast(fast, starts, opts)
        if out is None:
            pytest.skip("numba unavailable")
        psi_path, f_path, n_iters, converged = out
        ref = maximize_scalar(fast, ctx.layout.psi_min_rad,
                              ctx.layout.psi_max_rad, opts,
                              extra_starts=(0.3,))
        assert n_iters == ref.n_iters
        np.testing.assert_allclose(psi_path, ref.psi_path, atol=1e-12)
        np.testing.assert_allclose(f_path, ref.f_path, rtol=1e-10)

    def test_adagrad_option(self):
        target = -0.4

        def f_df(psis):
            psis = np.asarray(psis)
            return 1.0 - (psis - target) ** 2, -2.0 * (psis - target)

        res = maximize_scalar(f_df, -1.0, 1.0,
                              PgaOptions(method="adagrad",
                                         learning_rate=0.05, max_iter=500))
        assert abs(res.psi_star - target) < 5e-3
