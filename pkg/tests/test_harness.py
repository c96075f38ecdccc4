import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flexbeam.cli import main as cli_main
from flexbeam.harness import ConfigError, ExperimentConfig, SweepSpec, \
    config_from_dict, gradcheck_cases, load_config, run_convergence, \
    run_gradcheck, run_simulate, simulate_rows, summary_path_for
from flexbeam.units import db_to_linear, dbm_to_watts, linear_to_db, \
    watts_to_dbm


def small_config(**over):
    base = dict(n_mc=2, models=("rotate",), schemes=("Joint",), k_ao=8)
    base.update(over)
    return ExperimentConfig(**base)


class TestUnits:
    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=-120.0, max_value=60.0))
    def test_dbm_round_trip(self, x):
        assert watts_to_dbm(dbm_to_watts(x)) == pytest.approx(x, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=-90.0, max_value=90.0))
    def test_db_round_trip(self, x):
        assert linear_to_db(db_to_linear(x)) == pytest.approx(x, abs=1e-12)

    def test_reference_values(self):
        assert dbm_to_watts(0.0) == pytest.approx(1e-3, rel=1e-12)
        assert dbm_to_watts(-92.0) == pytest.approx(10 ** -12.2, rel=1e-12)
        assert db_to_linear(-40.0) == pytest.approx(1e-4, rel=1e-12)


class TestConfig:
    def test_defaults_follow_reference_parameters(self):
        cfg = ExperimentConfig()
        assert cfg.lambda_m == 0.0107
        assert cfg.d_m == pytest.approx(0.0107 / 2)
        assert cfg.n_paths == 10 and cfg.kappa == 4.0
        assert cfg.g0_db == -40.0 and cfg.alpha_pl == 2.8
        assert cfg.d_bob_m == 50.0 and cfg.d_eve_m == 80.0
        assert cfg.sigma2_dbm == -92.0 and cfg.p_max_dbm == 0.0
        assert cfg.n_mc == 1000 and cfg.k_ao == 100
        assert cfg.learning_rate == 0.01 and cfg.tol_psi_deg == 1e-3
        assert cfg.beta1 == 0.9 and cfg.beta2 == 0.999

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown configuration keys"):
            config_from_dict({"L": 10, "bogus_key": 1})

    def test_unknown_sweep_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown sweep keys"):
            config_from_dict({"sweep": {"axis": "M", "values": [1],
                                        "step": 2}})

    def test_invalid_values_named(self):
        with pytest.raises(ConfigError, match="xi"):
            config_from_dict({"xi": 1.5})
        with pytest.raises(ConfigError, match="L"):
            config_from_dict({"L": 0})
        with pytest.raises(ConfigError):
            SweepSpec(axis="frequency")

    def test_load_config_roundtrip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"N_MC": 3, "M": 2,
                                    "models": ["Rotate", "Rigid"],
                                    "schemes": ["Joint", "OnlyW"]}))
        cfg = load_config(path)
        assert cfg.n_mc == 3 and cfg.m_eves == 2
        assert len(cfg.models) == 2 and len(cfg.schemes) == 2

    def test_bad_json_reported(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(path)

    def test_sweep_n_requires_square(self):
        with pytest.raises(ConfigError, match="square"):
            small_config(sweep=SweepSpec(axis="N", values=(10,)))
        with pytest.raises(ConfigError, match="xi"):
            small_config(sweep=SweepSpec(axis="xi", values=(0.5, 2.0)))


class TestSimulate:
    def test_row_cross_product_and_summary(self, tmp_path):
        cfg = small_config(models=("rotate", "rigid"),
                           schemes=("Joint", "OnlyW"), n_mc=2)
        rows, summary = simulate_rows(cfg)
        assert len(rows) == 2 * 2 * 2
        assert len(summary) == 4
        # summary means equal recomputation from raw rows
        for model, scheme, axis, value, n, mean, stderr in summary:
            members = [float(r[6]) for r in rows
                       if r[0] == model and r[1] == scheme]
            assert int(n) == len(members)
            assert float(mean) == pytest.approx(np.mean(members),
                                                abs=1e-12)

    def test_byte_identical_rerun_and_jobs(self, tmp_path):
        cfg = small_config(n_mc=2)
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        out3 = tmp_path / "c.csv"
        assert run_simulate(cfg, out1, jobs=1) == 0
        assert run_simulate(cfg, out2, jobs=1) == 0
        assert run_simulate(cfg, out3, jobs=2) == 0
        b1 = out1.read_bytes()
        assert b1 == out2.read_bytes()
        assert b1 == out3.read_bytes()
        assert summary_path_for(out1) == str(tmp_path / "a_summary.csv")
        s1 = (tmp_path / "a_summary.csv").read_bytes()
        assert s1 == (tmp_path / "c_summary.csv").read_bytes()

    def test_csv_schema(self, tmp_path):
        cfg = small_config()
        out = tmp_path / "r.csv"
        run_simulate(cfg, out)
        lines = out.read_text().splitlines()
        assert lines[0] == ("model,scheme,axis,value,trial,seed,"
                            "r_s_bps_hz,converged,outer_iters,error")
        first = lines[1].split(",")
        assert first[0] == "rotate" and first[1] == "joint"
        assert first[4] == "0" and first[5] == str(cfg.base_seed)
        summary_lines = (tmp_path / "r_summary.csv").read_text().splitlines()
        assert summary_lines[0] == ("model,scheme,axis,value,n_trials,"
                                    "mean_r_s_bps_hz,stderr_r_s_bps_hz")

    def test_sweep_axis_values_in_rows(self, tmp_path):
        cfg = small_config(sweep=SweepSpec(axis="M", values=(1, 2)), n_mc=1)
        rows, summary = simulate_rows(cfg)
        assert len(rows) == 2
        assert {r[2] for r in rows} == {"M"}
        assert {r[3] for r in rows} == {"1.0", "2.0"}
        # eavesdropper count reduces the rate on the shared seed
        assert float(rows[0][6]) >= float(rows[1][6])

    def test_paired_seeds_across_sweep_values(self):
        cfg = small_config(sweep=SweepSpec(axis="Pmax_dBm", values=(0, 10)),
                           n_mc=2)
        rows, _ = simulate_rows(cfg)
        seeds = {}
        for r in rows:
            seeds.setdefault(r[3], []).append(r[5])
        vals = list(seeds.values())
        assert vals[0] == vals[1]


class TestGradcheck:
    def test_passes_at_default_step(self):
        cfg = small_config(models=("rotate", "bend", "fold"))
        cases = gradcheck_cases(cfg, n_cases=5)
        assert max(c.rel_error for c in cases) < 1e-5

    def test_rigid_errors_exactly_zero(self):
        cfg = small_config(models=("rigid",))
        cases = gradcheck_cases(cfg, n_cases=4)
        assert all(c.rel_error == 0.0 for c in cases)

    def test_exit_codes(self, capsys):
        cfg = small_config(models=("rotate",))
        assert run_gradcheck(cfg, 4, h_step=1e-6) == 0
        # documented negative test: a coarse step breaks the agreement
        assert run_gradcheck(cfg, 4, h_step=1e-1) == 2
        out = capsys.readouterr().out
        assert "worst" in out

    def test_per_user_cases_present(self):
        cfg = small_config(models=("rotate",))
        cases = gradcheck_cases(cfg, n_cases=2)
        users = {c.user for c in cases}
        assert users == {"both", "bob", "eve"}


class TestConvergence:
    def test_rows_and_monotone_design(self, tmp_path):
        cfg = small_config(models=("rotate",), schemes=("Joint", "OnlyW"),
                           n_mc=1, k_ao=20)
        out = tmp_path / "conv.csv"
        assert run_convergence(cfg, out) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == ("model,scheme,trial,seed,k,psi_rad,"
                            "r_s_bps_hz,r_s_design_bps_hz,pga_iters")
        by_scheme = {}
        for line in lines[1:]:
            parts = line.split(",")
            by_scheme.setdefault(parts[1], []).append(parts)
        only_w = by_scheme["only_w"]
        assert int(only_w[-1][4]) == 1  # converged at k = 1
        joint = [float(p[7]) for p in by_scheme["joint"]]
        assert all(b >= a - 1e-9 for a, b in zip(joint, joint[1:]))


class TestCli:
    def _write_cfg(self, tmp_path, **over):
        data = {"N_MC": 1, "models": ["Rotate"], "schemes": ["Joint"],
                "K_AO": 5}
        data.update(over)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(data))
        return path

    def test_simulate_roundtrip(self, tmp_path):
        cfg = self._write_cfg(tmp_path)
        out = tmp_path / "out.csv"
        code = cli_main(["simulate", "--config", str(cfg), "--out",
                         str(out)])
        assert code == 0
        assert out.exists()
        assert (tmp_path / "out_summary.csv").exists()

    def test_trials_and_seed_overrides(self, tmp_path):
        cfg = self._write_cfg(tmp_path)
        out = tmp_path / "out.csv"
        cli_main(["simulate", "--config", str(cfg), "--out", str(out),
                  "--trials", "2", "--seed", "77"])
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        assert lines[1].split(",")[5] == "77"

    def test_invalid_config_exit_one(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"nonsense": 1}))
        assert cli_main(["simulate", "--config", str(path), "--out",
                         str(tmp_path / "x.csv")]) == 1

    def test_missing_config_exit_one(self, tmp_path):
        assert cli_main(["simulate", "--config",
                         str(tmp_path / "nope.json"), "--out",
                         str(tmp_path / "x.csv")]) == 1

    def test_gradcheck_subcommand(self, tmp_path):
        cfg = self._write_cfg(tmp_path)
        assert cli_main(["gradcheck", "--config", str(cfg), "--trials",
                         "3"]) == 0
        assert cli_main(["gradcheck", "--config", str(cfg), "--trials",
                         "3", "--h-step", "0.1"]) == 2

    def test_convergence_subcommand(self, tmp_path):
        cfg = self._write_cfg(tmp_path)
        out = tmp_path / "conv.csv"
        assert cli_main(["convergence", "--config", str(cfg), "--out",
                         str(out)]) == 0
        assert out.read_text().startswith("model,scheme,trial")
