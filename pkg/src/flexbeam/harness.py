"""Experiment engine: configuration, Monte Carlo sweeps and CSV output.

A JSON configuration (keys follow the simulation-parameter symbols, see
README) defines a base scenario, an optional sweep axis and the models /
schemes to run.  Each (model, scheme, sweep value, trial) cell runs one
alternating optimization with trial seed base_seed + trial_index, so every
CSV is a pure function of (config, base_seed) regardless of worker count.

Raw rows:     model,scheme,axis,value,trial,seed,r_s_bps_hz,converged,outer_iters,error
Summary rows: model,scheme,axis,value,n_trials,mean_r_s_bps_hz,stderr_r_s_bps_hz
Convergence:  model,scheme,trial,seed,k,psi_rad,r_s_bps_hz,r_s_design_bps_hz,pga_iters
"""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .ao_driver import AoOptions, Scenario, Scheme, run_ao
from .channel import sample_paths, synthesize_channel
from .geometry import ArrayLayout, DeformationModel
from .radiation import ElementPattern
from .rng import complex_normal, make_rng
from .secrecy import Beamformer
from .shape_optimizer import PgaOptions, ShapeObjectiveContext, \
    gradient_F, objective_F
from .units import db_to_linear, dbm_to_watts

SWEEP_AXES = ("none", "Pmax_dBm", "N", "M", "kappa", "xi")

RAW_HEADER = ["model", "scheme", "axis", "value", "trial", "seed",
              "r_s_bps_hz", "converged", "outer_iters", "error"]
SUMMARY_HEADER = ["model", "scheme", "axis", "value", "n_trials",
                  "mean_r_s_bps_hz", "stderr_r_s_bps_hz"]
CONVERGENCE_HEADER = ["model", "scheme", "trial", "seed", "k", "psi_rad",
                      "r_s_bps_hz", "r_s_design_bps_hz", "pga_iters"]


class ConfigError(ValueError):
    "Invalid experiment configuration (bad key, type or value)."


@dataclass(frozen=True)
class SweepSpec:
    axis: str = "none"
    values: tuple = ()

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis {self.axis!r} not in {SWEEP_AXES}")
        object.__setattr__(self, "values", tuple(self.values))
        if self.axis != "none" and len(self.values) < 1:
            raise ConfigError("sweep.values must be non-empty for a sweep")

    def cells(self):
        "Sweep points; the no-sweep case is a single unnamed cell."
        if self.axis == "none":
            return [None]
        return list(self.values)


@dataclass(frozen=True)
class ExperimentConfig:
    "Base scenario parameters (defaults follow the reference parameter set)."

    n_h: int = 3
    n_v: int = 3
    lambda_m: float = 0.0107
    d_m: float = None          # defaults to lambda/2
    p_max_dbm: float = 0.0
    sigma2_dbm: float = -92.0
    n_paths: int = 10          # L
    kappa: float = 4.0
    pattern: str = "directional"
    g0_db: float = -40.0
    alpha_pl: float = 2.8
    d_bob_m: float = 50.0
    d_eve_m: float = 80.0
    m_eves: int = 1
    xi: float = 0.0
    n_mc: int = 1000
    base_seed: int = 1
    models: tuple = (DeformationModel.ROTATE,)
    schemes: tuple = (Scheme.JOINT,)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    k_ao: int = 100
    eps_ao: float = 1e-4
    learning_rate: float = 0.01     # delta_T
    tol_psi_deg: float = 1e-3       # tau_T
    beta1: float = 0.9
    beta2: float = 0.999
    k_pga: int = 100
    n_starts: int = 4
    grad_cap: float = 1e6
    pga_method: str = "adam"

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(
            DeformationModel.parse(m) for m in self.models))
        object.__setattr__(self, "schemes", tuple(
            Scheme.parse(s) for s in self.schemes))
        if self.d_m is None:
            object.__setattr__(self, "d_m", self.lambda_m / 2.0)
        checks = [
            (self.n_h >= 1 and self.n_v >= 1, "N_h and N_v must be >= 1"),
            (self.lambda_m > 0, "lambda_m must be > 0"),
            (self.d_m > 0, "d_m must be > 0"),
            (self.n_paths >= 1, "L must be >= 1"),
            (self.kappa >= 0, "kappa must be >= 0"),
            (self.pattern in ("directional", "omni"),
             "pattern must be 'directional' or 'omni'"),
            (self.alpha_pl >= 0, "alpha must be >= 0"),
            (self.d_bob_m > 0 and self.d_eve_m > 0,
             "user distances must be > 0"),
            (self.m_eves >= 1, "M must be >= 1"),
            (0.0 <= self.xi <= 1.0, "xi must lie in [0, 1]"),
            (self.n_mc >= 1, "N_MC must be >= 1"),
            (len(self.models) >= 1, "models must be non-empty"),
            (len(self.schemes) >= 1, "schemes must be non-empty"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        for value in self.sweep.values:
            if self.sweep.axis == "N":
                side = math.isqrt(int(value))
                if side * side != int(value):
                    raise ConfigError("sweep over N requires square "
                                      f"element counts, got {value}")
            elif self.sweep.axis == "M" and int(value) < 1:
                raise ConfigError("sweep M values must be >= 1")
            elif self.sweep.axis == "xi" and not 0.0 <= value <= 1.0:
                raise ConfigError("sweep xi values must lie in [0, 1]")
            elif self.sweep.axis == "kappa" and value < 0:
                raise ConfigError("sweep kappa values must be >= 0")

    # -- derived quantities -------------------------------------------------

    @property
    def p_max_w(self) -> float:
        return float(dbm_to_watts(self.p_max_dbm))

    @property
    def sigma2_w(self) -> float:
        return float(dbm_to_watts(self.sigma2_dbm))

    @property
    def g0_lin(self) -> float:
        return float(db_to_linear(self.g0_db))

    def element_pattern(self) -> ElementPattern:
        if self.pattern == "omni":
            return ElementPattern.omni()
        return ElementPattern.directional(self.kappa)

    def pga_options(self) -> PgaOptions:
        return PgaOptions(learning_rate=self.learning_rate,
                          beta1=self.beta1, beta2=self.beta2,
                          max_iter=self.k_pga,
                          tol_psi_rad=self.tol_psi_deg * np.pi / 180.0,
                          n_starts=self.n_starts, grad_cap=self.grad_cap,
                          method=self.pga_method)

    def ao_options(self) -> AoOptions:
        return AoOptions(k_ao=self.k_ao, eps_ao=self.eps_ao)


_CONFIG_KEYS = {
    "N_h": "n_h", "N_v": "n_v", "lambda_m": "lambda_m", "d_m": "d_m",
    "P_max_dBm": "p_max_dbm", "sigma2_dBm": "sigma2_dbm", "L": "n_paths",
    "kappa": "kappa", "pattern": "pattern", "g0_dB": "g0_db",
    "alpha": "alpha_pl", "d_bob_m": "d_bob_m", "d_eve_m": "d_eve_m",
    "M": "m_eves", "xi": "xi", "N_MC": "n_mc", "base_seed": "base_seed",
    "models": "models", "schemes": "schemes", "sweep": "sweep",
    "K_AO": "k_ao", "eps_AO": "eps_ao", "delta_T": "learning_rate",
    "tau_T_deg": "tol_psi_deg", "beta1": "beta1", "beta2": "beta2",
    "K_PGA": "k_pga", "n_starts": "n_starts", "grad_cap": "grad_cap",
    "pga_method": "pga_method",
}


def config_from_dict(data: dict) -> ExperimentConfig:
    "Build a config from a parsed JSON document; unknown keys are errors."
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a JSON object")
    unknown = sorted(set(data) - set(_CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {unknown}")
    kwargs = {}
    for key, value in data.items():
        name = _CONFIG_KEYS[key]
        if name == "sweep":
            if not isinstance(value, dict):
                raise ConfigError("sweep must be an object with axis/values")
            extra = sorted(set(value) - {"axis", "values"})
            if extra:
                raise ConfigError(f"unknown sweep keys: {extra}")
            value = SweepSpec(axis=value.get("axis", "none"),
                              values=tuple(value.get("values", ())))
        kwargs[name] = value
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# Scenario construction
# ---------------------------------------------------------------------------

def _apply_sweep(cfg: ExperimentConfig, value):
    axis = cfg.sweep.axis
    if value is None or axis == "none":
        return cfg
    if axis == "Pmax_dBm":
        return replace(cfg, p_max_dbm=float(value))
    if axis == "N":
        side = math.isqrt(int(value))
        if side * side != int(value):
            raise ConfigError(f"sweep over N requires square counts, "
                              f"got {value}")
        return replace(cfg, n_h=side, n_v=side)
    if axis == "M":
        return replace(cfg, m_eves=int(value))
    if axis == "kappa":
        return replace(cfg, kappa=float(value))
    if axis == "xi":
        return replace(cfg, xi=float(value))
    raise ConfigError(f"unhandled sweep axis {axis!r}")


def build_scenario(cfg: ExperimentConfig, model, sweep_value,
                   trial_seed: int) -> Scenario:
    """Scenario for one trial: paths drawn from the trial seed (Bob first,
    then each Eve, all from one generator stream)."""
    cfg = _apply_sweep(cfg, sweep_value)
    model = DeformationModel.parse(model)
    layout = ArrayLayout(n_h=cfg.n_h, n_v=cfg.n_v, spacing_m=cfg.d_m,
                         model=model)
    rng = make_rng(trial_seed, stream=0)
    bob = sample_paths(rng, cfg.d_bob_m, cfg.n_paths, g0_lin=cfg.g0_lin,
                       pathloss_exp=cfg.alpha_pl)
    eves = tuple(sample_paths(rng, cfg.d_eve_m, cfg.n_paths,
                              g0_lin=cfg.g0_lin, pathloss_exp=cfg.alpha_pl)
                 for _ in range(cfg.m_eves))
    return Scenario(layout=layout, pattern=cfg.element_pattern(),
                    wavelength_m=cfg.lambda_m, p_max_w=cfg.p_max_w,
                    sigma2_w=cfg.sigma2_w, bob_paths=bob, eve_paths=eves,
                    xi=cfg.xi, seed=trial_seed)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _run_trial(task):
    "One (model, scheme, value, trial) cell; returns a raw CSV row."
    cfg, model, scheme, value, trial = task
    seed = cfg.base_seed + trial
    axis = cfg.sweep.axis
    value_repr = "" if value is None else repr(float(value))
    try:
        scenario = build_scenario(cfg, model, value, seed)
        trace = run_ao(scenario, scheme, cfg.ao_options(), cfg.pga_options())
        return [model.value, scheme.value, axis, value_repr, trial, seed,
                repr(trace.final_rate), int(trace.converged),
                trace.outer_iterations, ""]
    except Exception as exc:  # noqa: BLE001 - row is flagged, run continues
        return [model.value, scheme.value, axis, value_repr, trial, seed,
                "nan", 0, 0, f"{type(exc).__name__}: {exc}"]


def simulate_rows(cfg: ExperimentConfig, jobs: int = 1):
    "Raw and summary rows for the configured cross product, in sorted order."
    tasks = [(cfg, model, scheme, value, trial)
             for model in cfg.models
             for scheme in cfg.schemes
             for value in cfg.sweep.cells()
             for trial in range(cfg.n_mc)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_trial, tasks, chunksize=8))
    else:
        rows = [_run_trial(t) for t in tasks]
    rows.sort(key=lambda r: (r[0], r[1], r[3], r[4]))

    summary = []
    groups = {}
    for row in rows:
        groups.setdefault((row[0], row[1], row[2], row[3]), []).append(row)
    for (model, scheme, axis, value), members in sorted(groups.items()):
        rates = np.array([float(m[6]) for m in members if m[9] == ""])
        rates = rates[np.isfinite(rates)]
        n = len(rates)
        mean = float(np.mean(rates)) if n else float("nan")
        stderr = float(np.std(rates, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        summary.append([model, scheme, axis, value, n, repr(mean),
                        repr(stderr)])
    return rows, summary


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def summary_path_for(out_path: str) -> str:
    stem, dot, ext = str(out_path).rpartition(".")
    if not dot:
        return f"{out_path}_summary.csv"
    return f"{stem}_summary.{ext}"


def run_simulate(cfg: ExperimentConfig, out_path, jobs: int = 1) -> int:
    "Write raw + summary CSVs; exit code 0 on success, 2 if any trial failed."
    rows, summary = simulate_rows(cfg, jobs=jobs)
    _write_csv(out_path, RAW_HEADER, rows)
    _write_csv(summary_path_for(out_path), SUMMARY_HEADER, summary)
    return 0 if all(r[9] == "" for r in rows) else 2


# ---------------------------------------------------------------------------
# gradcheck
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GradcheckCase:
    model: str
    user: str
    case: int
    psi: float
    analytic: float
    numeric: float
    rel_error: float


def _fd_relative_error(analytic, numeric, scale):
    denom = max(abs(analytic), abs(numeric), 1e-4 * (1.0 + abs(scale)))
    return abs(analytic - numeric) / denom


def gradcheck_cases(cfg: ExperimentConfig, n_cases: int,
                    h_step: float = 1e-6):
    """Analytic-vs-central-difference comparison of dF/dpsi and of the
    per-user channel power slopes, per model and random scenario."""
    if n_cases < 1:
        raise ConfigError("n_cases must be >= 1")
    results = []
    for model in cfg.models:
        for case in range(n_cases):
            seed = cfg.base_seed + case
            scenario = build_scenario(cfg, model, None, seed)
            layout = scenario.layout
            rng = make_rng(seed, stream=7)
            lo = layout.psi_min_rad + 2 * h_step
            hi = layout.psi_max_rad - 2 * h_step
            psi = float(rng.uniform(lo, hi))
            w_raw = complex_normal(rng, layout.n_total)
            w_vec = np.sqrt(scenario.p_max_w) * w_raw \
                / np.linalg.norm(w_raw)
            beam = Beamformer(w=w_vec, p_max_w=scenario.p_max_w)
            ctx = ShapeObjectiveContext(
                w=beam, bob_paths=scenario.bob_paths,
                eve_paths=scenario.eve_paths, layout=layout,
                pattern=scenario.pattern, sigma2=scenario.sigma2_w,
                wavelength=scenario.wavelength_m)
            f_mid = objective_F(ctx, psi)
            analytic = gradient_F(ctx, psi)
            numeric = (objective_F(ctx, psi + h_step)
                       - objective_F(ctx, psi - h_step)) / (2 * h_step)
            results.append(GradcheckCase(
                model=model.value, user="both", case=case, psi=psi,
                analytic=analytic, numeric=numeric,
                rel_error=_fd_relative_error(analytic, numeric, f_mid)))
            # per-user channel power slopes
            for user, paths in (("bob", scenario.bob_paths),
                                ("eve", scenario.eve_paths[0])):

                def power(p):
                    ch = synthesize_channel(layout, scenario.pattern, paths,
                                            p, scenario.wavelength_m)
                    return abs(np.vdot(ch.h, w_vec)) ** 2

                ch = synthesize_channel(layout, scenario.pattern, paths,
                                        psi, scenario.wavelength_m)
                a = 2.0 * (np.vdot(ch.dh_dpsi, w_vec)
                           * np.conj(np.vdot(ch.h, w_vec))).real
                nmr = (power(psi + h_step) - power(psi - h_step)) \
                    / (2 * h_step)
                results.append(GradcheckCase(
                    model=model.value, user=user, case=case, psi=psi,
                    analytic=float(a), numeric=float(nmr),
                    rel_error=_fd_relative_error(a, nmr, power(psi))))
    return results


def run_gradcheck(cfg: ExperimentConfig, n_cases: int, h_step: float = 1e-6,
                  threshold: float = 1e-5, out_path=None) -> int:
    cases = gradcheck_cases(cfg, n_cases, h_step)
    worst = sorted(cases, key=lambda c: -c.rel_error)
    if out_path:
        _write_csv(out_path,
                   ["model", "user", "case", "psi_rad", "analytic",
                    "numeric", "rel_error"],
                   [[c.model, c.user, c.case, repr(c.psi), repr(c.analytic),
                     repr(c.numeric), repr(c.rel_error)] for c in cases])
    failed = [c for c in cases if not c.rel_error < threshold]
    print(f"gradcheck: {len(cases)} cases, h={h_step:g}, "
          f"max rel error {worst[0].rel_error:.3e} "
          f"({worst[0].model}/{worst[0].user})")
    if failed:
        for c in worst[:5]:
            print(f"  worst: model={c.model} user={c.user} case={c.case} "
                  f"psi={c.psi:.4f} analytic={c.analytic:.6e} "
                  f"numeric={c.numeric:.6e} rel={c.rel_error:.3e}")
        return 2
    return 0


# ---------------------------------------------------------------------------
# convergence traces
# ---------------------------------------------------------------------------

def _trace_rows(task):
    cfg, model, scheme, trial = task
    seed = cfg.base_seed + trial
    scenario = build_scenario(cfg, model, None, seed)
    trace = run_ao(scenario, scheme, cfg.ao_options(), cfg.pga_options())
    return [[model.value, scheme.value, trial, seed, it.k, repr(it.psi),
             repr(it.r_s), repr(it.r_s_design), it.pga_iters]
            for it in trace.iterations]


def convergence_rows(cfg: ExperimentConfig, jobs: int = 1):
    "Per-iteration AO trace rows for every (model, scheme, trial)."
    tasks = [(cfg, model, scheme, trial)
             for model in cfg.models
             for scheme in cfg.schemes
             for trial in range(cfg.n_mc)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            nested = list(pool.map(_trace_rows, tasks, chunksize=4))
    else:
        nested = [_trace_rows(t) for t in tasks]
    rows = [row for group in nested for row in group]
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[4]))
    return rows


def run_convergence(cfg: ExperimentConfig, out_path, jobs: int = 1) -> int:
    rows = convergence_rows(cfg, jobs=jobs)
    _write_csv(out_path, CONVERGENCE_HEADER, rows)
    return 0
