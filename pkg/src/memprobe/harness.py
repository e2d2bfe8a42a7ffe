"""Run configuration, experiment orchestration, and CSV persistence.

A run is fully described by a YAML file in experiment-facing units (MHz,
kHz, spans in units of tau) plus a root seed.  Every CSV starts with
provenance lines ('#'-prefixed): tool/command/version, the SHA-256 of the
canonical scientific config (output directory and seed excluded, so the hash
identifies the science), and the seed.  Rerunning a command with the same
config and seed reproduces every output byte.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import yaml

from . import __version__
from .dynamics import BlochTrajectory, TimeGrid, distances, simulate_distance_series
from .errors import ConfigError, ConvergenceError, ParameterError
from .hilbert import ModelParams
from .measure import (NEAR_ZERO_N, cumulative_positive_variation,
                      delta_D_series, estimate_true_N,
                      increment_uncertainties, qpn_sigma)
from .qpn import (DOMAIN_INJECT, DOMAIN_SWEEP, QPNConfig, bias_surface,
                  child_seed, inject_qpn, noisy_distance_series, noisy_measure,
                  substream)

SWEEP_AXES = ("omega_z", "nbar", "gamma", "r", "t_max")

_MODEL_KEYS = {"omega_e_mhz": float, "omega_z_mhz": float, "rabi_khz": float,
               "eta": float, "nbar": float, "n_cut": int, "n_pad": int}
_GRID_KEYS = {"t_max_tau": float, "samples": int}
_QPN_KEYS = {"r": int, "noise_model": str, "k_series": int, "k_measure": int,
             "resample_iterations": int}
_BIAS_KEYS = {"gamma_tau_grid": list, "r_grid": list}
_SWEEP_KEYS = {"axis": str, "values": list, "t_max_taus": list}


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    t_max_taus: tuple = (9.0,)

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep values must be non-empty")
        if not self.t_max_taus:
            raise ConfigError("sweep t_max_taus must be non-empty")


@dataclass(frozen=True)
class RunConfig:
    """Validated run settings, stored in the units the config file uses.

    Angular-frequency model parameters are derived on demand via
    `model_params`, so serialization round-trips without unit conversions.
    """

    omega_e_mhz: float = 1.92
    omega_z_mhz: float = 1.92
    rabi_khz: float = 100.0
    eta: float = 0.32
    nbar: float = 1.0
    n_cut: int = 20
    n_pad: int = 10
    t_max_tau: float = 9.0
    samples: int = 136
    r: int = 500
    noise_model: str = "gaussian"
    k_series: int = 50
    k_measure: int = 50
    resample_iterations: int = 100
    bias_gamma_tau: tuple = (2.0, 3.0, 5.0, 6.5, 8.0, 10.0, 15.0, 22.0, 33.0, 50.0)
    bias_r: tuple = (100.0, 200.0, 500.0, 1000.0, 3000.0, 10000.0, math.inf)
    sweep: Optional[SweepSpec] = None
    output_dir: str = "out"
    seed: int = 20260823

    # -- derived --------------------------------------------------------

    @property
    def model_params(self) -> ModelParams:
        return ModelParams.from_cycles(
            f_z=self.omega_z_mhz * 1e6, f_E=self.omega_e_mhz * 1e6,
            f_rabi=self.rabi_khz * 1e3, eta=self.eta, nbar=self.nbar,
            n_cut=self.n_cut, n_pad=self.n_pad)

    @property
    def tau(self) -> float:
        return self.model_params.tau

    def time_grid(self) -> TimeGrid:
        return TimeGrid.uniform(self.t_max_tau * self.tau, self.samples)

    def qpn_config(self, seed: Optional[int] = None) -> QPNConfig:
        return QPNConfig(r=self.r, noise_model=self.noise_model,
                         k_series=self.k_series, k_measure=self.k_measure,
                         seed=self.seed if seed is None else seed)

    # -- serialization --------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping")
        _reject_unknown(raw, {"model", "grid", "qpn", "bias", "sweep",
                              "output_dir", "seed"}, "config")
        kw = {}
        kw.update(_section(raw.get("model", {}), _MODEL_KEYS, "model"))
        kw.update(_section(raw.get("grid", {}), _GRID_KEYS, "grid"))
        kw.update(_section(raw.get("qpn", {}), _QPN_KEYS, "qpn"))
        bias = _section(raw.get("bias", {}), _BIAS_KEYS, "bias")
        if "gamma_tau_grid" in bias:
            kw["bias_gamma_tau"] = tuple(float(x) for x in bias["gamma_tau_grid"])
        if "r_grid" in bias:
            kw["bias_r"] = tuple(float(x) for x in bias["r_grid"])
        if raw.get("sweep") is not None:
            sw = _section(raw["sweep"], _SWEEP_KEYS, "sweep")
            if "axis" not in sw or "values" not in sw:
                raise ConfigError("sweep needs both 'axis' and 'values'")
            kw["sweep"] = SweepSpec(
                axis=sw["axis"], values=tuple(float(x) for x in sw["values"]),
                t_max_taus=tuple(float(x) for x in sw.get("t_max_taus", [9.0])))
        if "output_dir" in raw:
            if not isinstance(raw["output_dir"], str):
                raise ConfigError("output_dir must be a string")
            kw["output_dir"] = raw["output_dir"]
        if "seed" in raw:
            if not isinstance(raw["seed"], int) or isinstance(raw["seed"], bool):
                raise ConfigError("seed must be an integer")
            kw["seed"] = raw["seed"]
        cfg = cls(**kw)
        if cfg.rabi_khz <= 0:
            # all grid specifications are in units of tau = 2*pi/Omega
            raise ConfigError("rabi_khz must be > 0")
        cfg.model_params        # force range validation at load time
        cfg.qpn_config()
        if cfg.resample_iterations < 1:
            raise ConfigError("resample_iterations must be >= 1")
        return cfg

    def to_dict(self) -> dict:
        d = {
            "model": {"omega_e_mhz": self.omega_e_mhz,
                      "omega_z_mhz": self.omega_z_mhz,
                      "rabi_khz": self.rabi_khz, "eta": self.eta,
                      "nbar": self.nbar, "n_cut": self.n_cut,
                      "n_pad": self.n_pad},
            "grid": {"t_max_tau": self.t_max_tau, "samples": self.samples},
            "qpn": {"r": self.r, "noise_model": self.noise_model,
                    "k_series": self.k_series, "k_measure": self.k_measure,
                    "resample_iterations": self.resample_iterations},
            "bias": {"gamma_tau_grid": list(self.bias_gamma_tau),
                     "r_grid": list(self.bias_r)},
            "output_dir": self.output_dir,
            "seed": self.seed,
        }
        if self.sweep is not None:
            d["sweep"] = {"axis": self.sweep.axis,
                          "values": list(self.sweep.values),
                          "t_max_taus": list(self.sweep.t_max_taus)}
        return d

    def config_hash(self) -> str:
        """SHA-256 of the canonical scientific config (no seed, no paths)."""
        d = self.to_dict()
        d.pop("output_dir")
        d.pop("seed")
        canon = yaml.safe_dump(d, sort_keys=True, default_flow_style=False)
        return hashlib.sha256(canon.encode()).hexdigest()


def _reject_unknown(d: dict, allowed, where: str) -> None:
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def _section(d, schema: dict, where: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(f"section {where!r} must be a mapping")
    _reject_unknown(d, schema, where)
    out = {}
    for key, value in d.items():
        want = schema[key]
        if want is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{where}.{key} must be a number, got {value!r}")
            out[key] = float(value)
        elif want is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{where}.{key} must be an integer, got {value!r}")
            out[key] = value
        elif want is list:
            if not isinstance(value, (list, tuple)) or not value:
                raise ConfigError(f"{where}.{key} must be a non-empty list")
            out[key] = list(value)
        else:
            if not isinstance(value, str):
                raise ConfigError(f"{where}.{key} must be a string")
            out[key] = value
    return out


def load_config(path: str) -> RunConfig:
    """Parse and validate a YAML run configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path!r}: {exc}")
    if raw is None:
        raw = {}
    return RunConfig.from_dict(raw)


# ---------------------------------------------------------------------------
# CSV output

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: str, command: str, cfg: RunConfig, columns: dict) -> str:
    """Write named columns with the standard provenance header."""
    names = list(columns)
    lengths = {len(v) for v in columns.values()}
    if len(lengths) != 1:
        raise ParameterError(f"column lengths differ: { {k: len(v) for k, v in columns.items()} }")
    lines = [f"# memprobe {command} v{__version__}",
             f"# config_sha256: {cfg.config_hash()}",
             f"# seed: {cfg.seed}",
             ",".join(names)]
    for row in zip(*columns.values()):
        lines.append(",".join(_fmt(x) for x in row))
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# commands

def run_simulate(cfg: RunConfig) -> str:
    """Distance-evolution product: t/tau, D_true, D_noisy_mean, deltaD."""
    params = cfg.model_params
    grid = cfg.time_grid()
    traj, series = simulate_distance_series(params, grid)
    qcfg = cfg.qpn_config()
    if qcfg.noise_model == "none":
        d_noisy = series.D.copy()
        band = np.zeros_like(series.D)
    else:
        acc = np.zeros(grid.samples)
        for i in range(qcfg.k_series):
            acc += distances(inject_qpn(traj, qcfg, substream(qcfg.seed, DOMAIN_INJECT, i)))
        d_noisy = acc / qcfg.k_series
        sig1 = qpn_sigma(np.clip(traj.vectors1, -1, 1), qcfg.r)
        sig2 = qpn_sigma(np.clip(traj.vectors2, -1, 1), qcfg.r)
        ref = BlochTrajectory(grid=grid, vectors1=traj.vectors1,
                              vectors2=traj.vectors2, sigmas1=sig1, sigmas2=sig2)
        band = delta_D_series(ref, degenerate="bound")
    return write_csv(os.path.join(cfg.output_dir, "simulate.csv"), "simulate", cfg,
                     {"t_tau": grid.times / cfg.tau, "D_true": series.D,
                      "D_noisy_mean": d_noisy, "deltaD": band})


def true_staircase(params: ModelParams, grid: TimeGrid):
    """Dense-reference N_true at every grid time of a uniform grid.

    Refines the grid by an integer factor so dense points align with the
    coarse ones, then reads the running positive variation at the aligned
    indices.  The full-window value is convergence-checked against a twice
    finer grid, mirroring the dense-estimate contract.
    """
    steps = np.diff(grid.times)
    if np.ptp(steps) > 1e-9 * steps[0]:
        raise ParameterError("true_staircase requires a uniform grid")
    k = max(1, math.ceil(100.0 * params.gamma0 / grid.gamma))
    m = grid.samples
    fine_n = {}
    for mult in (k, 2 * k):
        dense = TimeGrid.uniform(grid.t_max, (m - 1) * mult + 1)
        _, s = simulate_distance_series(params, dense)
        cum = cumulative_positive_variation(s.D)
        fine_n[mult] = cum
    coarse_total = fine_n[k][-1]
    fine_total = fine_n[2 * k][-1]
    if (fine_total == coarse_total
            or max(abs(fine_total), abs(coarse_total)) < NEAR_ZERO_N):
        ratio = 0.0
    elif coarse_total > 0:
        ratio = abs(fine_total - coarse_total) / coarse_total
    else:
        ratio = math.inf
    if ratio >= 1e-3:
        raise ConvergenceError(
            f"true staircase not converged: ratio {ratio:.2e} >= 1e-3",
            coarse=coarse_total, fine=fine_total, ratio=ratio)
    if abs(coarse_total) < NEAR_ZERO_N:
        return np.zeros(m)
    return fine_n[k][np.arange(m) * k]


def run_measure(cfg: RunConfig) -> str:
    """Staircase product: t_max/tau, N_noisy_mean, deltaN, N_true, B."""
    params = cfg.model_params
    grid = cfg.time_grid()
    traj, _ = simulate_distance_series(params, grid)
    qcfg = cfg.qpn_config()
    n_true = true_staircase(params, grid)
    m = grid.samples
    k_eff = 1 if qcfg.noise_model == "none" else qcfg.k_measure
    n_acc = np.zeros(m)
    dn_acc = np.zeros(m)
    for i in range(k_eff):
        noisy = inject_qpn(traj, qcfg, substream(qcfg.seed, DOMAIN_INJECT, i))
        s = noisy_distance_series(noisy)
        inc = np.diff(s.D)
        pos = inc > 0
        n_acc[1:] += cumulative_positive_variation(s.D)[1:]
        var = increment_uncertainties(s.deltaD) ** 2
        dn_acc[1:] += np.sqrt(np.cumsum(np.where(pos, var, 0.0)))
    n_mean = n_acc / k_eff
    dn_mean = dn_acc / k_eff
    return write_csv(os.path.join(cfg.output_dir, "measure.csv"), "measure", cfg,
                     {"t_max_tau": grid.times[1:] / cfg.tau,
                      "N_noisy_mean": n_mean[1:], "deltaN": dn_mean[1:],
                      "N_true": n_true[1:], "B": n_mean[1:] - n_true[1:]})


def run_bias(cfg: RunConfig) -> str:
    """Bias-surface product in long form: one row per (gamma, r) cell."""
    params = cfg.model_params
    t_max = cfg.t_max_tau * cfg.tau
    gammas = [g / cfg.tau for g in cfg.bias_gamma_tau]
    surface = bias_surface(params, t_max, gammas, cfg.bias_r, cfg.qpn_config())
    rows = {"gamma_tau": [], "r": [], "N_mean": [], "N_std": [], "N_true": [], "B": []}
    for i, g_tau in enumerate(cfg.bias_gamma_tau):
        for j, r in enumerate(cfg.bias_r):
            rows["gamma_tau"].append(float(g_tau))
            rows["r"].append(float(r))
            rows["N_mean"].append(surface.N_mean[i, j])
            rows["N_std"].append(surface.N_std[i, j])
            rows["N_true"].append(surface.N_true)
            rows["B"].append(surface.B[i, j])
    return write_csv(os.path.join(cfg.output_dir, "bias.csv"), "bias", cfg, rows)


def _sweep_cell(cfg: RunConfig, axis: str, value: float, t_max_tau: float,
                index: int) -> dict:
    """One sweep cell: true and noisy N for a single axis value and window."""
    params = cfg.model_params
    grid_t_max_tau = t_max_tau
    qcfg = cfg.qpn_config(seed=child_seed(cfg.seed, DOMAIN_SWEEP, index))
    if axis == "omega_z":
        params = replace(params, omega_z=2.0 * math.pi * value * 1e6)
    elif axis == "nbar":
        params = replace(params, nbar=value)
    elif axis == "r":
        qcfg = replace(qcfg, r=int(value))
    elif axis == "t_max":
        grid_t_max_tau = value
    t_max = grid_t_max_tau * params.tau
    if axis == "gamma":
        samples = int(round(value * grid_t_max_tau)) + 1
    else:
        # keep the reference gamma_0 spacing on the requested window
        samples = int(round((cfg.samples - 1) * grid_t_max_tau / cfg.t_max_tau)) + 1
    grid = TimeGrid.uniform(t_max, max(samples, 2))
    true = estimate_true_N(params, t_max)
    res = noisy_measure(params, grid, qcfg)
    return {"axis": axis, "value": value, "t_max_tau": grid_t_max_tau,
            "N_mean": res.value, "N_std": res.replica_std,
            "deltaN": res.uncertainty, "N_true": true.N_true,
            "B": res.value - true.N_true}


def _sweep_cell_args(args) -> dict:
    return _sweep_cell(*args)


def run_sweep(cfg: RunConfig, threads: int = 1) -> str:
    """Scan one axis at one or more windows; one CSV row per cell."""
    if cfg.sweep is None:
        raise ConfigError("config has no sweep section")
    cells = [(cfg, cfg.sweep.axis, v, t, i)
             for i, (t, v) in enumerate((t, v) for t in cfg.sweep.t_max_taus
                                        for v in cfg.sweep.values)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_cell_args, cells))
    else:
        results = [_sweep_cell_args(c) for c in cells]
    columns = {key: [r[key] for r in results] for key in
               ("axis", "value", "t_max_tau", "N_mean", "N_std", "deltaN",
                "N_true", "B")}
    return write_csv(os.path.join(cfg.output_dir, "sweep.csv"), "sweep", cfg, columns)
