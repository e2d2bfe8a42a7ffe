"""End-to-end acceptance gates for the headline behaviors of the package.

Each test here pins one externally meaningful claim at full reference
settings (n_cut = 20, 136-point grid over nine interaction periods, r = 500,
50 noise replicas), as opposed to the per-module unit tests which favor
small, fast configurations.  Tolerances are part of the contract and are not
to be loosened to make a failing claim pass.
"""

import math
import time

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import brute_positive_variation, integrate_von_neumann, noise_floor_mc

from memprobe.dynamics import (TimeGrid, DistanceSeries, diagonalize, evolve,
                               simulate_distance_series)
from memprobe.harness import RunConfig, run_simulate, run_sweep
from memprobe.hilbert import ModelParams, build_hamiltonian, initial_state, thermal_populations
from memprobe.measure import estimate_true_N, nonmarkovianity
from memprobe.qpn import QPNConfig, bias_surface, noisy_measure, substream


def reference_params(**kwargs):
    defaults = dict(f_z=1.92e6, f_E=1.92e6, f_rabi=100e3)
    return ModelParams.from_cycles(**{**defaults, **kwargs})


# ---------------------------------------------------------------------------
# 1. thermal truncation

def test_thermal_truncation_keeps_stated_mass():
    """Fock truncation at n_cut = 20 retains 99.99879% of an nbar = 1.4 state."""
    thermal_populations(1.4, 20)            # warm-up outside the timed call
    t0 = time.perf_counter()
    _, mass = thermal_populations(1.4, 20)
    elapsed = time.perf_counter() - t0
    assert abs(mass - 0.9999879) <= 1e-6
    assert elapsed < 1e-3


# ---------------------------------------------------------------------------
# 2. evolution equivalence against an independent integrator

def test_evolution_matches_independent_integrator():
    """Spectral propagation agrees with adaptive Runge-Kutta on random models."""
    rng = np.random.default_rng(2024)
    worst = 0.0
    for trial in range(20):
        f_e = rng.uniform(1.0e6, 3.0e6)
        params = ModelParams.from_cycles(
            f_z=f_e * rng.uniform(0.9, 1.1), f_E=f_e,
            f_rabi=rng.uniform(5e4, 1.5e5),
            eta=rng.uniform(0.0, 0.5), nbar=rng.uniform(0.0, 1.5),
            n_cut=5, n_pad=6)
        h = build_hamiltonian(params)
        bundle = diagonalize(h, params)
        label = "up" if trial % 2 else "down"
        rho0 = initial_state(label, params.nbar, params.n_cut)
        times = np.linspace(0.0, 9 * params.tau, 8)
        reference = integrate_von_neumann(h, rho0, times)
        for i, t in enumerate(times):
            err = float(np.abs(evolve(bundle, rho0, t) - reference[i]).max())
            worst = max(worst, err)
    assert worst < 1e-6


# ---------------------------------------------------------------------------
# 3. measure correctness

def test_measure_exact_and_monotone_under_refinement():
    """N matches a brute-force scan and never shrinks when sampling refines."""
    hand = np.array([1.0, 0.7, 0.9, 0.8, 1.0])
    series = DistanceSeries(grid=TimeGrid(times=np.arange(5.0), t_max=4.0),
                            D=hand, deltaD=np.zeros(5))
    res = nonmarkovianity(series)
    assert res.value == brute_positive_variation(hand)
    assert_allclose(res.value, 0.4, rtol=1e-12)

    rng = np.random.default_rng(90)
    for _ in range(1000):
        m = int(rng.integers(16, 257))
        D = rng.uniform(0.0, 1.0, m)
        t = np.arange(float(m))
        full = nonmarkovianity(DistanceSeries(
            grid=TimeGrid(times=t, t_max=t[-1]), D=D, deltaD=np.zeros(m)))
        half = nonmarkovianity(DistanceSeries(
            grid=TimeGrid(times=t[::2], t_max=t[-1]), D=D[::2],
            deltaD=np.zeros(len(t[::2]))))
        quarter = nonmarkovianity(DistanceSeries(
            grid=TimeGrid(times=t[::4], t_max=t[-1]), D=D[::4],
            deltaD=np.zeros(len(t[::4]))))
        assert_allclose(full.value, brute_positive_variation(D), rtol=1e-12)
        assert full.value >= half.value - 1e-12
        assert half.value >= quarter.value - 1e-12


# ---------------------------------------------------------------------------
# 4. noise-floor law

def test_noise_floor_matches_closed_form():
    """Pure noise on a flat record accumulates (M-1) * sigma / sqrt(pi)."""
    m_points, sigma, replicas = 100, 0.01, 2000
    closed_form = (m_points - 1) * sigma / math.sqrt(math.pi)
    grid = TimeGrid.uniform(1.0, m_points)
    rng = substream(314, 1)
    acc = 0.0
    for _ in range(replicas):
        noisy = 0.5 + rng.normal(0.0, sigma, m_points)
        acc += nonmarkovianity(DistanceSeries(grid=grid, D=noisy,
                                             deltaD=np.zeros(m_points))).value
    package_mean = acc / replicas
    oracle_mean = noise_floor_mc(m_points, sigma, 1000, substream(314, 2))
    assert abs(package_mean - closed_form) / closed_form < 0.05
    assert abs(oracle_mean - closed_form) / closed_form < 0.05
    assert abs(package_mean - oracle_mean) < 0.012


# ---------------------------------------------------------------------------
# 5. projection-noise bias at the reference operating point

@pytest.fixture(scope="module")
def reference_bias():
    """Noisy-measure bias at full reference settings, shared by three tests."""
    params = reference_params()
    t_max = 9 * params.tau
    grid = TimeGrid.uniform(t_max, 136)
    n_true = estimate_true_N(params, t_max).N_true
    traj, _ = simulate_distance_series(params, grid)
    at_r0 = noisy_measure(params, grid, QPNConfig(r=500, k_measure=50, seed=20260823),
                          trajectory=traj)
    at_large_r = noisy_measure(params, grid, QPNConfig(r=10_000, k_measure=50,
                                                       seed=20260823), trajectory=traj)
    gamma_taus = np.array([5.0, 6.5, 8.0, 10.0, 12.0])
    surface = bias_surface(params, t_max, gamma_taus / params.tau, [500.0],
                           QPNConfig(r=500, k_measure=50, seed=20260823))
    return {"N_true": n_true, "at_r0": at_r0, "at_large_r": at_large_r,
            "gamma_taus": gamma_taus, "row_B": surface.B[:, 0]}


def test_bias_at_reference_repetitions(reference_bias):
    """At gamma_0 and r = 500 the mean measure overshoots by 17 +/- 5 percent."""
    rel = 100.0 * (reference_bias["at_r0"].value - reference_bias["N_true"]) \
        / reference_bias["N_true"]
    assert 12.0 <= rel <= 22.0, f"relative bias at r=500 is {rel:+.1f}%"


def test_bias_at_large_repetitions(reference_bias):
    """At gamma_0 and r = 10^4 the measure undershoots by 8 +/- 4 percent."""
    rel = 100.0 * (reference_bias["at_large_r"].value - reference_bias["N_true"]) \
        / reference_bias["N_true"]
    assert -12.0 <= rel <= -4.0, f"relative bias at r=10^4 is {rel:+.1f}%"


def test_bias_changes_sign_near_eight_samples_per_period(reference_bias):
    """With r = 500 the bias crosses zero near gamma*tau = 8."""
    g = reference_bias["gamma_taus"]
    b = reference_bias["row_B"]
    assert b[0] < 0.0 and b[1] < 0.0, "bias should start negative at slow sampling"
    assert b[-2] > 0.0 and b[-1] > 0.0, "bias should end positive at fast sampling"
    flips = np.flatnonzero(np.diff(np.sign(b)) != 0)
    assert flips.size == 1
    crossing = 0.5 * (g[flips[0]] + g[flips[0] + 1])
    assert 6.0 <= crossing <= 10.0


# ---------------------------------------------------------------------------
# 6. probe signatures under detuning and temperature

@pytest.fixture(scope="module")
def detuning_scan():
    """N_true over omega_z/omega_E in 0.95..1.05 at a cold occupation."""
    ratios = np.round(np.arange(0.95, 1.0501, 0.01), 4)
    out = {}
    for t_max_tau in (2, 9):
        vals = []
        for ratio in ratios:
            p = reference_params(f_z=1.92e6 * ratio, nbar=0.09)
            vals.append(estimate_true_N(p, t_max_tau * p.tau).N_true)
        out[t_max_tau] = np.array(vals)
    return out


def interior_maxima(v):
    return [i for i in range(1, len(v) - 1) if v[i] > v[i - 1] and v[i] > v[i + 1]]


def test_short_window_detuning_scan_is_double_peaked(detuning_scan):
    v = detuning_scan[2]
    res = 5                                  # index of zero detuning
    assert v[res] < v[res - 1] and v[res] < v[res + 1]
    assert v[:res].max() > v[res] and v[res + 1:].max() > v[res]
    assert len(interior_maxima(v)) == 2


def test_long_window_detuning_scan_has_single_resonant_peak(detuning_scan):
    v = detuning_scan[9]
    assert int(np.argmax(v)) == 5
    assert interior_maxima(v) == [5]


def test_short_window_measure_grows_with_occupation():
    values = []
    for nbar in (0.09, 0.2, 0.4, 0.6, 0.8, 1.0):
        p = reference_params(nbar=nbar)
        values.append(estimate_true_N(p, 2 * p.tau).N_true)
    assert np.all(np.diff(values) > 0.0)


# ---------------------------------------------------------------------------
# 7. determinism of persisted results

def test_commands_are_byte_deterministic(tmp_path):
    """Any command rerun with the same seed reproduces the CSV exactly."""
    base = {
        "grid": {"t_max_tau": 2.0, "samples": 31},
        "qpn": {"r": 500, "k_series": 5, "k_measure": 5},
        "seed": 424242,
    }
    cfg_a = RunConfig.from_dict({**base, "output_dir": str(tmp_path / "a")})
    cfg_b = RunConfig.from_dict({**base, "output_dir": str(tmp_path / "b")})
    assert open(run_simulate(cfg_a), "rb").read() == open(run_simulate(cfg_b), "rb").read()

    sweep = {"axis": "nbar", "values": [0.2, 0.5], "t_max_taus": [2.0]}
    cfg_c = RunConfig.from_dict({**base, "sweep": sweep,
                                 "output_dir": str(tmp_path / "c")})
    cfg_d = RunConfig.from_dict({**base, "sweep": sweep,
                                 "output_dir": str(tmp_path / "d")})
    serial = open(run_sweep(cfg_c, threads=1), "rb").read()
    parallel = open(run_sweep(cfg_d, threads=2), "rb").read()
    assert serial == parallel
