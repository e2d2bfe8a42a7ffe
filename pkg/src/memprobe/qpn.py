"""Projection-noise injection, postselection resampling, and bias surfaces.

The noise pipeline follows the five-step recipe: take true expectation
values, attach binomial-law sigmas for r repetitions, draw noisy values
(Gaussian by default, exact binomial counts as the alternative), rebuild
D(t), and extract N; means over k replicas give the reported values.

All randomness flows through `substream`, which derives an independent,
order-free generator from (root seed, path of indices).  Serial and parallel
executions of the same configuration therefore produce identical numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .dynamics import (BlochTrajectory, DistanceSeries, TimeGrid, distances,
                       simulate_distance_series)
from .errors import ParameterError
from .hilbert import ModelParams
from .measure import (NMResult, delta_D_series, estimate_true_N,
                      nonmarkovianity, qpn_sigma)

NOISE_MODELS = ("gaussian", "binomial", "none")

#: Default averaging count for postselection procedures.
RESAMPLE_ITERATIONS = 100

# substream domain tags (first path component), so independent uses of the
# same root seed can never collide
DOMAIN_INJECT = 1
DOMAIN_RECORD = 2
DOMAIN_RESAMPLE_R = 3
DOMAIN_RESAMPLE_GAMMA = 4
DOMAIN_SURFACE = 5
DOMAIN_SWEEP = 6


def substream(seed: int, *path: int) -> np.random.Generator:
    """Deterministic generator for a (seed, path) combination.

    Streams with different paths are statistically independent, and the
    mapping does not depend on creation order, which is what makes worker
    pools reproducible.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(path)))


def child_seed(seed: int, *path: int) -> int:
    """Deterministic 64-bit root seed for an independent sub-computation."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class QPNConfig:
    """Noise-injection settings.

    ``noise_model`` is "gaussian" (recipe default, unclamped), "binomial"
    (exact counting statistics), or "none" (the r -> infinity limit: values
    pass through untouched and sigmas are zero).
    """

    r: int = 500
    noise_model: str = "gaussian"
    k_series: int = 50
    k_measure: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.noise_model not in NOISE_MODELS:
            raise ParameterError(f"noise_model must be one of {NOISE_MODELS}, "
                                 f"got {self.noise_model!r}")
        if self.noise_model != "none" and self.r < 1:
            raise ParameterError(f"r must be >= 1, got {self.r}")
        if self.k_series < 1 or self.k_measure < 1:
            raise ParameterError("k_series and k_measure must be >= 1")


@dataclass(frozen=True)
class MeasurementRecord:
    """Per-point projective outcome counts for both states.

    ``counts1``/``counts2`` hold, per (time, component), how many of the r0
    repetitions gave the +1 outcome.
    """

    grid: TimeGrid
    counts1: np.ndarray
    counts2: np.ndarray
    r0: int

    def __post_init__(self):
        m = self.grid.samples
        if self.counts1.shape != (m, 3) or self.counts2.shape != (m, 3):
            raise ParameterError(f"counts must have shape ({m}, 3)")
        if self.r0 < 1:
            raise ParameterError(f"r0 must be >= 1, got {self.r0}")


@dataclass(frozen=True)
class BiasSurface:
    """Monte Carlo N(gamma, r) over a grid, with the true-value reference."""

    gamma_grid: np.ndarray
    r_grid: np.ndarray
    N_mean: np.ndarray
    N_std: np.ndarray
    N_true: float

    @property
    def B(self) -> np.ndarray:
        """Bias matrix N_mean - N_true."""
        return self.N_mean - self.N_true


def inject_qpn(trajectory: BlochTrajectory, config: QPNConfig,
               rng: Optional[np.random.Generator] = None) -> BlochTrajectory:
    """One noisy realization of a noiseless trajectory (recipe steps 2-3).

    Gaussian draws are centered on the true values with the binomial-law
    sigma and are deliberately not clamped to [-1, 1].  Binomial draws
    return 2*counts/r - 1.  The sigmas attached to the result are always
    computed from the true values, as the recipe prescribes.
    """
    if trajectory.noisy:
        raise ParameterError("trajectory already carries noise")
    if rng is None:
        rng = substream(config.seed, DOMAIN_INJECT)
    out = {}
    for name in ("1", "2"):
        v = getattr(trajectory, f"vectors{name}")
        sig = qpn_sigma(np.clip(v, -1.0, 1.0), max(config.r, 1))
        if config.noise_model == "gaussian":
            noisy = v + rng.standard_normal(v.shape) * sig
        elif config.noise_model == "binomial":
            p = np.clip((v + 1.0) / 2.0, 0.0, 1.0)
            noisy = 2.0 * rng.binomial(config.r, p) / config.r - 1.0
        else:  # "none": the r -> infinity limit
            noisy = v.copy()
            sig = np.zeros_like(sig)
        out[f"vectors{name}"] = noisy
        out[f"sigmas{name}"] = sig
    return BlochTrajectory(grid=trajectory.grid, **out)


def noisy_distance_series(trajectory: BlochTrajectory) -> DistanceSeries:
    """D(t) and deltaD(t) of a (possibly noisy) trajectory (recipe step 4)."""
    return DistanceSeries(grid=trajectory.grid, D=distances(trajectory),
                          deltaD=delta_D_series(trajectory, degenerate="bound"))


def noisy_measure(params: ModelParams, grid: TimeGrid, config: QPNConfig,
                  t_max: float | None = None,
                  trajectory: Optional[BlochTrajectory] = None) -> NMResult:
    """Mean N over k_measure independent noise replicas (recipe step 5).

    ``trajectory`` may pass in a precomputed noiseless trajectory for the
    same parameters and grid to skip re-simulation.  The result's
    ``uncertainty`` is the mean error-propagated deltaN of the replicas and
    ``replica_std`` the sample standard deviation of N across them.
    """
    if trajectory is None:
        trajectory, _ = simulate_distance_series(params, grid)
    # the r -> infinity limit is deterministic: one replica, zero spread
    k_eff = 1 if config.noise_model == "none" else config.k_measure
    values = np.empty(k_eff)
    uncs = np.empty(k_eff)
    counts = np.empty(k_eff)
    gamma = t_real = None
    for i in range(k_eff):
        noisy = inject_qpn(trajectory, config, substream(config.seed, DOMAIN_INJECT, i))
        res = nonmarkovianity(noisy_distance_series(noisy), t_max)
        values[i] = res.value
        uncs[i] = res.uncertainty
        counts[i] = res.positive_increment_count
        gamma, t_real = res.gamma, res.t_max
    std = float(values.std(ddof=1)) if k_eff > 1 else 0.0
    r_eff = math.inf if config.noise_model == "none" else config.r
    return NMResult(value=float(values.mean()), uncertainty=float(uncs.mean()),
                    t_max=t_real, gamma=gamma, r=r_eff,
                    positive_increment_count=int(round(counts.mean())),
                    replica_std=std)


def record_outcomes(trajectory: BlochTrajectory, r0: int,
                    rng: Optional[np.random.Generator] = None,
                    seed: int = 0) -> MeasurementRecord:
    """Simulate r0 projective outcomes per point (the raw-data analogue)."""
    if r0 < 1:
        raise ParameterError(f"r0 must be >= 1, got {r0}")
    if rng is None:
        rng = substream(seed, DOMAIN_RECORD)
    p1 = np.clip((trajectory.vectors1 + 1.0) / 2.0, 0.0, 1.0)
    p2 = np.clip((trajectory.vectors2 + 1.0) / 2.0, 0.0, 1.0)
    return MeasurementRecord(grid=trajectory.grid,
                             counts1=rng.binomial(r0, p1),
                             counts2=rng.binomial(r0, p2), r0=r0)


def resample_r(record: MeasurementRecord, r: int,
               rng: Optional[np.random.Generator] = None) -> BlochTrajectory:
    """Random postselection of r of the r0 outcomes per data point.

    Subsampling without replacement is hypergeometric in the recorded +1
    counts.  Means and sigmas are recomputed from the subsample with the
    chosen r, exactly as a smaller measurement would report them; averaging
    over iterations is the caller's job.
    """
    if not 1 <= r <= record.r0:
        raise ParameterError(f"r must be in [1, {record.r0}], got {r}")
    if rng is None:
        rng = substream(0, DOMAIN_RESAMPLE_R)
    out = {}
    for name, counts in (("1", record.counts1), ("2", record.counts2)):
        if r == record.r0:
            sub = counts
        else:
            sub = rng.hypergeometric(counts, record.r0 - counts, r)
        means = 2.0 * sub / r - 1.0
        out[f"vectors{name}"] = means
        out[f"sigmas{name}"] = qpn_sigma(means, r)
    return BlochTrajectory(grid=record.grid, **out)


def resample_gamma(series: DistanceSeries, M: int,
                   rng: Optional[np.random.Generator] = None) -> DistanceSeries:
    """Random postselection of M of the M0 points of a distance series.

    The subset is uniform over index sets (endpoints not forced), sorted in
    time; the returned grid keeps the original window so its rate reads
    (M-1)/t_max.
    """
    m0 = series.grid.samples
    if not 2 <= M <= m0:
        raise ParameterError(f"M must be in [2, {m0}], got {M}")
    if M == m0:
        return series
    if rng is None:
        rng = substream(0, DOMAIN_RESAMPLE_GAMMA)
    idx = np.sort(rng.choice(m0, size=M, replace=False))
    grid = TimeGrid(times=series.grid.times[idx], t_max=series.grid.t_max)
    return DistanceSeries(grid=grid, D=series.D[idx], deltaD=series.deltaD[idx])


def bias_surface(params: ModelParams, t_max: float,
                 gamma_grid: Sequence[float], r_grid: Sequence[float],
                 config: QPNConfig) -> BiasSurface:
    """Mean N and bias over a (gamma, r) grid of uniform-rate simulations.

    Each gamma cell runs on its own uniform grid with M = gamma*t_max + 1
    points; infinite r entries select the noiseless model.  Replica streams
    are keyed by (gamma index, r index, replica), so results do not depend
    on evaluation order.
    """
    gammas = np.asarray(list(gamma_grid), dtype=float)
    rs = np.asarray(list(r_grid), dtype=float)
    if gammas.size == 0 or rs.size == 0:
        raise ParameterError("gamma_grid and r_grid must be non-empty")
    n_true = estimate_true_N(params, t_max).N_true
    n_mean = np.empty((gammas.size, rs.size))
    n_std = np.empty_like(n_mean)
    for i, gamma in enumerate(gammas):
        samples = int(round(gamma * t_max)) + 1
        if samples < 2:
            raise ParameterError(f"gamma {gamma} yields fewer than 2 samples")
        grid = TimeGrid.uniform(t_max, samples)
        traj, _ = simulate_distance_series(params, grid)
        for j, r in enumerate(rs):
            if math.isinf(r):
                cell = replace(config, noise_model="none")
                reps = 1                      # deterministic limit
            else:
                cell = replace(config, r=int(r))
                reps = config.k_measure
            vals = np.empty(reps)
            for k in range(reps):
                noisy = inject_qpn(traj, cell,
                                   substream(config.seed, DOMAIN_SURFACE, i, j, k))
                vals[k] = nonmarkovianity(noisy_distance_series(noisy)).value
            n_mean[i, j] = vals.mean()
            n_std[i, j] = vals.std(ddof=1) if reps > 1 else 0.0
    return BiasSurface(gamma_grid=gammas, r_grid=rs, N_mean=n_mean,
                       N_std=n_std, N_true=n_true)


def effective_coupling(Omega: float, delta_omega: float) -> float:
    """Detuned coupling rate Omega' = sqrt(Omega^2 + delta_omega^2)."""
    if Omega <= 0:
        raise ParameterError(f"Omega must be > 0, got {Omega}")
    return math.hypot(Omega, delta_omega)


def resonance_amplitude(Omega: float, delta_omega: float) -> float:
    """Amplitude suppression factor Omega^2 / Omega'^2 in (0, 1]."""
    return (Omega / effective_coupling(Omega, delta_omega)) ** 2
