"""The positive-increment non-Markovianity measure and its uncertainties.

N sums all positive changes of the sampled trace distance up to a cutoff
time.  Statistical uncertainties follow the linearized propagation chain

    component sigmas -> deltaD -> delta(DeltaD) -> deltaN,

with the projection-noise sigma of a single expectation value given by the
binomial standard deviation 2*sqrt(p(1-p)/r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import DistanceSeries, TimeGrid, simulate_distance_series
from .errors import ConvergenceError, DegenerateDistanceError, ParameterError
from .hilbert import ModelParams

#: Below this distance the linearized deltaD is considered undefined.
EPS_FLOOR = 1e-12

#: Refinement factors of the true-value estimate and its convergence check.
TRUE_GAMMA_FACTOR = 100
CHECK_GAMMA_FACTOR = 200
CONVERGENCE_LIMIT = 1e-3

#: Estimates this small are rounding residue of an exactly-zero measure; the
#: relative convergence criterion is ill-posed there and is short-circuited.
NEAR_ZERO_N = 1e-9


@dataclass(frozen=True)
class NMResult:
    """One evaluation of the measure.

    ``uncertainty`` is the error-propagated deltaN.  For Monte Carlo means
    over noise replicas, ``replica_std`` additionally carries the sample
    standard deviation of N across replicas (0 for single evaluations), and
    ``r`` records the repetition count behind the noise model (infinity for
    noiseless input).
    """

    value: float
    uncertainty: float
    t_max: float
    gamma: float
    r: float = math.inf
    positive_increment_count: int = 0
    replica_std: float = 0.0


@dataclass(frozen=True)
class TrueValueEstimate:
    """Noiseless dense-sampling estimate of N with its convergence ratio."""

    N_true: float
    gamma_used: float
    convergence_ratio: float


def qpn_sigma(mean_sigma, r):
    """Projection-noise standard deviation of <sigma> after r repetitions.

    Accepts scalars or arrays; p = (<sigma>+1)/2 must lie in [0, 1].
    """
    if r < 1:
        raise ParameterError(f"r must be >= 1, got {r}")
    m = np.asarray(mean_sigma, dtype=float)
    if np.any(np.abs(m) > 1 + 1e-9):
        raise ParameterError("mean spin expectation outside [-1, 1]")
    p = np.clip((m + 1.0) / 2.0, 0.0, 1.0)
    out = 2.0 * np.sqrt(p * (1.0 - p) / r)
    return float(out) if np.isscalar(mean_sigma) else out


def delta_D(v1, v2, sigmas1, sigmas2) -> float:
    """Linearized uncertainty of D(v1, v2) from per-component sigmas.

    dD/dv1_l = (v1_l - v2_l)/(4D) and the opposite sign for v2, so

        deltaD = sqrt( sum_l d_l^2 (s1_l^2 + s2_l^2) ) / (4D),  d = v1 - v2.

    Raises DegenerateDistanceError at D <= 1e-12 where the formula breaks
    down; callers choose a policy (see `delta_D_bound`).
    """
    d = np.asarray(v1, dtype=float) - np.asarray(v2, dtype=float)
    dist = 0.5 * float(np.linalg.norm(d))
    if dist <= EPS_FLOOR:
        raise DegenerateDistanceError(f"delta_D undefined at D = {dist:.3e}")
    s1 = np.asarray(sigmas1, dtype=float)
    s2 = np.asarray(sigmas2, dtype=float)
    return float(np.sqrt(np.sum(d * d * (s1 * s1 + s2 * s2))) / (4.0 * dist))


def delta_D_bound(sigmas1, sigmas2) -> float:
    """Upper bound of the directional limit of delta_D as D -> 0.

    At vanishing separation deltaD -> 0.5*sqrt(sum_l u_l^2 (s1_l^2+s2_l^2))
    for the approach direction u; the bound takes the worst component.
    """
    s = np.asarray(sigmas1, dtype=float) ** 2 + np.asarray(sigmas2, dtype=float) ** 2
    return 0.5 * float(np.sqrt(s.max()))


def delta_D_series(trajectory, degenerate: str = "raise") -> np.ndarray:
    """Vectorized delta_D over a noisy BlochTrajectory.

    ``degenerate`` selects the policy at points with D <= 1e-12: "raise"
    (default, mirrors `delta_D`) or "bound" to substitute `delta_D_bound`.
    """
    if trajectory.sigmas1 is None:
        return np.zeros(trajectory.grid.samples)
    d = trajectory.vectors1 - trajectory.vectors2
    dist = 0.5 * np.linalg.norm(d, axis=1)
    bad = dist <= EPS_FLOOR
    if np.any(bad):
        if degenerate != "bound":
            raise DegenerateDistanceError("delta_D undefined at a degenerate point")
        dist = np.where(bad, 1.0, dist)  # placeholder; overwritten below
    s2 = trajectory.sigmas1 ** 2 + trajectory.sigmas2 ** 2
    out = np.sqrt(np.sum(d * d * s2, axis=1)) / (4.0 * dist)
    if np.any(bad):
        bounds = 0.5 * np.sqrt(s2.max(axis=1))
        out = np.where(bad, bounds, out)
    return out


def increment_uncertainties(deltaD: np.ndarray) -> np.ndarray:
    """delta(DeltaD)_i = sqrt(deltaD_i^2 + deltaD_{i-1}^2) per increment."""
    dd = np.asarray(deltaD, dtype=float)
    return np.sqrt(dd[1:] ** 2 + dd[:-1] ** 2)


def delta_N(increments: np.ndarray, increment_sigmas: np.ndarray) -> float:
    """Root-sum-square of increment uncertainties over positive increments."""
    inc = np.asarray(increments, dtype=float)
    sig = np.asarray(increment_sigmas, dtype=float)
    if inc.shape != sig.shape:
        raise ParameterError("increments and their sigmas must align")
    mask = inc > 0
    return float(np.sqrt(np.sum(sig[mask] ** 2)))


def cumulative_positive_variation(D: np.ndarray) -> np.ndarray:
    """Running sum of positive increments; entry i covers D[0..i]."""
    inc = np.clip(np.diff(np.asarray(D, dtype=float)), 0.0, None)
    out = np.empty(len(inc) + 1)
    out[0] = 0.0
    np.cumsum(inc, out=out[1:])
    return out


def nonmarkovianity(series: DistanceSeries, t_max: float | None = None) -> NMResult:
    """Evaluate N = sum of positive consecutive changes of D up to t_max.

    ``t_max`` defaults to the series' full window and is realized as the
    largest grid point <= the requested value (no interpolation).  The
    reported rate is (M-1)/t_max over the included points.
    """
    if series.grid.samples < 2:
        raise ParameterError("need at least 2 points")
    window = series.grid.t_max if t_max is None else float(t_max)
    keep = series.grid.times <= window * (1 + 1e-12)
    if keep.sum() < 2:
        raise ParameterError(f"fewer than 2 grid points at or below t_max={window}")
    d = series.D[keep]
    dd = series.deltaD[keep]
    inc = np.diff(d)
    pos = inc > 0
    value = float(inc[pos].sum())
    unc = delta_N(inc, increment_uncertainties(dd))
    m = int(keep.sum())
    return NMResult(value=value, uncertainty=unc, t_max=window,
                    gamma=(m - 1) / window,
                    positive_increment_count=int(pos.sum()))


def estimate_true_N(params: ModelParams, t_max: float) -> TrueValueEstimate:
    """Noiseless N at dense sampling (100 gamma_0), with a 200 gamma_0 check.

    The estimate is accepted only if the relative difference between the two
    refinements stays below 1e-3; otherwise a ConvergenceError carrying both
    values is raised.
    """
    if t_max <= 0:
        raise ParameterError(f"t_max must be > 0, got {t_max}")
    results = {}
    for factor in (TRUE_GAMMA_FACTOR, CHECK_GAMMA_FACTOR):
        samples = int(round(factor * params.gamma0 * t_max)) + 1
        _, series = simulate_distance_series(params, TimeGrid.uniform(t_max, samples))
        results[factor] = nonmarkovianity(series).value
    coarse = results[TRUE_GAMMA_FACTOR]
    fine = results[CHECK_GAMMA_FACTOR]
    if fine == coarse or max(abs(fine), abs(coarse)) < NEAR_ZERO_N:
        ratio = 0.0
    elif coarse > 0:
        ratio = abs(fine - coarse) / coarse
    else:
        ratio = math.inf
    if ratio >= CONVERGENCE_LIMIT:
        raise ConvergenceError(
            f"true-value estimate not converged: ratio {ratio:.2e} >= {CONVERGENCE_LIMIT}",
            coarse=coarse, fine=fine, ratio=ratio)
    if abs(coarse) < NEAR_ZERO_N:
        coarse = 0.0
    return TrueValueEstimate(N_true=coarse,
                             gamma_used=TRUE_GAMMA_FACTOR * params.gamma0,
                             convergence_ratio=ratio)
