"""Exact evolution of the composite system and trace-distance trajectories.

The Hamiltonian is time independent and small, so evolution is done by a
one-time eigendecomposition (`diagonalize`) rather than step-wise
integration; propagation to arbitrary ``t`` is then exact to rounding.
`bloch_trajectory` additionally exploits the eigenbasis to evaluate all six
spin expectation values on a whole time grid with one pair of trigonometric
matrix products, which is what makes dense reference grids (tens of
thousands of points) cheap.  The two routes are deliberately kept distinct
and are cross-checked in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericError, ParameterError
from .hilbert import (ModelParams, build_hamiltonian, hermiticity_defect,
                      initial_state)

_CHUNK = 4096  # grid points per trigonometric block in bloch_trajectory


@dataclass(frozen=True)
class TimeGrid:
    """Sampling grid on [0, t_max].

    ``times`` must be strictly increasing and contained in [0, t_max].  The
    reported sampling rate follows the windowed convention
    gamma = (M - 1)/t_max, so a random subset of a finer grid keeps the full
    window ``t_max`` of the measurement it came from (and need not contain
    t = 0 itself).
    """

    times: np.ndarray
    t_max: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ParameterError("grid needs at least 2 time points")
        if np.any(np.diff(t) <= 0):
            raise ParameterError("grid times must be strictly increasing")
        if t[0] < 0 or t[-1] > self.t_max * (1 + 1e-12):
            raise ParameterError("grid times must lie within [0, t_max]")
        object.__setattr__(self, "times", t)

    @classmethod
    def uniform(cls, t_max: float, samples: int) -> "TimeGrid":
        """Uniform grid t_i = i * t_max/(samples-1), i = 0..samples-1."""
        if samples < 2:
            raise ParameterError(f"samples must be >= 2, got {samples}")
        if t_max <= 0:
            raise ParameterError(f"t_max must be > 0, got {t_max}")
        return cls(times=np.linspace(0.0, t_max, samples), t_max=float(t_max))

    @property
    def samples(self) -> int:
        return self.times.size

    @property
    def gamma(self) -> float:
        """Mean sampling rate (M - 1)/t_max."""
        return (self.samples - 1) / self.t_max

    def restrict(self, t_max: float) -> "TimeGrid":
        """Sub-grid of points with t <= t_max (no interpolation)."""
        keep = self.times <= t_max * (1 + 1e-12)
        if keep.sum() < 2:
            raise ParameterError(f"fewer than 2 grid points at or below {t_max}")
        return TimeGrid(times=self.times[keep], t_max=float(t_max))


@dataclass(frozen=True)
class PropagatorBundle:
    """Eigendecomposition of a total Hamiltonian: H = V diag(evals) V^dag."""

    evals: np.ndarray
    V: np.ndarray
    params: ModelParams


@dataclass(frozen=True)
class BlochTrajectory:
    """Bloch vectors of both initial states on a common grid.

    ``vectors1``/``vectors2`` have shape (M, 3) with columns
    <sigma_x>, <sigma_y>, <sigma_z> for initial states rho_S^1 = |up><up|
    and rho_S^2 = |down><down|.  ``sigmas*`` carry per-component projection
    noise standard deviations once noise has been attached; they are None on
    noiseless trajectories.
    """

    grid: TimeGrid
    vectors1: np.ndarray
    vectors2: np.ndarray
    sigmas1: Optional[np.ndarray] = None
    sigmas2: Optional[np.ndarray] = None

    def __post_init__(self):
        m = self.grid.samples
        for name in ("vectors1", "vectors2"):
            v = getattr(self, name)
            if v.shape != (m, 3):
                raise ParameterError(f"{name} must have shape ({m}, 3), got {v.shape}")

    @property
    def noisy(self) -> bool:
        return self.sigmas1 is not None


@dataclass(frozen=True)
class DistanceSeries:
    """Sampled trace distance D(t) with pointwise uncertainties."""

    grid: TimeGrid
    D: np.ndarray
    deltaD: np.ndarray

    def __post_init__(self):
        m = self.grid.samples
        if self.D.shape != (m,) or self.deltaD.shape != (m,):
            raise ParameterError("D and deltaD must match the grid length")
        if np.any(self.deltaD < 0):
            raise ParameterError("uncertainties must be >= 0")


def diagonalize(H: np.ndarray, params: ModelParams) -> PropagatorBundle:
    """Eigendecompose a Hermitian total Hamiltonian.

    Raises ParameterError for visibly non-Hermitian input and NumericError if
    the solver fails.
    """
    if hermiticity_defect(H) > 1e-9 * max(1.0, float(np.abs(H).max())):
        raise ParameterError("Hamiltonian is not Hermitian within tolerance")
    try:
        evals, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}")
    return PropagatorBundle(evals=evals, V=V, params=params)


def propagator(bundle: PropagatorBundle, t: float) -> np.ndarray:
    """U(t) = V exp(-i * evals * t) V^dag."""
    phases = np.exp(-1j * bundle.evals * t)
    return (bundle.V * phases) @ bundle.V.conj().T


def evolve(bundle: PropagatorBundle, rho0: np.ndarray, t: float) -> np.ndarray:
    """rho(t) = U(t) rho(0) U(t)^dag for t >= 0."""
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    dim = bundle.evals.size
    if rho0.shape != (dim, dim):
        raise ParameterError(f"state has shape {rho0.shape}, expected {(dim, dim)}")
    u = propagator(bundle, t)
    return u @ rho0 @ u.conj().T


def partial_trace_env(rho_total: np.ndarray) -> np.ndarray:
    """Reduce a (2*nb x 2*nb) state to the 2x2 spin state.

    (rho_S)_{ss'} = sum_n rho_{(s,n),(s',n)}; the trace is preserved exactly.
    """
    d = rho_total.shape[0]
    if rho_total.ndim != 2 or rho_total.shape != (d, d) or d % 2:
        raise ParameterError(f"expected a square even-dimension matrix, got {rho_total.shape}")
    nb = d // 2
    return np.einsum("injn->ij", rho_total.reshape(2, nb, 2, nb))


def bloch_vector(rho_spin: np.ndarray) -> np.ndarray:
    """(<sigma_x>, <sigma_y>, <sigma_z>) of a 2x2 density matrix."""
    if rho_spin.shape != (2, 2):
        raise ParameterError(f"expected a 2x2 matrix, got {rho_spin.shape}")
    vx = 2.0 * rho_spin[0, 1].real
    vy = -2.0 * rho_spin[0, 1].imag
    vz = (rho_spin[0, 0] - rho_spin[1, 1]).real
    return np.array([vx, vy, vz])


def trace_distance(v1: np.ndarray, v2: np.ndarray) -> float:
    """Half the Euclidean distance between two Bloch vectors."""
    return 0.5 * float(np.linalg.norm(np.asarray(v1) - np.asarray(v2)))


def _expectation_weights(bundle: PropagatorBundle, rho0: np.ndarray,
                         observables) -> np.ndarray:
    """Eigenbasis weight vectors for Tr[rho(t) O] per observable."""
    V = bundle.V
    rho_e = V.conj().T @ rho0 @ V
    cols = []
    for obs in observables:
        obs_e = V.conj().T @ obs @ V
        cols.append((rho_e * obs_e.T).ravel())
    return np.column_stack(cols)


def bloch_trajectory(bundle: PropagatorBundle, grid: TimeGrid) -> BlochTrajectory:
    """Noiseless Bloch vectors of both initial states on a whole grid.

    In the eigenbasis every expectation value is a finite trigonometric sum
    over Bohr frequencies; evaluating it as two real matrix products avoids
    per-time propagator construction and keeps dense reference grids cheap.
    """
    p = bundle.params
    nb = p.dim_boson
    # sigma_l (x) I in the composite space
    eye = np.eye(nb)
    obs = [np.kron(np.array([[0, 1], [1, 0]], dtype=complex), eye),
           np.kron(np.array([[0, -1j], [1j, 0]]), eye),
           np.kron(np.array([[1, 0], [0, -1]], dtype=complex), eye)]
    rho1 = initial_state("up", p.nbar, p.n_cut)
    rho2 = initial_state("down", p.nbar, p.n_cut)
    w = np.hstack([_expectation_weights(bundle, rho1, obs),
                   _expectation_weights(bundle, rho2, obs)])
    bohr = np.subtract.outer(bundle.evals, bundle.evals).ravel()
    out = np.empty((grid.samples, 6))
    for i in range(0, grid.samples, _CHUNK):
        arg = np.outer(grid.times[i:i + _CHUNK], bohr)
        out[i:i + _CHUNK] = np.cos(arg) @ w.real + np.sin(arg) @ w.imag
    return BlochTrajectory(grid=grid, vectors1=out[:, :3], vectors2=out[:, 3:])


def distances(trajectory: BlochTrajectory) -> np.ndarray:
    """Pointwise trace distance of the two Bloch-vector tracks."""
    return 0.5 * np.linalg.norm(trajectory.vectors1 - trajectory.vectors2, axis=1)


def simulate_distance_series(params: ModelParams, grid: TimeGrid):
    """Noiseless trajectories and the induced D(t) for the model parameters.

    Returns
    -------
    (BlochTrajectory, DistanceSeries)
        The series carries deltaD = 0 everywhere (no noise attached).
    """
    bundle = diagonalize(build_hamiltonian(params), params)
    traj = bloch_trajectory(bundle, grid)
    series = DistanceSeries(grid=grid, D=distances(traj),
                            deltaD=np.zeros(grid.samples))
    return traj, series


def _psd_sqrt(rho: np.ndarray, tol: float) -> np.ndarray:
    evals, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if evals.min() < -tol:
        raise ParameterError(f"matrix has eigenvalue {evals.min():.3e}, not PSD within {tol}")
    return (vecs * np.sqrt(np.clip(evals, 0.0, None))) @ vecs.conj().T


def fidelity(rho1: np.ndarray, rho2: np.ndarray, *, tol: float = 1e-8) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)) in [0, 1]."""
    if rho1.shape != rho2.shape:
        raise ParameterError(f"shape mismatch {rho1.shape} vs {rho2.shape}")
    s1 = _psd_sqrt(rho1, tol)
    inner = s1 @ rho2 @ s1
    evals = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    f = float(np.sqrt(np.clip(evals, 0.0, None)).sum())
    return min(f, 1.0)
