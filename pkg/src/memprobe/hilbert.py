"""Truncated spin-boson Hilbert space: operators, Hamiltonian, initial states.

Conventions used throughout the package:

* composite ordering is spin (x) boson, with the spin basis ordered
  (|up>, |down>) so that sigma_z |up> = +|up>;
* the boson ladder is truncated at ``n_cut`` (dimension ``n_cut + 1``);
* hbar = 1, all frequencies are angular (rad/s).

States and operators are plain complex ``numpy`` arrays; the validation
helpers in this module (`hermiticity_defect`, `validate_density_matrix`, ...)
implement the invariants that a wrapper class would otherwise enforce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ParameterError

TWO_PI = 2.0 * math.pi

#: Sampling-rate convention of the reference experiment: gamma_0 = 15 / tau.
GAMMA0_PER_TAU = 15.0


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the spin-boson model.

    Parameters
    ----------
    omega_z : float
        Spin splitting (rad/s).  May be detuned from ``omega_E``.
    omega_E : float
        Boson eigenfrequency (rad/s), > 0.
    Omega : float
        Spin coupling rate (rad/s), > 0.
    eta : float
        Dimensionless spin-boson coupling parameter, >= 0.
    nbar : float
        Mean thermal occupation of the initial boson state, >= 0.
    n_cut : int
        Fock cutoff; boson space has ``n_cut + 1`` levels.
    n_pad : int
        Extra levels used internally when exponentiating the displacement
        generator, >= 0.  Never visible in model-space operators.
    """

    omega_z: float
    omega_E: float
    Omega: float
    eta: float = 0.32
    nbar: float = 1.0
    n_cut: int = 20
    n_pad: int = 10

    def __post_init__(self):
        # Omega = 0 (no drive) is admitted for the no-interaction limits, but
        # the derived units tau and gamma0 are then undefined (see `tau`).
        if self.Omega < 0:
            raise ParameterError(f"Omega must be >= 0, got {self.Omega}")
        if self.omega_E <= 0:
            raise ParameterError(f"omega_E must be > 0, got {self.omega_E}")
        if self.eta < 0:
            raise ParameterError(f"eta must be >= 0, got {self.eta}")
        if self.nbar < 0:
            raise ParameterError(f"nbar must be >= 0, got {self.nbar}")
        if self.n_cut < 1:
            raise ParameterError(f"n_cut must be >= 1, got {self.n_cut}")
        if self.n_pad < 0:
            raise ParameterError(f"n_pad must be >= 0, got {self.n_pad}")

    @classmethod
    def from_cycles(cls, f_z, f_E, f_rabi, **kwargs) -> "ModelParams":
        """Build from ordinary frequencies in Hz (omega = 2*pi*f)."""
        return cls(omega_z=TWO_PI * f_z, omega_E=TWO_PI * f_E,
                   Omega=TWO_PI * f_rabi, **kwargs)

    @property
    def tau(self) -> float:
        """Natural interaction period 2*pi/Omega (s)."""
        if self.Omega == 0:
            raise ParameterError("tau is undefined for Omega = 0")
        return TWO_PI / self.Omega

    @property
    def gamma0(self) -> float:
        """Reference sampling rate 15/tau (1/s)."""
        return GAMMA0_PER_TAU / self.tau

    @property
    def dim_boson(self) -> int:
        return self.n_cut + 1

    @property
    def dim_total(self) -> int:
        return 2 * (self.n_cut + 1)


@dataclass(frozen=True)
class OperatorSet:
    """Spin and (truncated) boson operators for one cutoff choice."""

    a: np.ndarray
    sx: np.ndarray = field(repr=False, default=None)
    sy: np.ndarray = field(repr=False, default=None)
    sz: np.ndarray = field(repr=False, default=None)
    sp: np.ndarray = field(repr=False, default=None)
    sm: np.ndarray = field(repr=False, default=None)

    @property
    def adag(self) -> np.ndarray:
        return self.a.conj().T

    @property
    def number(self) -> np.ndarray:
        return self.adag @ self.a

    @property
    def id_boson(self) -> np.ndarray:
        return np.eye(self.a.shape[0])

    @property
    def id_spin(self) -> np.ndarray:
        return np.eye(2)


def thermal_populations(nbar: float, n_cut: int):
    """Truncated thermal Fock populations p_n = nbar^n / (1+nbar)^(n+1).

    The sequence is *not* renormalized, so the truncation deficit stays
    visible; the included mass sum(p_n) = 1 - (nbar/(1+nbar))^(n_cut+1) is
    returned alongside for diagnostics.

    Returns
    -------
    (populations, included_mass) : (ndarray of shape (n_cut+1,), float)
    """
    if nbar < 0:
        raise ParameterError(f"nbar must be >= 0, got {nbar}")
    if n_cut < 1:
        raise ParameterError(f"n_cut must be >= 1, got {n_cut}")
    n = np.arange(n_cut + 1)
    if nbar == 0:
        p = np.zeros(n_cut + 1)
        p[0] = 1.0
        return p, 1.0
    # evaluate in log space; harmless here but exact for large nbar*n_cut
    p = np.exp(n * math.log(nbar) - (n + 1) * math.log1p(nbar))
    return p, float(p.sum())


def build_operators(n_cut: int, n_pad: int = 0) -> OperatorSet:
    """Construct ladder and Pauli operators.

    The boson ladder acts on ``n_cut + n_pad + 1`` levels; pass ``n_pad > 0``
    only when a padded ladder is explicitly wanted (displacement synthesis).
    Spin matrices are in the (|up>, |down>) basis.
    """
    if n_cut < 1:
        raise ParameterError(f"n_cut must be >= 1, got {n_cut}")
    if n_pad < 0:
        raise ParameterError(f"n_pad must be >= 0, got {n_pad}")
    dim = n_cut + n_pad + 1
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    sp = 0.5 * (sx + 1j * sy)   # |up><down|
    sm = 0.5 * (sx - 1j * sy)
    return OperatorSet(a=a, sx=sx, sy=sy, sz=sz, sp=sp, sm=sm)


def build_displacement(eta: float, n_cut: int, n_pad: int = 10) -> np.ndarray:
    """Evaluate exp(i*eta*(a + a^dag)) on the truncated boson space.

    Exponentiating the generator directly on the truncated space corrupts the
    highest levels, so the Hermitian generator is diagonalized on a padded
    space of ``n_cut + n_pad + 1`` levels and the result projected back to the
    top-left ``(n_cut+1) x (n_cut+1)`` block.  The projected block is then no
    longer exactly unitary; `displacement_defect` measures by how much.
    """
    if eta < 0:
        raise ParameterError(f"eta must be >= 0, got {eta}")
    ops = build_operators(n_cut, n_pad)
    gen = eta * (ops.a + ops.adag)
    try:
        lam, v = np.linalg.eigh(gen)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh on
        # Hermitian tridiagonal essentially cannot fail at this size
        raise NumericError(f"displacement eigendecomposition failed: {exc}")
    full = (v * np.exp(1j * lam)) @ v.conj().T
    return full[: n_cut + 1, : n_cut + 1]


def displacement_defect(block: np.ndarray) -> float:
    """Unitarity defect max|D^dag D - I| of a projected displacement block."""
    d = block.conj().T @ block - np.eye(block.shape[0])
    return float(np.abs(d).max())


def build_hamiltonian(params: ModelParams) -> np.ndarray:
    """Total Hamiltonian on the composite space (hbar = 1).

    H = (omega_z/2) sigma_z (x) I + omega_E I (x) a^dag a
        + (Omega/2) [sigma_+ (x) exp(i*eta*(a+a^dag)) + h.c.]
    """
    ops = build_operators(params.n_cut)
    disp = build_displacement(params.eta, params.n_cut, params.n_pad)
    h = 0.5 * params.omega_z * np.kron(ops.sz, ops.id_boson)
    h = h + params.omega_E * np.kron(ops.id_spin, ops.number)
    drive = 0.5 * params.Omega * np.kron(ops.sp, disp)
    h = h + drive + drive.conj().T
    assert h.shape == (params.dim_total, params.dim_total)
    return h


def initial_state(spin_label: str, nbar: float, n_cut: int) -> np.ndarray:
    """Product state rho_S (x) rho_E with a thermal boson part.

    ``spin_label`` is "up" (rho_S^1) or "down" (rho_S^2).  The truncated
    thermal populations are renormalized so the returned density matrix has
    unit trace exactly.
    """
    if spin_label not in ("up", "down"):
        raise ParameterError(f"spin_label must be 'up' or 'down', got {spin_label!r}")
    p, mass = thermal_populations(nbar, n_cut)
    proj = np.diag([1.0, 0.0]) if spin_label == "up" else np.diag([0.0, 1.0])
    rho = np.kron(proj, np.diag(p / mass)).astype(complex)
    return rho


# ---------------------------------------------------------------------------
# validation helpers

def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.abs(m - m.conj().T).max())


def unitarity_defect(u: np.ndarray) -> float:
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())


def validate_density_matrix(rho: np.ndarray, *, tol_trace: float = 1e-10,
                            tol_herm: float = 1e-12, tol_eig: float = 1e-10) -> None:
    """Raise ParameterError unless rho is a valid density matrix.

    Checks trace 1, Hermiticity, and spectrum >= -tol_eig at the tolerances
    from the type contract.
    """
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ParameterError(f"density matrix must be square, got shape {rho.shape}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > tol_trace:
        raise ParameterError(f"trace {tr} deviates from 1 by more than {tol_trace}")
    if hermiticity_defect(rho) > tol_herm:
        raise ParameterError("density matrix is not Hermitian within tolerance")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -tol_eig:
        raise ParameterError(f"negative eigenvalue {evals.min():.3e} below -{tol_eig}")
