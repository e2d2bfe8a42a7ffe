"""Spin-boson trace-distance dynamics and the projection-noise bias of the
positive-increment non-Markovianity measure."""

__version__ = "0.1.0"

from .dynamics import (BlochTrajectory, DistanceSeries, PropagatorBundle,
                       TimeGrid, bloch_trajectory, bloch_vector, diagonalize,
                       distances, evolve, fidelity, partial_trace_env,
                       simulate_distance_series, trace_distance)
from .errors import (ConfigError, ConvergenceError, DegenerateDistanceError,
                     MemprobeError, NumericError, ParameterError)
from .hilbert import (ModelParams, OperatorSet, build_displacement,
                      build_hamiltonian, build_operators, initial_state,
                      thermal_populations)
from .measure import (NMResult, TrueValueEstimate, delta_D, delta_N,
                      estimate_true_N, nonmarkovianity, qpn_sigma)
from .qpn import (BiasSurface, MeasurementRecord, QPNConfig, bias_surface,
                  effective_coupling, inject_qpn, noisy_measure,
                  record_outcomes, resample_gamma, resample_r,
                  resonance_amplitude, substream)

__all__ = [
    "__version__",
    "BiasSurface", "BlochTrajectory", "ConfigError", "ConvergenceError",
    "DegenerateDistanceError", "DistanceSeries", "MeasurementRecord",
    "MemprobeError", "ModelParams", "NMResult", "NumericError", "OperatorSet",
    "ParameterError", "PropagatorBundle", "QPNConfig", "TimeGrid",
    "TrueValueEstimate", "bias_surface", "bloch_trajectory", "bloch_vector",
    "build_displacement", "build_hamiltonian", "build_operators",
    "diagonalize", "delta_D", "delta_N", "distances", "effective_coupling",
    "estimate_true_N", "evolve", "fidelity", "initial_state", "inject_qpn",
    "nonmarkovianity", "noisy_measure", "partial_trace_env", "qpn_sigma",
    "record_outcomes", "resample_gamma", "resample_r", "resonance_amplitude",
    "simulate_distance_series", "substream", "thermal_populations",
    "trace_distance",
]
