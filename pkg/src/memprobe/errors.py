"""Exception hierarchy shared across the package.

Every error that can reach the CLI carries an ``exit_code`` so the command
layer can translate failures without inspecting types one by one:
2 = bad configuration or parameters, 3 = numerical failure, 4 = convergence
failure.
"""


class MemprobeError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParameterError(MemprobeError):
    """An operation received an argument outside its documented domain."""

    exit_code = 2


class ConfigError(MemprobeError):
    """A run configuration file is malformed, incomplete, or contradictory."""

    exit_code = 2


class NumericError(MemprobeError):
    """A numerical routine failed (solver breakdown, invalid matrix, ...)."""

    exit_code = 3


class DegenerateDistanceError(NumericError):
    """Error propagation requested at (or numerically at) D = 0.

    The linearized uncertainty of the trace distance is undefined there;
    callers decide whether to substitute a bound or abort.
    """


class ConvergenceError(MemprobeError):
    """A refinement check did not reach its required tolerance.

    Carries both estimates so callers can report the achieved ratio.
    """

    exit_code = 4

    def __init__(self, message, coarse=None, fine=None, ratio=None):
        super().__init__(message)
        self.coarse = coarse
        self.fine = fine
        self.ratio = ratio
