"""Exception hierarchy shared by all coupledsir modules."""


class CoupledSirError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(CoupledSirError, ValueError):
    """A function argument violates its documented precondition."""


class ConvergenceError(CoupledSirError, RuntimeError):
    """An iterative numerical routine failed to reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SupercriticalLayerError(CoupledSirError, ValueError):
    """Layer 2 sustains the epidemic on its own (tau22 * lambda(A22) >= 1),
    so the layer-1 threshold is undefined."""


class GraphFormatError(CoupledSirError, ValueError):
    """An edge-list file is malformed; carries the offending line number."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class StepSizeError(CoupledSirError, RuntimeError):
    """The fixed-step integrator violated a state invariant; retry with a
    smaller dt."""


class CalibrationError(CoupledSirError, RuntimeError):
    """Rate calibration could not place the ensemble mean inside the target
    interval; carries the bisection trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class BoundaryError(CoupledSirError, RuntimeError):
    """A regime-boundary bisection bracket never crossed the probability
    threshold for one grid value."""


class ConfigError(CoupledSirError, ValueError):
    """A run configuration is invalid; the message names the offending key."""
