"""Exception types shared across the package."""


class PipeflowError(Exception):
    """Base class for all package errors."""


class DomainError(PipeflowError, ValueError):
    """A physical quantity left its admissible domain (e.g. density <= 0)."""


class GridMismatchError(PipeflowError, ValueError):
    """Two discrete fields or states do not live on compatible grids."""


class TopologyError(PipeflowError, ValueError):
    """A network topology is structurally unusable for the requested operation."""


class ConfigurationError(PipeflowError, ValueError):
    """Inconsistent or unsupported configuration values."""


class StepFailure(PipeflowError, RuntimeError):
    """Newton did not reach the requested residual tolerance.

    Carries the last residual norm and iteration count so callers can decide
    whether to bisect the time step or abort.
    """

    def __init__(self, message, residual_norm, iterations):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


class InitializationError(PipeflowError, RuntimeError):
    """The stationary initialization failed even with boundary continuation."""


class SimulationError(PipeflowError, RuntimeError):
    """A time step failed permanently; carries the failing step index."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step
