"""Exception hierarchy shared across the toolkit."""


class DriftscopeError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(DriftscopeError, ValueError):
    """Invalid configuration; the message names the offending field."""


class InputError(DriftscopeError, ValueError):
    """Input data violates a precondition (empty sample, bad sizes, ...)."""


class ShapeError(DriftscopeError, ValueError):
    """Mismatched dimensions or feature sets between two inputs."""


class EncodingError(DriftscopeError, ValueError):
    """A categorical value falls outside its declared level set."""


class DegenerateDataError(DriftscopeError, ValueError):
    """Data admits no answer: single-class labels, all-tied ranks,
    zero-variance differences, zero-marginal contingency tables."""


class CalibrationError(DriftscopeError, RuntimeError):
    """A target rate is unreachable within the search bracket."""


class ConvergenceError(DriftscopeError, RuntimeError):
    """An iterative solver failed to converge."""

    def __init__(self, message, gradient_norm=None):
        super().__init__(message)
        self.gradient_norm = gradient_norm


class NumericError(DriftscopeError, ValueError):
    """Non-finite values where finite ones are required."""


class StageError(DriftscopeError, RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage, message):
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage


class ReportParseError(DriftscopeError, ValueError):
    """A report file could not be parsed; names the file and line."""
