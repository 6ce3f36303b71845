"""Exception types shared across the package."""


class SeaquakeError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SeaquakeError):
    """Invalid user-supplied parameter or scenario configuration.

    ``errors`` collects every individual problem found during validation so
    a caller can report all of them at once instead of failing fast.
    """

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = list(errors) if errors else [message]


class StratificationError(SeaquakeError):
    """Background state is not a stable stratification (N^2 < 0 somewhere)."""


class NumericError(SeaquakeError):
    """A numerical procedure failed (non-convergence, invalid values)."""


class DivergenceError(NumericError):
    """Time integration produced non-finite values."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite values detected at step {step}")
