"""Exception types shared across the package."""


class MatrixError(ValueError):
    """Malformed or inconsistent measurement-matrix input."""


class DegenerateDataError(ValueError):
    """Input data carries no usable signal (zero variance, constant values, ...)."""


class ConvergenceError(RuntimeError):
    """An iterative fit failed to converge."""

    def __init__(self, message: str, deviance: float | None = None):
        super().__init__(message)
        self.deviance = deviance


class WindowError(ValueError):
    """The central-matching window does not contain a usable density peak."""
