"""
Exception hierarchy for the toolkit.
The CLI maps these onto its exit codes (2 input, 3 divergence, 4 numerical).
"""

from typing import Optional


class StiffkitError(Exception):
    """Base class of every error raised by the toolkit."""


class ScenarioError(StiffkitError, ValueError):
    """Invalid scenario, parameter set or command-line input."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field and field not in message:
            message = f"{field}: {message}"
        super().__init__(message)


class NumericalError(StiffkitError, ArithmeticError):
    """Base class of numerical failures."""


class IndefiniteMatrixError(NumericalError):
    """Matrix expected to be positive semidefinite is not."""

    def __init__(self, message: str, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(f"{message} (minimum eigenvalue estimate {min_eigenvalue:.6e})")


class SingularMatrixError(NumericalError):
    """Matrix could not be factorized even after jitter."""


class MatrixOverflowError(NumericalError):
    """Matrix function result left the representable range."""


class ConvergenceError(NumericalError):
    """Iterative solver did not reach its tolerance."""

    def __init__(self, message: str, residual: float, iterations: int,
                 sigma_index: Optional[int] = None):
        self.residual = residual
        self.iterations = iterations
        self.sigma_index = sigma_index
        where = f" at sigma point {sigma_index}" if sigma_index is not None else ""
        super().__init__(
            f"{message}{where}: residual {residual:.3e} after {iterations} iterations"
        )


class DivergenceError(NumericalError):
    """Explicit integration produced non-finite values."""

    def __init__(self, message: str, stage: Optional[int] = None, step: Optional[int] = None):
        self.stage = stage
        self.step = step
        parts = [message]
        if stage is not None:
            parts.append(f"stage {stage}")
        if step is not None:
            parts.append(f"step {step}")
        super().__init__(", ".join(parts))


class FilterStepError(NumericalError):
    """A filter step failed; wraps the underlying cause."""

    def __init__(self, step: int, cause: Exception):
        self.step = step
        self.cause = cause
        super().__init__(f"filter step {step} failed: {type(cause).__name__}: {cause}")


class SimulationError(StiffkitError):
    """Truth simulation cannot be run safely with the requested settings."""


class TraceFormatError(StiffkitError, ValueError):
    """Malformed trace CSV."""

    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")
