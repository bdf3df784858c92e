"""Dense small-matrix numerical kernels."""

from numkit.config import Tolerances, TOLERANCES
from numkit.errors import (
    StiffkitError,
    ScenarioError,
    NumericalError,
    IndefiniteMatrixError,
    SingularMatrixError,
    MatrixOverflowError,
    ConvergenceError,
    DivergenceError,
    FilterStepError,
    SimulationError,
    TraceFormatError,
)
from numkit.linalg import expm, spd_sqrt, spd_solve, chi2_quantile, symmetrize, min_eigenvalue

__all__ = [
    'Tolerances',
    'TOLERANCES',
    'StiffkitError',
    'ScenarioError',
    'NumericalError',
    'IndefiniteMatrixError',
    'SingularMatrixError',
    'MatrixOverflowError',
    'ConvergenceError',
    'DivergenceError',
    'FilterStepError',
    'SimulationError',
    'TraceFormatError',
    'expm',
    'spd_sqrt',
    'spd_solve',
    'chi2_quantile',
    'symmetrize',
    'min_eigenvalue',
]
