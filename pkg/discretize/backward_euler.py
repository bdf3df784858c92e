"""
Implicit backward Euler step solved by Newton's method.

    x_k = x_{k-1} + h·f(x_k, u)

The Newton matrix I - h·J uses a forward-difference Jacobian that is
recomputed at every iteration.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np

from models.steady_state import forward_difference_jacobian
from numkit.config import TOLERANCES
from numkit.errors import ConvergenceError, SingularMatrixError

logger = logging.getLogger(__name__)

ProcessMap = Callable[[np.ndarray, np.ndarray], np.ndarray]
JacobianProvider = Callable[[np.ndarray, np.ndarray], np.ndarray]


def finite_difference_jacobian(f: ProcessMap) -> JacobianProvider:
    """Wraps a vectorised process map into a forward-difference Jacobian provider."""
    def jac(x, u):
        return forward_difference_jacobian(lambda y: f(y, u), x)
    return jac


def backward_euler_step(f: ProcessMap, x, u, h: float,
                        jac: Optional[JacobianProvider] = None,
                        tol: float = None, max_iter: int = None) -> Tuple[np.ndarray, int]:
    """
    One backward Euler step from x, Newton started at x itself.

    Returns:
        (x_next, iterations) where iterations counts Newton updates; a step
        whose initial residual is already within tol reports 0

    Raises:
        ConvergenceError: If ‖y - x - h·f(y, u)‖∞ > tol after max_iter updates
        SingularMatrixError: If the Newton matrix cannot be factorized
    """
    if not h > 0.0:
        raise ValueError(f"step must be positive, got {h}")
    tol = TOLERANCES.newton_tol if tol is None else tol
    max_iter = TOLERANCES.newton_max_iter if max_iter is None else max_iter
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    jac = finite_difference_jacobian(f) if jac is None else jac

    x = np.asarray(x, dtype=float)
    n = x.size
    y = x.copy()
    residual = y - x - h * f(y, u)
    norm = float(np.max(np.abs(residual))) if n else 0.0
    iterations = 0
    while not norm <= tol:
        if iterations >= max_iter or not np.isfinite(norm):
            raise ConvergenceError("backward Euler Newton iteration failed", norm, iterations)
        M = np.eye(n) - h * jac(y, u)
        try:
            y = y - np.linalg.solve(M, residual)
        except np.linalg.LinAlgError as e:
            raise SingularMatrixError(f"singular Newton matrix at iteration {iterations}") from e
        iterations += 1
        with np.errstate(over='ignore', invalid='ignore'):
            residual = y - x - h * f(y, u)
        norm = float(np.max(np.abs(residual)))
    return y, iterations
