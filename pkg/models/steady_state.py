"""
Forward-difference Jacobians and steady-state initialization by damped Newton.
"""

import logging
from typing import Callable, Optional

import numpy as np

from decorators.logging_decorators import log_calls
from models.base import DynamicModel
from numkit.config import TOLERANCES
from numkit.errors import ConvergenceError, SingularMatrixError

logger = logging.getLogger(__name__)

SQRT_EPS = float(np.sqrt(np.finfo(float).eps))

# Halvings allowed per Newton step before the step is taken anyway
MAX_HALVINGS = 30


def forward_difference_jacobian(fun: Callable[[np.ndarray], np.ndarray], x,
                                fx: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Jacobian of a vectorised map by forward differences.

    Column j uses the step δ_j = √ε·(1 + |x_j|). All perturbed points are
    evaluated in a single call, so fun must accept an (n, n) batch.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if fx is None:
        fx = fun(x)
    steps = SQRT_EPS * (1.0 + np.abs(x))
    perturbed = x + np.diag(steps)
    return ((fun(perturbed) - fx) / steps[:, None]).T


def numerical_jacobian(model: DynamicModel, x, u) -> np.ndarray:
    """∂f/∂x at (x, u), shape (n, n)."""
    u = np.asarray(u, dtype=float)
    return forward_difference_jacobian(lambda y: model.f(y, u), x)


@log_calls
def steady_state(model: DynamicModel, u0, guess=None, tol: float = None,
                 max_iter: int = None) -> np.ndarray:
    """
    Equilibrium x* with ‖f(x*, u0)‖∞ < tol by damped Newton.

    The step is halved while the residual grows. When the model has a
    closed-form equilibrium the Newton result is compared against it.

    Raises:
        ConvergenceError: If the residual stays above tol after max_iter iterations
        SingularMatrixError: If the Jacobian is singular at an iterate
    """
    tol = TOLERANCES.steady_state_tol if tol is None else tol
    max_iter = TOLERANCES.steady_state_max_iter if max_iter is None else max_iter
    u0 = np.asarray(u0, dtype=float)
    x = np.array(model.flat_start(u0) if guess is None else guess, dtype=float)

    fx = model.f(x, u0)
    residual = float(np.max(np.abs(fx)))
    iterations = 0
    while residual >= tol:
        if iterations >= max_iter:
            raise ConvergenceError(f"{model.model_name} steady state did not converge",
                                   residual, iterations)
        J = forward_difference_jacobian(lambda y: model.f(y, u0), x, fx)
        try:
            step = np.linalg.solve(J, -fx)
        except np.linalg.LinAlgError as e:
            raise SingularMatrixError(
                f"singular Jacobian in steady-state solve at iteration {iterations}") from e

        scale = 1.0
        for _ in range(MAX_HALVINGS):
            candidate = x + scale * step
            f_candidate = model.f(candidate, u0)
            r_candidate = float(np.max(np.abs(f_candidate)))
            if np.isfinite(r_candidate) and r_candidate < residual:
                break
            scale *= 0.5
        iterations += 1
        if not np.isfinite(r_candidate):
            raise ConvergenceError(f"{model.model_name} steady state left the finite range",
                                   residual, iterations)
        x, fx, residual = candidate, f_candidate, r_candidate

    logger.info(f"{model.model_name} steady state: residual {residual:.2e} "
                f"after {iterations} Newton iterations")

    closed = model.closed_form_equilibrium(u0)
    if closed is not None:
        gap = float(np.max(np.abs(closed - x)))
        if gap > 1e-6:
            logger.warning(f"{model.model_name} steady state differs from closed form by {gap:.2e}")
    return x
