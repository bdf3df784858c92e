"""
Classical fourth-order Runge-Kutta step and its absolute stability analysis.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List

import numpy as np
from scipy import optimize

from models.steady_state import numerical_jacobian
from numkit.errors import DivergenceError, NumericalError

logger = logging.getLogger(__name__)

ProcessMap = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _checked(stage: int, value: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(value)):
        raise DivergenceError("non-finite RK4 stage value", stage=stage)
    return value


def rk4_step(f: ProcessMap, x, u, h: float) -> np.ndarray:
    """
    One RK4 step with the input held constant over the interval.

    x may be a batch of shape (N, n); every row is advanced independently.

    Raises:
        DivergenceError: If a stage evaluates to a non-finite value
    """
    if not h > 0.0:
        raise ValueError(f"step must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    with np.errstate(over='ignore', invalid='ignore'):
        k1 = _checked(1, f(x, u))
        k2 = _checked(2, f(x + 0.5 * h * k1, u))
        k3 = _checked(3, f(x + 0.5 * h * k2, u))
        k4 = _checked(4, f(x + h * k3, u))
        x_next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(x_next)):
        raise DivergenceError("non-finite RK4 update")
    return x_next


def rk4_stability_fn(z):
    """
    Amplification factor R(z) = 1 + z + z²/2 + z³/6 + z⁴/24.

    Examples:
        >>> rk4_stability_fn(0)
        1.0
        >>> round(rk4_stability_fn(-3), 12)
        1.375
        >>> round(abs(rk4_stability_fn(-4)), 6)
        5.0
    """
    z = np.asarray(z, dtype=complex) if np.iscomplexobj(z) else np.asarray(z, dtype=float)
    value = 1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)))
    return value.item() if value.ndim == 0 else value


def rk4_real_axis_boundary() -> float:
    """
    Left end of the stability interval on the negative real axis.

    Examples:
        >>> round(rk4_real_axis_boundary(), 4)
        -2.7853
    """
    return float(optimize.brentq(lambda s: abs(rk4_stability_fn(s)) - 1.0, -3.0, -2.5, xtol=1e-14))


def rk4_region_boundary(resolution: int = 1000, re_range=(-4.0, 1.0),
                        im_range=(-4.0, 4.0)) -> np.ndarray:
    """
    Points of the grid that lie on |R(z)| = 1.

    A grid node is a boundary point when its inside/outside flag differs
    from its right or upper neighbour. Returns an array of shape (k, 2)
    holding (re, im) pairs, sorted by polar angle around the region centre.
    """
    re = np.linspace(re_range[0], re_range[1], resolution)
    im = np.linspace(im_range[0], im_range[1], resolution)
    zz = re[None, :] + 1j * im[:, None]
    inside = np.abs(rk4_stability_fn(zz)) <= 1.0

    edge = np.zeros_like(inside)
    edge[:, :-1] |= inside[:, :-1] != inside[:, 1:]
    edge[:-1, :] |= inside[:-1, :] != inside[1:, :]
    rows, cols = np.nonzero(edge)
    points = np.column_stack([re[cols], im[rows]])

    centre = np.array([-1.4, 0.0])
    angle = np.arctan2(points[:, 1] - centre[1], points[:, 0] - centre[0])
    return points[np.argsort(angle, kind='stable')]


@dataclass(frozen=True)
class StabilityReport:
    """Jacobian spectrum scaled by the step, with RK4 region membership per mode."""
    eigenvalues: np.ndarray
    h: float
    scaled: np.ndarray
    abs_R: np.ndarray
    inside: np.ndarray

    @property
    def all_stable(self) -> bool:
        return bool(np.all(self.inside))

    def outside_modes(self) -> List[complex]:
        return [complex(lam) for lam, ok in zip(self.eigenvalues, self.inside) if not ok]


def stability_report_from_eigenvalues(eigenvalues, h: float) -> StabilityReport:
    if not h > 0.0:
        raise ValueError(f"step must be positive, got {h}")
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    scaled = h * eigenvalues
    abs_R = np.abs(rk4_stability_fn(scaled))
    return StabilityReport(
        eigenvalues=eigenvalues,
        h=float(h),
        scaled=scaled,
        abs_R=np.atleast_1d(abs_R),
        inside=np.atleast_1d(abs_R <= 1.0),
    )


def jacobian_eigenvalues(model, x_op, u_op) -> np.ndarray:
    """Eigenvalues of the forward-difference Jacobian, ordered by real part."""
    J = numerical_jacobian(model, x_op, u_op)
    try:
        lam = np.linalg.eigvals(J)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"eigenvalue computation failed: {e}") from e
    return lam[np.lexsort((lam.imag, lam.real))]


def stability_report(model, x_op, u_op, h: float) -> StabilityReport:
    """RK4 stability of every Jacobian mode at the operating point for step h."""
    report = stability_report_from_eigenvalues(jacobian_eigenvalues(model, x_op, u_op), h)
    if not report.all_stable:
        logger.info(f"{model.model_name}: {len(report.outside_modes())} mode(s) outside the "
                    f"RK4 region at h = {h:.3e} s")
    return report


if __name__ == "__main__":
    import doctest
    print("Running doctest for runge_kutta.py...")
    result = doctest.testmod(verbose=True)
    if result.failed == 0:
        print(f"\n✅ All {result.attempted} doctests passed!")
    else:
        print(f"\n❌ {result.failed} out of {result.attempted} doctests failed!")
