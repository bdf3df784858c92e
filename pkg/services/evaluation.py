"""
Filter metrics: NIS consistency, RMSE against truth and the one-step
convergence-order study of the stiffness-aware prediction.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from decorators.logging_decorators import log_calls, performance_log
from filters.prediction_strategy import sa_ukf_predict
from filters.sigma_points import cross_covariance, joint_sigma_set, weighted_mean
from filters.types import FilterTrace, NoiseSpec, StateEstimate
from numkit.linalg import chi2_quantile, spd_solve
from services.simulation_service import TruthTrace, substep_propagate

logger = logging.getLogger(__name__)

# Relative error below which an order fit is reported as exact
EXACT_FLOOR = 1e-10


def nis(innovation, S) -> float:
    """
    Normalized innovation squared νᵀ S⁻¹ ν.

    Examples:
        >>> nis([2.0], [[4.0]])
        1.0
    """
    innovation = np.atleast_1d(np.asarray(innovation, dtype=float))
    S = np.atleast_2d(np.asarray(S, dtype=float))
    return float(innovation @ spd_solve(S, innovation))


@dataclass(frozen=True)
class NisSeries:
    values: np.ndarray
    dof: int
    band: Tuple[float, float]
    in_band_fraction: float

    def __str__(self):
        return (f"NIS dof={self.dof} band=({self.band[0]:.4f}, {self.band[1]:.4f}) "
                f"in-band {100 * self.in_band_fraction:.1f}%")


def nis_band(dof: int, confidence: float = 0.95) -> Tuple[float, float]:
    tail = 0.5 * (1.0 - confidence)
    return chi2_quantile(dof, tail), chi2_quantile(dof, 1.0 - tail)


def nis_series(values, dof: int, confidence: float = 0.95) -> NisSeries:
    """Two-sided chi-square band check; NaN entries (the initial row) are skipped."""
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    lower, upper = nis_band(dof, confidence)
    inside = (values >= lower) & (values <= upper)
    fraction = float(np.mean(inside)) if values.size else 0.0
    return NisSeries(values, int(dof), (lower, upper), fraction)


def trace_nis(trace: FilterTrace, dof: int, confidence: float = 0.95) -> NisSeries:
    return nis_series(trace.nis_array(), dof, confidence)


def rmse(estimates, truth, selection: Optional[Sequence[int]] = None) -> np.ndarray:
    """
    Root-mean-square error per selected state over aligned rows.

    Raises:
        ValueError: If the two sequences are not on the same grid
    """
    estimates = np.atleast_2d(np.asarray(estimates, dtype=float))
    truth = np.atleast_2d(np.asarray(truth, dtype=float))
    if estimates.shape != truth.shape:
        raise ValueError(f"grid mismatch: estimates {estimates.shape} vs truth {truth.shape}")
    if selection is not None:
        estimates = estimates[:, list(selection)]
        truth = truth[:, list(selection)]
    return np.sqrt(np.mean((estimates - truth) ** 2, axis=0))


def align_truth(truth: TruthTrace, times) -> np.ndarray:
    """
    Truth states at the given times by exact index subsampling.

    Raises:
        ValueError: If a time is not a node of the truth grid
    """
    times = np.asarray(times, dtype=float)
    dt = truth.dt
    position = times / dt
    index = np.rint(position).astype(int)
    if np.any(np.abs(position - index) > 1e-6) or np.any(index >= len(truth)) or np.any(index < 0):
        raise ValueError("grid mismatch: filter times are not truth grid nodes; "
                         "choose fps so that 1/(fps·truth_dt) is an integer")
    return truth.states[index]


def trace_rmse(trace: FilterTrace, truth: TruthTrace, states: Sequence[str] = None) -> Dict[str, float]:
    """RMSE per named state over the rows the trace holds."""
    names = list(trace.state_names if states is None else states)
    selection = [trace.state_names.index(s) for s in names]
    values = rmse(trace.mean_array(), align_truth(truth, trace.times), selection)
    return dict(zip(names, values.tolist()))


@dataclass(frozen=True)
class OrderFit:
    """Log-log slope of an error sequence; exact=True when every error is at the rounding floor."""
    errors: np.ndarray
    slope: Optional[float]
    exact: bool

    def __str__(self):
        return "exact" if self.exact else f"{self.slope:.3f}"


@dataclass(frozen=True)
class OrderStudy:
    steps: np.ndarray
    mean: OrderFit
    covariance: OrderFit


def fit_order(steps, errors, scale: float = 1.0) -> OrderFit:
    steps = np.asarray(steps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.all(errors <= EXACT_FLOOR * max(scale, 1.0)):
        return OrderFit(errors, None, True)
    slope = np.polyfit(np.log(steps), np.log(np.maximum(errors, np.finfo(float).tiny)), 1)[0]
    return OrderFit(errors, float(slope), False)


@performance_log
@log_calls
def order_study(model, estimate: StateEstimate, u, steps: Sequence[float],
                Psi=None, substeps: int = 10_000) -> OrderStudy:
    """
    One-step error of the stiffness-aware prediction against sub-stepped
    propagation of the same sigma points, as a function of h.

    Both sides use Q = 0. The mean error is the Euclidean norm and the
    covariance error the Frobenius norm.

    Raises:
        ValueError: If fewer than 4 steps are given or they span less than 8×
    """
    steps = np.sort(np.asarray(steps, dtype=float))[::-1]
    if steps.size < 4 or steps[0] / steps[-1] < 8.0 * (1 - 1e-12):
        raise ValueError("order study needs at least 4 step sizes spanning a factor of 8")
    u = np.asarray(u, dtype=float)
    Psi = np.zeros((model.m, model.m)) if Psi is None else np.asarray(Psi, dtype=float)
    noise = NoiseSpec(Q=np.zeros((model.n, model.n)), R=np.eye(model.p), Psi=Psi)

    sigma = joint_sigma_set(estimate.mean, estimate.cov, u, Psi)
    mean_errors, cov_errors = [], []
    for h in steps:
        predicted, _, _ = sa_ukf_predict(estimate, u, noise, model, h)
        propagated = substep_propagate(model, sigma.states, sigma.inputs, h, substeps)
        ref_mean = weighted_mean(sigma.weights, propagated)
        ref_cov = cross_covariance(sigma.weights, propagated, ref_mean, propagated, ref_mean)
        mean_errors.append(np.linalg.norm(predicted.mean - ref_mean))
        cov_errors.append(np.linalg.norm(predicted.cov - ref_cov, 'fro'))

    study = OrderStudy(
        steps=steps,
        mean=fit_order(steps, mean_errors, float(np.linalg.norm(estimate.mean))),
        covariance=fit_order(steps, cov_errors, float(np.linalg.norm(estimate.cov))),
    )
    logger.info(f"Order study on {model.model_name}: mean slope {study.mean}, "
                f"covariance slope {study.covariance}")
    return study


if __name__ == "__main__":
    import doctest
    print("Running doctest for evaluation.py...")
    result = doctest.testmod(verbose=True)
    if result.failed == 0:
        print(f"\n✅ All {result.attempted} doctests passed!")
    else:
        print(f"\n❌ {result.failed} out of {result.attempted} doctests failed!")
