"""
Sigma-point correction step, the filter context and the run loop.
"""

import logging
import time
from typing import Optional, Sequence, Tuple

import numpy as np

from decorators.logging_decorators import log_calls, performance_log
from filters.prediction_strategy import PredictionStrategy, create_strategy
from filters.sigma_points import cross_covariance, joint_sigma_set, weighted_mean
from filters.types import (
    FilterOutcome,
    FilterSettings,
    FilterTrace,
    NewtonStats,
    NoiseSpec,
    StateEstimate,
)
from numkit.config import TOLERANCES
from numkit.errors import (
    DivergenceError,
    FilterStepError,
    IndefiniteMatrixError,
    MatrixOverflowError,
    NumericalError,
    ScenarioError,
)
from numkit.linalg import spd_solve, symmetrize

logger = logging.getLogger(__name__)

# Failures that mean the estimate blew up rather than a solver bug
DIVERGENT_ERRORS = (DivergenceError, IndefiniteMatrixError, MatrixOverflowError)


def correct(pred: StateEstimate, mu, z, noise: NoiseSpec, model) -> Tuple[StateEstimate, np.ndarray, np.ndarray]:
    """
    Measurement update with sigma points regenerated from (prior mean, μ_k).

    Returns:
        (posterior, innovation z - z̄, innovation covariance S = P_zz)

    Raises:
        SingularMatrixError: If P_zz cannot be factorized
    """
    sigma = joint_sigma_set(pred.mean, pred.cov, mu, noise.Psi)
    Z = model.h(sigma.states, sigma.inputs)
    w = sigma.weights

    z_mean = weighted_mean(w, Z)
    S = symmetrize(cross_covariance(w, Z, z_mean, Z, z_mean) + noise.R)
    P_xz = cross_covariance(w, sigma.states, pred.mean, Z, z_mean)
    K = spd_solve(S, P_xz.T).T

    innovation = np.asarray(z, dtype=float).reshape(-1) - z_mean
    mean = pred.mean + K @ innovation
    cov = symmetrize(pred.cov - K @ S @ K.T)
    return StateEstimate(mean, cov, pred.time_index), innovation, S


class UnscentedFilter:
    """
    Filter context: one model, one noise specification and an exchangeable
    prediction strategy. Correction is shared by every strategy.

    Examples:
        >>> from models.linear import LinearModel
        >>> from filters.types import NoiseSpec
        >>> ukf = UnscentedFilter(LinearModel(), NoiseSpec(0.0, 1.0, 0.0), "sa")
        >>> ukf.get_strategy_name()
        'sa'
        >>> ukf.set_strategy(create_strategy("be"))
        >>> ukf.get_strategy_name()
        'be'
    """

    def __init__(self, model, noise: NoiseSpec, strategy="sa", settings: FilterSettings = None):
        noise.check_dimensions(model)
        self.model = model
        self.noise = noise
        self.settings = settings or FilterSettings()
        self._strategy = self._as_strategy(strategy)

    def _as_strategy(self, strategy) -> PredictionStrategy:
        if isinstance(strategy, PredictionStrategy):
            return strategy
        return create_strategy(strategy, self.settings.newton_tol, self.settings.newton_max_iter)

    def set_strategy(self, strategy):
        """Changes the prediction scheme."""
        self._strategy = self._as_strategy(strategy)

    def get_strategy_name(self) -> str:
        return self._strategy.name

    def step(self, est: StateEstimate, mu_prev, mu, z, h: float) -> Tuple[StateEstimate, float, Optional[NewtonStats]]:
        """One predict (input μ_{k-1}) and correct (μ_k, z_k) cycle; returns posterior, NIS and Newton stats."""
        prediction = self._strategy.predict(est, mu_prev, self.noise, self.model, h)
        posterior, innovation, S = correct(prediction.estimate, mu, z, self.noise, self.model)
        nis_value = float(innovation @ spd_solve(S, innovation))
        return posterior, nis_value, prediction.newton

    def run(self, init: StateEstimate, inputs, outputs, h: float,
            times: Optional[Sequence[float]] = None) -> FilterTrace:
        """
        Filters a whole measurement sequence.

        Row 0 of the trace is init (NIS NaN). A divergence ends the run
        with the trace kept up to the failing step; any other numerical
        failure is raised as FilterStepError.
        """
        inputs = np.asarray(inputs, dtype=float).reshape(len(inputs), self.model.m)
        outputs = np.asarray(outputs, dtype=float).reshape(len(outputs), self.model.p)
        if len(inputs) != len(outputs):
            raise ScenarioError(f"{len(inputs)} input samples but {len(outputs)} output samples",
                                "outputs")
        if len(inputs) == 0:
            raise ScenarioError("measurement sequence is empty", "inputs")
        if not h > 0.0:
            raise ScenarioError(f"step must be positive, got {h}", "h")
        times = np.arange(len(inputs)) * h if times is None else np.asarray(times, dtype=float)
        if len(times) != len(inputs):
            raise ScenarioError(f"{len(times)} time stamps but {len(inputs)} samples", "times")
        spacing = np.diff(times)
        if spacing.size and not np.allclose(spacing, h, rtol=TOLERANCES.step_spacing_rel, atol=0.0):
            worst = spacing[np.argmax(np.abs(spacing - h))]
            raise ScenarioError(f"sample spacing {worst:.6g} s does not match the filter step {h:.6g} s",
                                "times")

        method = self.get_strategy_name()
        trace = FilterTrace(method=method, state_names=tuple(self.model.state_names), h=h)
        if method == "be":
            trace.newton_avg, trace.newton_max = [], []
        trace.record(times[0], init, float("nan"), 0.0)

        var0 = init.variances
        floor = np.mean(var0) if np.any(var0 > 0) else 1.0
        limit = self.settings.covariance_guard * np.where(var0 > 0, var0, floor)

        est = init
        for k in range(1, len(inputs)):
            start = time.perf_counter()
            try:
                est, nis_value, newton = self.step(est, inputs[k - 1], inputs[k], outputs[k], h)
            except DIVERGENT_ERRORS as e:
                self._mark_divergent(trace, k, f"{type(e).__name__}: {e}")
                break
            except NumericalError as e:
                raise FilterStepError(k, e) from e
            elapsed = time.perf_counter() - start

            finite = np.all(np.isfinite(est.mean)) and np.all(np.isfinite(est.cov))
            if finite:
                trace.record(times[k], est, nis_value, elapsed, newton)
            if not finite or np.any(est.variances > limit):
                self._mark_divergent(trace, k, "covariance guard tripped" if finite
                                     else "non-finite posterior")
                break

        if trace.completed:
            logger.info(f"{method} filter completed {len(trace) - 1} steps at h = {h:.4g} s")
        return trace

    @staticmethod
    def _mark_divergent(trace: FilterTrace, step: int, message: str):
        trace.outcome = FilterOutcome.DIVERGENT
        trace.failure_step = step
        trace.message = message
        logger.warning(f"{trace.method} filter diverged at step {step}: {message}")


@performance_log
@log_calls
def run_filter(kind: str, model, noise: NoiseSpec, init: StateEstimate, inputs, outputs,
               h: float, settings: FilterSettings = None, times=None) -> FilterTrace:
    """Runs the "sa", "rk4" or "be" filter over a measurement sequence."""
    return UnscentedFilter(model, noise, kind, settings).run(init, inputs, outputs, h, times)
