from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Type
import logging

import numpy as np

from discretize.backward_euler import backward_euler_step
from discretize.matrix_exponential import DiscreteMap, exp_discretize
from discretize.runge_kutta import rk4_step
from filters.sigma_points import cross_covariance, joint_sigma_set, statistical_linearize, weighted_mean
from filters.types import LinearSurrogate, NewtonStats, NoiseSpec, SigmaSet, StateEstimate
from numkit.config import TOLERANCES
from numkit.errors import ConvergenceError, ScenarioError
from numkit.linalg import symmetrize

# Configure logger for prediction strategies
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Prediction:
    """Predicted estimate plus whatever by-products the strategy produces."""
    estimate: StateEstimate
    surrogate: Optional[LinearSurrogate] = None
    discrete: Optional[DiscreteMap] = None
    newton: Optional[NewtonStats] = None


def _recombine(sigma: SigmaSet, propagated: np.ndarray, Q, time_index: int) -> StateEstimate:
    w = sigma.weights
    mean = weighted_mean(w, propagated)
    cov = symmetrize(cross_covariance(w, propagated, mean, propagated, mean) + Q)
    return StateEstimate(mean, cov, time_index)


class PredictionStrategy(ABC):
    """Abstract base class for time-update schemes."""

    name: str = ""

    @abstractmethod
    def predict(self, est: StateEstimate, mu, noise: NoiseSpec, model, h: float) -> Prediction:
        """
        Propagates est over one hold interval of length h with measured input mu.

        Args:
            est: Posterior at the previous step
            mu: Measured input held over the interval
            noise: Noise covariances
            model: Dynamic model providing f
            h: Interval length, seconds

        Returns:
            Prediction holding the prior at the next step
        """
        pass


class StiffnessAwareStrategy(PredictionStrategy):
    """
    Statistical linearization over the sigma set followed by exact
    matrix-exponential propagation of the affine surrogate.
    """

    name = "sa"

    def predict(self, est, mu, noise, model, h) -> Prediction:
        mu = np.asarray(mu, dtype=float)
        sigma = joint_sigma_set(est.mean, est.cov, mu, noise.Psi)
        surrogate = statistical_linearize(sigma, model.f, est.cov, noise.Psi, est.mean, mu)
        dmap = exp_discretize(surrogate.F, surrogate.G, h)

        phi, gamma, lam = dmap.phi, dmap.gamma, dmap.lam
        mean = phi @ est.mean + gamma @ mu + lam @ surrogate.d
        cov = (phi @ est.cov @ phi.T + gamma @ noise.Psi @ gamma.T
               + lam @ surrogate.Omega @ lam.T + noise.Q)
        prior = StateEstimate(mean, symmetrize(cov), est.time_index + 1)
        return Prediction(prior, surrogate=surrogate, discrete=dmap)


class RungeKuttaStrategy(PredictionStrategy):
    """Every joint sigma point advanced by one explicit RK4 step."""

    name = "rk4"

    def predict(self, est, mu, noise, model, h) -> Prediction:
        sigma = joint_sigma_set(est.mean, est.cov, mu, noise.Psi)
        propagated = rk4_step(model.f, sigma.states, sigma.inputs, h)
        return Prediction(_recombine(sigma, propagated, noise.Q, est.time_index + 1))


class BackwardEulerStrategy(PredictionStrategy):
    """Every joint sigma point advanced by one backward Euler step solved with Newton."""

    name = "be"

    def __init__(self, tol: float = None, max_iter: int = None):
        self.tol = TOLERANCES.newton_tol if tol is None else tol
        self.max_iter = TOLERANCES.newton_max_iter if max_iter is None else max_iter

    def predict(self, est, mu, noise, model, h) -> Prediction:
        sigma = joint_sigma_set(est.mean, est.cov, mu, noise.Psi)
        X, U = sigma.states, sigma.inputs
        propagated = np.empty_like(X)
        counts = np.zeros(len(sigma), dtype=int)
        for i in range(len(sigma)):
            try:
                propagated[i], counts[i] = backward_euler_step(
                    model.f, X[i], U[i], h, tol=self.tol, max_iter=self.max_iter)
            except ConvergenceError as e:
                raise ConvergenceError("backward Euler Newton iteration failed",
                                       e.residual, e.iterations, sigma_index=i) from e
        newton = NewtonStats.from_counts(counts)
        return Prediction(_recombine(sigma, propagated, noise.Q, est.time_index + 1), newton=newton)


STRATEGIES: Dict[str, Type[PredictionStrategy]] = {
    StiffnessAwareStrategy.name: StiffnessAwareStrategy,
    RungeKuttaStrategy.name: RungeKuttaStrategy,
    BackwardEulerStrategy.name: BackwardEulerStrategy,
}


def create_strategy(kind: str, tol: float = None, max_iter: int = None) -> PredictionStrategy:
    """Strategy instance for "sa", "rk4" or "be"."""
    strategy_class = STRATEGIES.get(str(kind).lower())
    if strategy_class is None:
        raise ScenarioError(f"unknown filter {kind!r}; available: {', '.join(STRATEGIES)}", "filter")
    if strategy_class is BackwardEulerStrategy:
        return BackwardEulerStrategy(tol, max_iter)
    return strategy_class()


def sa_ukf_predict(est, mu, noise, model, h) -> Tuple[StateEstimate, LinearSurrogate, DiscreteMap]:
    p = StiffnessAwareStrategy().predict(est, mu, noise, model, h)
    return p.estimate, p.surrogate, p.discrete


def rk4_ukf_predict(est, mu, noise, model, h) -> StateEstimate:
    return RungeKuttaStrategy().predict(est, mu, noise, model, h).estimate


def be_ukf_predict(est, mu, noise, model, h, tol: float = None,
                   max_iter: int = None) -> Tuple[StateEstimate, NewtonStats]:
    p = BackwardEulerStrategy(tol, max_iter).predict(est, mu, noise, model, h)
    return p.estimate, p.newton
