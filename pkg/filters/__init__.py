"""Sigma-point filters: stiffness-aware, RK4 and backward Euler prediction with a shared correction."""

from filters.types import (
    StateEstimate,
    NoiseSpec,
    SigmaSet,
    LinearSurrogate,
    NewtonStats,
    FilterSettings,
    FilterOutcome,
    FilterTrace,
    build_noise_spec,
    resolve_q0,
)
from filters.sigma_points import unscented_transform, joint_sigma_set, statistical_linearize
from filters.prediction_strategy import (
    PredictionStrategy,
    StiffnessAwareStrategy,
    RungeKuttaStrategy,
    BackwardEulerStrategy,
    create_strategy,
    sa_ukf_predict,
    rk4_ukf_predict,
    be_ukf_predict,
)
from filters.ukf import UnscentedFilter, correct, run_filter

__all__ = [
    'StateEstimate',
    'NoiseSpec',
    'SigmaSet',
    'LinearSurrogate',
    'NewtonStats',
    'FilterSettings',
    'FilterOutcome',
    'FilterTrace',
    'build_noise_spec',
    'resolve_q0',
    'unscented_transform',
    'joint_sigma_set',
    'statistical_linearize',
    'PredictionStrategy',
    'StiffnessAwareStrategy',
    'RungeKuttaStrategy',
    'BackwardEulerStrategy',
    'create_strategy',
    'sa_ukf_predict',
    'rk4_ukf_predict',
    'be_ukf_predict',
    'UnscentedFilter',
    'correct',
    'run_filter',
]
