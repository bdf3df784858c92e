"""One-step discretization schemes and RK4 stability analysis."""

from discretize.runge_kutta import (
    StabilityReport,
    rk4_step,
    rk4_stability_fn,
    rk4_real_axis_boundary,
    rk4_region_boundary,
    stability_report,
    stability_report_from_eigenvalues,
    jacobian_eigenvalues,
)
from discretize.backward_euler import backward_euler_step, finite_difference_jacobian
from discretize.matrix_exponential import DiscreteMap, exp_discretize, augmented_matrix

__all__ = [
    'StabilityReport',
    'rk4_step',
    'rk4_stability_fn',
    'rk4_real_axis_boundary',
    'rk4_region_boundary',
    'stability_report',
    'stability_report_from_eigenvalues',
    'jacobian_eigenvalues',
    'backward_euler_step',
    'finite_difference_jacobian',
    'DiscreteMap',
    'exp_discretize',
    'augmented_matrix',
]
