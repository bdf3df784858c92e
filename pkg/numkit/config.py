"""
Numerical tolerances shared by every module.
Tests reference these instead of repeating literals.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Tolerance record for kernels, solvers and filter guards."""

    # SpdMatrix checks
    symmetry_rel: float = 1e-9
    psd_slack: float = 1e-10
    jitter_scale: float = 1e-12

    # expm accuracy target for well-conditioned inputs
    expm_rel: float = 1e-12

    # chi-square quantile accuracy
    chi2_abs: float = 1e-6

    # Backward Euler Newton solve
    newton_tol: float = 1e-10
    newton_max_iter: int = 50

    # Steady-state damped Newton
    steady_state_tol: float = 1e-9
    steady_state_max_iter: int = 200

    # Filter run classification
    covariance_guard: float = 1e6
    # measurement spacing vs. filter step, relative
    step_spacing_rel: float = 1e-6
    degraded_factor: float = 10.0


TOLERANCES = Tolerances()
