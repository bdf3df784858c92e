"""
Unit tests for RK4, its stability analysis, backward Euler and the exact discrete map.
"""

import sys
from pathlib import Path

# Add parent directory to sys.path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest
from scipy import optimize

from discretize import (
    backward_euler_step,
    exp_discretize,
    rk4_real_axis_boundary,
    rk4_region_boundary,
    rk4_stability_fn,
    rk4_step,
    stability_report,
    stability_report_from_eigenvalues,
)
from models import GflModel, GfmModel, LinearModel, SmibModel, steady_state
from numkit.errors import ConvergenceError, DivergenceError


def linear(lam):
    return lambda x, u: lam * x


def zero(x, u):
    return np.zeros_like(np.asarray(x, dtype=float))


def random_stable(rng, n):
    """Random matrix shifted so every eigenvalue has negative real part."""
    M = rng.standard_normal((n, n))
    shift = np.max(np.linalg.eigvals(M).real) + 0.5
    return M - shift * np.eye(n)


class TestRk4Step:
    """Tests for the explicit RK4 step."""

    def test_zero_field(self):
        x = np.array([1.0, -2.0])
        np.testing.assert_array_equal(rk4_step(zero, x, None, 0.1), x)

    def test_decay(self):
        assert rk4_step(linear(-1.0), np.array([1.0]), None, 0.1)[0] == pytest.approx(0.90483750, abs=1e-8)

    def test_unstable_growth(self):
        """h·λ = -4 amplifies by |R(-4)| = 5."""
        assert rk4_step(linear(-100.0), np.array([1.0]), None, 0.04)[0] == pytest.approx(5.0)

    @pytest.mark.parametrize("lam, h", [(-1.0, 0.1), (-50.0, 0.01), (-100.0, 0.03)])
    def test_matches_stability_function(self, lam, h):
        x = np.array([0.7])
        expected = rk4_stability_fn(h * lam) * x[0]
        assert rk4_step(linear(lam), x, None, h)[0] == pytest.approx(expected, rel=1e-12)

    def test_batch_rows_independent(self):
        X = np.array([[1.0], [2.0], [-3.0]])
        np.testing.assert_allclose(rk4_step(linear(-1.0), X, None, 0.1)[:, 0],
                                   0.90483750 * X[:, 0], rtol=1e-7)

    def test_non_finite_stage_reports_stage(self):
        def blow_up(x, u):
            return np.full_like(x, np.inf)
        with pytest.raises(DivergenceError) as info:
            rk4_step(blow_up, np.array([1.0]), None, 0.1)
        assert info.value.stage == 1

    def test_non_positive_step(self):
        with pytest.raises(ValueError):
            rk4_step(zero, np.array([1.0]), None, 0.0)


class TestStabilityRegion:
    """Tests for R(z), the region boundary and stability reports."""

    def test_stability_function_values(self):
        assert rk4_stability_fn(0) == 1.0
        assert rk4_stability_fn(-3) == pytest.approx(1.375)

    def test_real_axis_boundary(self):
        assert rk4_real_axis_boundary() == pytest.approx(-2.7853, abs=1e-4)

    def test_boundary_points_lie_on_unit_level(self):
        """Sampled boundary nodes are within one grid cell of |R| = 1."""
        points = rk4_region_boundary(resolution=400)
        assert points.shape[1] == 2 and len(points) > 100
        values = np.abs(rk4_stability_fn(points[:, 0] + 1j * points[:, 1]))
        assert np.all(np.abs(values - 1.0) < 0.15)

    def test_membership_matches_predicate(self):
        eig = np.array([-1.0, -100.0, -0.5 + 13.0j, -0.5 - 13.0j])
        report = stability_report_from_eigenvalues(eig, 0.03)
        np.testing.assert_array_equal(report.inside, np.abs(rk4_stability_fn(0.03 * eig)) <= 1.0)

    @pytest.fixture(scope="class")
    def smib_point(self):
        model = SmibModel()
        return model, steady_state(model, [1.0]), np.array([1.0])

    @pytest.mark.parametrize("fps, stable", [(25, False), (35, False), (45, True)])
    def test_smib_fast_mode(self, smib_point, fps, stable):
        """The filter mode leaves the region at 25 and 35 fps; the slow pair stays inside."""
        model, x, u = smib_point
        report = stability_report(model, x, u, 1.0 / fps)
        assert report.all_stable == stable
        for lam in report.outside_modes():
            assert lam.real < -50.0

    def test_smib_scaled_fast_mode(self, smib_point):
        model, x, u = smib_point
        report = stability_report(model, x, u, 1.0 / 25)
        assert np.min(report.scaled.real) == pytest.approx(-4.07, abs=0.03)

    @pytest.mark.parametrize("model_type", [GfmModel, GflModel])
    def test_inverters_need_2400_fps(self, model_type):
        model = model_type()
        u0 = model.nominal_input()
        x = steady_state(model, u0)
        assert not stability_report(model, x, u0, 1.0 / 1200).all_stable
        assert not stability_report(model, x, u0, 1.0 / 1800).all_stable
        assert stability_report(model, x, u0, 1.0 / 2400).all_stable

    def test_tiny_step_always_stable(self, smib_point):
        model, x, u = smib_point
        assert stability_report(model, x, u, 1e-9).all_stable


class TestBackwardEuler:
    """Tests for the implicit Euler step."""

    def test_zero_field_needs_no_iteration(self):
        y, iterations = backward_euler_step(zero, np.array([0.3, 0.4]), None, 0.1)
        np.testing.assert_array_equal(y, [0.3, 0.4])
        assert iterations == 0

    def test_stiff_decay(self):
        y, _ = backward_euler_step(linear(-100.0), np.array([1.0]), None, 0.04)
        assert y[0] == pytest.approx(0.2, abs=1e-10)

    def test_cubic_decay(self):
        y, _ = backward_euler_step(lambda x, u: -x ** 3, np.array([1.0]), None, 0.1)
        oracle = optimize.brentq(lambda s: s + 0.1 * s ** 3 - 1.0, 0.0, 1.0, xtol=1e-14)
        assert y[0] == pytest.approx(oracle, abs=1e-9)
        assert oracle == pytest.approx(0.921721, abs=1e-6)

    @pytest.mark.parametrize("lam", [-1.0, -1e3, -1e6])
    def test_l_stable_closed_form(self, lam):
        y, iterations = backward_euler_step(linear(lam), np.array([1.0]), None, 0.01)
        assert y[0] == pytest.approx(1.0 / (1.0 - 0.01 * lam), rel=1e-8, abs=1e-10)
        assert iterations <= 5

    def test_explicit_jacobian(self):
        y, _ = backward_euler_step(linear(-10.0), np.array([1.0]), None, 0.1,
                                   jac=lambda x, u: np.array([[-10.0]]))
        assert y[0] == pytest.approx(0.5, abs=1e-12)

    def test_non_convergence_carries_residual(self):
        with pytest.raises(ConvergenceError) as info:
            backward_euler_step(lambda x, u: -x ** 3, np.array([1.0]), None, 0.1, max_iter=1)
        assert info.value.iterations == 1
        assert info.value.residual > 0.0

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            backward_euler_step(zero, np.array([1.0]), None, 0.1, tol=0.0)


class TestExpDiscretize:
    """Tests for the exact discrete map of the affine surrogate."""

    def test_scalar_decay(self):
        dmap = exp_discretize([[-1.0]], [[1.0]], 0.1)
        assert dmap.phi[0, 0] == pytest.approx(0.9048374, abs=1e-7)
        assert dmap.gamma[0, 0] == pytest.approx(0.0951626, abs=1e-7)
        assert dmap.lam[0, 0] == pytest.approx(0.0951626, abs=1e-7)

    def test_nilpotent(self):
        dmap = exp_discretize([[0.0]], [[2.0]], 0.5)
        assert dmap.phi[0, 0] == pytest.approx(1.0)
        assert dmap.gamma[0, 0] == pytest.approx(1.0)
        assert dmap.lam[0, 0] == pytest.approx(0.5)

    def test_small_step_limit(self):
        F = np.array([[-2.0, 1.0], [0.0, -3.0]])
        dmap = exp_discretize(F, np.zeros((2, 1)), 1e-12)
        assert np.linalg.norm(dmap.phi - np.eye(2)) < 1e-9
        assert np.linalg.norm(dmap.lam) < 1e-9
        h = 1e-4
        assert np.linalg.norm(exp_discretize(F, np.zeros((2, 1)), h).phi - (np.eye(2) + h * F)) < 10 * h * h * np.linalg.norm(F) ** 2

    def test_stable_for_any_step(self):
        """Stable F maps to a contraction for every h."""
        rng = np.random.default_rng(5)
        for _ in range(10):
            F = random_stable(rng, 6)
            for h in (1e-3, 1.0, 1e3):
                phi = exp_discretize(F, np.zeros((6, 1)), h).phi
                assert np.max(np.abs(np.linalg.eigvals(phi))) < 1.0

    def test_half_step_composition(self):
        rng = np.random.default_rng(9)
        F = random_stable(rng, 4)
        G = rng.standard_normal((4, 2))
        full = exp_discretize(F, G, 0.3)
        half = exp_discretize(F, G, 0.15)
        np.testing.assert_allclose(full.phi, half.phi @ half.phi, atol=1e-9)
        np.testing.assert_allclose(full.gamma, half.phi @ half.gamma + half.gamma, atol=1e-9)

    def test_apply_matches_linear_propagation(self):
        """For a linear model the map reproduces sub-stepped integration."""
        model = LinearModel.from_matrices([[-1.0, 0.5], [0.0, -20.0]], B=[[1.0], [2.0]], c=[0.1, 0.0])
        P = model.params
        dmap = exp_discretize(P.A, P.B, 0.2)
        x, u = np.array([1.0, -1.0]), np.array([0.5])
        ref = x.copy()
        for _ in range(2000):
            ref = rk4_step(model.f, ref, u, 1e-4)
        np.testing.assert_allclose(dmap.apply(x, u, P.c), ref, atol=1e-10)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
