"""
Unit tests for the dense linear-algebra kernels.
"""

import sys
from pathlib import Path

# Add parent directory to sys.path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

import math

import numpy as np
import pytest

from numkit import (
    TOLERANCES,
    IndefiniteMatrixError,
    MatrixOverflowError,
    ScenarioError,
    SingularMatrixError,
    chi2_quantile,
    expm,
    spd_solve,
    spd_sqrt,
)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


class TestExpm:
    """Tests for the matrix exponential."""

    def test_zero_matrix_gives_identity(self):
        """e^0 = I."""
        np.testing.assert_array_equal(expm(np.zeros((2, 2))), np.eye(2))

    def test_diagonal_matches_scalar_exponentials(self):
        """Diagonal input exponentiates entrywise."""
        E = expm(np.diag([-0.1, -0.2]))
        np.testing.assert_allclose(np.diag(E), [0.904837418, 0.818730753], rtol=1e-9)
        assert E[0, 1] == 0.0 and E[1, 0] == 0.0

    def test_nilpotent_series_truncates(self):
        """Ξ² = 0 gives I + Ξ exactly (up to rounding)."""
        N = 0.5 * np.array([[0.0, 2.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        expected = np.array([[1.0, 1.0, 0.5], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        np.testing.assert_allclose(expm(N), expected, atol=1e-14)

    def test_inverse_identity(self, rng):
        """expm(A)·expm(-A) = I on random 5×5 matrices."""
        for _ in range(20):
            A = rng.uniform(-5.0, 5.0, (5, 5))
            E, E_inv = expm(A), expm(-A)
            scale = np.linalg.norm(E) * np.linalg.norm(E_inv)
            np.testing.assert_allclose(E @ E_inv, np.eye(5), atol=1e-9 * max(scale, 1.0))

    def test_semigroup(self, rng):
        """expm(A/2)² = expm(A)."""
        for _ in range(20):
            A = rng.uniform(-5.0, 5.0, (5, 5))
            half = expm(0.5 * A)
            E = expm(A)
            np.testing.assert_allclose(half @ half, E, rtol=1e-9, atol=1e-9 * np.linalg.norm(E))

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            expm(np.zeros((2, 3)))

    def test_overflow_is_explicit(self):
        """Huge entries raise instead of returning inf."""
        with pytest.raises(MatrixOverflowError):
            expm(np.array([[1e6, 0.0], [0.0, 0.0]]))

    def test_non_finite_input_rejected(self):
        with pytest.raises(MatrixOverflowError):
            expm(np.array([[np.nan]]))


class TestSpdSqrt:
    """Tests for the Cholesky square root."""

    def test_identity(self):
        np.testing.assert_array_equal(spd_sqrt(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(spd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_two_by_two(self):
        """Known factor of [[2,1],[1,2]]."""
        P = np.array([[2.0, 1.0], [1.0, 2.0]])
        L = spd_sqrt(P)
        np.testing.assert_allclose(L, [[1.414214, 0.0], [0.707107, 1.224745]], atol=1e-6)
        np.testing.assert_allclose(L @ L.T, P, rtol=1e-10)

    def test_reconstruction_and_shape(self, rng):
        """Random SPD input: lower triangular, nonnegative diagonal, exact reconstruction."""
        M = rng.standard_normal((6, 6))
        P = M @ M.T + 0.1 * np.eye(6)
        L = spd_sqrt(P)
        assert np.allclose(L, np.tril(L))
        assert np.all(np.diag(L) >= 0.0)
        assert np.linalg.norm(L @ L.T - P) <= 1e-10 * np.linalg.norm(P)

    def test_singular_gets_jitter(self):
        """Rank-deficient PSD input is factorized after jitter."""
        P = np.array([[1.0, 1.0], [1.0, 1.0]])
        L = spd_sqrt(P)
        np.testing.assert_allclose(L @ L.T, P, atol=1e-10)

    def test_zero_matrix(self):
        np.testing.assert_array_equal(spd_sqrt(np.zeros((2, 2))), np.zeros((2, 2)))

    def test_indefinite_names_eigenvalue(self):
        """Indefinite input reports its minimum eigenvalue."""
        with pytest.raises(IndefiniteMatrixError) as info:
            spd_sqrt(np.diag([1.0, -0.5]))
        assert info.value.min_eigenvalue == pytest.approx(-0.5)
        assert "-5.0" in str(info.value)


class TestSpdSolve:
    """Tests for SPD solves."""

    def test_identity(self, rng):
        B = rng.standard_normal((3, 2))
        np.testing.assert_allclose(spd_solve(np.eye(3), B), B)

    def test_diagonal(self):
        np.testing.assert_allclose(spd_solve(np.diag([2.0, 4.0]), np.array([2.0, 4.0])), [1.0, 1.0])

    def test_recovers_known_solution(self, rng):
        M = rng.standard_normal((4, 4))
        P = M @ M.T + np.eye(4)
        X0 = rng.standard_normal((4, 3))
        np.testing.assert_allclose(spd_solve(P, P @ X0), X0, atol=1e-9)

    def test_zero_matrix_is_singular(self):
        with pytest.raises(SingularMatrixError):
            spd_solve(np.zeros((2, 2)), np.ones(2))


class TestChi2Quantile:
    """Tests for chi-square quantiles."""

    @pytest.mark.parametrize("q", [0.025, 0.5, 0.975])
    def test_dof2_closed_form(self, q):
        """dof 2: x = -2 ln(1 - q)."""
        assert chi2_quantile(2, q) == pytest.approx(-2.0 * math.log(1.0 - q), abs=TOLERANCES.chi2_abs)

    def test_known_values(self):
        assert chi2_quantile(2, 0.975) == pytest.approx(7.377759, abs=1e-6)
        assert chi2_quantile(1, 0.95) == pytest.approx(3.841459, abs=1e-6)

    def test_increasing_in_q(self):
        values = [chi2_quantile(3, q) for q in np.linspace(0.01, 0.99, 50)]
        assert all(a < b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5])
    def test_out_of_range_q(self, q):
        with pytest.raises(ScenarioError):
            chi2_quantile(2, q)

    def test_bad_dof(self):
        with pytest.raises(ScenarioError):
            chi2_quantile(0, 0.5)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
