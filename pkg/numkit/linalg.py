"""
Dense linear-algebra kernels used by the filters and discretization schemes.
All functions are pure; inputs are never modified in place.
"""

import logging

import numpy as np
from scipy import linalg, stats

from numkit.config import TOLERANCES
from numkit.errors import (
    IndefiniteMatrixError,
    MatrixOverflowError,
    ScenarioError,
    SingularMatrixError,
)

logger = logging.getLogger(__name__)


def _as_square(A, name: str = "matrix") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    return A


def symmetrize(P) -> np.ndarray:
    """Returns (P + Pᵀ)/2, which is exactly symmetric."""
    P = np.asarray(P, dtype=float)
    return 0.5 * (P + P.T)


def min_eigenvalue(P) -> float:
    """Smallest eigenvalue of the symmetric part of P."""
    P = _as_square(P)
    if P.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(symmetrize(P))[0])


def _check_symmetric(P: np.ndarray, name: str):
    scale = np.max(np.abs(P)) if P.size else 0.0
    if scale == 0.0:
        return
    asym = np.max(np.abs(P - P.T))
    if asym > TOLERANCES.symmetry_rel * scale:
        raise IndefiniteMatrixError(
            f"{name} is not symmetric (asymmetry {asym:.3e})",
            min_eigenvalue(P),
        )


def _jitter(P: np.ndarray) -> float:
    n = P.shape[0]
    return TOLERANCES.jitter_scale * float(np.trace(P)) / n


def expm(A) -> np.ndarray:
    """
    Matrix exponential by scaling and squaring with a degree-13 Padé approximant.

    Raises:
        ValueError: If A is not square
        MatrixOverflowError: If A or e^A is not finite
    """
    A = _as_square(A)
    if not np.all(np.isfinite(A)):
        raise MatrixOverflowError("expm input contains non-finite entries")
    try:
        with np.errstate(over='raise', invalid='raise'):
            E = linalg.expm(A)
    except FloatingPointError as e:
        raise MatrixOverflowError(f"expm overflowed: {e}") from e
    if not np.all(np.isfinite(E)):
        raise MatrixOverflowError(
            f"expm result not representable (max |A| = {np.max(np.abs(A)):.3e})"
        )
    return E


def spd_sqrt(P) -> np.ndarray:
    """
    Lower-triangular Cholesky factor L with L·Lᵀ = P.

    A near-singular P gets a diagonal jitter εI, ε = 1e-12·trace(P)/n
    (plus the deficit of a slightly negative eigenvalue within slack).

    Raises:
        IndefiniteMatrixError: If P has an eigenvalue below -slack·trace
        SingularMatrixError: If factorization fails after jitter
    """
    P = _as_square(P, "covariance")
    if not np.all(np.isfinite(P)):
        raise MatrixOverflowError("covariance contains non-finite entries")
    _check_symmetric(P, "covariance")
    P = symmetrize(P)
    n = P.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    try:
        return np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        pass

    trace = float(np.trace(P))
    lam_min = min_eigenvalue(P)
    if lam_min < -TOLERANCES.psd_slack * max(trace, 0.0):
        raise IndefiniteMatrixError("covariance is not positive semidefinite", lam_min)
    if trace <= 0.0:
        # Zero matrix: its square root is zero.
        return np.zeros_like(P)

    eps = _jitter(P) + max(0.0, -lam_min)
    logger.debug(f"Cholesky jitter {eps:.3e} applied to {n}x{n} covariance")
    try:
        return np.linalg.cholesky(P + eps * np.eye(n))
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(f"Cholesky failed after jitter {eps:.3e}") from e


def spd_solve(P, B) -> np.ndarray:
    """
    Solves P·X = B for symmetric positive definite P without forming P⁻¹.

    Raises:
        SingularMatrixError: If P stays singular after jitter
    """
    P = _as_square(P)
    B = np.asarray(B, dtype=float)
    if B.shape[0] != P.shape[0]:
        raise ValueError(f"right-hand side has {B.shape[0]} rows, expected {P.shape[0]}")
    if not np.all(np.isfinite(P)):
        raise MatrixOverflowError("matrix contains non-finite entries")
    P = symmetrize(P)
    try:
        return linalg.cho_solve(linalg.cho_factor(P, lower=True), B)
    except linalg.LinAlgError:
        pass

    trace = float(np.trace(P))
    if trace <= 0.0:
        raise SingularMatrixError("cannot solve with a zero-trace matrix")
    eps = _jitter(P)
    try:
        return linalg.cho_solve(linalg.cho_factor(P + eps * np.eye(P.shape[0]), lower=True), B)
    except linalg.LinAlgError as e:
        raise SingularMatrixError(f"matrix singular after jitter {eps:.3e}") from e


def chi2_quantile(dof: int, q: float) -> float:
    """
    Quantile of the chi-square distribution.

    Examples:
        >>> round(chi2_quantile(2, 0.5), 6)
        1.386294
        >>> round(chi2_quantile(1, 0.95), 6)
        3.841459
    """
    if int(dof) != dof or dof < 1:
        raise ScenarioError(f"degrees of freedom must be a positive integer, got {dof}", "dof")
    if not 0.0 < q < 1.0:
        raise ScenarioError(f"probability must lie in (0, 1), got {q}", "q")
    return float(stats.chi2.ppf(q, int(dof)))


if __name__ == "__main__":
    import doctest
    print("Running doctest for linalg.py...")
    result = doctest.testmod(verbose=True)
    if result.failed == 0:
        print(f"\n✅ All {result.attempted} doctests passed!")
    else:
        print(f"\n❌ {result.failed} out of {result.attempted} doctests failed!")
