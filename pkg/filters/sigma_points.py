"""
Symmetric sigma-point rule and statistical linearization over it.
"""

import numpy as np
from scipy import linalg

from filters.types import LinearSurrogate, SigmaSet
from numkit.linalg import spd_solve, spd_sqrt, symmetrize


def unscented_transform(mean, cov, n: int = None) -> SigmaSet:
    """
    2N points mean ± columns of chol(N·cov), weights 1/(2N), no central point.

    n marks where the state part of a joint vector ends; it defaults to
    the full dimension N.
    """
    mean = np.asarray(mean, dtype=float).reshape(-1)
    N = mean.size
    L = spd_sqrt(N * np.asarray(cov, dtype=float))
    points = np.vstack([mean + L.T, mean - L.T])
    weights = np.full(2 * N, 1.0 / (2 * N))
    return SigmaSet(points=points, weights=weights, n=N if n is None else n)


def joint_sigma_set(x_mean, P, u_mean, Psi) -> SigmaSet:
    """Sigma points of the joint (state, input) vector with covariance diag(P, Ψ)."""
    x_mean = np.asarray(x_mean, dtype=float).reshape(-1)
    u_mean = np.asarray(u_mean, dtype=float).reshape(-1)
    joint_cov = linalg.block_diag(np.atleast_2d(P), np.asarray(Psi, dtype=float).reshape(u_mean.size, u_mean.size))
    return unscented_transform(np.concatenate([x_mean, u_mean]), joint_cov, n=x_mean.size)


def weighted_mean(weights, Y) -> np.ndarray:
    return weights @ Y


def cross_covariance(weights, A, a_mean, B, b_mean) -> np.ndarray:
    """Σ wᵢ (aᵢ - ā)(bᵢ - b̄)ᵀ over the rows of A and B."""
    return (A - a_mean).T @ (weights[:, None] * (B - b_mean))


def statistical_linearize(sigma: SigmaSet, f, P, Psi, x_mean, u_mean) -> LinearSurrogate:
    """
    Affine fit ẏ ≈ F x + G u + d of f over the sigma set, with residual covariance Ω.

    F = Σ_xyᵀ P⁻¹ and G = Σ_uyᵀ Ψ⁻¹ are computed by solves. A zero Ψ (or an
    empty input) gives G = 0, leaving the input effect in d.

    Raises:
        SingularMatrixError: If P or Ψ stays singular after jitter
    """
    x_mean = np.asarray(x_mean, dtype=float).reshape(-1)
    u_mean = np.asarray(u_mean, dtype=float).reshape(-1)
    X, U, w = sigma.states, sigma.inputs, sigma.weights
    n, m = x_mean.size, u_mean.size

    Y = f(X, U)
    y_mean = weighted_mean(w, Y)
    sigma_xy = cross_covariance(w, X, x_mean, Y, y_mean)
    F = spd_solve(P, sigma_xy).T

    Psi = np.asarray(Psi, dtype=float).reshape(m, m)
    if m == 0 or not np.any(Psi):
        G = np.zeros((n, m))
    else:
        sigma_uy = cross_covariance(w, U, u_mean, Y, y_mean)
        G = spd_solve(Psi, sigma_uy).T

    d = y_mean - F @ x_mean - G @ u_mean
    E = Y - X @ F.T - U @ G.T - d
    Omega = symmetrize(cross_covariance(w, E, 0.0, E, 0.0))
    return LinearSurrogate(F=F, G=G, d=d, Omega=Omega)
