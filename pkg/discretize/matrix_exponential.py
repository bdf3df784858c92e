"""
Exact zero-order-hold discretization of the affine surrogate ẋ = F x + G u + d.

The augmented matrix

        | F  G  I |
    Ξ = | 0  0  0 |
        | 0  0  0 |

has exp(hΞ) whose first block row is [Φ, Γ, Λ].
"""

from dataclasses import dataclass

import numpy as np

from numkit.linalg import expm


@dataclass(frozen=True)
class DiscreteMap:
    """x_k = Φ x_{k-1} + Γ u + Λ d over one hold interval h."""
    phi: np.ndarray
    gamma: np.ndarray
    lam: np.ndarray
    h: float

    def apply(self, x, u, d) -> np.ndarray:
        return self.phi @ x + self.gamma @ u + self.lam @ d


def augmented_matrix(F, G) -> np.ndarray:
    F = np.atleast_2d(np.asarray(F, dtype=float))
    n = F.shape[0]
    G = np.asarray(G, dtype=float).reshape(n, -1)
    m = G.shape[1]
    xi = np.zeros((2 * n + m, 2 * n + m))
    xi[:n, :n] = F
    xi[:n, n:n + m] = G
    xi[:n, n + m:] = np.eye(n)
    return xi


def exp_discretize(F, G, h: float) -> DiscreteMap:
    """
    Φ, Γ, Λ from the top block row of exp(hΞ).

    Raises:
        MatrixOverflowError: If the exponential is not representable
    """
    if not h > 0.0:
        raise ValueError(f"step must be positive, got {h}")
    F = np.atleast_2d(np.asarray(F, dtype=float))
    n = F.shape[0]
    if F.shape != (n, n):
        raise ValueError(f"F must be square, got shape {F.shape}")
    xi = augmented_matrix(F, G)
    m = xi.shape[0] - 2 * n
    E = expm(h * xi)
    return DiscreteMap(
        phi=E[:n, :n].copy(),
        gamma=E[:n, n:n + m].copy(),
        lam=E[:n, n + m:].copy(),
        h=float(h),
    )
