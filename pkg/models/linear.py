"""Affine test system ẋ = A x + B u + c, z = C x + D u."""

import numpy as np

from models.base import DynamicModel
from models.params import LinearParams


class LinearModel(DynamicModel):
    model_name = "linear"
    params_type = LinearParams

    def __init__(self, params: LinearParams = None):
        super().__init__(params)
        P = self.params
        self.state_names = tuple(f"x{i}" for i in range(P.A.shape[0]))
        self.input_names = tuple(f"u{j}" for j in range(P.B.shape[1]))
        self.output_names = tuple(f"z{k}" for k in range(P.C.shape[0]))
        self.state_blocks = {"states": self.state_names}
        self.report_states = self.state_names

    @classmethod
    def from_matrices(cls, A, B=None, c=None, C=None, D=None) -> "LinearModel":
        """Convenience constructor; B defaults to no inputs."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.zeros((A.shape[0], 0)) if B is None else B
        return cls(LinearParams(A=A, B=B, c=c, C=C, D=D))

    def f(self, x, u) -> np.ndarray:
        P = self.params
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        return x @ P.A.T + u @ P.B.T + P.c

    def h(self, x, u) -> np.ndarray:
        P = self.params
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        return x @ P.C.T + u @ P.D.T

    def nominal_input(self) -> np.ndarray:
        return np.zeros(self.m)

    def flat_start(self, u0) -> np.ndarray:
        eq = self.closed_form_equilibrium(u0)
        return np.zeros(self.n) if eq is None else eq

    def closed_form_equilibrium(self, u0):
        """Solves A x = -(B u0 + c) when A is nonsingular."""
        P = self.params
        rhs = -(P.B @ np.asarray(u0, dtype=float) + P.c)
        try:
            return np.linalg.solve(P.A, rhs)
        except np.linalg.LinAlgError:
            return None
