"""Single machine infinite bus: virtual synchronous machine with a power-measurement filter."""

import numpy as np

from models.base import DynamicModel, stack_last
from models.params import SmibParams


def smib_f(x, u, params: SmibParams) -> np.ndarray:
    """
    Swing equation plus first-order power filter.

    Examples:
        >>> smib_f([0.0, 1.0, 0.0], [1.0], SmibParams()).round(6).tolist()
        [0.0, 0.228571, 0.0]
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    delta, omega, p_f = x[..., 0], x[..., 1], x[..., 2]
    p_e = params.v_s * u[..., 0] / params.x * np.sin(delta)
    slip = omega - params.omega_s
    return stack_last(
        params.omega_b * slip,
        (params.p_ref - p_f - params.D * slip) / params.H,
        (p_e - p_f) / params.tau_p,
    )


def smib_h(x, u, params: SmibParams) -> np.ndarray:
    """Electrical active power (v_s·v_g/x)·sin δ."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    return stack_last(params.v_s * u[..., 0] / params.x * np.sin(x[..., 0]))


class SmibModel(DynamicModel):
    model_name = "smib"
    params_type = SmibParams

    state_names = ("delta", "omega", "p_f")
    input_names = ("v_g",)
    output_names = ("p",)
    state_blocks = {"mechanical": ("delta", "omega"), "filter": ("p_f",)}
    report_states = ("delta", "omega", "p_f")

    def f(self, x, u) -> np.ndarray:
        return smib_f(x, u, self.params)

    def h(self, x, u) -> np.ndarray:
        return smib_h(x, u, self.params)

    def nominal_input(self) -> np.ndarray:
        return np.array([1.0])

    def closed_form_equilibrium(self, u0):
        """δ* = arcsin(p_ref·x/(v_s·v_g)); None when the power transfer limit is exceeded."""
        p = self.params
        ratio = p.p_ref * p.x / (p.v_s * float(np.asarray(u0, dtype=float)[0]))
        if not -1.0 <= ratio <= 1.0:
            return None
        return np.array([np.arcsin(ratio), p.omega_s, p.p_ref])

    def flat_start(self, u0) -> np.ndarray:
        eq = self.closed_form_equilibrium(u0)
        if eq is not None:
            return eq
        return np.array([0.0, self.params.omega_s, self.params.p_ref])
