"""Grid-forming inverter: droop control, virtual impedance, cascaded voltage and current loops."""

import numpy as np

from models.base import DynamicModel, ratio_or_zero, stack_last
from models.params import GfmParams


def grid_to_dq(theta, v_r, v_i):
    """Rotates the grid voltage from the network frame into the controller dq frame."""
    c, s = np.cos(theta), np.sin(theta)
    return c * v_r + s * v_i, -s * v_r + c * v_i


def dq_to_grid(theta, i_d, i_q):
    """Rotates dq filter currents into network real/imaginary parts."""
    c, s = np.cos(theta), np.sin(theta)
    return c * i_d - s * i_q, s * i_d + c * i_q


def gfm_f(x, u, params: GfmParams) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    P = params
    (theta, omega, v_oc, icv_d, icv_q, vf_d, vf_q, if_d, if_q,
     xi_d, xi_q, gamma_d, gamma_q) = np.moveaxis(x, -1, 0)
    vg_d, vg_q = grid_to_dq(theta, u[..., 0], u[..., 1])

    p_e = vf_d * if_d + vf_q * if_q
    q_e = vf_q * if_d - vf_d * if_q

    # voltage-loop error behind the virtual impedance
    ev_d = v_oc - P.r_v * if_d + omega * P.ell_v * if_q - vf_d
    ev_q = -P.r_v * if_q - omega * P.ell_v * if_d - vf_q
    iref_d = P.k_p_v * ev_d + P.k_i_v * xi_d - P.c_f * omega * vf_q
    iref_q = P.k_p_v * ev_q + P.k_i_v * xi_q + P.c_f * omega * vf_d

    kl = P.omega_b / P.ell_f
    kc = P.omega_b / P.c_f
    kg = P.omega_b / P.ell_g
    return stack_last(
        P.omega_b * (omega - P.omega_s),
        P.omega_z * (P.k_p * (P.p_ref - p_e) + P.omega_ref - omega),
        P.omega_f * (P.k_q * (P.q_ref - q_e) + P.v_ref - v_oc),
        kl * (P.k_p_c * (iref_d - icv_d) + P.k_i_c * gamma_d - vf_d - P.r_f * icv_d),
        kl * (P.k_p_c * (iref_q - icv_q) + P.k_i_c * gamma_q - vf_q - P.r_f * icv_q),
        kc * (icv_d - if_d + omega * P.c_f * vf_q),
        kc * (icv_q - if_q - omega * P.c_f * vf_d),
        kg * (vf_d - vg_d - P.r_g * if_d + omega * P.ell_g * if_q),
        kg * (vf_q - vg_q - P.r_g * if_q - omega * P.ell_g * if_d),
        ev_d,
        ev_q,
        iref_d - icv_d,
        iref_q - icv_q,
    )


def gfm_h(x, u, params: GfmParams) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return stack_last(*dq_to_grid(x[..., 0], x[..., 7], x[..., 8]))


class GfmModel(DynamicModel):
    model_name = "gfm"
    params_type = GfmParams

    state_names = ("theta_oc", "omega_oc", "v_oc", "icv_d", "icv_q", "vf_d", "vf_q",
                   "if_d", "if_q", "xi_d", "xi_q", "gamma_d", "gamma_q")
    input_names = ("v_r", "v_i")
    output_names = ("i_r", "i_i")
    state_blocks = {
        "droop": ("theta_oc", "omega_oc", "v_oc"),
        "voltage_loop": ("xi_d", "xi_q"),
        "current_loop": ("icv_d", "icv_q", "gamma_d", "gamma_q"),
        "filter": ("vf_d", "vf_q", "if_d", "if_q"),
    }
    report_states = ("omega_oc", "icv_d")

    def f(self, x, u) -> np.ndarray:
        return gfm_f(x, u, self.params)

    def h(self, x, u) -> np.ndarray:
        return gfm_h(x, u, self.params)

    def nominal_input(self) -> np.ndarray:
        return np.array([1.0, 0.0])

    def flat_start(self, u0) -> np.ndarray:
        """
        Guess with ω at synchronous speed, currents from the power setpoints
        and controller integrators chosen so the loop errors vanish.
        """
        P = self.params
        v_r, v_i = np.asarray(u0, dtype=float)
        omega = P.omega_s
        p_target = P.p_ref + ((P.omega_ref - omega) / P.k_p if P.k_p > 0 else 0.0)
        if_d, if_q = p_target, -P.q_ref
        v_oc = P.v_ref
        vf_d = v_oc - P.r_v * if_d + omega * P.ell_v * if_q
        vf_q = -P.r_v * if_q - omega * P.ell_v * if_d
        vg_d = vf_d - P.r_g * if_d + omega * P.ell_g * if_q
        vg_q = vf_q - P.r_g * if_q - omega * P.ell_g * if_d
        theta = np.arctan2(v_i, v_r) + np.arctan2(-vg_q, vg_d)

        icv_d = if_d - omega * P.c_f * vf_q
        icv_q = if_q + omega * P.c_f * vf_d
        gamma_d = ratio_or_zero(vf_d + P.r_f * icv_d, P.k_i_c)
        gamma_q = ratio_or_zero(vf_q + P.r_f * icv_q, P.k_i_c)
        xi_d = ratio_or_zero(icv_d + P.c_f * omega * vf_q, P.k_i_v)
        xi_q = ratio_or_zero(icv_q - P.c_f * omega * vf_d, P.k_i_v)
        return np.array([theta, omega, v_oc, icv_d, icv_q, vf_d, vf_q, if_d, if_q,
                         xi_d, xi_q, gamma_d, gamma_q])
