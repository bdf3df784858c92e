"""Grid-following inverter: PLL synchronisation, filtered power measurement, PI power and current loops."""

import numpy as np

from models.base import DynamicModel, ratio_or_zero, stack_last
from models.gfm import dq_to_grid, grid_to_dq
from models.params import GflParams


def gfl_f(x, u, params: GflParams) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    P = params
    (theta, omega, vq_pll, sigma_p, sigma_q, p_m, q_m, gamma_d, gamma_q,
     icv_d, icv_q, vf_d, vf_q, if_d, if_q) = np.moveaxis(x, -1, 0)
    vg_d, vg_q = grid_to_dq(theta, u[..., 0], u[..., 1])

    iref_d = P.k_p_p * (P.p_ref - p_m) + P.k_i_p * sigma_p
    iref_q = -P.k_p_q * (P.q_ref - q_m) - P.k_i_q * sigma_q

    kl = P.omega_b / P.ell_f
    kc = P.omega_b / P.c_f
    kg = P.omega_b / P.ell_g
    return stack_last(
        P.omega_b * (omega - P.omega_s),
        (P.k_i_pll - P.omega_lp * P.k_p_pll) * vq_pll + P.omega_lp * P.k_p_pll * vf_q,
        P.omega_lp * (vf_q - vq_pll),
        P.p_ref - p_m,
        P.q_ref - q_m,
        P.omega_z * (vf_d * if_d + vf_q * if_q - p_m),
        P.omega_f * (vf_q * if_d - vf_d * if_q - q_m),
        iref_d - icv_d,
        iref_q - icv_q,
        kl * (P.k_p_c * (iref_d - icv_d) + P.k_i_c * gamma_d - vf_d - P.r_f * icv_d),
        kl * (P.k_p_c * (iref_q - icv_q) + P.k_i_c * gamma_q - vf_q - P.r_f * icv_q),
        kc * (icv_d - if_d + omega * P.c_f * vf_q),
        kc * (icv_q - if_q - omega * P.c_f * vf_d),
        kg * (vf_d - vg_d - P.r_g * if_d + omega * P.ell_g * if_q),
        kg * (vf_q - vg_q - P.r_g * if_q - omega * P.ell_g * if_d),
    )


def gfl_h(x, u, params: GflParams) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return stack_last(*dq_to_grid(x[..., 0], x[..., 13], x[..., 14]))


class GflModel(DynamicModel):
    model_name = "gfl"
    params_type = GflParams

    state_names = ("theta_pll", "omega_pll", "vq_pll", "sigma_p", "sigma_q", "p_m", "q_m",
                   "gamma_d", "gamma_q", "icv_d", "icv_q", "vf_d", "vf_q", "if_d", "if_q")
    input_names = ("v_r", "v_i")
    output_names = ("i_r", "i_i")
    state_blocks = {
        "pll": ("theta_pll", "omega_pll", "vq_pll"),
        "outer": ("sigma_p", "sigma_q", "p_m", "q_m"),
        "inner": ("gamma_d", "gamma_q", "icv_d", "icv_q"),
        "filter": ("vf_d", "vf_q", "if_d", "if_q"),
    }
    report_states = ("omega_pll", "icv_d")

    def f(self, x, u) -> np.ndarray:
        return gfl_f(x, u, self.params)

    def h(self, x, u) -> np.ndarray:
        return gfl_h(x, u, self.params)

    def nominal_input(self) -> np.ndarray:
        return np.array([1.0, 0.0])

    def flat_start(self, u0) -> np.ndarray:
        """PLL locked (v_q = 0) with the network equations solved by a short fixed-point pass."""
        P = self.params
        v_r, v_i = np.asarray(u0, dtype=float)
        magnitude = max(float(np.hypot(v_r, v_i)), 1e-6)
        omega = P.omega_s
        vf_d = magnitude
        for _ in range(20):
            if_d = P.p_ref / vf_d
            if_q = -P.q_ref / vf_d
            sin_t = np.clip((P.r_g * if_q + omega * P.ell_g * if_d) / magnitude, -1.0, 1.0)
            vg_d = magnitude * np.sqrt(1.0 - sin_t ** 2)
            vf_d = max(vg_d + P.r_g * if_d - omega * P.ell_g * if_q, 1e-3)
        theta = np.arctan2(v_i, v_r) + np.arcsin(sin_t)
        vf_q = 0.0

        icv_d = if_d - omega * P.c_f * vf_q
        icv_q = if_q + omega * P.c_f * vf_d
        gamma_d = ratio_or_zero(vf_d + P.r_f * icv_d, P.k_i_c)
        gamma_q = ratio_or_zero(vf_q + P.r_f * icv_q, P.k_i_c)
        sigma_p = ratio_or_zero(icv_d, P.k_i_p)
        sigma_q = ratio_or_zero(-icv_q, P.k_i_q)
        return np.array([theta, omega, 0.0, sigma_p, sigma_q, P.p_ref, P.q_ref,
                         gamma_d, gamma_q, icv_d, icv_q, vf_d, vf_q, if_d, if_q])
