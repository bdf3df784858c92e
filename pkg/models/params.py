"""
Parameter records for the built-in models.

Every record is a frozen dataclass with per-unit defaults for the machine
and inverter cases. Invalid values raise ScenarioError naming the field.
"""

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Type, TypeVar

import numpy as np

from numkit.errors import ScenarioError

OMEGA_B = 2.0 * math.pi * 60.0

P = TypeVar("P")


def _require_positive(record, *names: str):
    for name in names:
        value = getattr(record, name)
        if not value > 0.0:
            raise ScenarioError(f"must be positive, got {value}", name)


def _require_nonnegative(record, *names: str):
    for name in names:
        value = getattr(record, name)
        if not value >= 0.0:
            raise ScenarioError(f"must be non-negative, got {value}", name)


def _require_finite(record):
    for f in dataclasses.fields(record):
        value = getattr(record, f.name)
        if isinstance(value, float) and not math.isfinite(value):
            raise ScenarioError(f"must be finite, got {value}", f.name)


@dataclass(frozen=True)
class SmibParams:
    """Virtual synchronous machine behind a reactance, with a first-order power filter."""
    omega_b: float = OMEGA_B
    omega_s: float = 1.0
    H: float = 3.5
    D: float = 10.0
    p_ref: float = 0.8
    v_s: float = 1.1
    x: float = 0.6
    tau_p: float = 0.01

    def __post_init__(self):
        _require_finite(self)
        _require_positive(self, "omega_b", "H", "tau_p", "x", "v_s")


@dataclass(frozen=True)
class InverterParams:
    """LCL filter and inner current loop shared by both inverter controls."""
    omega_s: float = 1.0
    omega_b: float = OMEGA_B
    r_f: float = 0.003
    ell_f: float = 0.08
    c_f: float = 0.074
    r_g: float = 0.01
    ell_g: float = 0.2
    k_p_c: float = 0.3771
    k_i_c: float = 335.1032

    def __post_init__(self):
        _require_finite(self)
        _require_positive(self, "omega_b", "ell_f", "c_f", "ell_g")
        _require_nonnegative(self, "r_f", "r_g", "k_p_c", "k_i_c")


@dataclass(frozen=True)
class GfmParams(InverterParams):
    """Droop-controlled grid-forming inverter with virtual impedance and a voltage loop."""
    r_v: float = 0.0
    ell_v: float = 0.2
    k_p: float = 0.1
    k_q: float = 0.2
    omega_z: float = 1.0
    omega_f: float = 100.0
    k_p_v: float = 0.3947
    k_i_v: float = 49.5953
    p_ref: float = 0.5
    q_ref: float = 0.0
    omega_ref: float = 1.0
    v_ref: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        _require_nonnegative(self, "r_v", "ell_v", "k_p", "k_q", "omega_z", "omega_f", "k_p_v", "k_i_v")


@dataclass(frozen=True)
class GflParams(InverterParams):
    """PLL-synchronised grid-following inverter with PI power control."""
    k_p_pll: float = 0.05
    k_i_pll: float = 1.42
    omega_lp: float = 376.99
    k_p_p: float = 0.05
    k_i_p: float = 0.6
    k_p_q: float = 0.05
    k_i_q: float = 0.6
    omega_z: float = 41.47
    omega_f: float = 41.47
    p_ref: float = 0.5
    q_ref: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        _require_positive(self, "omega_lp")
        _require_nonnegative(self, "k_p_pll", "k_i_pll", "k_p_p", "k_i_p", "k_p_q", "k_i_q",
                             "omega_z", "omega_f")


def _matrix(value, name: str, ndim: int) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"not a numeric array: {e}", name) from e
    if arr.ndim != ndim:
        raise ScenarioError(f"expected a {ndim}-d array, got shape {arr.shape}", name)
    if not np.all(np.isfinite(arr)):
        raise ScenarioError("entries must be finite", name)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LinearParams:
    """
    Affine system ẋ = A x + B u + c, z = C x + D u.

    The default is the scalar system ẋ = -x + u observed directly.
    """
    A: Any = field(default_factory=lambda: [[-1.0]])
    B: Any = field(default_factory=lambda: [[1.0]])
    c: Any = None
    C: Any = None
    D: Any = None

    def __post_init__(self):
        A = _matrix(self.A, "A", 2)
        n = A.shape[0]
        if A.shape != (n, n) or n == 0:
            raise ScenarioError(f"must be square and non-empty, got shape {A.shape}", "A")
        B = _matrix(self.B, "B", 2) if np.size(self.B) else np.zeros((n, 0))
        if B.shape[0] != n:
            raise ScenarioError(f"must have {n} rows, got shape {B.shape}", "B")
        m = B.shape[1]
        c = np.zeros(n) if self.c is None else _matrix(self.c, "c", 1)
        C = np.eye(n) if self.C is None else _matrix(self.C, "C", 2)
        if c.shape != (n,):
            raise ScenarioError(f"must have length {n}, got shape {c.shape}", "c")
        if C.shape[1] != n or C.shape[0] == 0:
            raise ScenarioError(f"must have {n} columns, got shape {C.shape}", "C")
        D = np.zeros((C.shape[0], m)) if self.D is None else _matrix(self.D, "D", 2)
        if D.shape != (C.shape[0], m):
            raise ScenarioError(f"must have shape {(C.shape[0], m)}, got {D.shape}", "D")
        for name, value in (("A", A), ("B", B), ("c", c), ("C", C), ("D", D)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)


def params_with_overrides(params_type: Type[P], overrides: Mapping[str, Any] = None) -> P:
    """
    Builds a parameter record from defaults plus overrides.

    Raises:
        ScenarioError: If an override names an unknown field or has a bad value
    """
    overrides = dict(overrides or {})
    known = {f.name for f in dataclasses.fields(params_type)}
    for key in overrides:
        if key not in known:
            raise ScenarioError(
                f"unknown parameter for {params_type.__name__}; "
                f"available: {', '.join(sorted(known))}",
                key,
            )
    converted = {}
    for key, value in overrides.items():
        if params_type is LinearParams:
            converted[key] = value
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"must be a number, got {value!r}", key)
        converted[key] = float(value)
    return params_type(**converted)
