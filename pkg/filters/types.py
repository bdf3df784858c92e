"""
Records shared by the prediction strategies, the correction step and the run loop.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, List, Mapping, Optional, Tuple

import numpy as np

from numkit.config import TOLERANCES
from numkit.errors import ScenarioError
from numkit.linalg import symmetrize


@dataclass(frozen=True)
class StateEstimate:
    """Gaussian belief N(mean, cov) at step time_index."""
    mean: np.ndarray
    cov: np.ndarray
    time_index: int = 0

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = symmetrize(np.asarray(self.cov, dtype=float).reshape(mean.size, mean.size))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def variances(self) -> np.ndarray:
        return np.diag(self.cov).copy()

    @classmethod
    def isotropic(cls, mean, variance: float) -> "StateEstimate":
        mean = np.asarray(mean, dtype=float)
        return cls(mean, variance * np.eye(mean.size))


@dataclass(frozen=True)
class NoiseSpec:
    """Process noise Q, output noise R and input noise Ψ."""
    Q: np.ndarray
    R: np.ndarray
    Psi: np.ndarray

    def __post_init__(self):
        for name in ("Q", "R", "Psi"):
            value = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            if value.size == 0:
                value = value.reshape(0, 0)
            object.__setattr__(self, name, symmetrize(value))

    def check_dimensions(self, model):
        for name, size in (("Q", model.n), ("R", model.p), ("Psi", model.m)):
            shape = getattr(self, name).shape
            if shape != (size, size):
                raise ScenarioError(f"expected shape {(size, size)} for {model.model_name}, "
                                    f"got {shape}", name)


def resolve_q0(model, q_scale: Optional[Mapping[str, float]] = None,
               default: float = 1e-6) -> np.ndarray:
    """
    Per-state process-noise magnitudes.

    Keys of q_scale may be "default", a block name or a state name; a state
    entry beats its block entry, which beats "default".
    """
    q_scale = dict(q_scale or {})
    base = float(q_scale.pop("default", default))
    blocks = {k: v for k, v in q_scale.items() if k in model.state_blocks}
    states = {k: v for k, v in q_scale.items() if k in model.state_names}
    unknown = set(q_scale) - set(blocks) - set(states)
    if unknown:
        raise ScenarioError(f"unknown state or block {sorted(unknown)[0]!r} for "
                            f"{model.model_name}", "q_scale")

    q0 = np.full(model.n, base)
    for i, name in enumerate(model.state_names):
        block = model.block_of(name)
        if block in blocks:
            q0[i] = blocks[block]
        if name in states:
            q0[i] = states[name]
    if np.any(q0 < 0.0) or not np.all(np.isfinite(q0)):
        raise ScenarioError("magnitudes must be finite and non-negative", "q_scale")
    return q0


def build_noise_spec(model, h: float, q_scale: Optional[Mapping[str, float]] = None,
                     input_std: float = 0.0, output_std: float = 0.0) -> NoiseSpec:
    """Q = h²·diag(q0), R = output_std²·I, Ψ = input_std²·I."""
    q0 = resolve_q0(model, q_scale)
    return NoiseSpec(
        Q=h * h * np.diag(q0),
        R=output_std ** 2 * np.eye(model.p),
        Psi=input_std ** 2 * np.eye(model.m),
    )


@dataclass(frozen=True)
class SigmaSet:
    """Joint sigma points, one per row: first n columns state, rest input."""
    points: np.ndarray
    weights: np.ndarray
    n: int

    @property
    def states(self) -> np.ndarray:
        return self.points[:, :self.n]

    @property
    def inputs(self) -> np.ndarray:
        return self.points[:, self.n:]

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class LinearSurrogate:
    """ẋ ≈ F x + G u + d with linearization-error covariance Ω."""
    F: np.ndarray
    G: np.ndarray
    d: np.ndarray
    Omega: np.ndarray


@dataclass(frozen=True)
class NewtonStats:
    """Newton iterations per sigma point within one prediction."""
    avg: float
    max: int

    @classmethod
    def from_counts(cls, counts) -> "NewtonStats":
        counts = np.asarray(counts)
        if counts.size == 0:
            return cls(0.0, 0)
        return cls(float(np.mean(counts)), int(np.max(counts)))


@dataclass(frozen=True)
class FilterSettings:
    covariance_guard: float = TOLERANCES.covariance_guard
    newton_tol: float = TOLERANCES.newton_tol
    newton_max_iter: int = TOLERANCES.newton_max_iter


class FilterOutcome(Enum):
    COMPLETED = "completed"
    DIVERGENT = "divergent"


@dataclass
class FilterTrace:
    """Per-step posterior summary of one filter run; row 0 is the initial estimate."""
    method: str
    state_names: Tuple[str, ...]
    h: float
    times: List[float] = field(default_factory=list)
    means: List[np.ndarray] = field(default_factory=list)
    variances: List[np.ndarray] = field(default_factory=list)
    nis: List[float] = field(default_factory=list)
    step_seconds: List[float] = field(default_factory=list)
    newton_avg: Optional[List[float]] = None
    newton_max: Optional[List[int]] = None
    outcome: FilterOutcome = FilterOutcome.COMPLETED
    failure_step: Optional[int] = None
    message: str = ""
    final: Any = None

    def record(self, t: float, estimate: StateEstimate, nis: float, seconds: float,
               newton: Optional[NewtonStats] = None):
        self.times.append(float(t))
        self.means.append(estimate.mean.copy())
        self.variances.append(estimate.variances)
        self.nis.append(float(nis))
        self.step_seconds.append(float(seconds))
        if self.newton_avg is not None:
            self.newton_avg.append(newton.avg if newton else 0.0)
            self.newton_max.append(newton.max if newton else 0)
        self.final = estimate

    def __len__(self) -> int:
        return len(self.times)

    @property
    def completed(self) -> bool:
        return self.outcome is FilterOutcome.COMPLETED

    @property
    def has_newton(self) -> bool:
        return self.newton_avg is not None

    def mean_array(self) -> np.ndarray:
        return np.array(self.means).reshape(len(self), len(self.state_names))

    def variance_array(self) -> np.ndarray:
        return np.array(self.variances).reshape(len(self), len(self.state_names))

    def nis_array(self) -> np.ndarray:
        return np.array(self.nis, dtype=float)

    def step_array(self) -> np.ndarray:
        return np.array(self.step_seconds, dtype=float)

    def newton_summary(self) -> NewtonStats:
        """Run-level average and maximum over the predicted steps."""
        if not self.has_newton or len(self) <= 1:
            return NewtonStats(0.0, 0)
        return NewtonStats(float(np.mean(self.newton_avg[1:])), int(np.max(self.newton_max[1:])))
