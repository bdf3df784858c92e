"""
Ground-truth simulation and measurement synthesis.

Truth is integrated with RK4 on a fine uniform grid with piecewise-constant
inputs. Measurements are sampled from it at the filter frame rate with
seeded Gaussian noise, one counter-based stream per channel.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from decorators.logging_decorators import log_calls, performance_log
from discretize.runge_kutta import jacobian_eigenvalues, rk4_step, stability_report_from_eigenvalues
from filters.types import NoiseSpec, StateEstimate, build_noise_spec
from models.factory import ModelFactory
from models.steady_state import steady_state
from numkit.errors import ScenarioError, SimulationError

logger = logging.getLogger(__name__)

DEFAULT_TRUTH_DT = 1e-5
STEADY_STATE = "steady-state"

# Sample positions closer than this to a grid node count as on the grid
GRID_SNAP = 1e-9


@dataclass(frozen=True)
class InputEvent:
    """From `time` on, input `input_name` takes `value`."""
    time: float
    input_name: str
    value: float


@dataclass(frozen=True)
class MeasurementNoise:
    input_std: float = 0.0
    output_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("input_std", "output_std"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ScenarioError(f"must be finite and non-negative, got {value}", f"noise.{name}")
        if not 0 <= self.seed < 2 ** 64:
            raise ScenarioError(f"must be a 64-bit unsigned integer, got {self.seed}", "noise.seed")


@dataclass
class Scenario:
    """Simulation script: model, horizon, input events, noise and filter settings."""
    model: str
    t_end: float
    fps: List[float]
    params: Dict[str, Any] = field(default_factory=dict)
    truth_dt: float = DEFAULT_TRUTH_DT
    events: List[InputEvent] = field(default_factory=list)
    noise: MeasurementNoise = field(default_factory=MeasurementNoise)
    q_scale: Dict[str, float] = field(default_factory=dict)
    init: Union[str, List[float]] = STEADY_STATE
    p0: float = 1e-4
    nominal_inputs: Optional[List[float]] = None
    order_offset: float = 1e-2

    def __post_init__(self):
        if not (math.isfinite(self.t_end) and self.t_end > 0.0):
            raise ScenarioError(f"must be positive, got {self.t_end}", "t_end")
        if not (math.isfinite(self.truth_dt) and self.truth_dt > 0.0):
            raise ScenarioError(f"must be positive, got {self.truth_dt}", "truth_dt")
        if not self.fps:
            raise ScenarioError("at least one frame rate is required", "fps")
        for rate in self.fps:
            if not (math.isfinite(rate) and rate > 0.0):
                raise ScenarioError(f"frame rates must be positive, got {rate}", "fps")
        if self.truth_dt > 1.0 / (10.0 * max(self.fps)) * (1.0 + GRID_SNAP):
            raise ScenarioError(
                f"{self.truth_dt} exceeds 1/(10·max fps) = {1.0 / (10.0 * max(self.fps)):.3e}",
                "truth_dt")
        times = [e.time for e in self.events]
        if times != sorted(times):
            raise ScenarioError("events must be sorted by time", "events")
        if any(t < 0.0 or t > self.t_end for t in times):
            raise ScenarioError("event times must lie within [0, t_end]", "events")
        if not self.p0 > 0.0:
            raise ScenarioError(f"must be positive, got {self.p0}", "p0")
        if isinstance(self.init, str) and self.init != STEADY_STATE:
            raise ScenarioError(f"must be {STEADY_STATE!r} or a list of state values", "init")

    def build_model(self):
        """Model instance with this scenario's parameter overrides, checked against the events."""
        model = ModelFactory.create(self.model, self.params)
        for event in self.events:
            if event.input_name not in model.input_names:
                raise ScenarioError(f"unknown input {event.input_name!r} for {self.model}; "
                                    f"available: {', '.join(model.input_names)}", "events")
        if self.nominal_inputs is not None and len(self.nominal_inputs) != model.m:
            raise ScenarioError(f"expected {model.m} values, got {len(self.nominal_inputs)}",
                                "nominal_inputs")
        if not isinstance(self.init, str) and len(self.init) != model.n:
            raise ScenarioError(f"expected {model.n} state values, got {len(self.init)}", "init")
        return model

    def nominal_input(self, model) -> np.ndarray:
        if self.nominal_inputs is not None:
            return np.asarray(self.nominal_inputs, dtype=float)
        return model.nominal_input()

    def initial_state(self, model) -> np.ndarray:
        if isinstance(self.init, str):
            return steady_state(model, self.nominal_input(model))
        return np.asarray(self.init, dtype=float)

    def frame_stride(self, fps: float) -> Optional[int]:
        """Truth steps per frame, or None when 1/fps is not a whole number of steps."""
        ratio = 1.0 / (fps * self.truth_dt)
        stride = round(ratio)
        return int(stride) if stride >= 1 and abs(ratio - stride) <= GRID_SNAP * ratio else None


@dataclass
class TruthTrace:
    """States, inputs and noiseless outputs on the uniform truth grid."""
    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    clean_outputs: np.ndarray
    state_names: Sequence[str]
    input_names: Sequence[str]
    output_names: Sequence[str]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class MeasurementTrace:
    """Measured inputs μ_k and outputs z_k at the frame rate."""
    times: np.ndarray
    measured_inputs: np.ndarray
    measured_outputs: np.ndarray
    fps: float
    input_names: Sequence[str]
    output_names: Sequence[str]
    # truth-grid index of every sample, None where interpolated
    truth_indices: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.times)


def input_schedule(model, events: Sequence[InputEvent], u0, n_steps: int, dt: float) -> np.ndarray:
    """Piecewise-constant input on the truth grid, events snapped to the nearest node."""
    u = np.tile(np.asarray(u0, dtype=float), (n_steps, 1))
    for event in events:
        start = int(round(event.time / dt))
        if start < n_steps:
            u[start:, model.input_names.index(event.input_name)] = event.value
    return u


def check_truth_step(model, x0, u0, dt: float):
    """
    Raises:
        SimulationError: If some dt·λ at the initial point lies outside the RK4 region
    """
    report = stability_report_from_eigenvalues(jacobian_eigenvalues(model, x0, u0), dt)
    if not report.all_stable:
        fastest = max(abs(lam) for lam in report.outside_modes())
        raise SimulationError(
            f"truth_dt = {dt:.3e} s is outside the RK4 stability region for mode |λ| = "
            f"{fastest:.4g}; use truth_dt below {2.7 / fastest:.3e} s")


@performance_log
@log_calls
def simulate_truth(scenario: Scenario, model=None) -> TruthTrace:
    """
    Integrates the scenario's model with RK4 at truth_dt.

    Raises:
        SimulationError: If truth_dt fails the stability precheck
    """
    model = scenario.build_model() if model is None else model
    dt = scenario.truth_dt
    n_steps = int(round(scenario.t_end / dt)) + 1
    times = np.arange(n_steps) * dt

    u0 = scenario.nominal_input(model)
    x0 = scenario.initial_state(model)
    check_truth_step(model, x0, u0, dt)

    inputs = input_schedule(model, scenario.events, u0, n_steps, dt)
    states = np.empty((n_steps, model.n))
    states[0] = x0
    f = model.f
    for i in range(1, n_steps):
        states[i] = rk4_step(f, states[i - 1], inputs[i - 1], dt)

    outputs = model.h(states, inputs)
    logger.info(f"Simulated {scenario.model} truth: {n_steps} samples at dt = {dt:.3e} s, "
                f"{len(scenario.events)} event(s)")
    return TruthTrace(times, states, inputs, outputs, tuple(model.state_names),
                      tuple(model.input_names), tuple(model.output_names))


def substep_propagate(model, X, U, h: float, substeps: int = 10_000) -> np.ndarray:
    """Advances a batch of points over h with `substeps` RK4 steps, inputs held."""
    dt = h / substeps
    X = np.array(X, dtype=float)
    for _ in range(substeps):
        X = rk4_step(model.f, X, U, dt)
    return X


def channel_noise(seed: int, channel: int, length: int) -> np.ndarray:
    """Standard normal stream for one channel; independent of every other (seed, channel)."""
    generator = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(channel)])))
    return generator.standard_normal(length)


def sample_measurements(truth: TruthTrace, fps: float, noise: MeasurementNoise,
                        seed: Optional[int] = None) -> MeasurementTrace:
    """
    Noisy samples at t_k = k/fps over the truth horizon.

    Samples that fall on the truth grid take the grid value; others are
    interpolated linearly between the neighbouring nodes. Noise for a sample
    comes from the nearest grid node's draw, so every frame rate sees the
    same realisation at shared instants.
    """
    seed = noise.seed if seed is None else seed
    dt = truth.dt
    t_end = float(truth.times[-1])
    count = int(math.floor(t_end * fps * (1.0 + GRID_SNAP))) + 1
    times = np.arange(count) / fps

    m, p = truth.inputs.shape[1], truth.clean_outputs.shape[1]
    clean = np.hstack([truth.inputs, truth.clean_outputs])
    if dt > 0.0:
        position = times / dt
        nearest = np.minimum(np.rint(position).astype(int), len(truth) - 1)
        on_grid = np.abs(position - nearest) <= GRID_SNAP * np.maximum(position, 1.0)
        lower = np.minimum(np.floor(position).astype(int), len(truth) - 1)
        upper = np.minimum(lower + 1, len(truth) - 1)
        frac = (position - lower)[:, None]
        sampled = np.where(on_grid[:, None], clean[nearest],
                           (1.0 - frac) * clean[lower] + frac * clean[upper])
    else:
        nearest = np.zeros(count, dtype=int)
        on_grid = np.ones(count, dtype=bool)
        sampled = clean[nearest]

    stds = np.concatenate([np.full(m, noise.input_std), np.full(p, noise.output_std)])
    for c in range(m + p):
        if stds[c] > 0.0:
            sampled[:, c] += stds[c] * channel_noise(seed, c, len(truth))[nearest]

    return MeasurementTrace(
        times=times,
        measured_inputs=sampled[:, :m],
        measured_outputs=sampled[:, m:],
        fps=float(fps),
        input_names=truth.input_names,
        output_names=truth.output_names,
        truth_indices=nearest if np.all(on_grid) else None,
    )


@dataclass
class FilterProblem:
    """Everything a filter run needs at one frame rate."""
    model: Any
    noise: NoiseSpec
    init: StateEstimate
    measurements: MeasurementTrace

    @property
    def h(self) -> float:
        return 1.0 / self.measurements.fps


def build_filter_problem(scenario: Scenario, model, truth: TruthTrace, fps: float,
                         seed: Optional[int] = None) -> FilterProblem:
    """Noise covariances, initial estimate (truth initial state, variance p0) and measurements."""
    h = 1.0 / fps
    noise = build_noise_spec(model, h, scenario.q_scale,
                             scenario.noise.input_std, scenario.noise.output_std)
    init = StateEstimate.isotropic(truth.states[0], scenario.p0)
    measurements = sample_measurements(truth, fps, scenario.noise, seed)
    return FilterProblem(model, noise, init, measurements)
