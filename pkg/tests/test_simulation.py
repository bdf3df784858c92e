"""
Unit tests for scenarios, the truth simulator and measurement sampling.
"""

import sys
from pathlib import Path

# Add parent directory to sys.path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

import dataclasses

import numpy as np
import pytest

from cli.scenario_loader import load_scenario
from models import SmibModel
from numkit.errors import ScenarioError, SimulationError
from services.simulation_service import (
    InputEvent,
    MeasurementNoise,
    Scenario,
    TruthTrace,
    build_filter_problem,
    channel_noise,
    input_schedule,
    sample_measurements,
    simulate_truth,
)

SCENARIOS = Path(__file__).parent.parent / "scenarios"


def synthetic_truth(n_steps, dt, output=None, input_value=1.0):
    """Scalar truth on a uniform grid; output defaults to zero."""
    times = np.arange(n_steps) * dt
    clean = np.zeros((n_steps, 1)) if output is None else np.asarray(output, dtype=float).reshape(-1, 1)
    return TruthTrace(times, np.zeros((n_steps, 1)), np.full((n_steps, 1), input_value), clean,
                      ("x0",), ("u0",), ("z0",))


@pytest.fixture
def smib_scenario():
    return Scenario(model="smib", t_end=1.0, fps=[25.0], truth_dt=1e-3)


class TestScenario:
    """Tests for scenario validation."""

    @pytest.mark.parametrize("changes, field", [
        ({"t_end": 0.0}, "t_end"),
        ({"t_end": float("nan")}, "t_end"),
        ({"fps": []}, "fps"),
        ({"fps": [25.0, -1.0]}, "fps"),
        ({"truth_dt": 0.01}, "truth_dt"),
        ({"p0": 0.0}, "p0"),
        ({"init": "flat"}, "init"),
        ({"events": [InputEvent(0.6, "v_g", 0.8), InputEvent(0.5, "v_g", 1.0)]}, "events"),
        ({"events": [InputEvent(1.5, "v_g", 0.8)]}, "events"),
    ])
    def test_invalid_fields(self, changes, field):
        settings = dict(model="smib", t_end=1.0, fps=[25.0], truth_dt=1e-3)
        settings.update(changes)
        with pytest.raises(ScenarioError) as info:
            Scenario(**settings)
        assert info.value.field == field

    @pytest.mark.parametrize("changes, field", [
        ({"input_std": -0.1}, "noise.input_std"),
        ({"output_std": float("inf")}, "noise.output_std"),
        ({"seed": -1}, "noise.seed"),
        ({"seed": 2 ** 64}, "noise.seed"),
    ])
    def test_invalid_noise(self, changes, field):
        with pytest.raises(ScenarioError) as info:
            MeasurementNoise(**changes)
        assert info.value.field == field

    def test_unknown_event_input(self):
        scenario = Scenario(model="smib", t_end=1.0, fps=[25.0], truth_dt=1e-3,
                            events=[InputEvent(0.5, "v_r", 0.8)])
        with pytest.raises(ScenarioError) as info:
            scenario.build_model()
        assert info.value.field == "events"

    def test_wrong_init_length(self):
        scenario = Scenario(model="smib", t_end=1.0, fps=[25.0], truth_dt=1e-3, init=[0.1, 1.0])
        with pytest.raises(ScenarioError) as info:
            scenario.build_model()
        assert info.value.field == "init"

    def test_frame_stride(self):
        scenario = Scenario(model="smib", t_end=1.0, fps=[25.0, 30.0], truth_dt=1e-3)
        assert scenario.frame_stride(25.0) == 40
        assert scenario.frame_stride(30.0) is None

    def test_explicit_init(self, smib_scenario):
        smib_scenario.init = [0.2, 1.0, 0.5]
        model = smib_scenario.build_model()
        np.testing.assert_array_equal(smib_scenario.initial_state(model), [0.2, 1.0, 0.5])


class TestTruthSimulation:
    """Tests for the RK4 truth integrator."""

    def test_equilibrium_stays_put(self, smib_scenario):
        truth = simulate_truth(smib_scenario)
        assert len(truth) == 1001
        assert truth.dt == pytest.approx(1e-3)
        assert np.max(np.abs(truth.states - truth.states[0])) < 1e-8

    def test_event_switches_on_grid_node(self, smib_scenario):
        smib_scenario.events = [InputEvent(0.5, "v_g", 0.8), InputEvent(0.55, "v_g", 1.0)]
        truth = simulate_truth(smib_scenario)
        assert truth.inputs[499, 0] == 1.0
        assert truth.inputs[500, 0] == 0.8
        assert truth.inputs[549, 0] == 0.8
        assert truth.inputs[550, 0] == 1.0
        # the sag shows up in the measured power during the fault
        assert truth.clean_outputs[549, 0] < truth.clean_outputs[499, 0]

    def test_outputs_follow_measurement_map(self, smib_scenario):
        smib_scenario.events = [InputEvent(0.2, "v_g", 0.9)]
        truth = simulate_truth(smib_scenario)
        model = SmibModel()
        np.testing.assert_allclose(truth.clean_outputs, model.h(truth.states, truth.inputs))

    def test_unstable_step_is_rejected(self):
        scenario = Scenario(model="smib", t_end=1.0, fps=[2.5], truth_dt=0.04)
        with pytest.raises(SimulationError) as info:
            simulate_truth(scenario)
        assert "truth_dt" in str(info.value)

    def test_halving_truth_step_keeps_final_state(self):
        """The fault scenario's truth grid is fine enough that halving it moves the final state by < 1e-8."""
        scenario = dataclasses.replace(load_scenario(SCENARIOS / "smib_fault.json"), t_end=1.0)
        finer = dataclasses.replace(scenario, truth_dt=scenario.truth_dt / 2.0)
        coarse_truth, fine_truth = simulate_truth(scenario), simulate_truth(finer)
        assert len(fine_truth) == 2 * len(coarse_truth) - 1
        assert fine_truth.times[-1] == pytest.approx(coarse_truth.times[-1])
        assert np.max(np.abs(fine_truth.states[-1] - coarse_truth.states[-1])) < 1e-8

    def test_schedule_holds_nominal_before_first_event(self):
        model = SmibModel()
        u = input_schedule(model, [InputEvent(0.003, "v_g", 0.5)], [1.0], 6, 1e-3)
        np.testing.assert_array_equal(u[:, 0], [1.0, 1.0, 1.0, 0.5, 0.5, 0.5])


class TestMeasurements:
    """Tests for frame sampling and noise."""

    def test_noiseless_samples_are_exact(self):
        truth = synthetic_truth(1001, 1e-3, output=np.linspace(0.0, 1.0, 1001))
        meas = sample_measurements(truth, 25.0, MeasurementNoise())
        assert len(meas) == 26
        np.testing.assert_array_equal(meas.truth_indices, np.arange(26) * 40)
        np.testing.assert_array_equal(meas.measured_outputs[:, 0], truth.clean_outputs[::40, 0])
        np.testing.assert_array_equal(meas.measured_inputs[:, 0], 1.0)

    def test_off_grid_samples_are_interpolated(self):
        dt = 0.01
        truth = synthetic_truth(101, dt, output=np.arange(101) * dt)
        meas = sample_measurements(truth, 30.0, MeasurementNoise())
        assert meas.truth_indices is None
        np.testing.assert_allclose(meas.measured_outputs[:, 0], meas.times, atol=1e-12)

    def test_same_seed_same_trace(self):
        truth = synthetic_truth(1001, 1e-3)
        noise = MeasurementNoise(0.01, 0.01, seed=42)
        a = sample_measurements(truth, 100.0, noise)
        b = sample_measurements(truth, 100.0, noise)
        np.testing.assert_array_equal(a.measured_outputs, b.measured_outputs)
        c = sample_measurements(truth, 100.0, noise, seed=43)
        assert not np.array_equal(a.measured_outputs, c.measured_outputs)

    def test_noise_statistics(self):
        truth = synthetic_truth(40_001, 1e-3)
        meas = sample_measurements(truth, 1000.0, MeasurementNoise(0.05, 0.1, seed=7))
        input_noise = meas.measured_inputs[:, 0] - 1.0
        output_noise = meas.measured_outputs[:, 0]
        assert abs(np.std(input_noise) / 0.05 - 1.0) < 0.03
        assert abs(np.std(output_noise) / 0.1 - 1.0) < 0.03
        assert abs(np.corrcoef(input_noise, output_noise)[0, 1]) < 0.05

    def test_shared_instants_share_noise(self):
        """Frame rates that divide each other see the same draws at common times."""
        truth = synthetic_truth(1001, 1e-3)
        noise = MeasurementNoise(0.0, 0.1, seed=3)
        fine = sample_measurements(truth, 100.0, noise)
        coarse = sample_measurements(truth, 50.0, noise)
        np.testing.assert_array_equal(coarse.measured_outputs, fine.measured_outputs[::2])

    def test_channel_streams(self):
        np.testing.assert_array_equal(channel_noise(5, 0, 10), channel_noise(5, 0, 10))
        assert not np.array_equal(channel_noise(5, 0, 10), channel_noise(5, 1, 10))
        assert not np.array_equal(channel_noise(5, 0, 10), channel_noise(6, 0, 10))


class TestFilterProblem:
    """Tests for the per-frame-rate filter inputs."""

    def test_problem_layout(self, smib_scenario):
        smib_scenario.noise = MeasurementNoise(0.01, 0.02, seed=1)
        model = smib_scenario.build_model()
        truth = simulate_truth(smib_scenario, model)
        problem = build_filter_problem(smib_scenario, model, truth, 25.0)
        assert problem.h == pytest.approx(0.04)
        np.testing.assert_array_equal(problem.init.mean, truth.states[0])
        np.testing.assert_allclose(problem.init.cov, smib_scenario.p0 * np.eye(3))
        np.testing.assert_allclose(problem.noise.R, [[4e-4]])
        np.testing.assert_allclose(problem.noise.Psi, [[1e-4]])
        assert len(problem.measurements) == 26


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
