"""
Unit tests for the (method, fps) sweep service with async processing.
"""

import sys
from pathlib import Path

# Add parent directory to sys.path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest

import services.sweep_service as sweep_module
from cli.scenario_loader import load_scenario
from filters import run_filter
from numkit.config import TOLERANCES
from numkit.errors import ConvergenceError
from services.simulation_service import (
    InputEvent,
    MeasurementNoise,
    Scenario,
    build_filter_problem,
    simulate_truth,
)
from services.sweep_service import (
    CellStatus,
    CostReport,
    SweepService,
    classify_degraded,
    fps_sweep,
)

SCENARIOS = Path(__file__).parent.parent / "scenarios"


@pytest.fixture(scope="module")
def linear_case():
    scenario = Scenario(model="linear", t_end=2.0, fps=[10.0, 20.0], truth_dt=1e-3,
                        events=[InputEvent(0.5, "u0", 1.0)],
                        noise=MeasurementNoise(0.01, 0.01, seed=1))
    return scenario, simulate_truth(scenario)


class TestCostReport:
    """Tests for report records and degraded classification."""

    def test_defaults(self):
        report = CostReport("sa", 25.0)
        assert report.status == CellStatus.PENDING
        assert report.key == ("sa", 25.0)
        assert "sa @ 25 fps" in str(report)

    def test_degraded_against_reference(self):
        reports = [
            CostReport("sa", 25.0, rmse={"p_f": 1e-3}, status=CellStatus.OK),
            CostReport("rk4", 25.0, rmse={"p_f": 2e-2}, status=CellStatus.OK),
            CostReport("be", 25.0, rmse={"p_f": 5e-3}, status=CellStatus.OK),
            CostReport("rk4", 45.0, rmse={"p_f": 1.0}, status=CellStatus.OK),
            CostReport("rk4", 20.0, rmse={"p_f": 1.0}, status=CellStatus.DIVERGENT),
            CostReport("sa", 20.0, rmse={"p_f": 1e-3}, status=CellStatus.OK),
        ]
        classify_degraded(reports)
        statuses = [r.status for r in reports]
        assert statuses == [CellStatus.OK, CellStatus.DEGRADED, CellStatus.OK,
                            CellStatus.OK, CellStatus.DIVERGENT, CellStatus.OK]
        assert "p_f" in reports[1].message


class TestSweepService:
    """Tests for SweepService."""

    @pytest.mark.asyncio
    async def test_cells_in_order(self, linear_case):
        scenario, truth = linear_case
        service = SweepService()
        result = await service.sweep(scenario, ["sa", "rk4", "be"], truth=truth)
        assert [r.key for r in result.reports] == [
            ("sa", 10.0), ("sa", 20.0), ("rk4", 10.0), ("rk4", 20.0), ("be", 10.0), ("be", 20.0)]
        assert service.get_statistics()["ok"] == 6
        assert result.get("be", 20.0).newton_max >= 1
        assert result.get("sa", 10.0).newton_avg is None
        with pytest.raises(KeyError):
            result.get("sa", 30.0)

    @pytest.mark.asyncio
    async def test_single_cell_matches_run_filter(self, linear_case):
        scenario, truth = linear_case
        result = await SweepService().sweep(scenario, ["sa"], [20.0], truth=truth)
        model = scenario.build_model()
        problem = build_filter_problem(scenario, model, truth, 20.0)
        meas = problem.measurements
        direct = run_filter("sa", model, problem.noise, problem.init, meas.measured_inputs,
                            meas.measured_outputs, problem.h, times=meas.times)
        np.testing.assert_array_equal(result.get("sa", 20.0).trace.mean_array(), direct.mean_array())

    @pytest.mark.asyncio
    async def test_workers_do_not_change_results(self, linear_case):
        scenario, truth = linear_case
        serial = await SweepService(workers=1).sweep(scenario, ["sa", "rk4"], truth=truth)
        parallel = await SweepService(workers=4).sweep(scenario, ["sa", "rk4"], truth=truth)
        for a, b in zip(serial.reports, parallel.reports):
            assert a.key == b.key
            assert a.rmse == b.rmse

    @pytest.mark.asyncio
    async def test_failed_cell_is_divergent(self, linear_case, monkeypatch):
        def failing(*args, **kwargs):
            raise ConvergenceError("no convergence", 1.0, 50)

        monkeypatch.setattr(sweep_module, "run_filter", failing)
        scenario, truth = linear_case
        service = SweepService()
        result = await service.sweep(scenario, ["be"], [10.0], truth=truth)
        report = result.get("be", 10.0)
        assert report.status == CellStatus.DIVERGENT
        assert "ConvergenceError" in report.message
        assert np.isnan(report.rmse["x0"])
        assert service.get_statistics()["divergent"] == 1

    def test_seed_override(self, linear_case):
        scenario, truth = linear_case
        a = fps_sweep(scenario, ["sa"], [10.0], seed=5, truth=truth)
        b = fps_sweep(scenario, ["sa"], [10.0], seed=5, truth=truth)
        c = fps_sweep(scenario, ["sa"], [10.0], seed=6, truth=truth)
        assert a.reports[0].rmse == b.reports[0].rmse
        assert a.reports[0].rmse != c.reports[0].rmse


class TestSmibSweep:
    """The coarse-rate RK4 failure shows up as a divergent cell."""

    def test_statuses(self):
        result = fps_sweep(load_scenario(SCENARIOS / "smib_fault.json"), ["sa", "rk4"], [20.0, 45.0])
        assert result.get("sa", 20.0).status == CellStatus.OK
        assert result.get("sa", 45.0).status == CellStatus.OK
        assert result.get("rk4", 20.0).status == CellStatus.DIVERGENT
        assert result.get("rk4", 45.0).status != CellStatus.DIVERGENT


class TestImplicitComparison:
    """Backward Euler against the stiffness-aware filter on the inverter scenarios."""

    @pytest.mark.parametrize("name, fps", [("gfm_dip.json", 30.0), ("gfl_dip.json", 60.0)])
    def test_accuracy_and_cost(self, name, fps):
        """Backward Euler matches the accuracy but costs at least three times as much per step."""
        result = fps_sweep(load_scenario(SCENARIOS / name), ["sa", "be"], [fps])
        sa, be = result.get("sa", fps), result.get("be", fps)
        assert sa.status == CellStatus.OK and be.status == CellStatus.OK
        for state, value in sa.rmse.items():
            assert 0.5 <= be.rmse[state] / value <= 2.0
        assert be.newton_avg <= 5.0
        assert be.newton_max <= 10
        assert be.newton_avg <= TOLERANCES.newton_max_iter
        assert be.avg_ms >= 3.0 * sa.avg_ms


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
