"""
Service for running filter comparisons over (method, fps) cells.
Uses asyncio with a thread pool so cells can run side by side.
"""

import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from decorators.logging_decorators import log_async_calls, performance_log_async
from filters.types import FilterTrace
from filters.ukf import run_filter
from numkit.config import TOLERANCES
from numkit.errors import StiffkitError
from services.evaluation import trace_rmse
from services.simulation_service import Scenario, TruthTrace, build_filter_problem, simulate_truth

logger = logging.getLogger(__name__)


class CellStatus(Enum):
    """Sweep cell status."""
    PENDING = "pending"
    RUNNING = "running"
    OK = "ok"
    DEGRADED = "degraded"
    DIVERGENT = "divergent"


@dataclass
class CostReport:
    """Accuracy and cost of one filter at one frame rate."""
    method: str
    fps: float
    rmse: Dict[str, float] = field(default_factory=dict)
    avg_ms: float = 0.0
    max_ms: float = 0.0
    newton_avg: Optional[float] = None
    newton_max: Optional[int] = None
    status: CellStatus = CellStatus.PENDING
    message: str = ""
    trace: Optional[FilterTrace] = None

    def __str__(self):
        return f"CostReport({self.method} @ {self.fps:g} fps, {self.status.value})"

    @property
    def key(self) -> Tuple[str, float]:
        return self.method, self.fps


def cost_report(method: str, fps: float, trace: FilterTrace, truth: TruthTrace,
                states: Sequence[str]) -> CostReport:
    """Builds a report from a finished (or aborted) trace; timings skip the initial row."""
    steps_ms = 1e3 * trace.step_array()[1:]
    report = CostReport(
        method=method,
        fps=fps,
        rmse=trace_rmse(trace, truth, states),
        avg_ms=float(np.mean(steps_ms)) if steps_ms.size else 0.0,
        max_ms=float(np.max(steps_ms)) if steps_ms.size else 0.0,
        status=CellStatus.OK if trace.completed else CellStatus.DIVERGENT,
        message=trace.message,
        trace=trace,
    )
    if trace.has_newton:
        stats = trace.newton_summary()
        report.newton_avg, report.newton_max = stats.avg, stats.max
    return report


def classify_degraded(reports: Sequence[CostReport], reference: str = "sa",
                      factor: float = TOLERANCES.degraded_factor):
    """Marks completed cells whose RMSE exceeds factor × the reference method's RMSE at the same fps."""
    baseline = {r.fps: r for r in reports if r.method == reference and r.status is CellStatus.OK}
    for report in reports:
        base = baseline.get(report.fps)
        if report.method == reference or base is None or report.status is not CellStatus.OK:
            continue
        for state, value in report.rmse.items():
            if value > factor * base.rmse.get(state, np.inf):
                report.status = CellStatus.DEGRADED
                report.message = f"{state} RMSE {value:.3e} > {factor:g} × {reference} RMSE"
                break


@dataclass
class SweepResult:
    scenario: Scenario
    reports: List[CostReport]

    def get(self, method: str, fps: float) -> CostReport:
        for report in self.reports:
            if report.method == method and report.fps == fps:
                return report
        raise KeyError(f"no cell for {method} @ {fps} fps")


class SweepService:
    """Service for asynchronous (method, fps) sweeps over one truth trajectory."""

    def __init__(self, workers: int = 1):
        self.workers = max(1, int(workers))
        self.cells: Dict[Tuple[str, float], CostReport] = {}

    def _run_cell(self, scenario: Scenario, model, truth: TruthTrace, method: str,
                  fps: float, seed: Optional[int]) -> CostReport:
        report = self.cells[(method, fps)]
        report.status = CellStatus.RUNNING
        states = model.report_states
        try:
            problem = build_filter_problem(scenario, model, truth, fps, seed)
            meas = problem.measurements
            trace = run_filter(method, model, problem.noise, problem.init,
                               meas.measured_inputs, meas.measured_outputs, problem.h,
                               times=meas.times)
            result = cost_report(method, fps, trace, truth, states)
        except StiffkitError as e:
            logger.warning(f"Sweep cell {method} @ {fps:g} fps failed: {e}")
            result = CostReport(method, fps, rmse={s: float("nan") for s in states},
                                status=CellStatus.DIVERGENT, message=f"{type(e).__name__}: {e}")
        self.cells[(method, fps)] = result
        logger.info(f"✓ {result}")
        return result

    @performance_log_async
    @log_async_calls
    async def sweep(self, scenario: Scenario, methods: Sequence[str],
                    fps_list: Optional[Sequence[float]] = None, seed: Optional[int] = None,
                    truth: Optional[TruthTrace] = None) -> SweepResult:
        """
        Runs every (method, fps) cell on identical noise realisations.

        Args:
            scenario: Scenario supplying model, truth script and noise
            methods: Filter kinds ("sa", "rk4", "be")
            fps_list: Frame rates (defaults to the scenario's list)
            seed: Noise seed override
            truth: Precomputed truth trajectory

        Returns:
            SweepResult with reports ordered by method, then fps
        """
        fps_list = list(scenario.fps if fps_list is None else fps_list)
        model = scenario.build_model()
        truth = simulate_truth(scenario, model) if truth is None else truth

        keys = [(method, float(fps)) for method in methods for fps in fps_list]
        self.cells = {key: CostReport(*key) for key in keys}

        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            tasks = [
                loop.run_in_executor(executor, self._run_cell, scenario, model, truth,
                                     method, fps, seed)
                for method, fps in keys
            ]
            await asyncio.gather(*tasks)

        reports = [self.cells[key] for key in keys]
        classify_degraded(reports)
        return SweepResult(scenario, reports)

    def get_statistics(self) -> Dict[str, int]:
        """Number of cells per status."""
        counts = {status.value: 0 for status in CellStatus}
        for report in self.cells.values():
            counts[report.status.value] += 1
        return counts


def fps_sweep(scenario: Scenario, methods: Sequence[str], fps_list: Optional[Sequence[float]] = None,
              workers: int = 1, seed: Optional[int] = None,
              truth: Optional[TruthTrace] = None) -> SweepResult:
    """Synchronous entry point for SweepService.sweep."""
    return asyncio.run(SweepService(workers).sweep(scenario, methods, fps_list, seed, truth))
