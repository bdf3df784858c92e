"""
Command-line front end: stiffkit simulate|estimate|stability|sweep|order.

Exit codes: 0 success, 2 input error, 3 filter divergence, 4 numerical failure.
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from cli.scenario_loader import load_scenario
from decorators.logging_decorators import log_calls
from discretize.runge_kutta import (
    jacobian_eigenvalues,
    rk4_real_axis_boundary,
    rk4_region_boundary,
    stability_report_from_eigenvalues,
)
from exporters.csv_exporter import CSVExporter
from exporters.pdf_exporter import PDFExporter
from filters.prediction_strategy import STRATEGIES
from filters.types import StateEstimate
from filters.ukf import run_filter
from numkit.errors import DivergenceError, NumericalError, ScenarioError, SimulationError, TraceFormatError
from services.evaluation import order_study, trace_nis
from services.simulation_service import build_filter_problem, sample_measurements, simulate_truth
from services.sweep_service import fps_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DIVERGED = 3
EXIT_NUMERICAL = 4

DEFAULT_ORDER_STEPS_MS = (4.0, 2.0, 1.0, 0.5, 0.25)


@log_calls
def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    model = scenario.build_model()
    truth = simulate_truth(scenario, model)
    exporter = CSVExporter(args.out)
    print(f"truth: {exporter.export_truth(truth)} ({len(truth)} rows)")
    for fps in scenario.fps:
        meas = sample_measurements(truth, fps, scenario.noise)
        print(f"measurements @ {fps:g} fps: {exporter.export_measurements(meas)} ({len(meas)} rows)")
    return EXIT_OK


@log_calls
def cmd_estimate(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.fps not in scenario.fps:
        raise ScenarioError(f"{args.fps:g} is not listed in the scenario ({scenario.fps})", "fps")
    model = scenario.build_model()
    truth = simulate_truth(scenario, model)
    problem = build_filter_problem(scenario, model, truth, args.fps)
    meas = problem.measurements
    trace = run_filter(args.filter, model, problem.noise, problem.init,
                       meas.measured_inputs, meas.measured_outputs, problem.h, times=meas.times)

    path = CSVExporter(args.out).export_filter_trace(trace, args.fps)
    if not trace.completed:
        print(f"{args.filter} diverged at step {trace.failure_step}: {trace.message}; "
              f"partial trace in {path}", file=sys.stderr)
        return EXIT_DIVERGED
    print(f"{args.filter} @ {args.fps:g} fps: {len(trace) - 1} steps, {trace_nis(trace, model.p)}")
    print(f"trace: {path}")
    return EXIT_OK


@log_calls
def cmd_stability(args) -> int:
    scenario = load_scenario(args.scenario)
    model = scenario.build_model()
    u_op = scenario.nominal_input(model)
    x_op = scenario.initial_state(model)
    eigenvalues = jacobian_eigenvalues(model, x_op, u_op)
    exporter = CSVExporter(args.out)

    print(f"{model.model_name} eigenvalues at the operating point:")
    for lam in eigenvalues:
        print(f"  {lam.real:+.6g} {lam.imag:+.6g}j")
    for fps in (args.fps or scenario.fps):
        report = stability_report_from_eigenvalues(eigenvalues, 1.0 / fps)
        path = exporter.export_stability(report, fps)
        outside = len(report.outside_modes())
        verdict = "all inside" if report.all_stable else f"{outside} outside"
        print(f"  {fps:g} fps: {verdict} the RK4 region ({path})")
    if args.boundary:
        path = exporter.export_boundary(rk4_region_boundary())
        print(f"RK4 boundary ({rk4_real_axis_boundary():.4f} on the real axis): {path}")
    return EXIT_OK


@log_calls
def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    result = fps_sweep(scenario, args.methods, args.fps, workers=args.workers, seed=args.seed)
    print(f"sweep: {CSVExporter(args.out).export_sweep(result.reports)}")
    for report in result.reports:
        rmse = ", ".join(f"{s} {v:.3e}" for s, v in report.rmse.items())
        print(f"  {report.method:>4} @ {report.fps:>6g} fps  {report.status.value:<9} "
              f"avg {report.avg_ms:.3f} ms  {rmse}")
    if args.pdf:
        print(f"report: {PDFExporter(args.out).export_sweep_report(result)}")
    return EXIT_OK


@log_calls
def cmd_order(args) -> int:
    scenario = load_scenario(args.scenario)
    model = scenario.build_model()
    u = scenario.nominal_input(model)
    x = scenario.initial_state(model) + scenario.order_offset
    estimate = StateEstimate.isotropic(x, scenario.p0)
    steps = 1e-3 * np.asarray(args.steps, dtype=float)
    study = order_study(model, estimate, u, steps)
    path = CSVExporter(args.out).export_order(study)
    print(f"mean slope: {study.mean}")
    print(f"covariance slope: {study.covariance}")
    print(f"order study: {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stiffkit",
        description="Stiffness-aware unscented Kalman filtering with RK4 and backward Euler baselines.",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("scenario", help="scenario JSON file")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.set_defaults(handler=handler)
        return p

    command("simulate", cmd_simulate, "truth and measurement CSVs")

    p = command("estimate", cmd_estimate, "run one filter at one frame rate")
    p.add_argument("--filter", choices=sorted(STRATEGIES), default="sa")
    p.add_argument("--fps", type=float, required=True)

    p = command("stability", cmd_stability, "RK4 stability-region membership of h·λ")
    p.add_argument("--fps", type=float, nargs="+", help="frame rates (default: scenario fps)")
    p.add_argument("--boundary", action="store_true", help="also write the RK4 region boundary")

    p = command("sweep", cmd_sweep, "accuracy and cost per (method, fps)")
    p.add_argument("--methods", nargs="+", choices=sorted(STRATEGIES), default=["sa", "rk4"])
    p.add_argument("--fps", type=float, nargs="+", help="frame rates (default: scenario fps)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, help="noise seed override")
    p.add_argument("--pdf", action="store_true", help="also render the table as PDF")

    p = command("order", cmd_order, "one-step convergence order of the stiffness-aware prediction")
    p.add_argument("--steps", type=float, nargs="+", default=list(DEFAULT_ORDER_STEPS_MS),
                   help="step sizes in ms")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        code = args.handler(args)
        logger.info(f"stiffkit {args.command} finished with exit code {code}")
        return code
    except (ScenarioError, TraceFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except DivergenceError as e:
        print(f"diverged: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except (NumericalError, SimulationError) as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
