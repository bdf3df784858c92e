"""
CSV Exporter for traces and reports.
Every file is written once, atomically, with 17 significant digits so
finite values read back bit-exactly.
"""

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from discretize.runge_kutta import StabilityReport
from filters.types import FilterTrace
from numkit.errors import TraceFormatError
from services.evaluation import OrderStudy
from services.simulation_service import MeasurementTrace, TruthTrace
from services.sweep_service import CostReport

PathLike = Union[str, Path]


def fmt(value) -> str:
    """Decimal text with 17 significant digits."""
    return f"{float(value):.17g}"


def write_rows(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """
    Writes header and rows to a temporary file and renames it over path.

    Raises:
        OSError: With the target path if the file cannot be written
    """
    path = Path(path)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="", encoding="utf-8") as f:
                f.write(buffer.getvalue())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as e:
        raise OSError(e.errno, f"cannot write {path}: {e.strerror or e}", str(path)) from e
    return str(path)


def read_rows(path: PathLike) -> Tuple[List[str], np.ndarray]:
    """
    Header and numeric body of a CSV file.

    Raises:
        TraceFormatError: On an empty file, a short/long row or a non-numeric field
        OSError: If the file cannot be read
    """
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise OSError(e.errno, f"cannot read {path}: {e.strerror or e}", str(path)) from e
    if not rows:
        raise TraceFormatError(path, 1, "missing header")
    header = rows[0]
    body = []
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise TraceFormatError(path, line, f"expected {len(header)} fields, got {len(row)}")
        try:
            body.append([float(v) for v in row])
        except ValueError as e:
            raise TraceFormatError(path, line, f"non-numeric field: {e}") from e
    return header, np.array(body, dtype=float).reshape(len(body), len(header))


def truth_header(trace: TruthTrace) -> List[str]:
    return ["t", *trace.state_names, *trace.input_names, *trace.output_names]


def measurement_header(trace: MeasurementTrace) -> List[str]:
    return ["t", *[f"mu_{n}" for n in trace.input_names], *[f"z_{n}" for n in trace.output_names]]


def write_truth(path: PathLike, trace: TruthTrace) -> str:
    data = np.column_stack([trace.times, trace.states, trace.inputs, trace.clean_outputs]) \
        if len(trace) else np.zeros((0, 0))
    return write_rows(path, truth_header(trace), ([fmt(v) for v in row] for row in data))


def read_truth(path: PathLike, state_names: Sequence[str], input_names: Sequence[str],
               output_names: Sequence[str]) -> TruthTrace:
    """Reads a truth CSV, checking its header against the expected names."""
    header, data = read_rows(path)
    expected = ["t", *state_names, *input_names, *output_names]
    if header != expected:
        raise TraceFormatError(path, 1, f"header {header} does not match {expected}")
    n, m = len(state_names), len(input_names)
    return TruthTrace(
        times=data[:, 0],
        states=data[:, 1:1 + n],
        inputs=data[:, 1 + n:1 + n + m],
        clean_outputs=data[:, 1 + n + m:],
        state_names=tuple(state_names),
        input_names=tuple(input_names),
        output_names=tuple(output_names),
    )


def write_measurements(path: PathLike, trace: MeasurementTrace) -> str:
    data = np.column_stack([trace.times, trace.measured_inputs, trace.measured_outputs]) \
        if len(trace) else np.zeros((0, 0))
    return write_rows(path, measurement_header(trace), ([fmt(v) for v in row] for row in data))


def read_measurements(path: PathLike, fps: float) -> MeasurementTrace:
    """Reads a measurement CSV; channel names come from the mu_/z_ header prefixes."""
    header, data = read_rows(path)
    if not header or header[0] != "t":
        raise TraceFormatError(path, 1, "first column must be t")
    inputs = [h[3:] for h in header[1:] if h.startswith("mu_")]
    outputs = [h[2:] for h in header[1:] if h.startswith("z_")]
    if len(inputs) + len(outputs) != len(header) - 1:
        raise TraceFormatError(path, 1, "columns must be t, mu_<input>..., z_<output>...")
    m = len(inputs)
    return MeasurementTrace(
        times=data[:, 0],
        measured_inputs=data[:, 1:1 + m],
        measured_outputs=data[:, 1 + m:],
        fps=float(fps),
        input_names=tuple(inputs),
        output_names=tuple(outputs),
    )


def write_filter_trace(path: PathLike, trace: FilterTrace) -> str:
    header = ["t", *[f"mean_{s}" for s in trace.state_names],
              *[f"var_{s}" for s in trace.state_names], "nis", "step_us"]
    if trace.has_newton:
        header += ["newton_avg", "newton_max"]

    def rows():
        for k in range(len(trace)):
            row = [fmt(trace.times[k]), *map(fmt, trace.means[k]), *map(fmt, trace.variances[k]),
                   fmt(trace.nis[k]), fmt(1e6 * trace.step_seconds[k])]
            if trace.has_newton:
                row += [fmt(trace.newton_avg[k]), str(int(trace.newton_max[k]))]
            yield row

    return write_rows(path, header, rows())


STABILITY_HEADER = ["re_lambda", "im_lambda", "re_hlambda", "im_hlambda", "abs_R", "inside"]


def write_stability(path: PathLike, report: StabilityReport) -> str:
    rows = ([fmt(lam.real), fmt(lam.imag), fmt(z.real), fmt(z.imag), fmt(r), str(bool(ok)).lower()]
            for lam, z, r, ok in zip(report.eigenvalues, report.scaled, report.abs_R, report.inside))
    return write_rows(path, STABILITY_HEADER, rows)


def write_boundary(path: PathLike, points: np.ndarray) -> str:
    return write_rows(path, ["re", "im"], ([fmt(re), fmt(im)] for re, im in points))


SWEEP_HEADER = ["method", "fps", "state", "rmse", "avg_ms", "max_ms",
                "newton_avg", "newton_max", "outcome"]


def sweep_rows(reports: Sequence[CostReport]) -> List[List[str]]:
    rows = []
    for report in reports:
        newton_avg = "" if report.newton_avg is None else fmt(report.newton_avg)
        newton_max = "" if report.newton_max is None else str(report.newton_max)
        for state, value in report.rmse.items():
            rows.append([report.method, f"{report.fps:g}", state, fmt(value),
                         fmt(report.avg_ms), fmt(report.max_ms), newton_avg, newton_max,
                         report.status.value])
    return rows


def write_sweep(path: PathLike, reports: Sequence[CostReport]) -> str:
    return write_rows(path, SWEEP_HEADER, sweep_rows(reports))


def write_order(path: PathLike, study: OrderStudy) -> str:
    """One row per step size, then one row per fitted slope."""
    rows = [[fmt(h), fmt(em), fmt(ec)]
            for h, em, ec in zip(study.steps, study.mean.errors, study.covariance.errors)]
    rows.append(["slope", str(study.mean), str(study.covariance)])
    return write_rows(path, ["h", "mean_error", "cov_error"], rows)


class CSVExporter:
    """Writes every artifact of a command into one output directory."""

    def __init__(self, export_dir: PathLike = "out"):
        """
        Initialize CSV exporter.

        Args:
            export_dir: Directory where files will be saved
        """
        self.export_dir = Path(export_dir)
        self.export_dir.mkdir(parents=True, exist_ok=True)

    def path(self, filename: str) -> Path:
        return self.export_dir / filename

    def export_truth(self, trace: TruthTrace, filename: str = "truth.csv") -> str:
        return write_truth(self.path(filename), trace)

    def export_measurements(self, trace: MeasurementTrace, filename: str = None) -> str:
        return write_measurements(self.path(filename or f"measurements_{trace.fps:g}fps.csv"), trace)

    def export_filter_trace(self, trace: FilterTrace, fps: float, filename: str = None) -> str:
        return write_filter_trace(self.path(filename or f"estimate_{trace.method}_{fps:g}fps.csv"), trace)

    def export_stability(self, report: StabilityReport, fps: float, filename: str = None) -> str:
        return write_stability(self.path(filename or f"stability_{fps:g}fps.csv"), report)

    def export_boundary(self, points: np.ndarray, filename: str = "rk4_boundary.csv") -> str:
        return write_boundary(self.path(filename), points)

    def export_sweep(self, reports: Sequence[CostReport], filename: str = "sweep.csv") -> str:
        return write_sweep(self.path(filename), reports)

    def export_order(self, study: OrderStudy, filename: str = "order_study.csv") -> str:
        return write_order(self.path(filename), study)
