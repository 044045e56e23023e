"""Writers for diagnose and sweep output directories."""

import logging
from pathlib import Path

from marl_dyn.conf.run_config import RunConfig
from marl_dyn.utils.commons.file_utils import table_to_csv, write_file, write_json
from marl_dyn.utils.commons.trace_io import write_traces
from marl_dyn.utils.diagnostics.report import DiagnosticsReport
from marl_dyn.utils.sweep import SweepResult, emit_sensitivity_curves, sorted_points

logger = logging.getLogger(__name__)

REPORT_NAME = "report.json"
DENSITY_NAME = "density.csv"
LYAPUNOV_CURVE_NAME = "lyapunov_curve.csv"
CORRELATION_CURVE_NAME = "correlation_curve.csv"
RECURRENCE_NAME = "recurrence.pgm"
SENSITIVITY_NAME = "sensitivity.csv"
SWEEP_REPORT_NAME = "sweep_report.json"


def density_columns(n_dims: int) -> list[str]:
    return [
        *(f"lo{d}" for d in range(n_dims)),
        *(f"hi{d}" for d in range(n_dims)),
        "count",
        "density",
    ]


def write_diagnostics(
    out_dir: str | Path, report: DiagnosticsReport, report_name: str = REPORT_NAME
) -> list[Path]:
    """The JSON report plus whichever tables and images the report could compute."""
    directory = Path(out_dir)
    written = [write_json(directory / report_name, report.to_dict())]
    if report.density is not None:
        columns = density_columns(len(report.density.bin_edges))
        written.append(write_file(directory / DENSITY_NAME, table_to_csv(columns, report.density.to_rows())))
    if report.lyapunov_fit is not None:
        written.append(
            write_file(
                directory / LYAPUNOV_CURVE_NAME,
                table_to_csv(("z", "log_divergence", "in_window"), report.lyapunov_fit.to_rows()),
            )
        )
    if report.correlation_fit is not None:
        written.append(
            write_file(
                directory / CORRELATION_CURVE_NAME,
                table_to_csv(("radius", "correlation_sum", "in_window"), report.correlation_fit.to_rows()),
            )
        )
    if report.recurrence is not None:
        written.append(
            write_file(directory / RECURRENCE_NAME, report.recurrence.to_pgm(report.config_hash))
        )
    return written


def point_dir_name(index: int) -> str:
    return f"point_{index:02d}"


def write_sweep(out_dir: str | Path, result: SweepResult, config: RunConfig) -> Path:
    """One ``point_XX/`` directory per grid value (in value order), the sensitivity table and the JSON summary."""
    directory = Path(out_dir)
    for index, point in enumerate(sorted_points(result.points)):
        point_dir = directory / point_dir_name(index)
        point_config = RunConfig(simulation=point.config, diagnostics=config.diagnostics)
        write_traces(point_dir, point.traces, point_config)
        if point.report is not None:
            write_diagnostics(point_dir, point.report)
    write_file(directory / SENSITIVITY_NAME, emit_sensitivity_curves(result))
    return write_json(directory / SWEEP_REPORT_NAME, result.to_dict())
