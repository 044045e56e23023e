"""
One-dimensional hyperparameter sweeps.

Every grid value patches a copy of the base config, runs an ensemble and
diagnoses its post-burn traces. Grid seeds are derived from the base seed and
a stable hash of the value itself, so a point's result does not depend on the
order of the grid or on which other values it contains.
"""

import logging
from dataclasses import dataclass, field
from typing import Any

from marl_dyn.conf.run_config import RunConfig, SimConfig, patch_simulation
from marl_dyn.utils.commons.file_utils import table_to_csv
from marl_dyn.utils.commons.hashing import derive_seed, stable_int
from marl_dyn.utils.coupled_sim import TrajectoryTrace, run_jobs, run_member
from marl_dyn.utils.diagnostics.report import DiagnosticsReport, diagnose
from marl_dyn.utils.exceptions import ConfigurationError, MarlDynError

logger = logging.getLogger(__name__)

SENSITIVITY_COLUMNS = (
    "value",
    "lambda_mean",
    "lambda_sd",
    "d2_mean",
    "d2_sd",
    "frob_mean",
    "frob_sd",
    "n_diverged",
    "status",
)

STATUS_OK = "ok"
STATUS_FAILED = "failed"


@dataclass(eq=False)
class SweepPoint:
    value: Any
    config: SimConfig
    n_diverged: int
    status: str
    report: DiagnosticsReport | None = None
    error: str | None = None
    traces: list[TrajectoryTrace] = field(default_factory=list, repr=False)

    def stats(self) -> dict[str, float | None]:
        if self.report is None:
            return dict.fromkeys(SENSITIVITY_COLUMNS[1:7])
        lambda_mean, lambda_sd = self.report.lambda_stats
        d2_mean, d2_sd = self.report.d2_stats
        frob_mean, frob_sd = self.report.frobenius_stats
        return {
            "lambda_mean": lambda_mean,
            "lambda_sd": lambda_sd,
            "d2_mean": d2_mean,
            "d2_sd": d2_sd,
            "frob_mean": frob_mean,
            "frob_sd": frob_sd,
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "status": self.status,
            "config_hash": self.config.config_hash,
            "seed": self.config.seed,
            "n_runs": self.config.n_runs,
            "n_diverged": self.n_diverged,
            **self.stats(),
            "report": self.report.to_dict() if self.report else None,
            "error": self.error,
        }


@dataclass(eq=False)
class SweepResult:
    parameter: str
    base_config_hash: str
    points: list[SweepPoint]

    @property
    def n_failed(self) -> int:
        return sum(point.status == STATUS_FAILED for point in self.points)

    def point_for(self, value: Any) -> SweepPoint:
        for point in self.points:
            if point.value == value:
                return point
        raise KeyError(value)

    def to_dict(self) -> dict[str, Any]:
        return {
            "parameter": self.parameter,
            "base_config_hash": self.base_config_hash,
            "n_points": len(self.points),
            "n_failed": self.n_failed,
            "points": [point.to_dict() for point in sorted_points(self.points)],
        }


def _sort_key(point: SweepPoint) -> tuple:
    value = point.value
    if isinstance(value, bool) or not isinstance(value, int | float):
        return (1, str(value))
    return (0, value)


def sorted_points(points: list[SweepPoint]) -> list[SweepPoint]:
    return sorted(points, key=_sort_key)


def point_config(base: SimConfig, parameter: str, value: Any) -> SimConfig:
    """Patched copy of ``base`` with its seed derived from the grid value."""
    patched = patch_simulation(base, parameter, value)
    return patched.with_seed(derive_seed(patched.seed, stable_int(value)))


def _diagnose_point(traces: list[TrajectoryTrace], config: RunConfig, n_burn: int):
    try:
        return diagnose(traces, config.diagnostics, n_burn), None
    except MarlDynError as e:
        return None, str(e)


def run_sweep(config: RunConfig, workers: int = 1) -> SweepResult:
    if config.sweep is None:
        raise ConfigurationError("config has no sweep section", key="sweep")

    base = config.simulation
    parameter = config.sweep.parameter
    configs = [point_config(base, parameter, value) for value in config.sweep.values]
    logger.info(
        "Sweep over %s: %d values x %d runs", parameter, len(configs), base.n_runs
    )

    jobs = [(run_member, (cfg, run_index)) for cfg in configs for run_index in range(cfg.n_runs)]
    members = run_jobs(jobs, workers)

    grouped, offset = [], 0
    for cfg in configs:
        grouped.append(members[offset : offset + cfg.n_runs])
        offset += cfg.n_runs

    live_groups = [
        (index, traces) for index, traces in enumerate(grouped) if any(not t.diverged for t in traces)
    ]
    outcomes = run_jobs(
        [(_diagnose_point, (traces, config, configs[index].n_burn)) for index, traces in live_groups],
        workers,
    )
    by_index = dict(zip([index for index, _ in live_groups], outcomes, strict=True))

    points = []
    for index, (value, cfg, traces) in enumerate(zip(config.sweep.values, configs, grouped, strict=True)):
        n_diverged = sum(trace.diverged for trace in traces)
        report, error = by_index.get(index, (None, f"all {len(traces)} runs diverged"))
        status = STATUS_OK if report is not None else STATUS_FAILED
        if status == STATUS_FAILED:
            logger.warning("Sweep point %s=%r failed: %s", parameter, value, error)
        points.append(
            SweepPoint(
                value=value,
                config=cfg,
                n_diverged=n_diverged,
                status=status,
                report=report,
                error=error,
                traces=traces,
            )
        )
    return SweepResult(parameter=parameter, base_config_hash=base.config_hash, points=points)


def emit_sensitivity_curves(result: SweepResult) -> str:
    """CSV with one row per grid value, sorted by value; failed points leave numeric cells blank."""
    rows = []
    for point in sorted_points(result.points):
        stats = point.stats()
        failed = point.status == STATUS_FAILED
        rows.append(
            [
                point.value,
                *(None if failed else stats[column] for column in SENSITIVITY_COLUMNS[1:7]),
                point.n_diverged,
                point.status,
            ]
        )
    return table_to_csv(SENSITIVITY_COLUMNS, rows)
