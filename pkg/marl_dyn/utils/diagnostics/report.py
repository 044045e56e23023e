"""Assemble every estimator into one report for an ensemble of traces."""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any, TypeVar

import numpy as np

from marl_dyn.conf.run_config import DiagnosticsSettings
from marl_dyn.utils.coupled_sim import TrajectoryTrace, post_burn_samples
from marl_dyn.utils.diagnostics.correlation_dimension import CorrelationDimFit, correlation_dimension
from marl_dyn.utils.diagnostics.covariance import CovarianceSummary, covariance_summary
from marl_dyn.utils.diagnostics.density import EmpiricalDensity, stationary_distribution
from marl_dyn.utils.diagnostics.embedding import embed_columns
from marl_dyn.utils.diagnostics.lyapunov import LyapunovFit, max_lyapunov
from marl_dyn.utils.diagnostics.recurrence import RecurrenceMatrix, recurrence_matrix
from marl_dyn.utils.exceptions import ContractViolationError, DivergenceError, MarlDynError
from marl_dyn.utils.learners.enums import ProjectionMode

logger = logging.getLogger(__name__)

T = TypeVar("T")


def mean_sd(values: list[float]) -> tuple[float | None, float | None]:
    """Mean and sample standard deviation; sd is 0 for a single value."""
    if not values:
        return None, None
    array = np.asarray(values, dtype=np.float64)
    sd = float(np.std(array, ddof=1)) if len(array) > 1 else 0.0
    return float(array.mean()), sd


@dataclass(eq=False)
class DiagnosticsReport:
    config_hash: str
    n_runs: int
    n_live: int
    n_samples: int = 0
    density: EmpiricalDensity | None = None
    covariance: CovarianceSummary | None = None
    frobenius_per_run: list[float] = field(default_factory=list)
    lambda_per_run: list[float] = field(default_factory=list)
    d2_per_run: list[float] = field(default_factory=list)
    lyapunov_fit: LyapunovFit | None = None
    correlation_fit: CorrelationDimFit | None = None
    recurrence: RecurrenceMatrix | None = None
    representative_run: int | None = None
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def frobenius_norm(self) -> float | None:
        return self.covariance.frobenius if self.covariance else None

    @property
    def lambda_stats(self) -> tuple[float | None, float | None]:
        return mean_sd(self.lambda_per_run)

    @property
    def d2_stats(self) -> tuple[float | None, float | None]:
        return mean_sd(self.d2_per_run)

    @property
    def frobenius_stats(self) -> tuple[float | None, float | None]:
        return mean_sd(self.frobenius_per_run)

    @property
    def recurrence_rate(self) -> float | None:
        return self.recurrence.achieved_rate if self.recurrence else None

    def to_dict(self) -> dict[str, Any]:
        lambda_mean, lambda_sd = self.lambda_stats
        d2_mean, d2_sd = self.d2_stats
        frob_mean, frob_sd = self.frobenius_stats
        return {
            "config_hash": self.config_hash,
            "frobenius_norm": self.frobenius_norm,
            "lambda_max": lambda_mean,
            "d2": d2_mean,
            "recurrence_rate": self.recurrence_rate,
            "lambda_max_sd": lambda_sd,
            "d2_sd": d2_sd,
            "frobenius_mean": frob_mean,
            "frobenius_sd": frob_sd,
            "total_variance": self.covariance.total_variance if self.covariance else None,
            "mean_variance": self.covariance.mean_variance if self.covariance else None,
            "lambda_per_run": self.lambda_per_run,
            "d2_per_run": self.d2_per_run,
            "frobenius_per_run": self.frobenius_per_run,
            "recurrence_epsilon": self.recurrence.epsilon if self.recurrence else None,
            "target_rate": self.recurrence.target_rate if self.recurrence else None,
            "lyapunov_r_squared": self.lyapunov_fit.r_squared if self.lyapunov_fit else None,
            "correlation_r_squared": (
                None
                if self.correlation_fit is None or self.correlation_fit.degenerate
                else self.correlation_fit.r_squared
            ),
            "degenerate_attractor": (
                self.correlation_fit.degenerate if self.correlation_fit else None
            ),
            "n_runs": self.n_runs,
            "n_live": self.n_live,
            "n_samples": self.n_samples,
            "representative_run": self.representative_run,
            "errors": dict(sorted(self.errors.items())),
        }


def _attempt(report: DiagnosticsReport, name: str, func: Callable[[], T]) -> T | None:
    try:
        return func()
    except MarlDynError as e:
        logger.warning("Diagnostic '%s' unavailable: %s", name, e)
        report.errors[name] = str(e)
        return None


def _density_input(samples: np.ndarray, settings: DiagnosticsSettings, projection_mode: str):
    if settings.density_dims is not None:
        if max(settings.density_dims) >= samples.shape[1]:
            raise ContractViolationError(
                f"density_dims {settings.density_dims} exceed the {samples.shape[1]} trace columns",
                operation="stationary_distribution",
            )
        samples = samples[:, list(settings.density_dims)]
    value_range = settings.density_range
    if value_range is None and projection_mode == ProjectionMode.ACTION_PROB.value:
        value_range = tuple((0.0, 1.0) for _ in range(samples.shape[1]))
    return samples, value_range


def row_spacing(steps: np.ndarray) -> int:
    """Update steps between consecutive recorded rows; 1 for fewer than two rows."""
    gaps = np.unique(np.diff(np.asarray(steps, dtype=np.int64)))
    if gaps.size == 0:
        return 1
    if gaps.size > 1 or gaps[0] < 1:
        raise ContractViolationError(
            f"recorded steps are not evenly spaced (gaps {gaps.tolist()[:5]})", operation="diagnose"
        )
    return int(gaps[0])


def _scalar_input(rows: np.ndarray, settings: DiagnosticsSettings) -> tuple[np.ndarray, tuple | None]:
    embed = settings.embedding == "always" or (settings.embedding == "auto" and rows.shape[1] == 1)
    if not embed:
        return rows, None
    return embed_columns(rows, settings.embed_m, settings.embed_tau), (settings.embed_m, settings.embed_tau)


def diagnose(
    traces: list[TrajectoryTrace],
    settings: DiagnosticsSettings,
    n_burn: int,
) -> DiagnosticsReport:
    """
    Pooled density and covariance over all live members; Lyapunov exponent,
    correlation dimension and covariance norm per member; recurrence on the
    first live member.

    Lyapunov exponents are per update step, using the spacing of the
    recorded ``steps``. A run whose embedding fails gets no D2 either.

    Estimator failures are recorded per field and do not stop the others.
    """
    if not traces:
        raise ContractViolationError("ensemble must not be empty", operation="diagnose")
    live = [trace for trace in traces if not trace.diverged]
    if not live:
        raise DivergenceError(f"all {len(traces)} ensemble members diverged", traces[0].divergence)

    report = DiagnosticsReport(config_hash=live[0].config_hash, n_runs=len(traces), n_live=len(live))
    samples = post_burn_samples(live, n_burn)
    report.n_samples = len(samples)
    projection_mode = live[0].projection_mode

    def density():
        data, value_range = _density_input(samples, settings, projection_mode)
        return stationary_distribution(data, bins=settings.bins, value_range=value_range)

    report.density = _attempt(report, "density", density)
    report.covariance = _attempt(report, "frobenius_norm", lambda: covariance_summary(samples))

    lyapunov_errors, d2_errors = [], []
    for trace in live:
        rows = trace.post_burn_rows(n_burn)
        summary = _attempt(report, f"frobenius_run_{trace.run_index}", lambda r=rows: covariance_summary(r))
        if summary is not None:
            report.frobenius_per_run.append(summary.frobenius)

        try:
            points, embedding = _scalar_input(rows, settings)
        except MarlDynError as e:
            lyapunov_errors.append(f"run {trace.run_index}: {e}")
            d2_errors.append(f"run {trace.run_index}: {e}")
            continue

        try:
            spacing = row_spacing(trace.steps[trace.steps > n_burn])
            fit = max_lyapunov(points, settings.theiler_w, settings.z_min, settings.z_max, spacing)
            report.lambda_per_run.append(fit.lambda_max)
            if report.lyapunov_fit is None:
                report.lyapunov_fit = fit
        except MarlDynError as e:
            lyapunov_errors.append(f"run {trace.run_index}: {e}")

        try:
            d2_fit = correlation_dimension(
                points,
                n_radii=settings.n_radii,
                theiler_w=settings.theiler_w,
                min_window=settings.min_window,
                resolution=settings.resolution,
                embedding=embedding,
            )
            report.d2_per_run.append(d2_fit.d2)
            if report.correlation_fit is None:
                report.correlation_fit = d2_fit
        except MarlDynError as e:
            d2_errors.append(f"run {trace.run_index}: {e}")

    for name, messages in (("lambda_max", lyapunov_errors), ("d2", d2_errors)):
        if messages:
            logger.warning("Diagnostic '%s' failed for %d run(s)", name, len(messages))
            report.errors[name] = "; ".join(messages)

    representative = live[0]
    report.representative_run = representative.run_index
    report.recurrence = _attempt(
        report,
        "recurrence_rate",
        lambda: recurrence_matrix(
            representative.post_burn_rows(n_burn), settings.target_rate, settings.mask_width
        ),
    )
    return report
