from dataclasses import dataclass

import numpy as np

from marl_dyn.utils.exceptions import ContractViolationError


@dataclass(frozen=True, eq=False)
class CovarianceSummary:
    covariance: np.ndarray
    frobenius: float
    total_variance: float
    mean_variance: float


def covariance_summary(samples) -> CovarianceSummary:
    data = np.asarray(samples, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[0] < 2:
        raise ContractViolationError(
            f"covariance needs at least 2 samples, got {data.shape[0]}",
            operation="covariance_frobenius",
        )
    # Unbiased estimator, divisor n - 1.
    cov = np.atleast_2d(np.cov(data, rowvar=False, ddof=1))
    total = float(np.trace(cov))
    return CovarianceSummary(
        covariance=cov,
        frobenius=float(np.linalg.norm(cov, "fro")),
        total_variance=total,
        mean_variance=total / cov.shape[0],
    )


def covariance_frobenius(samples) -> tuple[np.ndarray, float]:
    summary = covariance_summary(samples)
    return summary.covariance, summary.frobenius
