from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from marl_dyn.utils.exceptions import ContractViolationError


@dataclass(frozen=True, eq=False)
class EmpiricalDensity:
    """Histogram estimate of the stationary distribution over at most two coordinates."""

    bin_edges: tuple[np.ndarray, ...]
    counts: np.ndarray
    density: np.ndarray
    n_samples: int

    @property
    def bin_volumes(self) -> np.ndarray:
        widths = [np.diff(edges) for edges in self.bin_edges]
        return widths[0] if len(widths) == 1 else np.outer(widths[0], widths[1])

    def total_mass(self) -> float:
        return float(np.sum(self.density * self.bin_volumes))

    def mass_above(self, thresholds: Sequence[float]) -> float:
        """Fraction of samples in bins whose lower edges are all >= the thresholds."""
        masks = [edges[:-1] >= t for edges, t in zip(self.bin_edges, thresholds, strict=True)]
        selected = masks[0] if len(masks) == 1 else np.outer(masks[0], masks[1])
        return float(self.counts[selected].sum() / self.n_samples)

    def to_rows(self) -> list[tuple[float, ...]]:
        """One row per bin: lower edge(s), upper edge(s), count, density."""
        rows = []
        for index in np.ndindex(self.counts.shape):
            lows = [float(self.bin_edges[d][i]) for d, i in enumerate(index)]
            highs = [float(self.bin_edges[d][i + 1]) for d, i in enumerate(index)]
            rows.append((*lows, *highs, int(self.counts[index]), float(self.density[index])))
        return rows


def _resolve_range(samples: np.ndarray, value_range) -> list[tuple[float, float]]:
    if value_range is not None:
        if len(value_range) != samples.shape[1]:
            raise ContractViolationError(
                f"range has {len(value_range)} entries for {samples.shape[1]} dimensions",
                operation="stationary_distribution",
            )
        return [(float(lo), float(hi)) for lo, hi in value_range]
    resolved = []
    for column in samples.T:
        lo, hi = float(column.min()), float(column.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        resolved.append((lo, hi))
    return resolved


def stationary_distribution(samples, bins=20, value_range=None) -> EmpiricalDensity:
    """
    Normalised histogram of ``samples`` (one row per sample, one or two columns).

    Samples outside ``value_range`` are clipped into the outermost bins.
    """
    data = np.asarray(samples, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, None]
    if data.size == 0:
        raise ContractViolationError("samples must not be empty", operation="stationary_distribution")
    if data.shape[1] > 2:
        raise ContractViolationError(
            f"histograms support at most 2 dimensions, got {data.shape[1]}; project first",
            operation="stationary_distribution",
        )

    ranges = _resolve_range(data, value_range)
    clipped = np.column_stack(
        [np.clip(data[:, d], lo, hi) for d, (lo, hi) in enumerate(ranges)]
    )
    counts, edges = np.histogramdd(clipped, bins=bins, range=ranges)
    n_samples = data.shape[0]

    widths = [np.diff(e) for e in edges]
    volumes = widths[0] if len(widths) == 1 else np.outer(widths[0], widths[1])
    density = counts / (n_samples * volumes)
    return EmpiricalDensity(
        bin_edges=tuple(edges), counts=counts.astype(np.int64), density=density, n_samples=n_samples
    )
