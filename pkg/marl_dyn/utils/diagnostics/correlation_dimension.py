"""
Correlation dimension from the pair-correlation sum C(r).

Radii are log-spaced between the 5th and 50th percentiles of the pairwise
distances; the scaling region is the contiguous run of at least
``min_window`` radii whose log-log fit has the highest R^2 (ties go to the
longer, then the earlier, window). Pair distances are visited in row blocks
and never held in full.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress

from marl_dyn.utils.diagnostics.pairwise import as_points, order_statistics, pair_count, pair_distances
from marl_dyn.utils.exceptions import ContractViolationError

logger = logging.getLogger(__name__)

MIN_MEANINGFUL_POINTS = 100
R2_TIE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class CorrelationDimFit:
    d2: float
    radii: np.ndarray
    correlation_sums: np.ndarray
    window: tuple[int, int]
    r_squared: float
    degenerate: bool = False
    embedding: tuple[int, int] | None = None
    n_points: int = 0

    def to_rows(self) -> list[tuple[float, float, int]]:
        start, end = self.window
        return [
            (float(r), float(c), int(start <= i <= end))
            for i, (r, c) in enumerate(zip(self.radii, self.correlation_sums, strict=True))
        ]


def _separated_percentiles(
    x: np.ndarray, theiler_w: int, coincident: int, n_separated: int, percents: tuple[float, ...]
) -> tuple[float, ...]:
    """Linear-interpolation percentiles of the pair distances above ``resolution``."""
    positions = [(n_separated - 1) * p / 100.0 for p in percents]
    lower = [int(np.floor(v)) for v in positions]
    upper = [min(i + 1, n_separated - 1) for i in lower]
    values = order_statistics(x, [coincident + i for i in lower + upper], theiler_w)
    k = len(percents)
    return tuple(
        float(values[i] + (values[k + i] - values[i]) * (v - lower[i])) for i, v in enumerate(positions)
    )


def _best_window(log_r: np.ndarray, log_c: np.ndarray, min_window: int) -> tuple[int, int, float, float]:
    best: tuple[int, int, float, float] | None = None
    n = len(log_r)
    # Longer windows first, then earlier ones, so strict improvement breaks ties.
    for length in range(n, min_window - 1, -1):
        for start in range(n - length + 1):
            end = start + length - 1
            fit = linregress(log_r[start : end + 1], log_c[start : end + 1])
            r_squared = float(fit.rvalue**2)
            if best is None or r_squared > best[2] + R2_TIE_TOLERANCE:
                best = (start, end, r_squared, float(fit.slope))
    if best is None:
        raise ContractViolationError(
            f"need at least {min_window} usable radii, got {n}", operation="correlation_dimension"
        )
    return best


def _degenerate(n_points: int, embedding) -> CorrelationDimFit:
    return CorrelationDimFit(
        d2=0.0,
        radii=np.empty(0),
        correlation_sums=np.empty(0),
        window=(0, -1),
        r_squared=float("nan"),
        degenerate=True,
        embedding=embedding,
        n_points=n_points,
    )


def correlation_dimension(
    points,
    n_radii: int = 24,
    theiler_w: int = 0,
    min_window: int = 5,
    resolution: float = 1e-8,
    embedding: tuple[int, int] | None = None,
) -> CorrelationDimFit:
    """
    Estimate D2 for ``points`` (N x m).

    Pairs with ``|i - j| <= theiler_w`` are excluded and the pair count is
    reduced to match. Distances at or below ``resolution`` count as
    coincident; if every pair is coincident the attractor is a point and
    ``d2 = 0`` is returned with the ``degenerate`` flag set.
    """
    x = as_points(points)
    n = len(x)
    if n < 2:
        raise ContractViolationError("need at least 2 points", operation="correlation_dimension")
    if n < MIN_MEANINGFUL_POINTS:
        logger.warning("Correlation dimension from only %d points is unreliable", n)

    n_pairs = pair_count(n, theiler_w)
    if n_pairs == 0:
        raise ContractViolationError(
            f"Theiler window {theiler_w} excludes every pair", operation="correlation_dimension"
        )

    coincident = sum(int(np.count_nonzero(d <= resolution)) for d in pair_distances(x, theiler_w))
    n_separated = n_pairs - coincident
    if n_separated == 0:
        return _degenerate(n, embedding)
    r_low, r_high = _separated_percentiles(x, theiler_w, coincident, n_separated, (5.0, 50.0))
    if r_high <= r_low:
        return _degenerate(n, embedding)

    radii = np.geomspace(r_low, r_high, n_radii)
    # Each pair is binned by the number of radii at or below it; C(r_k) is the running total to k.
    below = np.zeros(n_radii + 1, dtype=np.int64)
    for d in pair_distances(x, theiler_w):
        below += np.bincount(np.searchsorted(radii, d, side="right"), minlength=n_radii + 1)
    sums = np.cumsum(below)[:n_radii] / n_pairs

    usable = sums > 0.0
    log_r, log_c = np.log(radii[usable]), np.log(sums[usable])
    start, end, r_squared, slope = _best_window(log_r, log_c, min_window)
    offset = int(np.argmax(usable))
    return CorrelationDimFit(
        d2=slope,
        radii=radii,
        correlation_sums=sums,
        window=(start + offset, end + offset),
        r_squared=r_squared,
        embedding=embedding,
        n_points=n,
    )
