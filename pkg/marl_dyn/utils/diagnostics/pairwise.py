"""
Pairwise Euclidean distances computed one block of rows at a time.

A full distance matrix grows with the square of the trace length, so the
estimators that need every pair walk the matrix in row blocks and keep only
counts or a handful of selected values between blocks.
"""

from collections.abc import Iterator

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.utils import gen_batches

BLOCK_BYTES = 64 * 1024 * 1024
SELECTION_BINS = 4096


def as_points(trace) -> np.ndarray:
    x = np.asarray(trace, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    return x


def distance_blocks(x: np.ndarray, block_bytes: int | None = None) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(start, block)`` where ``block[r, j]`` is the distance between rows ``start + r`` and ``j``."""
    n = len(x)
    batch = max(1, (block_bytes or BLOCK_BYTES) // (8 * max(n, 1)))
    for rows in gen_batches(n, batch):
        yield rows.start, cdist(x[rows], x)


def upper_pairs(block: np.ndarray, start: int, min_lag: int) -> np.ndarray:
    """Distances of the pairs ``(i, j)`` in ``block`` with ``j > i + min_lag``."""
    rows = np.arange(start, start + len(block))
    columns = np.arange(block.shape[1])
    return block[columns[None, :] > rows[:, None] + min_lag]


def pair_distances(x: np.ndarray, min_lag: int, block_bytes: int | None = None) -> Iterator[np.ndarray]:
    for start, block in distance_blocks(x, block_bytes):
        yield upper_pairs(block, start, min_lag)


def pair_count(n: int, min_lag: int) -> int:
    """Number of pairs ``i < j`` with ``j - i > min_lag``."""
    m = n - min_lag - 1
    return m * (m + 1) // 2 if m > 0 else 0


def order_statistics(
    x: np.ndarray, ranks, min_lag: int, block_bytes: int | None = None
) -> np.ndarray:
    """
    Exact ``ranks``-th smallest (0-based) pair distances with ``j - i > min_lag``.

    Two passes: a histogram over ``[0, diameter]`` locates the bin of each
    rank, then only the values in those bins are kept and sorted.
    """
    ranks = np.asarray(ranks, dtype=np.int64)
    diameter = float(np.linalg.norm(np.ptp(x, axis=0)))
    if diameter == 0.0:
        return np.zeros(len(ranks))
    scale = SELECTION_BINS / diameter

    def bins_of(values: np.ndarray) -> np.ndarray:
        return np.minimum((values * scale).astype(np.int64), SELECTION_BINS - 1)

    counts = np.zeros(SELECTION_BINS, dtype=np.int64)
    for values in pair_distances(x, min_lag, block_bytes):
        counts += np.bincount(bins_of(values), minlength=SELECTION_BINS)
    cumulative = np.cumsum(counts)
    targets = np.searchsorted(cumulative, ranks, side="right")
    wanted = np.unique(targets)

    kept: dict[int, list[np.ndarray]] = {int(b): [] for b in wanted}
    for values in pair_distances(x, min_lag, block_bytes):
        bins = bins_of(values)
        for b in wanted:
            kept[int(b)].append(values[bins == b])
    ordered = {b: np.sort(np.concatenate(parts)) for b, parts in kept.items()}

    result = np.empty(len(ranks))
    for i, (rank, b) in enumerate(zip(ranks, targets, strict=True)):
        before = cumulative[b - 1] if b > 0 else 0
        result[i] = ordered[int(b)][rank - before]
    return result
