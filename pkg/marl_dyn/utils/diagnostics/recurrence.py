from dataclasses import dataclass

import numpy as np

from marl_dyn.utils.diagnostics.pairwise import (
    as_points,
    distance_blocks,
    order_statistics,
    pair_count,
    upper_pairs,
)
from marl_dyn.utils.exceptions import ConfigurationError, ContractViolationError

PGM_NON_RECURRENT = 0
PGM_MASKED = 128
PGM_RECURRENT = 255


@dataclass(frozen=True, eq=False)
class RecurrenceMatrix:
    matrix: np.ndarray
    epsilon: float
    target_rate: float | None
    achieved_rate: float
    theiler_mask_width: int

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def image(self) -> np.ndarray:
        pixels = np.full(self.matrix.shape, PGM_NON_RECURRENT, dtype=np.uint8)
        pixels[self.matrix] = PGM_RECURRENT
        width = self.theiler_mask_width
        for i in range(self.size):
            pixels[i, max(0, i - width) : i + width + 1] = PGM_MASKED
        return pixels

    def to_pgm(self, config_hash: str = "") -> bytes:
        """Binary 8-bit PGM; row i is time index i, increasing downward, column j increases rightward."""
        header = (
            "P5\n"
            "# marl-dyn recurrence matrix\n"
            "# rows: time index i downward; columns: time index j rightward\n"
            f"# values: {PGM_RECURRENT} recurrent, {PGM_NON_RECURRENT} non-recurrent, "
            f"{PGM_MASKED} masked band |i-j|<={self.theiler_mask_width}\n"
            f"# epsilon={self.epsilon:.17g} achieved_rate={self.achieved_rate:.6f}\n"
            f"# config-hash: {config_hash}\n"
            f"{self.size} {self.size}\n255\n"
        )
        return header.encode("ascii") + self.image().tobytes()


def _points(trace) -> np.ndarray:
    x = as_points(trace)
    if len(x) < 2:
        raise ContractViolationError(
            f"recurrence needs at least 2 rows, got {len(x)}", operation="recurrence_matrix"
        )
    return x


def _check_mask(n: int, theiler_mask_width: int) -> int:
    n_pairs = pair_count(n, theiler_mask_width)
    if n_pairs == 0:
        raise ContractViolationError(
            f"mask width {theiler_mask_width} leaves no pairs", operation="recurrence_matrix"
        )
    return n_pairs


def _threshold(
    x: np.ndarray, epsilon: float, target_rate: float | None, theiler_mask_width: int, n_pairs: int
) -> RecurrenceMatrix:
    matrix = np.empty((len(x), len(x)), dtype=bool)
    recurrent = 0
    for start, block in distance_blocks(x):
        matrix[start : start + len(block)] = block <= epsilon
        recurrent += int(np.count_nonzero(upper_pairs(block, start, theiler_mask_width) <= epsilon))
    return RecurrenceMatrix(
        matrix=matrix,
        epsilon=float(epsilon),
        target_rate=target_rate,
        achieved_rate=recurrent / n_pairs,
        theiler_mask_width=theiler_mask_width,
    )


def threshold_recurrence(trace, epsilon: float, theiler_mask_width: int = 0) -> RecurrenceMatrix:
    x = _points(trace)
    n_pairs = _check_mask(len(x), theiler_mask_width)
    return _threshold(x, epsilon, None, theiler_mask_width, n_pairs)


def recurrence_matrix(trace, target_rate: float = 0.08, theiler_mask_width: int = 20) -> RecurrenceMatrix:
    """
    Threshold chosen as the ``target_rate`` quantile (inverted CDF) of the
    off-mask pairwise distances.

    Distances are visited in row blocks; only the boolean matrix is held in full.
    """
    if not 0.0 < target_rate < 1.0:
        raise ConfigurationError(f"target_rate must be in (0, 1), got {target_rate}", key="target_rate")
    x = _points(trace)
    n_pairs = _check_mask(len(x), theiler_mask_width)
    rank = max(int(np.ceil(n_pairs * target_rate)) - 1, 0)
    (epsilon,) = order_statistics(x, [rank], theiler_mask_width)
    return _threshold(x, float(epsilon), target_rate, theiler_mask_width, n_pairs)
