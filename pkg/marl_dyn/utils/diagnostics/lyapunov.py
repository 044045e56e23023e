"""
Maximal Lyapunov exponent by nearest-neighbour divergence.

Each reference point is paired with its nearest neighbour outside a temporal
window of ``theiler_w`` indices; the mean log separation of the pairs is
followed for ``z_max`` steps and the slope of that curve over
``[z_min, z_max]`` is the exponent. The curve is indexed by recorded rows;
dividing the slope by ``row_spacing``, the number of update steps between
rows, gives the exponent per update step.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress
from sklearn.metrics import pairwise_distances_chunked

from marl_dyn.utils.exceptions import ContractViolationError, DegenerateTraceError


@dataclass(frozen=True, eq=False)
class LyapunovFit:
    lambda_max: float
    curve: np.ndarray
    z_min: int
    z_max: int
    r_squared: float
    n_pairs: int
    row_spacing: int = 1

    def to_rows(self) -> list[tuple[int, float, int]]:
        return [
            (z, float(value), int(self.z_min <= z <= self.z_max)) for z, value in enumerate(self.curve)
        ]


def _nearest_neighbours(points: np.ndarray, theiler_w: int) -> tuple[np.ndarray, np.ndarray]:
    n = len(points)
    columns = np.arange(n)

    def reduce_func(chunk: np.ndarray, start: int) -> tuple[np.ndarray, np.ndarray]:
        rows = np.arange(start, start + len(chunk))
        chunk[np.abs(rows[:, None] - columns[None, :]) <= theiler_w] = np.inf
        nearest = np.argmin(chunk, axis=1)
        return nearest, chunk[np.arange(len(chunk)), nearest]

    indices, distances = [], []
    for nearest, dist in pairwise_distances_chunked(points, reduce_func=reduce_func):
        indices.append(nearest)
        distances.append(dist)
    return np.concatenate(indices), np.concatenate(distances)


def max_lyapunov(
    trace, theiler_w: int = 20, z_min: int = 1, z_max: int = 30, row_spacing: int = 1
) -> LyapunovFit:
    x = np.asarray(trace, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if not 0 <= z_min < z_max:
        raise ContractViolationError(
            f"need 0 <= z_min < z_max, got [{z_min}, {z_max}]", operation="max_lyapunov"
        )
    if row_spacing < 1:
        raise ContractViolationError(
            f"row_spacing must be >= 1, got {row_spacing}", operation="max_lyapunov"
        )
    if len(x) <= z_max + theiler_w + 2:
        raise ContractViolationError(
            f"trace has {len(x)} rows; need more than z_max + theiler_w + 2 = {z_max + theiler_w + 2}",
            operation="max_lyapunov",
        )
    if not np.all(np.isfinite(x)):
        raise ContractViolationError("trace must be finite", operation="max_lyapunov")
    if np.all(np.ptp(x, axis=0) == 0.0):
        raise DegenerateTraceError("no divergence information: all points coincide")

    # Reference points and neighbours both need z_max future rows.
    n_ref = len(x) - z_max
    centred = x - x.mean(axis=0)
    neighbours, nn_dist = _nearest_neighbours(centred[:n_ref], theiler_w)
    refs = np.flatnonzero(np.isfinite(nn_dist))
    if refs.size == 0:
        raise DegenerateTraceError("no neighbour lies outside the Theiler window")
    partners = neighbours[refs]

    curve = np.full(z_max + 1, np.nan)
    for z in range(z_max + 1):
        d = np.linalg.norm(x[refs + z] - x[partners + z], axis=1)
        # Pairs at zero separation carry no log information and are skipped.
        positive = d[d > 0.0]
        if positive.size:
            curve[z] = np.mean(np.log(positive))

    window = np.arange(z_min, z_max + 1)
    if np.any(np.isnan(curve[window])):
        raise DegenerateTraceError("no divergence information: neighbour pairs coincide")
    fit = linregress(window, curve[window])
    return LyapunovFit(
        lambda_max=float(fit.slope) / row_spacing,
        curve=curve,
        z_min=z_min,
        z_max=z_max,
        r_squared=float(fit.rvalue**2),
        n_pairs=int(refs.size),
        row_spacing=row_spacing,
    )
