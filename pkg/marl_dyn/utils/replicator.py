"""
Two-population replicator dynamics for 2x2 games.

With ``x`` (``y``) the share of action 0 for agent 0 (agent 1), the field is
``dx = x (1 - x) (f0 - f1)`` where ``f_a`` is agent 0's expected payoff for
action ``a`` against agent 1's mixture, and symmetrically for ``dy``.
"""

from dataclasses import dataclass

import numpy as np

from marl_dyn.utils.exceptions import ContractViolationError
from marl_dyn.utils.game_env import MatrixGame


@dataclass(frozen=True)
class ReplicatorState:
    x: float
    y: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise ContractViolationError(
                f"replicator state ({self.x}, {self.y}) is outside [0, 1]^2",
                operation="ReplicatorState",
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True, eq=False)
class VectorFieldGrid:
    resolution: int
    points: np.ndarray
    vectors: np.ndarray

    def to_rows(self) -> list[tuple[float, float, float, float]]:
        return [
            (float(px), float(py), float(dx), float(dy))
            for (px, py), (dx, dy) in zip(self.points, self.vectors, strict=True)
        ]


def _rhs(x: float, y: float, payoffs: np.ndarray) -> tuple[float, float]:
    mix_y = np.array([y, 1.0 - y])
    mix_x = np.array([x, 1.0 - x])
    f_row = payoffs[0] @ mix_y
    f_col = mix_x @ payoffs[1]
    return x * (1.0 - x) * (f_row[0] - f_row[1]), y * (1.0 - y) * (f_col[0] - f_col[1])


def replicator_rhs(state: ReplicatorState, game: MatrixGame) -> tuple[float, float]:
    dx, dy = _rhs(state.x, state.y, game.payoffs)
    return float(dx), float(dy)


def integrate_rk4(
    game: MatrixGame, initial: ReplicatorState, dt: float, n_steps: int
) -> list[ReplicatorState]:
    """Classical RK4; clamping to [0, 1] only absorbs round-off at the boundary."""
    if dt <= 0:
        raise ContractViolationError(f"dt must be positive, got {dt}", operation="integrate_rk4")
    payoffs = game.payoffs
    x, y = initial.x, initial.y
    states = [initial]
    for _ in range(n_steps):
        k1 = _rhs(x, y, payoffs)
        k2 = _rhs(x + 0.5 * dt * k1[0], y + 0.5 * dt * k1[1], payoffs)
        k3 = _rhs(x + 0.5 * dt * k2[0], y + 0.5 * dt * k2[1], payoffs)
        k4 = _rhs(x + dt * k3[0], y + dt * k3[1], payoffs)
        x = x + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        y = y + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        x, y = min(max(float(x), 0.0), 1.0), min(max(float(y), 0.0), 1.0)
        states.append(ReplicatorState(x, y))
    return states


def integrate_euler(
    game: MatrixGame, initial: ReplicatorState, dt: float, n_steps: int
) -> list[ReplicatorState]:
    if dt <= 0:
        raise ContractViolationError(f"dt must be positive, got {dt}", operation="integrate_euler")
    x, y = initial.x, initial.y
    states = [initial]
    for _ in range(n_steps):
        dx, dy = _rhs(x, y, game.payoffs)
        x, y = min(max(float(x + dt * dx), 0.0), 1.0), min(max(float(y + dt * dy), 0.0), 1.0)
        states.append(ReplicatorState(x, y))
    return states


def kl_invariant(state: ReplicatorState, centre: ReplicatorState) -> float:
    """
    Sum over both populations of KL(centre || state).

    Conserved along replicator orbits of zero-sum games whose interior
    equilibrium is ``centre``.
    """
    total = 0.0
    for p, q in ((centre.x, state.x), (centre.y, state.y)):
        for pi, qi in ((p, q), (1.0 - p, 1.0 - q)):
            if pi > 0.0:
                total += pi * np.log(pi / qi)
    return float(total)


def vector_field(game: MatrixGame, resolution: int) -> VectorFieldGrid:
    if resolution < 2:
        raise ContractViolationError(
            f"resolution must be >= 2, got {resolution}", operation="vector_field"
        )
    axis = np.linspace(0.0, 1.0, resolution)
    xs, ys = np.meshgrid(axis, axis, indexing="xy")
    points = np.column_stack([xs.ravel(), ys.ravel()])
    vectors = np.array([_rhs(px, py, game.payoffs) for px, py in points])
    return VectorFieldGrid(resolution=resolution, points=points, vectors=vectors)
