"""
Environment dynamics: the four stateless 2x2 matrix games and a small
cooperative gridworld.

Matrix-game payoffs are indexed ``payoffs[agent][a1][a2]`` with agent 0 the
row player and actions in table order.
"""

from dataclasses import dataclass, field
from typing import NewType

import numpy as np

from marl_dyn.conf.defaults import CUSTOM_GAME_NAME, GRIDWORLD_DEFAULTS
from marl_dyn.utils.exceptions import ConfigurationError, ContractViolationError

StateId = NewType("StateId", int)

MATRIX_STATE = StateId(0)

# (row payoffs, column payoffs)
MATRIX_PAYOFFS: dict[str, tuple[list[list[float]], list[list[float]]]] = {
    "prisoners_dilemma": ([[1.0, 5.0], [0.0, 3.0]], [[1.0, 0.0], [5.0, 3.0]]),
    "matching_pennies": ([[1.0, -1.0], [-1.0, 1.0]], [[-1.0, 1.0], [1.0, -1.0]]),
    "stag_hunt": ([[4.0, 0.0], [0.0, 3.0]], [[4.0, 0.0], [0.0, 3.0]]),
    "chicken": ([[-1.0, 4.0], [0.0, 2.0]], [[-1.0, 0.0], [4.0, 2.0]]),
}

ZERO_SUM_GAMES = frozenset({"matching_pennies"})

ACTION_LABELS = {
    "prisoners_dilemma": ("C", "D"),
    "matching_pennies": ("H", "T"),
    "stag_hunt": ("S", "H"),
    "chicken": ("A", "B"),
}

# stay, up, down, left, right; y grows upward
MOVES = ((0, 0), (0, 1), (0, -1), (-1, 0), (1, 0))
GRID_ACTION_LABELS = ("stay", "up", "down", "left", "right")


@dataclass(frozen=True, eq=False)
class MatrixGame:
    name: str
    payoffs: np.ndarray
    zero_sum: bool = False
    action_labels: tuple[str, str] = ("0", "1")

    n_agents = 2
    n_actions = 2
    n_states = 1

    def __post_init__(self):
        payoffs = np.array(self.payoffs, dtype=np.float64)
        if payoffs.shape != (2, 2, 2):
            raise ConfigurationError(
                f"payoffs for game '{self.name}' must have shape (2, 2, 2), got {payoffs.shape}"
            )
        if not np.all(np.isfinite(payoffs)):
            raise ConfigurationError(f"payoffs for game '{self.name}' must be finite")
        if self.zero_sum and not np.all(payoffs[0] + payoffs[1] == 0.0):
            raise ConfigurationError(f"game '{self.name}' is flagged zero-sum but payoffs do not cancel")
        payoffs.setflags(write=False)
        object.__setattr__(self, "payoffs", payoffs)


@dataclass(frozen=True)
class GridworldGame:
    width: int = GRIDWORLD_DEFAULTS["width"]
    height: int = GRIDWORLD_DEFAULTS["height"]
    start_positions: tuple[tuple[int, int], ...] = ((0, 0), (4, 0))
    goal_cells: frozenset[tuple[int, int]] = field(default_factory=lambda: frozenset({(0, 4), (4, 4)}))
    max_episode_steps: int = GRIDWORLD_DEFAULTS["max_episode_steps"]
    step_penalty: float = GRIDWORLD_DEFAULTS["step_penalty"]
    joint_goal_reward: float = GRIDWORLD_DEFAULTS["joint_goal_reward"]
    name: str = "gridworld"

    n_agents = 2
    n_actions = len(MOVES)

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    @property
    def n_states(self) -> int:
        return self.n_cells**2

    def cell_index(self, cell: tuple[int, int]) -> int:
        x, y = cell
        return y * self.width + x

    def cell_of(self, index: int) -> tuple[int, int]:
        return index % self.width, index // self.width

    def encode(self, positions: tuple[tuple[int, int], tuple[int, int]]) -> StateId:
        return StateId(self.cell_index(positions[0]) * self.n_cells + self.cell_index(positions[1]))

    def decode(self, state: int) -> tuple[tuple[int, int], tuple[int, int]]:
        return self.cell_of(state // self.n_cells), self.cell_of(state % self.n_cells)

    def in_bounds(self, cell: tuple[int, int]) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height


Game = MatrixGame | GridworldGame


def make_matrix_game(name: str) -> MatrixGame:
    if name not in MATRIX_PAYOFFS:
        raise ConfigurationError(
            f"Unknown matrix game '{name}'. Choose one of: {', '.join(MATRIX_PAYOFFS)}",
            key="game",
        )
    row, col = MATRIX_PAYOFFS[name]
    return MatrixGame(
        name=name,
        payoffs=np.array([row, col]),
        zero_sum=name in ZERO_SUM_GAMES,
        action_labels=ACTION_LABELS[name],
    )


def make_custom_game(name: str, payoffs: list[float], zero_sum: bool = False) -> MatrixGame:
    """Build a game from eight reals: (row, column) payoff pairs for cells (0,0), (0,1), (1,0), (1,1)."""
    values = np.asarray(payoffs, dtype=np.float64)
    if values.shape != (8,):
        raise ConfigurationError(f"custom payoffs must be 8 reals, got {values.size}", key="game.payoffs")
    pairs = values.reshape(2, 2, 2)
    return MatrixGame(name=name, payoffs=np.moveaxis(pairs, -1, 0), zero_sum=zero_sum)


def make_game(spec) -> Game:
    """Build the game described by a ``GameSpec``."""
    if spec.is_gridworld:
        return GridworldGame(
            width=spec.width,
            height=spec.height,
            start_positions=tuple(tuple(cell) for cell in spec.start_positions),
            goal_cells=frozenset(tuple(cell) for cell in spec.goal_cells),
            max_episode_steps=spec.max_episode_steps,
            step_penalty=spec.step_penalty,
            joint_goal_reward=spec.joint_goal_reward,
        )
    if spec.name == CUSTOM_GAME_NAME:
        return make_custom_game(spec.name, list(spec.payoffs), spec.zero_sum)
    return make_matrix_game(spec.name)


def _check_actions(game: Game, joint_action) -> tuple[int, int]:
    if len(joint_action) != game.n_agents:
        raise ContractViolationError(
            f"expected {game.n_agents} actions, got {len(joint_action)}", operation="step"
        )
    actions = tuple(int(a) for a in joint_action)
    for agent, action in enumerate(actions):
        if not 0 <= action < game.n_actions:
            raise ContractViolationError(
                f"action {action} of agent {agent} is outside [0, {game.n_actions})",
                operation="step",
            )
    return actions


def reset(game: Game) -> StateId:
    if isinstance(game, GridworldGame):
        return game.encode(game.start_positions)
    return MATRIX_STATE


def is_absorbing(game: Game, state: int) -> bool:
    if isinstance(game, GridworldGame):
        positions = game.decode(state)
        return positions[0] != positions[1] and all(p in game.goal_cells for p in positions)
    return False


def step(
    game: Game,
    state: int,
    joint_action,
    rng: np.random.Generator | None = None,
    t: int = 0,
) -> tuple[StateId, np.ndarray, bool]:
    """
    Advance the environment by one joint action.

    ``rng`` is the environment-noise stream; built-in games are deterministic
    and never draw from it. ``t`` is the step index within the episode.
    """
    a1, a2 = _check_actions(game, joint_action)
    if not 0 <= state < game.n_states:
        raise ContractViolationError(
            f"state {state} is outside [0, {game.n_states})", operation="step"
        )

    if isinstance(game, MatrixGame):
        rewards = game.payoffs[:, a1, a2].copy()
        return MATRIX_STATE, rewards, True

    current = game.decode(state)
    proposed = []
    for (x, y), action in zip(current, (a1, a2), strict=True):
        dx, dy = MOVES[action]
        target = (x + dx, y + dy)
        proposed.append(target if game.in_bounds(target) else (x, y))
    # Same target cell or swapping cells: nobody moves.
    if proposed[0] == proposed[1] or (proposed[0] == current[1] and proposed[1] == current[0]):
        proposed = list(current)

    next_state = game.encode((proposed[0], proposed[1]))
    if is_absorbing(game, next_state):
        reward = game.joint_goal_reward
        terminal = True
    else:
        reward = game.step_penalty
        terminal = t + 1 >= game.max_episode_steps
    return next_state, np.array([reward, reward]), terminal


def encode_states(game: Game) -> np.ndarray:
    """
    Feature matrix with one row per state.

    Matrix games use a one-hot of their single state. The gridworld uses a
    one-hot of x and of y for each agent, so the input width is 2 * (W + H).
    """
    if isinstance(game, MatrixGame):
        return np.ones((1, 1))

    features = np.zeros((game.n_states, 2 * (game.width + game.height)))
    block = game.width + game.height
    for state in range(game.n_states):
        for agent, (x, y) in enumerate(game.decode(state)):
            offset = agent * block
            features[state, offset + x] = 1.0
            features[state, offset + game.width + y] = 1.0
    return features
