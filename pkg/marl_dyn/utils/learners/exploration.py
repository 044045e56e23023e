"""Action selection under Boltzmann and decaying epsilon-greedy exploration."""

import numpy as np
from scipy.special import softmax

from marl_dyn.utils.exceptions import ContractViolationError
from marl_dyn.utils.learners.enums import ExplorationMode
from marl_dyn.utils.learners.types import ExplorationSchedule


def boltzmann_probs(q_row, temperature: float) -> np.ndarray:
    q = np.asarray(q_row, dtype=np.float64)
    if not (np.isfinite(temperature) and temperature > 0):
        raise ContractViolationError(
            f"temperature must be a positive finite real, got {temperature}",
            operation="boltzmann_probs",
        )
    if q.ndim != 1 or q.size == 0 or not np.all(np.isfinite(q)):
        raise ContractViolationError(
            "q_row must be a non-empty finite vector", operation="boltzmann_probs"
        )
    # softmax subtracts the maximum before exponentiating
    return softmax(q / temperature)


def sample_action(probs: np.ndarray, rng: np.random.Generator) -> int:
    index = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    return min(index, probs.size - 1)


def greedy_action(q_row) -> int:
    # np.argmax returns the lowest index among ties
    return int(np.argmax(q_row))


def select_action(q_row, schedule: ExplorationSchedule, h: int, rng: np.random.Generator) -> int:
    q = np.asarray(q_row, dtype=np.float64)
    if schedule.mode is ExplorationMode.BOLTZMANN:
        return sample_action(boltzmann_probs(q, schedule.temperature), rng)

    if not np.all(np.isfinite(q)):
        raise ContractViolationError("q_row must be finite", operation="select_action")
    if rng.random() < schedule.epsilon(h):
        return int(rng.integers(q.size))
    return greedy_action(q)
