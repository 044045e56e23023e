import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from marl_dyn.utils.learners.enums import BaselineMode, ExplorationMode


@dataclass
class QTable:
    """Action values Q(s, a), zero-initialised."""

    values: np.ndarray
    learning_rate: float
    gamma: float

    @classmethod
    def zeros(cls, n_states: int, n_actions: int, learning_rate: float, gamma: float) -> "QTable":
        return cls(np.zeros((n_states, n_actions)), learning_rate, gamma)


@dataclass
class PolicyLogits:
    """Softmax policy logits with an optional return baseline."""

    logits: np.ndarray
    learning_rate: float
    gamma: float = 0.0
    baseline_mode: BaselineMode = BaselineMode.NONE
    baseline_decay: float = 0.01
    running_baseline: float = 0.0

    @classmethod
    def zeros(cls, n_states: int, n_actions: int, learning_rate: float, **kwargs) -> "PolicyLogits":
        return cls(np.zeros((n_states, n_actions)), learning_rate, **kwargs)


@dataclass(frozen=True)
class ExplorationSchedule:
    mode: ExplorationMode = ExplorationMode.BOLTZMANN
    temperature: float = 1.0
    eps_start: float = 0.9
    eps_end: float = 0.05
    decay_rate: float = 1e-4

    def epsilon(self, h: int) -> float:
        return self.eps_end + (self.eps_start - self.eps_end) * math.exp(-self.decay_rate * h)


@dataclass(frozen=True)
class Transition:
    state: int
    action: int
    reward: float
    next_state: int
    terminal: bool
    # REINFORCE episode boundary; independent of bootstrapping
    episode_end: bool = True


@dataclass(frozen=True)
class AgentMeta:
    """Describes how an agent's flattened parameter vector is laid out."""

    kind: str
    n_states: int
    n_actions: int
    param_count: int
    exploration_mode: str
    temperature: float
    layer_sizes: tuple[int, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "n_states": self.n_states,
            "n_actions": self.n_actions,
            "param_count": self.param_count,
            "exploration_mode": self.exploration_mode,
            "temperature": self.temperature,
            "layer_sizes": list(self.layer_sizes),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AgentMeta":
        return cls(
            kind=data["kind"],
            n_states=int(data["n_states"]),
            n_actions=int(data["n_actions"]),
            param_count=int(data["param_count"]),
            exploration_mode=data["exploration_mode"],
            temperature=float(data["temperature"]),
            layer_sizes=tuple(int(size) for size in data.get("layer_sizes", [])),
        )
