from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, ClassVar

import numpy as np

from marl_dyn.utils.learners.enums import ExplorationMode, LearnerKind
from marl_dyn.utils.learners.exploration import select_action
from marl_dyn.utils.learners.rng import RngStreams
from marl_dyn.utils.learners.types import AgentMeta, ExplorationSchedule, Transition

if TYPE_CHECKING:
    from marl_dyn.conf.run_config import LearnerSpec
    from marl_dyn.utils.game_env import Game


class BaseLearner(ABC):
    """Abstract base class for independent learners"""

    kind: ClassVar[LearnerKind]

    def __init__(self, spec: "LearnerSpec", game: "Game", streams: RngStreams, n_steps: int):
        self.spec = spec
        self.streams = streams
        self.n_states = game.n_states
        self.n_actions = game.n_actions
        self.schedule = ExplorationSchedule(
            mode=ExplorationMode(spec.exploration.mode),
            temperature=spec.exploration.temperature,
            eps_start=spec.exploration.eps_start,
            eps_end=spec.exploration.eps_end,
            decay_rate=spec.exploration.resolved_decay_rate(n_steps),
        )
        self.update_count = 0

    @abstractmethod
    def action_values(self, state: int) -> np.ndarray:
        """Q-values (or logits) for ``state``"""

    @abstractmethod
    def observe(self, transition: Transition) -> None:
        """Consume one environment transition, updating parameters on the learner's cadence"""

    @abstractmethod
    def flatten_params(self) -> np.ndarray:
        """Order-stable copy of all learnable parameters"""

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return ()

    def act(self, state: int, h: int) -> int:
        return select_action(self.action_values(state), self.schedule, h, self.streams.action)

    def max_abs_param(self) -> float:
        params = self.flatten_params()
        # NaN propagates through max so the divergence guard sees it.
        return float(np.max(np.abs(params))) if params.size else 0.0

    def meta(self) -> AgentMeta:
        return AgentMeta(
            kind=self.kind.value,
            n_states=self.n_states,
            n_actions=self.n_actions,
            param_count=self.flatten_params().size,
            exploration_mode=self.schedule.mode.value,
            temperature=self.schedule.temperature,
            layer_sizes=self.layer_sizes,
        )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(states={self.n_states}, actions={self.n_actions})"
