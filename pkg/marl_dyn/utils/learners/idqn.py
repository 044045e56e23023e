import logging

import numpy as np

from marl_dyn.utils.game_env import encode_states
from marl_dyn.utils.learners.base_learner import BaseLearner
from marl_dyn.utils.learners.enums import LearnerKind
from marl_dyn.utils.learners.mlp import (
    DqnBatch,
    MlpParams,
    dqn_update,
    init_mlp,
    mlp_forward,
    sync_target,
)
from marl_dyn.utils.learners.replay_buffer import ReplayBuffer
from marl_dyn.utils.learners.types import Transition

logger = logging.getLogger(__name__)


class IdqnLearner(BaseLearner):
    """
    Independent DQN: online and target MLPs, optional replay buffer.

    With replay, one minibatch update runs per environment step once the buffer
    holds ``batch_size`` transitions. Without replay each step trains on the
    latest transition alone.
    """

    kind = LearnerKind.IDQN

    def __init__(self, spec, game, streams, n_steps):
        super().__init__(spec, game, streams, n_steps)
        self.encodings = encode_states(game)
        sizes = (self.encodings.shape[1], *spec.hidden_sizes, self.n_actions)
        self.online: MlpParams = init_mlp(sizes, streams.init)
        self.target: MlpParams = self.online.copy()
        self.buffer = (
            ReplayBuffer(spec.buffer_capacity, spec.batch_size, self.encodings.shape[1])
            if spec.use_replay
            else None
        )
        self.last_loss: float | None = None
        logger.debug("IDQN layer sizes %s, %d parameters", sizes, self.online.size)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return self.online.layer_sizes

    def action_values(self, state: int) -> np.ndarray:
        return mlp_forward(self.online, self.encodings[state])

    def _latest_batch(self, transition: Transition) -> DqnBatch:
        return DqnBatch(
            states=self.encodings[[transition.state]],
            actions=np.array([transition.action]),
            rewards=np.array([transition.reward], dtype=np.float64),
            next_states=self.encodings[[transition.next_state]],
            terminals=np.array([transition.terminal]),
        )

    def observe(self, transition: Transition) -> None:
        if self.buffer is None:
            batch = self._latest_batch(transition)
        else:
            self.buffer.push(
                self.encodings[transition.state],
                transition.action,
                transition.reward,
                self.encodings[transition.next_state],
                transition.terminal,
            )
            if not self.buffer.ready:
                return
            batch = self.buffer.sample(self.streams.minibatch)

        self.online, self.last_loss = dqn_update(
            self.online, self.target, batch, self.spec.learning_rate, self.spec.gamma
        )
        self.update_count += 1
        self.target = sync_target(self.online, self.target, self.spec.target_sync_every, self.update_count)

    def flatten_params(self) -> np.ndarray:
        return self.online.flatten()
