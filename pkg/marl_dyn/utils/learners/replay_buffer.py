import numpy as np

from marl_dyn.utils.exceptions import ContractViolationError
from marl_dyn.utils.learners.mlp import DqnBatch


class ReplayBuffer:
    """Fixed-capacity ring of encoded transitions with uniform minibatch sampling."""

    def __init__(self, capacity: int, batch_size: int, state_dim: int):
        if capacity < 1 or batch_size < 1:
            raise ContractViolationError("capacity and batch_size must be >= 1")
        self.capacity = capacity
        self.batch_size = batch_size
        self._states = np.zeros((capacity, state_dim))
        self._next_states = np.zeros((capacity, state_dim))
        self._actions = np.zeros(capacity, dtype=np.int64)
        self._rewards = np.zeros(capacity)
        self._terminals = np.zeros(capacity, dtype=bool)
        self._cursor = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @property
    def ready(self) -> bool:
        return self._size >= self.batch_size

    def push(
        self,
        state: np.ndarray,
        action: int,
        reward: float,
        next_state: np.ndarray,
        terminal: bool,
    ) -> None:
        i = self._cursor
        self._states[i] = state
        self._actions[i] = action
        self._rewards[i] = reward
        self._next_states[i] = next_state
        self._terminals[i] = terminal
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, rng: np.random.Generator) -> DqnBatch:
        if not self.ready:
            raise ContractViolationError(
                f"cannot sample {self.batch_size} transitions from a buffer of {self._size}",
                operation="ReplayBuffer.sample",
            )
        indices = rng.choice(self._size, size=self.batch_size, replace=False)
        return DqnBatch(
            states=self._states[indices],
            actions=self._actions[indices],
            rewards=self._rewards[indices],
            next_states=self._next_states[indices],
            terminals=self._terminals[indices],
        )
