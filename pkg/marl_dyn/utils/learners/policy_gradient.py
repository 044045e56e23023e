from collections.abc import Sequence

import numpy as np
from scipy.special import softmax

from marl_dyn.utils.exceptions import ContractViolationError
from marl_dyn.utils.learners.base_learner import BaseLearner
from marl_dyn.utils.learners.enums import BaselineMode, LearnerKind
from marl_dyn.utils.learners.types import PolicyLogits, Transition


def log_softmax_grad(logits_row: np.ndarray, action: int) -> np.ndarray:
    """Gradient of log softmax(logits_row)[action] with respect to the logits."""
    grad = -softmax(np.asarray(logits_row, dtype=np.float64))
    grad[action] += 1.0
    return grad


def discounted_returns(rewards: Sequence[float], gamma: float) -> np.ndarray:
    returns = np.zeros(len(rewards))
    running = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        running = rewards[t] + gamma * running
        returns[t] = running
    return returns


def reinforce_update(policy: PolicyLogits, episode: Sequence[tuple[int, int, float]]) -> PolicyLogits:
    """
    One REINFORCE step over a finished episode, applied in place.

    The softmax is evaluated at the pre-episode logits for every step.
    """
    if not episode:
        raise ContractViolationError("episode must not be empty", operation="reinforce_update")

    returns = discounted_returns([reward for _, _, reward in episode], policy.gamma)
    if policy.baseline_mode is BaselineMode.MEAN_RETURN:
        baseline = float(returns.mean())
    elif policy.baseline_mode is BaselineMode.RUNNING_MEAN:
        baseline = policy.running_baseline
    else:
        baseline = 0.0

    snapshot = policy.logits.copy()
    for (state, action, _), ret in zip(episode, returns, strict=True):
        policy.logits[state] += (
            policy.learning_rate * (ret - baseline) * log_softmax_grad(snapshot[state], action)
        )

    if policy.baseline_mode is BaselineMode.RUNNING_MEAN:
        policy.running_baseline += policy.baseline_decay * (returns[0] - policy.running_baseline)
    return policy


class PolicyGradientLearner(BaseLearner):
    """REINFORCE on softmax logits; acts by sampling its own softmax policy."""

    kind = LearnerKind.POLICY_GRADIENT

    def __init__(self, spec, game, streams, n_steps):
        super().__init__(spec, game, streams, n_steps)
        self.policy = PolicyLogits.zeros(
            self.n_states,
            self.n_actions,
            spec.learning_rate,
            gamma=spec.gamma,
            baseline_mode=BaselineMode(spec.baseline),
            baseline_decay=spec.baseline_decay,
        )
        self._episode: list[tuple[int, int, float]] = []

    def action_values(self, state: int) -> np.ndarray:
        return self.policy.logits[state]

    def observe(self, transition: Transition) -> None:
        self._episode.append((transition.state, transition.action, transition.reward))
        if transition.episode_end:
            reinforce_update(self.policy, self._episode)
            self._episode = []
            self.update_count += 1

    def flatten_params(self) -> np.ndarray:
        return self.policy.logits.ravel().copy()
