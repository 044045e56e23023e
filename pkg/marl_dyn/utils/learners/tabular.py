import numpy as np

from marl_dyn.utils.learners.base_learner import BaseLearner
from marl_dyn.utils.learners.enums import LearnerKind
from marl_dyn.utils.learners.types import QTable, Transition


def q_update(table: QTable, transition: Transition) -> QTable:
    """Watkins Q-learning step, applied in place."""
    s, a = transition.state, transition.action
    bootstrap = 0.0
    if not transition.terminal:
        bootstrap = table.gamma * float(np.max(table.values[transition.next_state]))
    td_error = transition.reward + bootstrap - table.values[s, a]
    table.values[s, a] += table.learning_rate * td_error
    return table


class TabularQLearner(BaseLearner):
    kind = LearnerKind.TABULAR_Q

    def __init__(self, spec, game, streams, n_steps):
        super().__init__(spec, game, streams, n_steps)
        self.table = QTable.zeros(self.n_states, self.n_actions, spec.learning_rate, spec.gamma)

    def action_values(self, state: int) -> np.ndarray:
        return self.table.values[state]

    def observe(self, transition: Transition) -> None:
        q_update(self.table, transition)
        self.update_count += 1

    def flatten_params(self) -> np.ndarray:
        return self.table.values.ravel().copy()
