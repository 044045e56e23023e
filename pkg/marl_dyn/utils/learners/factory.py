from typing import TYPE_CHECKING

from marl_dyn.utils.exceptions import ConfigurationError
from marl_dyn.utils.learners.base_learner import BaseLearner
from marl_dyn.utils.learners.idqn import IdqnLearner
from marl_dyn.utils.learners.policy_gradient import PolicyGradientLearner
from marl_dyn.utils.learners.rng import RngStreams
from marl_dyn.utils.learners.tabular import TabularQLearner

if TYPE_CHECKING:
    from marl_dyn.conf.run_config import LearnerSpec
    from marl_dyn.utils.game_env import Game

LEARNER_CLASSES: dict[str, type[BaseLearner]] = {
    cls.kind.value: cls for cls in (TabularQLearner, PolicyGradientLearner, IdqnLearner)
}


def build_learner(
    spec: "LearnerSpec", game: "Game", streams: RngStreams, n_steps: int
) -> BaseLearner:
    try:
        learner_cls = LEARNER_CLASSES[spec.kind]
    except KeyError as e:
        raise ConfigurationError(f"Unknown learner kind '{spec.kind}'", key="kind") from e
    return learner_cls(spec, game, streams, n_steps)
