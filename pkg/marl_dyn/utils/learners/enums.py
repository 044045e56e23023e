from enum import Enum


class LearnerKind(Enum):
    TABULAR_Q = "tabular_q"
    POLICY_GRADIENT = "policy_gradient"
    IDQN = "idqn"

    def __str__(self) -> str:
        return self.value


class ExplorationMode(Enum):
    BOLTZMANN = "boltzmann"
    EPSILON_GREEDY = "epsilon_greedy"

    def __str__(self) -> str:
        return self.value


class BaselineMode(Enum):
    NONE = "none"
    MEAN_RETURN = "mean_return"
    RUNNING_MEAN = "running_mean"

    def __str__(self) -> str:
        return self.value


class ProjectionMode(Enum):
    RAW_PARAMS = "raw_params"
    ACTION_PROB = "action_prob"
    Q_OF_ACTION0 = "q_of_action0"
    Q_VALUES = "q_values"

    def __str__(self) -> str:
        return self.value


def choices(enum_cls: type[Enum]) -> tuple[str, ...]:
    return tuple(member.value for member in enum_cls)
