"""Reductions of an agent's flattened parameters to interpretable coordinates."""

from collections.abc import Sequence

import numpy as np
from scipy.special import softmax

from marl_dyn.utils.learners.enums import ExplorationMode, LearnerKind, ProjectionMode
from marl_dyn.utils.learners.mlp import MlpParams, mlp_forward
from marl_dyn.utils.learners.types import AgentMeta

STATELESS_ENCODING = np.ones(1)


def check_projection(
    mode: str, agents: Sequence[tuple[str, str]], stateless: bool
) -> str | None:
    """Return why ``mode`` cannot be applied to ``(kind, exploration_mode)`` agents, or None."""
    if mode == ProjectionMode.RAW_PARAMS.value:
        return None
    if not stateless:
        return f"'{mode}' requires a stateless matrix game; use raw_params"

    for index, (kind, exploration_mode) in enumerate(agents):
        if mode == ProjectionMode.ACTION_PROB.value:
            if kind != LearnerKind.POLICY_GRADIENT.value and (
                exploration_mode != ExplorationMode.BOLTZMANN.value
            ):
                return (
                    f"'{mode}' requires Boltzmann exploration or a policy-gradient learner; "
                    f"agent {index} is {kind} with {exploration_mode}"
                )
        elif kind == LearnerKind.POLICY_GRADIENT.value:
            return f"'{mode}' needs action values; agent {index} is a policy-gradient learner"
    return None


def projected_width(meta: AgentMeta, mode: str) -> int:
    if mode == ProjectionMode.RAW_PARAMS.value:
        return meta.param_count
    if mode == ProjectionMode.Q_VALUES.value:
        return meta.n_actions
    return 1


def _state0_values(rows: np.ndarray, meta: AgentMeta) -> np.ndarray:
    if meta.kind == LearnerKind.IDQN.value:
        return np.vstack(
            [mlp_forward(MlpParams.from_flat(row, meta.layer_sizes), STATELESS_ENCODING) for row in rows]
        )
    # Tabular parameters are the row-major |S| x |A| matrix.
    return rows[:, : meta.n_actions]


def project_agent_rows(rows: np.ndarray, meta: AgentMeta, mode: str) -> np.ndarray:
    """Project one agent's recorded rows; assumes ``check_projection`` passed."""
    if mode == ProjectionMode.RAW_PARAMS.value:
        return rows.copy()

    values = _state0_values(rows, meta)
    if mode == ProjectionMode.Q_VALUES.value:
        return values
    if mode == ProjectionMode.Q_OF_ACTION0.value:
        return values[:, :1]

    temperature = 1.0 if meta.kind == LearnerKind.POLICY_GRADIENT.value else meta.temperature
    return softmax(values / temperature, axis=1)[:, :1]
