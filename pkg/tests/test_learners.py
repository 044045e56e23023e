from dataclasses import replace

import numpy as np
import pytest

from marl_dyn.conf.run_config import LearnerSpec
from marl_dyn.utils.exceptions import ConfigurationError, ContractViolationError
from marl_dyn.utils.game_env import make_matrix_game
from marl_dyn.utils.learners.enums import BaselineMode, ExplorationMode
from marl_dyn.utils.learners.exploration import boltzmann_probs, greedy_action, select_action
from marl_dyn.utils.learners.factory import build_learner
from marl_dyn.utils.learners.policy_gradient import (
    PolicyGradientLearner,
    discounted_returns,
    reinforce_update,
)
from marl_dyn.utils.learners.projection import check_projection, project_agent_rows
from marl_dyn.utils.learners.rng import RngStreams
from marl_dyn.utils.learners.tabular import TabularQLearner, q_update
from marl_dyn.utils.learners.types import (
    AgentMeta,
    ExplorationSchedule,
    PolicyLogits,
    QTable,
    Transition,
)


def greedy_schedule(eps):
    return ExplorationSchedule(mode=ExplorationMode.EPSILON_GREEDY, eps_start=eps, eps_end=eps)


class TestBoltzmann:
    def test_equal_values_give_uniform_probabilities(self):
        np.testing.assert_allclose(boltzmann_probs([0.0, 0.0], 1.0), [0.5, 0.5])

    def test_matches_closed_form(self):
        np.testing.assert_allclose(boltzmann_probs([1.0, 0.0], 1.0), [0.73106, 0.26894], atol=1e-5)

    def test_large_values_do_not_overflow(self):
        probs = boltzmann_probs([1000.0, 0.0], 1.0)
        assert np.all(np.isfinite(probs))
        assert probs[0] == pytest.approx(1.0)
        assert probs[1] == pytest.approx(0.0, abs=1e-300)

    @pytest.mark.parametrize(("q_row", "temperature"), [([np.nan, 0.0], 1.0), ([0.0, np.inf], 1.0), ([0.0, 0.0], 0.0)])
    def test_invalid_input_is_a_contract_violation(self, q_row, temperature):
        with pytest.raises(ContractViolationError):
            boltzmann_probs(q_row, temperature)


class TestSelectAction:
    def test_zero_epsilon_is_pure_argmax(self):
        rng = np.random.default_rng(0)
        actions = {select_action([0.2, 0.9], greedy_schedule(0.0), h, rng) for h in range(200)}
        assert actions == {1}

    def test_ties_break_to_the_lowest_index(self):
        assert greedy_action([0.5, 0.5]) == 0

    def test_full_epsilon_is_uniform(self):
        rng = np.random.default_rng(1)
        n = 10_000
        draws = np.array([select_action([5.0, 0.0], greedy_schedule(1.0), 0, rng) for _ in range(n)])
        sigma = np.sqrt(0.25 / n)
        assert abs(np.mean(draws == 0) - 0.5) < 4 * sigma

    def test_boltzmann_on_equal_values_is_a_fair_coin(self):
        rng = np.random.default_rng(2)
        n = 10_000
        schedule = ExplorationSchedule(mode=ExplorationMode.BOLTZMANN, temperature=1.0)
        draws = np.array([select_action([0.0, 0.0], schedule, 0, rng) for _ in range(n)])
        assert abs(np.mean(draws == 0) - 0.5) < 4 * np.sqrt(0.25 / n)

    def test_epsilon_decays_from_start_to_end(self):
        schedule = ExplorationSchedule(
            mode=ExplorationMode.EPSILON_GREEDY, eps_start=0.9, eps_end=0.1, decay_rate=1e-2
        )
        assert schedule.epsilon(0) == pytest.approx(0.9)
        assert schedule.epsilon(100_000) == pytest.approx(0.1)
        assert schedule.epsilon(10) > schedule.epsilon(20)


class TestQUpdate:
    def test_terminal_update_moves_towards_reward(self):
        table = QTable.zeros(1, 2, learning_rate=0.1, gamma=0.9)
        q_update(table, Transition(state=0, action=0, reward=1.0, next_state=0, terminal=True))
        assert table.values[0, 0] == pytest.approx(0.1)
        assert table.values[0, 1] == 0.0

    def test_zero_learning_rate_leaves_table_unchanged(self):
        table = QTable(np.array([[0.3, -0.2]]), learning_rate=0.0, gamma=0.9)
        q_update(table, Transition(0, 1, 5.0, 0, False))
        np.testing.assert_array_equal(table.values, [[0.3, -0.2]])

    def test_zero_td_error_is_a_fixed_point(self):
        table = QTable(np.array([[2.0, 0.0]]), learning_rate=0.5, gamma=0.5)
        q_update(table, Transition(0, 0, 1.0, 0, False))
        np.testing.assert_array_equal(table.values, [[2.0, 0.0]])

    def test_bootstraps_from_the_next_state_maximum(self):
        table = QTable(np.array([[0.0, 0.0], [1.0, 3.0]]), learning_rate=1.0, gamma=0.5)
        q_update(table, Transition(0, 1, 1.0, 1, False))
        assert table.values[0, 1] == pytest.approx(2.5)


class TestReinforce:
    def test_single_step_moves_logits_along_the_score(self):
        policy = PolicyLogits.zeros(1, 2, learning_rate=0.1)
        reinforce_update(policy, [(0, 0, 1.0)])
        np.testing.assert_allclose(policy.logits, [[0.05, -0.05]])

    def test_zero_advantage_leaves_logits_unchanged(self):
        policy = PolicyLogits.zeros(1, 2, learning_rate=0.1, baseline_mode=BaselineMode.MEAN_RETURN)
        reinforce_update(policy, [(0, 1, 3.0)])
        np.testing.assert_array_equal(policy.logits, [[0.0, 0.0]])

    def test_running_baseline_tracks_returns(self):
        policy = PolicyLogits.zeros(
            1, 2, learning_rate=0.1, baseline_mode=BaselineMode.RUNNING_MEAN, baseline_decay=0.5
        )
        reinforce_update(policy, [(0, 0, 2.0)])
        assert policy.running_baseline == pytest.approx(1.0)
        np.testing.assert_allclose(policy.logits, [[0.1, -0.1]])

    def test_empty_episode_is_rejected(self):
        with pytest.raises(ContractViolationError):
            reinforce_update(PolicyLogits.zeros(1, 2, learning_rate=0.1), [])

    def test_discounted_returns(self):
        np.testing.assert_allclose(discounted_returns([1.0, 1.0, 1.0], 0.5), [1.75, 1.5, 1.0])


@pytest.fixture
def matching_pennies():
    return make_matrix_game("matching_pennies")


def test_policy_gradient_learner_updates_at_episode_end(matching_pennies):
    spec = LearnerSpec.from_dict({"kind": "policy_gradient", "gamma": 0.5}, "agents[0]")
    learner = PolicyGradientLearner(spec, matching_pennies, RngStreams.from_seed(0, 0), n_steps=100)
    learner.observe(Transition(0, 0, 1.0, 0, False, episode_end=False))
    assert learner.update_count == 0
    np.testing.assert_array_equal(learner.flatten_params(), [0.0, 0.0])
    learner.observe(Transition(0, 1, 1.0, 0, True, episode_end=True))
    assert learner.update_count == 1
    assert not np.array_equal(learner.flatten_params(), [0.0, 0.0])


def test_tabular_flatten_params_is_the_q_table(matching_pennies):
    spec = LearnerSpec.from_dict({"kind": "tabular_q"}, "agents[0]")
    learner = TabularQLearner(spec, matching_pennies, RngStreams.from_seed(0, 0), n_steps=100)
    learner.table.values[0] = [0.25, -0.75]
    np.testing.assert_array_equal(learner.flatten_params(), [0.25, -0.75])
    meta = learner.meta()
    assert meta.param_count == 2
    assert meta.kind == "tabular_q"


def test_factory_rejects_unknown_kinds(matching_pennies):
    spec = replace(LearnerSpec.from_dict({"kind": "tabular_q"}, "agents[0]"), kind="sarsa")
    with pytest.raises(ConfigurationError):
        build_learner(spec, matching_pennies, RngStreams.from_seed(0, 0), 100)


def test_rng_streams_are_reproducible_and_independent():
    first = RngStreams.from_seed(42, 0)
    again = RngStreams.from_seed(42, 0)
    other = RngStreams.from_seed(42, 1)
    assert first.action.random() == again.action.random()
    assert first.minibatch.random() != first.environment.random()
    assert RngStreams.from_seed(42, 0).init.random() != other.init.random()


class TestProjection:
    def meta(self, kind="tabular_q", exploration="boltzmann", temperature=1.0):
        return AgentMeta(
            kind=kind,
            n_states=1,
            n_actions=2,
            param_count=2,
            exploration_mode=exploration,
            temperature=temperature,
        )

    def test_raw_params_is_always_allowed(self):
        assert check_projection("raw_params", [("idqn", "epsilon_greedy")], stateless=False) is None

    @pytest.mark.parametrize(
        ("mode", "agents", "stateless"),
        [
            ("action_prob", [("tabular_q", "boltzmann")], False),
            ("action_prob", [("idqn", "epsilon_greedy")], True),
            ("q_values", [("policy_gradient", "boltzmann")], True),
            ("q_of_action0", [("policy_gradient", "boltzmann")], True),
        ],
    )
    def test_incompatible_modes_are_explained(self, mode, agents, stateless):
        assert check_projection(mode, agents, stateless)

    def test_equal_q_values_project_to_one_half(self):
        rows = np.array([[0.0, 0.0], [1.0, 1.0]])
        np.testing.assert_allclose(project_agent_rows(rows, self.meta(), "action_prob"), [[0.5], [0.5]])

    def test_policy_logits_project_through_softmax(self):
        rows = np.array([[2.0, 0.0]])
        projected = project_agent_rows(rows, self.meta(kind="policy_gradient"), "action_prob")
        assert projected[0, 0] == pytest.approx(0.8808, abs=1e-4)

    def test_temperature_scales_tabular_projection(self):
        rows = np.array([[1.0, 0.0]])
        projected = project_agent_rows(rows, self.meta(temperature=0.5), "action_prob")
        assert projected[0, 0] == pytest.approx(0.8808, abs=1e-4)

    def test_q_projections_pick_state_zero_values(self):
        rows = np.array([[0.3, 0.7]])
        np.testing.assert_array_equal(project_agent_rows(rows, self.meta(), "q_of_action0"), [[0.3]])
        np.testing.assert_array_equal(project_agent_rows(rows, self.meta(), "q_values"), [[0.3, 0.7]])

    def test_raw_params_is_the_identity(self):
        rows = np.array([[0.3, 0.7], [0.1, 0.2]])
        np.testing.assert_array_equal(project_agent_rows(rows, self.meta(), "raw_params"), rows)
