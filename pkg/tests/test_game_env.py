import numpy as np
import pytest

from marl_dyn.conf.run_config import GameSpec
from marl_dyn.utils.exceptions import ConfigurationError, ContractViolationError
from marl_dyn.utils.game_env import (
    GridworldGame,
    encode_states,
    is_absorbing,
    make_custom_game,
    make_game,
    make_matrix_game,
    reset,
    step,
)

UP, DOWN, LEFT, RIGHT, STAY = 1, 2, 3, 4, 0


@pytest.mark.parametrize(
    ("name", "joint_action", "rewards"),
    [
        ("prisoners_dilemma", (0, 0), (1.0, 1.0)),
        ("prisoners_dilemma", (1, 1), (3.0, 3.0)),
        ("prisoners_dilemma", (0, 1), (5.0, 0.0)),
        ("matching_pennies", (0, 0), (1.0, -1.0)),
        ("stag_hunt", (0, 1), (0.0, 0.0)),
        ("chicken", (0, 0), (-1.0, -1.0)),
    ],
)
def test_matrix_game_rewards(name, joint_action, rewards):
    game = make_matrix_game(name)
    state, reward, terminal = step(game, reset(game), joint_action)
    assert state == 0
    assert tuple(reward) == rewards
    assert terminal is True


def test_matching_pennies_is_zero_sum():
    game = make_matrix_game("matching_pennies")
    assert game.zero_sum
    np.testing.assert_array_equal(game.payoffs[0], -game.payoffs[1])


def test_payoffs_are_read_only():
    game = make_matrix_game("stag_hunt")
    with pytest.raises(ValueError):
        game.payoffs[0, 0, 0] = 10.0


def test_unknown_game_is_a_configuration_error():
    with pytest.raises(ConfigurationError) as exc:
        make_matrix_game("rock_paper_scissors")
    assert exc.value.key == "game"


@pytest.mark.parametrize("joint_action", [(2, 0), (0, -1), (0,)])
def test_bad_actions_are_rejected(joint_action):
    game = make_matrix_game("prisoners_dilemma")
    with pytest.raises(ContractViolationError):
        step(game, 0, joint_action)


def test_custom_game_reads_payoff_pairs_cell_by_cell():
    game = make_custom_game("custom", [1, -1, -1, 1, -1, 1, 1, -1], zero_sum=True)
    np.testing.assert_array_equal(game.payoffs[0], [[1, -1], [-1, 1]])
    np.testing.assert_array_equal(game.payoffs[1], [[-1, 1], [1, -1]])


def test_custom_game_with_false_zero_sum_flag_is_rejected():
    with pytest.raises(ConfigurationError):
        make_custom_game("custom", [1, 1, 0, 0, 0, 0, 1, 1], zero_sum=True)


def test_make_game_builds_gridworld_from_spec():
    spec = GameSpec.from_dict(
        {
            "name": "gridworld",
            "width": 3,
            "height": 4,
            "start_positions": [[0, 0], [2, 0]],
            "goal_cells": [[0, 3], [2, 3]],
        }
    )
    game = make_game(spec)
    assert isinstance(game, GridworldGame)
    assert game.n_states == (3 * 4) ** 2


class TestGridworld:
    @pytest.fixture
    def game(self):
        return GridworldGame()

    def test_reset_places_agents_on_their_starts(self, game):
        assert game.decode(reset(game)) == ((0, 0), (4, 0))

    def test_joint_move_onto_distinct_goals_ends_the_episode(self, game):
        state = game.encode(((0, 3), (4, 3)))
        next_state, reward, terminal = step(game, state, (UP, UP))
        assert game.decode(next_state) == ((0, 4), (4, 4))
        assert tuple(reward) == (game.joint_goal_reward, game.joint_goal_reward)
        assert terminal
        assert is_absorbing(game, next_state)

    def test_one_agent_on_a_goal_only_pays_the_step_penalty(self, game):
        state = game.encode(((0, 3), (4, 2)))
        next_state, reward, terminal = step(game, state, (UP, UP))
        assert game.decode(next_state) == ((0, 4), (4, 3))
        assert tuple(reward) == (game.step_penalty, game.step_penalty)
        assert not terminal

    def test_moves_off_the_grid_leave_the_agent_in_place(self, game):
        state = game.encode(((0, 0), (4, 0)))
        next_state, _, _ = step(game, state, (LEFT, DOWN))
        assert game.decode(next_state) == ((0, 0), (4, 0))

    def test_agents_targeting_the_same_cell_both_stay(self, game):
        state = game.encode(((1, 0), (3, 0)))
        next_state, _, _ = step(game, state, (RIGHT, LEFT))
        assert game.decode(next_state) == ((1, 0), (3, 0))

    def test_agents_swapping_cells_both_stay(self, game):
        state = game.encode(((1, 0), (2, 0)))
        next_state, _, _ = step(game, state, (RIGHT, LEFT))
        assert game.decode(next_state) == ((1, 0), (2, 0))

    def test_episode_is_cut_at_max_episode_steps(self, game):
        state = reset(game)
        _, _, terminal = step(game, state, (STAY, STAY), t=game.max_episode_steps - 2)
        assert not terminal
        _, _, terminal = step(game, state, (STAY, STAY), t=game.max_episode_steps - 1)
        assert terminal

    def test_state_outside_range_is_rejected(self, game):
        with pytest.raises(ContractViolationError):
            step(game, game.n_states, (STAY, STAY))

    def test_state_encoding_is_two_one_hot_blocks_per_agent(self, game):
        features = encode_states(game)
        assert features.shape == (game.n_states, 2 * (game.width + game.height))
        np.testing.assert_array_equal(features.sum(axis=1), np.full(game.n_states, 4.0))
        row = features[game.encode(((2, 1), (4, 3)))]
        block = game.width + game.height
        assert row[2] == 1.0
        assert row[game.width + 1] == 1.0
        assert row[block + 4] == 1.0
        assert row[block + game.width + 3] == 1.0


def test_matrix_game_encoding_is_a_single_constant_feature():
    np.testing.assert_array_equal(encode_states(make_matrix_game("chicken")), [[1.0]])
