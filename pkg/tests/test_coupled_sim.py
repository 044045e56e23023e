from dataclasses import replace

import numpy as np
import pytest

from marl_dyn.conf.run_config import SimConfig
from marl_dyn.utils.coupled_sim import (
    post_burn_samples,
    project_trace,
    run_ensemble,
    run_member,
    run_training,
)
from marl_dyn.utils.exceptions import ConfigurationError, ContractViolationError, DivergenceError
from tests.conftest import make_trace, small_config_dict, tabular_agent


def sim_config(**overrides) -> SimConfig:
    return SimConfig.from_dict(small_config_dict(**overrides))


def test_same_run_index_is_bitwise_reproducible():
    config = sim_config()
    first, second = run_training(config, 1), run_training(config, 1)
    np.testing.assert_array_equal(first.joint, second.joint)
    np.testing.assert_array_equal(first.rewards, second.rewards)
    assert first.seed == second.seed


def test_row_count_follows_stride():
    config = sim_config(n_steps=600, record_stride=7)
    trace = run_training(config, 0)
    assert trace.n_rows == 600 // 7
    np.testing.assert_array_equal(trace.steps, np.arange(1, 86) * 7)
    assert trace.joint.shape == (85, 4)
    assert trace.rewards.shape == (600, 2)


def test_joint_is_column_concatenation_of_agents():
    trace = run_training(sim_config(), 0)
    np.testing.assert_array_equal(trace.joint, np.hstack(trace.agent_rows))
    assert np.all(np.isfinite(trace.joint))


def test_zero_learning_rate_freezes_parameters():
    agents = [tabular_agent(learning_rate=0.0), tabular_agent(learning_rate=0.0)]
    trace = run_training(sim_config(agents=agents), 0)
    np.testing.assert_array_equal(trace.joint, np.zeros_like(trace.joint))


def test_single_member_ensemble_matches_run_training():
    config = sim_config(n_runs=1)
    (member,) = run_ensemble(config)
    np.testing.assert_array_equal(member.joint, run_training(config, 0).joint)


def test_ensemble_members_use_distinct_seeds():
    traces = run_ensemble(sim_config(n_runs=3))
    assert [t.run_index for t in traces] == [0, 1, 2]
    assert len({t.seed for t in traces}) == 3
    assert not np.array_equal(traces[0].joint, traces[1].joint)


def test_pooled_sample_count():
    config = sim_config(n_runs=2, n_steps=600, n_burn=100, record_stride=2)
    samples = post_burn_samples(run_ensemble(config), config.n_burn)
    assert samples.shape == (2 * (600 - 100) // 2, 4)


def test_action_probabilities_stay_in_unit_interval():
    agents = [tabular_agent(learning_rate=0.5), tabular_agent(learning_rate=0.5)]
    trace = run_training(sim_config(agents=agents, projection_mode="action_prob"), 0)
    assert trace.projection_mode == "action_prob"
    assert trace.joint.shape[1] == 2
    assert np.all((trace.joint >= 0.0) & (trace.joint <= 1.0))


class TestDivergence:
    def test_runaway_parameter_aborts_with_update_index(self):
        config = sim_config(divergence_threshold=1e-9)
        with pytest.raises(DivergenceError) as excinfo:
            run_training(config, 0)
        assert excinfo.value.report.update_index == 1
        assert excinfo.value.report.run_index == 0

    def test_member_is_flagged_without_partial_rows(self):
        trace = run_member(sim_config(divergence_threshold=1e-9), 1)
        assert trace.diverged
        assert trace.n_rows == 0
        assert trace.joint.shape == (0, 4)

    def test_ensemble_keeps_going_after_a_divergence(self):
        traces = run_ensemble(sim_config(n_runs=2, divergence_threshold=1e-9))
        assert [t.diverged for t in traces] == [True, True]


class TestPostBurnSamples:
    def test_no_burn_keeps_every_row(self):
        trace = make_trace(np.arange(20.0).reshape(10, 2))
        np.testing.assert_array_equal(post_burn_samples([trace], 0), trace.joint)

    def test_last_row_only(self):
        trace = make_trace(np.arange(20.0).reshape(10, 2))
        np.testing.assert_array_equal(post_burn_samples([trace], 9), [[18.0, 19.0]])

    def test_pools_across_runs(self):
        traces = [make_trace(np.full((150, 2), float(i)), run_index=i) for i in range(3)]
        samples = post_burn_samples(traces, 50)
        assert samples.shape == (300, 2)
        assert sorted(set(samples[:, 0])) == [0.0, 1.0, 2.0]

    def test_burn_past_the_last_row_is_rejected(self):
        trace = make_trace(np.zeros((10, 2)))
        with pytest.raises(ConfigurationError):
            post_burn_samples([trace], 10)

    def test_no_live_trace_is_rejected(self):
        diverged = run_member(sim_config(divergence_threshold=1e-9), 0)
        with pytest.raises(ContractViolationError):
            post_burn_samples([diverged], 0)


class TestProjectTrace:
    def test_raw_params_is_identity(self):
        trace = make_trace(np.ones((3, 4)))
        assert project_trace(trace, "raw_params") is trace

    def test_equal_q_values_project_to_one_half(self):
        trace = make_trace(np.zeros((2, 4)))
        np.testing.assert_allclose(project_trace(trace, "action_prob").joint, 0.5)

    def test_logits_project_through_softmax(self):
        trace = make_trace([[2.0, 0.0, 0.0, 2.0]])
        pg_meta = replace(trace.agent_meta[0], kind="policy_gradient")
        trace = replace(trace, agent_meta=(pg_meta, pg_meta))
        projected = project_trace(trace, "action_prob").joint
        np.testing.assert_allclose(projected, [[0.8808, 0.1192]], atol=1e-4)

    def test_q_of_action0(self):
        trace = make_trace([[1.5, -2.0, 0.25, 4.0]])
        np.testing.assert_array_equal(project_trace(trace, "q_of_action0").joint, [[1.5, 0.25]])

    def test_action_values_are_not_available_for_policy_gradient(self):
        trace = make_trace(np.zeros((2, 4)))
        pg_meta = replace(trace.agent_meta[0], kind="policy_gradient")
        with pytest.raises(ConfigurationError):
            project_trace(replace(trace, agent_meta=(pg_meta, pg_meta)), "q_values")

    def test_projected_trace_cannot_be_projected_again(self):
        projected = project_trace(make_trace(np.zeros((2, 4))), "action_prob")
        with pytest.raises(ConfigurationError):
            project_trace(projected, "q_values")


@pytest.mark.slow
def test_prisoners_dilemma_learners_settle_on_the_dominant_action():
    agent = tabular_agent(learning_rate=1e-3, exploration={"mode": "boltzmann", "temperature": 0.2})
    config = sim_config(
        agents=[agent, agent],
        n_steps=50_000,
        n_burn=10_000,
        record_stride=10,
        n_runs=1,
        projection_mode="action_prob",
    )
    final = run_training(config, 0).joint[-1]
    assert np.all(final > 0.9)
