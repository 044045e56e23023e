import pytest

from marl_dyn.conf.run_config import (
    RunConfig,
    dump_config,
    load_config,
    parse_config_text,
    patch_simulation,
    save_config,
)
from marl_dyn.utils.exceptions import ConfigurationError
from tests.conftest import small_config_dict, tabular_agent


def config_error(data) -> ConfigurationError:
    with pytest.raises(ConfigurationError) as excinfo:
        RunConfig.from_dict(data)
    return excinfo.value


def test_minimal_config_fills_defaults():
    config = RunConfig.from_dict({"game": "matching_pennies", "agents": [{"kind": "tabular_q"}] * 2})
    sim = config.simulation
    assert (sim.n_steps, sim.n_burn, sim.n_runs, sim.record_stride) == (50_000, 10_000, 16, 10)
    assert sim.agents[0].learning_rate == 0.1
    assert sim.agents[0].exploration.mode == "boltzmann"
    assert config.diagnostics.target_rate == 0.08
    assert config.diagnostics.mask_width == 20


def test_round_trip_keeps_the_hash(run_config):
    again = RunConfig.from_dict(run_config.to_dict())
    assert again.to_dict() == run_config.to_dict()
    assert again.config_hash == run_config.config_hash
    assert len(run_config.config_hash) == 16
    assert int(run_config.config_hash, 16) >= 0


def test_hash_follows_simulation_fields(run_config):
    reseeded = RunConfig.from_dict(small_config_dict(seed=2))
    assert reseeded.config_hash != run_config.config_hash
    rediagnosed = RunConfig.from_dict(small_config_dict(diagnostics={"theiler_w": 7}))
    assert rediagnosed.config_hash == run_config.config_hash


def test_gridworld_uses_longer_default_runs():
    config = RunConfig.from_dict({"game": "gridworld", "agents": [{"kind": "idqn"}] * 2})
    assert config.simulation.n_steps == 200_000
    assert config.simulation.n_burn == 40_000


def test_replicator_preset_sets_a_small_step():
    agent = {"kind": "policy_gradient", "preset": "replicator"}
    config = RunConfig.from_dict(small_config_dict(agents=[agent, agent]))
    assert config.simulation.agents[0].learning_rate == 1e-3


def test_integer_values_are_accepted_for_reals():
    config = RunConfig.from_dict(small_config_dict(agents=[tabular_agent(learning_rate=1)] * 2))
    assert config.simulation.agents[0].learning_rate == 1.0


@pytest.mark.parametrize(
    ("overrides", "key"),
    [
        ({"n_burn": 600}, "n_burn"),
        ({"n_steps": 0}, "n_steps"),
        ({"n_runs": 0}, "n_runs"),
        ({"record_stride": 1000}, "record_stride"),
        ({"seed": -1}, "seed"),
        ({"projection_mode": "velocity"}, "projection_mode"),
        ({"agents": [tabular_agent()]}, "agents"),
        ({"agents": [tabular_agent(gamma=1.0), tabular_agent()]}, "agents[0].gamma"),
        ({"agents": [tabular_agent(), tabular_agent(kind="sarsa")]}, "agents[1].kind"),
        ({"unknown": 1}, "unknown"),
        ({"game": "rock_paper_scissors"}, "game.name"),
        ({"diagnostics": {"z_min": 40}}, "diagnostics.z_min"),
        ({"diagnostics": {"target_rate": 1.0}}, "diagnostics.target_rate"),
        ({"schema_version": 2}, "schema_version"),
    ],
)
def test_invalid_values_name_their_key(overrides, key):
    assert config_error(small_config_dict(**overrides)).key == key


def test_action_probabilities_need_boltzmann_agents():
    agent = tabular_agent(exploration={"mode": "epsilon_greedy"})
    error = config_error(small_config_dict(agents=[agent, agent], projection_mode="action_prob"))
    assert error.key == "projection_mode"


def test_projections_need_a_stateless_game():
    data = {"game": "gridworld", "agents": [tabular_agent()] * 2, "projection_mode": "q_values"}
    assert config_error(data).key == "projection_mode"


def test_policy_gradient_must_sample_from_its_softmax():
    agent = {"kind": "policy_gradient", "exploration": {"mode": "epsilon_greedy"}}
    assert config_error(small_config_dict(agents=[agent, agent])).key == "agents[0].exploration"


def test_custom_game_payoffs():
    game = {"payoffs": [1, -1, -1, 1, -1, 1, 1, -1], "zero_sum": True}
    config = RunConfig.from_dict(small_config_dict(game=game))
    assert config.simulation.game.name == "custom"
    assert config.simulation.game.payoffs[2] == -1.0
    assert config_error(small_config_dict(game={"payoffs": [1, 2, 3]})).key == "game.payoffs"


class TestPatchSimulation:
    def test_wildcard_patches_every_agent(self, run_config):
        patched = patch_simulation(run_config.simulation, "agents.*.exploration.temperature", 0.3)
        assert [a.exploration.temperature for a in patched.agents] == [0.3, 0.3]
        assert [a.exploration.temperature for a in run_config.simulation.agents] == [1.0, 1.0]
        assert patched.config_hash != run_config.simulation.config_hash

    def test_single_agent_by_index(self, run_config):
        patched = patch_simulation(run_config.simulation, "agents.1.gamma", 0.5)
        assert [a.gamma for a in patched.agents] == [0.0, 0.5]

    def test_patched_value_is_validated(self, run_config):
        with pytest.raises(ConfigurationError):
            patch_simulation(run_config.simulation, "agents.*.gamma", 1.5)

    @pytest.mark.parametrize("parameter", ["agents", "agents.*.exploration", "nope", "agents.7.gamma", "a..b"])
    def test_path_must_reach_a_scalar(self, run_config, parameter):
        with pytest.raises(ConfigurationError) as excinfo:
            patch_simulation(run_config.simulation, parameter, 0.5)
        assert excinfo.value.key == "sweep.parameter"


class TestSweepSection:
    def test_known_leaf_gets_the_default_grid(self):
        config = RunConfig.from_dict(small_config_dict(sweep={"parameter": "agents.*.gamma"}))
        assert config.sweep.values == (0.5, 0.7, 0.9, 0.95, 0.99)
        assert config.to_dict()["sweep"]["values"] == [0.5, 0.7, 0.9, 0.95, 0.99]

    def test_unknown_leaf_needs_values(self):
        error = config_error(small_config_dict(sweep={"parameter": "seed"}))
        assert error.key == "sweep.values"

    def test_duplicate_values_are_rejected(self):
        error = config_error(small_config_dict(sweep={"parameter": "seed", "values": [1, 1]}))
        assert error.key == "sweep.values"

    def test_every_value_must_be_valid(self):
        with pytest.raises(ConfigurationError):
            RunConfig.from_dict(small_config_dict(sweep={"parameter": "n_burn", "values": [10, 5000]}))


class TestConfigFiles:
    def test_yaml_and_json_agree(self, config_dict):
        yaml_text = "\n".join(
            [
                "game: prisoners_dilemma",
                "agents:",
                "  - {kind: tabular_q, gamma: 0.0, exploration: {mode: boltzmann, temperature: 1.0}}",
                "  - {kind: tabular_q, gamma: 0.0, exploration: {mode: boltzmann, temperature: 1.0}}",
                "seed: 1",
                "n_steps: 600",
                "n_burn: 100",
                "n_runs: 2",
                "record_stride: 2",
                "projection_mode: raw_params",
                "diagnostics: {theiler_w: 5, z_max: 10, n_radii: 12, embedding: never}",
            ]
        )
        from_yaml = parse_config_text(yaml_text, ".yaml")
        assert from_yaml.to_dict() == RunConfig.from_dict(config_dict).to_dict()

    def test_malformed_text_is_a_configuration_error(self):
        with pytest.raises(ConfigurationError):
            parse_config_text("{not json", ".json")
        with pytest.raises(ConfigurationError):
            parse_config_text("game: [unclosed", ".yml")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError) as excinfo:
            load_config(tmp_path / "absent.json")
        assert excinfo.value.key == "config"

    def test_save_then_load(self, tmp_path, run_config):
        path = save_config(run_config, tmp_path / "nested" / "resolved.json")
        assert path.read_text(encoding="utf-8") == dump_config(run_config)
        assert load_config(path).config_hash == run_config.config_hash

    def test_written_config_loads(self, write_config, config_dict, run_config):
        assert load_config(write_config(config_dict)).config_hash == run_config.config_hash
