import json
from pathlib import Path

import numpy as np
import pytest

from marl_dyn.conf.run_config import RunConfig
from marl_dyn.utils.coupled_sim import TrajectoryTrace
from marl_dyn.utils.learners.types import AgentMeta


def tabular_agent(**overrides):
    agent = {"kind": "tabular_q", "gamma": 0.0, "exploration": {"mode": "boltzmann", "temperature": 1.0}}
    agent.update(overrides)
    return agent


def small_config_dict(**overrides):
    """A fast prisoner's-dilemma run: two tabular Boltzmann learners."""
    data = {
        "schema_version": 1,
        "game": "prisoners_dilemma",
        "agents": [tabular_agent(), tabular_agent()],
        "seed": 1,
        "n_steps": 600,
        "n_burn": 100,
        "n_runs": 2,
        "record_stride": 2,
        "projection_mode": "raw_params",
        "diagnostics": {"theiler_w": 5, "z_max": 10, "n_radii": 12, "embedding": "never"},
    }
    data.update(overrides)
    return data


@pytest.fixture
def config_dict():
    return small_config_dict()


@pytest.fixture
def run_config(config_dict):
    return RunConfig.from_dict(config_dict)


@pytest.fixture
def write_config(tmp_path):
    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write


def make_trace(rows, run_index=0, config_hash="0123456789abcdef", steps=None, projection_mode="raw_params"):
    """Trace with one tabular agent per column block; rows is (n, 2) or (n, 4)."""
    rows = np.asarray(rows, dtype=np.float64)
    half = rows.shape[1] // 2
    meta = AgentMeta(
        kind="tabular_q",
        n_states=1,
        n_actions=half,
        param_count=half,
        exploration_mode="boltzmann",
        temperature=1.0,
    )
    return TrajectoryTrace(
        run_index=run_index,
        seed=run_index,
        config_hash=config_hash,
        projection_mode=projection_mode,
        agent_rows=(rows[:, :half].copy(), rows[:, half:].copy()),
        steps=np.arange(1, len(rows) + 1) if steps is None else np.asarray(steps),
        rewards=np.zeros((len(rows), 2)),
        agent_meta=(meta, meta),
    )


@pytest.fixture
def write_csv(tmp_path):
    def _write(name, header, rows=()):
        path = Path(tmp_path) / name
        lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write
