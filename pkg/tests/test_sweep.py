import numpy as np
import pytest

from marl_dyn.conf.run_config import RunConfig
from marl_dyn.utils.commons.file_utils import canonical_json, load_json_data
from marl_dyn.utils.commons.report_io import write_sweep
from marl_dyn.utils.coupled_sim import run_ensemble
from marl_dyn.utils.diagnostics.report import diagnose
from marl_dyn.utils.exceptions import ConfigurationError
from marl_dyn.utils.sweep import SENSITIVITY_COLUMNS, emit_sensitivity_curves, point_config, run_sweep
from tests.conftest import small_config_dict

DIAGNOSTICS = {"theiler_w": 5, "z_max": 10, "n_radii": 12, "embedding": "never", "density_dims": [0, 2]}


def sweep_config(parameter, values, **overrides):
    return RunConfig.from_dict(
        small_config_dict(diagnostics=DIAGNOSTICS, sweep={"parameter": parameter, "values": values}, **overrides)
    )


def test_single_value_matches_a_direct_diagnosis():
    config = sweep_config("agents.*.exploration.temperature", [0.5])
    result = run_sweep(config)

    direct_config = point_config(config.simulation, config.sweep.parameter, 0.5)
    direct = diagnose(run_ensemble(direct_config), config.diagnostics, direct_config.n_burn)
    (point,) = result.points
    assert point.status == "ok"
    assert canonical_json(point.report.to_dict()) == canonical_json(direct.to_dict())


def test_points_do_not_depend_on_grid_order():
    forward = run_sweep(sweep_config("agents.*.gamma", [0.0, 0.5]))
    backward = run_sweep(sweep_config("agents.*.gamma", [0.5, 0.0]))
    for value in (0.0, 0.5):
        a, b = forward.point_for(value), backward.point_for(value)
        assert a.config.seed == b.config.seed
        np.testing.assert_array_equal(a.traces[0].joint, b.traces[0].joint)
    assert emit_sensitivity_curves(forward) == emit_sensitivity_curves(backward)


def test_grid_values_get_distinct_seeds():
    result = run_sweep(sweep_config("agents.*.gamma", [0.0, 0.5]))
    assert result.points[0].config.seed != result.points[1].config.seed
    assert result.base_config_hash == sweep_config("agents.*.gamma", [0.0, 0.5]).config_hash


def test_failed_point_is_recorded_not_raised():
    result = run_sweep(sweep_config("divergence_threshold", [1e6, 1e-9]))
    failed = result.point_for(1e-9)
    assert failed.status == "failed"
    assert failed.n_diverged == 2
    assert failed.report is None
    assert "diverged" in failed.error
    assert result.n_failed == 1

    lines = emit_sensitivity_curves(result).splitlines()
    assert lines[0] == ",".join(SENSITIVITY_COLUMNS)
    assert len(lines) == 3
    cells = lines[1].split(",")
    assert float(cells[0]) == 1e-9
    assert cells[1:7] == [""] * 6
    assert cells[7:] == ["2", "failed"]
    assert lines[2].endswith(",0,ok")


def test_single_run_points_have_zero_spread():
    result = run_sweep(sweep_config("agents.*.gamma", [0.0], n_runs=1))
    stats = result.points[0].stats()
    assert stats["frob_sd"] == 0.0


def test_sensitivity_rows_are_sorted_and_stable():
    result = run_sweep(sweep_config("seed", [9, 3, 5]))
    first = emit_sensitivity_curves(result)
    assert first == emit_sensitivity_curves(result)
    values = [line.split(",")[0] for line in first.splitlines()[1:]]
    assert values == ["3", "5", "9"]


def test_sweep_section_is_required(run_config):
    with pytest.raises(ConfigurationError) as excinfo:
        run_sweep(run_config)
    assert excinfo.value.key == "sweep"


def test_sweep_directory(tmp_path):
    config = sweep_config("agents.*.gamma", [0.5, 0.0])
    result = run_sweep(config)
    write_sweep(tmp_path, result, config)

    assert (tmp_path / "sensitivity.csv").exists()
    summary = load_json_data(tmp_path / "sweep_report.json")
    assert summary["parameter"] == "agents.*.gamma"
    assert [p["value"] for p in summary["points"]] == [0.0, 0.5]

    first = load_json_data(tmp_path / "point_00" / "ensemble.json")
    assert first["config"]["agents"][0]["gamma"] == 0.0
    assert first["config_hash"] == result.point_for(0.0).config.config_hash
    assert (tmp_path / "point_01" / "report.json").exists()
