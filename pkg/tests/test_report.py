from dataclasses import replace

import numpy as np
import pytest

from marl_dyn.conf.run_config import DiagnosticsSettings
from marl_dyn.utils.commons.file_utils import canonical_json, load_json_data
from marl_dyn.utils.commons.report_io import density_columns, write_diagnostics
from marl_dyn.utils.coupled_sim import run_ensemble, run_member
from marl_dyn.utils.diagnostics.report import diagnose, mean_sd, row_spacing
from marl_dyn.utils.exceptions import ContractViolationError, DivergenceError
from tests.conftest import make_trace

SETTINGS = DiagnosticsSettings.from_dict({"theiler_w": 5, "z_max": 10, "n_radii": 12, "embedding": "never"})

SCALARS = ("frobenius_norm", "lambda_max", "d2", "recurrence_rate")


def circle_trace(run_index, n=300, phase=0.0):
    angles = phase + np.arange(n) * 2 * np.pi * 0.618034
    return make_trace(np.column_stack([np.cos(angles), np.sin(angles)]), run_index=run_index)


def logistic_rows(n=800, x0=0.3):
    x = np.empty(n + 101)
    x[0] = x0
    for i in range(1, len(x)):
        x[i] = 4.0 * x[i - 1] * (1.0 - x[i - 1])
    return np.column_stack([x[100:-1], x[101:]])


def test_mean_sd():
    assert mean_sd([]) == (None, None)
    assert mean_sd([3.0]) == (3.0, 0.0)
    mean, sd = mean_sd([1.0, 3.0])
    assert mean == 2.0
    assert sd == pytest.approx(np.sqrt(2.0))


def test_constant_ensemble():
    traces = [make_trace(np.ones((100, 2)), run_index=i) for i in range(2)]
    report = diagnose(traces, SETTINGS, n_burn=0)
    assert report.frobenius_norm == 0.0
    assert report.lambda_per_run == []
    assert "lambda_max" in report.errors
    assert report.d2_per_run == [0.0, 0.0]
    assert report.correlation_fit.degenerate
    assert report.recurrence_rate == 1.0
    assert report.density.counts.sum() == 200
    data = report.to_dict()
    assert data["lambda_max"] is None
    assert data["degenerate_attractor"] is True
    assert data["n_samples"] == 200


def test_rotation_ensemble_populates_every_scalar():
    traces = [circle_trace(i, phase=0.3 * i) for i in range(3)]
    report = diagnose(traces, SETTINGS, n_burn=50)
    data = report.to_dict()
    assert all(data[key] is not None for key in SCALARS)
    assert data["errors"] == {}
    assert data["n_samples"] == 3 * 250
    assert len(data["lambda_per_run"]) == 3
    assert data["lambda_max"] == pytest.approx(0.0, abs=0.02)
    assert data["d2"] == pytest.approx(1.0, abs=0.15)
    assert data["representative_run"] == 0


def test_diagnose_is_pure():
    traces = [circle_trace(i, phase=0.3 * i) for i in range(2)]
    first = canonical_json(diagnose(traces, SETTINGS, n_burn=0).to_dict())
    second = canonical_json(diagnose(traces, SETTINGS, n_burn=0).to_dict())
    assert first == second


def test_wide_traces_need_density_columns():
    traces = [make_trace(np.random.default_rng(i).normal(size=(120, 4)), run_index=i) for i in range(2)]
    report = diagnose(traces, SETTINGS, n_burn=0)
    assert report.density is None
    assert "density" in report.errors
    assert report.frobenius_norm is not None

    chosen = DiagnosticsSettings.from_dict({**SETTINGS.to_dict(), "density_dims": [0, 2]})
    assert diagnose(traces, chosen, n_burn=0).density.counts.ndim == 2


def test_scalar_traces_are_embedded_automatically():
    settings = DiagnosticsSettings.from_dict(
        {"theiler_w": 5, "z_max": 10, "n_radii": 12, "embedding": "always", "embed_m": 2, "embed_tau": 2}
    )
    report = diagnose([circle_trace(0)], settings, n_burn=0)
    assert report.correlation_fit.embedding == (2, 2)


def test_diverged_members_are_skipped(run_config):
    live = circle_trace(0)
    diverged_config = replace(run_config.simulation, divergence_threshold=1e-9)
    dead = run_member(diverged_config, 1)
    report = diagnose([dead, live], SETTINGS, n_burn=0)
    assert report.n_runs == 2
    assert report.n_live == 1


def test_fully_diverged_ensemble_is_an_error(run_config):
    config = replace(run_config.simulation, divergence_threshold=1e-9, n_runs=2)
    with pytest.raises(DivergenceError):
        diagnose(run_ensemble(config), SETTINGS, n_burn=0)


def test_empty_ensemble_is_rejected():
    with pytest.raises(ContractViolationError):
        diagnose([], SETTINGS, n_burn=0)


def test_outputs_written_for_a_simulated_ensemble(tmp_path, run_config):
    traces = run_ensemble(run_config.simulation)
    settings = DiagnosticsSettings.from_dict({**run_config.diagnostics.to_dict(), "density_dims": [0, 2]})
    report = diagnose(traces, settings, run_config.simulation.n_burn)
    written = write_diagnostics(tmp_path, report)

    names = {path.name for path in written}
    assert {"report.json", "density.csv", "recurrence.pgm"} <= names
    saved = load_json_data(tmp_path / "report.json")
    assert saved["config_hash"] == run_config.config_hash
    assert saved["n_samples"] == 2 * (600 - 100) // 2

    header = (tmp_path / "density.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header.split(",") == density_columns(2)
    assert f"# config-hash: {run_config.config_hash}".encode() in (tmp_path / "recurrence.pgm").read_bytes()


def test_row_spacing():
    assert row_spacing(np.array([10, 20, 30])) == 10
    assert row_spacing(np.array([7])) == 1
    with pytest.raises(ContractViolationError):
        row_spacing(np.array([1, 2, 4]))


def test_lyapunov_exponent_is_per_update_step():
    rows = logistic_rows()
    dense = diagnose([make_trace(rows)], SETTINGS, n_burn=0)
    strided = diagnose([make_trace(rows, steps=np.arange(1, len(rows) + 1) * 10)], SETTINGS, n_burn=0)

    assert len(dense.lambda_per_run) == 1
    assert strided.lambda_per_run[0] == pytest.approx(dense.lambda_per_run[0] / 10, rel=1e-12)
    assert strided.lyapunov_fit.row_spacing == 10
    assert strided.d2_per_run == dense.d2_per_run


def test_uneven_steps_leave_lyapunov_unavailable():
    rows = logistic_rows(300)
    steps = np.arange(1, len(rows) + 1)
    steps[-1] += 5
    report = diagnose([make_trace(rows, steps=steps)], SETTINGS, n_burn=0)
    assert report.lambda_per_run == []
    assert "evenly spaced" in report.errors["lambda_max"]
    assert len(report.d2_per_run) == 1


def test_failed_embedding_skips_the_correlation_dimension():
    settings = DiagnosticsSettings.from_dict(
        {"theiler_w": 5, "z_max": 10, "n_radii": 12, "embedding": "always", "embed_m": 30, "embed_tau": 10}
    )
    report = diagnose([circle_trace(0, n=100)], settings, n_burn=0)
    assert report.lambda_per_run == []
    assert report.d2_per_run == []
    assert report.correlation_fit is None
    assert "too short" in report.errors["lambda_max"]
    assert "too short" in report.errors["d2"]
