"""Trace directories: ``run_XXX.csv`` + ``run_XXX.json`` per member and an ``ensemble.json`` manifest."""

import io
import logging
from pathlib import Path
from typing import Any

import numpy as np

from marl_dyn.conf.run_config import RunConfig
from marl_dyn.utils.commons.file_utils import load_json_data, write_file, write_json
from marl_dyn.utils.coupled_sim import TrajectoryTrace
from marl_dyn.utils.exceptions import ConfigurationError, DivergenceReport, MixedTraceError
from marl_dyn.utils.learners.types import AgentMeta

logger = logging.getLogger(__name__)

MANIFEST_NAME = "ensemble.json"
FLOAT_FORMAT = "%.17g"


def run_stem(run_index: int) -> str:
    return f"run_{run_index:03d}"


def trace_columns(trace: TrajectoryTrace) -> list[str]:
    columns = ["run_index", "h"]
    for agent_index, rows in enumerate(trace.agent_rows):
        columns.extend(f"a{agent_index}_{coord}" for coord in range(rows.shape[1]))
    return columns


def trace_to_csv(trace: TrajectoryTrace) -> str:
    buffer = io.StringIO()
    header = ",".join(trace_columns(trace))
    if trace.n_rows == 0:
        return header + "\n"
    table = np.column_stack(
        [np.full(trace.n_rows, trace.run_index), trace.steps, trace.joint]
    )
    fmt = ["%d", "%d"] + [FLOAT_FORMAT] * trace.joint.shape[1]
    np.savetxt(buffer, table, fmt=fmt, delimiter=",", header=header, comments="")
    return buffer.getvalue()


def trace_sidecar(trace: TrajectoryTrace, n_burn: int) -> dict[str, Any]:
    return {
        "run_index": trace.run_index,
        "seed": trace.seed,
        "config_hash": trace.config_hash,
        "projection_mode": trace.projection_mode,
        "n_rows": trace.n_rows,
        "agent_columns": [int(rows.shape[1]) for rows in trace.agent_rows],
        "agent_meta": [meta.to_dict() for meta in trace.agent_meta],
        "diverged": trace.diverged,
        "divergence": trace.divergence.to_dict() if trace.divergence else None,
        "mean_post_burn_rewards": [
            None if np.isnan(v) else v for v in trace.mean_rewards(n_burn)
        ],
    }


def write_traces(out_dir: str | Path, traces: list[TrajectoryTrace], config: RunConfig) -> Path:
    directory = Path(out_dir)
    n_burn = config.simulation.n_burn
    for trace in traces:
        stem = run_stem(trace.run_index)
        write_file(directory / f"{stem}.csv", trace_to_csv(trace))
        write_json(directory / f"{stem}.json", trace_sidecar(trace, n_burn))

    manifest = {
        "config_hash": config.config_hash,
        "config": config.to_dict(),
        "runs": [run_stem(trace.run_index) for trace in traces],
        "n_diverged": sum(trace.diverged for trace in traces),
    }
    return write_json(directory / MANIFEST_NAME, manifest)


def _read_trace(csv_path: Path, sidecar: dict[str, Any]) -> TrajectoryTrace:
    widths = sidecar["agent_columns"]
    n_rows = sidecar["n_rows"]
    if n_rows:
        table = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    else:
        table = np.empty((0, 2 + sum(widths)))
    if table.shape != (n_rows, 2 + sum(widths)):
        raise ConfigurationError(
            f"{csv_path} has shape {table.shape}, sidecar expects ({n_rows}, {2 + sum(widths)})",
            key="traces",
        )

    agent_rows, offset = [], 2
    for width in widths:
        agent_rows.append(table[:, offset : offset + width].copy())
        offset += width
    divergence = sidecar.get("divergence")
    return TrajectoryTrace(
        run_index=int(sidecar["run_index"]),
        seed=int(sidecar["seed"]),
        config_hash=sidecar["config_hash"],
        projection_mode=sidecar["projection_mode"],
        agent_rows=tuple(agent_rows),
        steps=table[:, 1].astype(np.int64),
        rewards=np.empty((0, len(widths))),
        agent_meta=tuple(AgentMeta.from_dict(meta) for meta in sidecar["agent_meta"]),
        divergence=DivergenceReport(**divergence) if divergence else None,
    )


def load_traces(
    directory: str | Path, force: bool = False
) -> tuple[list[TrajectoryTrace], RunConfig | None]:
    """
    Read every trace in ``directory`` plus the manifest config, if present.

    Raises MixedTraceError when the traces were produced by different
    configurations, unless ``force`` is set.
    """
    trace_dir = Path(directory)
    if not trace_dir.is_dir():
        raise ConfigurationError(f"Trace directory not found: {trace_dir}", key="traces")

    traces = []
    for sidecar_path in sorted(trace_dir.glob("run_*.json")):
        csv_path = sidecar_path.with_suffix(".csv")
        if not csv_path.exists():
            raise ConfigurationError(f"Trace CSV missing for {sidecar_path.name}", key="traces")
        traces.append(_read_trace(csv_path, load_json_data(sidecar_path)))
    if not traces:
        raise ConfigurationError(f"No traces found in {trace_dir}", key="traces")

    hashes = tuple(sorted({trace.config_hash for trace in traces}))
    if len(hashes) > 1:
        if not force:
            raise MixedTraceError(
                f"{trace_dir} mixes traces from {len(hashes)} configurations; use --force", hashes
            )
        logger.warning("Diagnosing mixed traces from configurations %s", ", ".join(hashes))

    manifest = load_json_data(trace_dir / MANIFEST_NAME, raise_not_found=False)
    config = RunConfig.from_dict(manifest["config"]) if manifest else None
    traces.sort(key=lambda trace: trace.run_index)
    return traces, config
