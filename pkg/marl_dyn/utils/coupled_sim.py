"""
The coupled learner/environment system.

Each environment step produces one update index ``h``; the parameters of every
agent are recorded after update ``h`` whenever ``h`` is a multiple of
``record_stride``. Members of an ensemble draw from independent seeds derived
from ``(seed, run_index)``.
"""

import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from marl_dyn.conf.run_config import SimConfig
from marl_dyn.utils.commons.hashing import derive_seed
from marl_dyn.utils.exceptions import (
    ConfigurationError,
    ContractViolationError,
    DivergenceError,
    DivergenceReport,
)
from marl_dyn.utils.game_env import MatrixGame, is_absorbing, make_game, reset, step
from marl_dyn.utils.learners.enums import ProjectionMode
from marl_dyn.utils.learners.factory import build_learner
from marl_dyn.utils.learners.projection import (
    check_projection,
    project_agent_rows,
    projected_width,
)
from marl_dyn.utils.learners.rng import RngStreams
from marl_dyn.utils.learners.types import AgentMeta, Transition

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TrajectoryTrace:
    run_index: int
    seed: int
    config_hash: str
    projection_mode: str
    agent_rows: tuple[np.ndarray, ...]
    steps: np.ndarray
    rewards: np.ndarray
    agent_meta: tuple[AgentMeta, ...]
    divergence: DivergenceReport | None = None

    @property
    def diverged(self) -> bool:
        return self.divergence is not None

    @property
    def n_rows(self) -> int:
        return len(self.steps)

    @property
    def joint(self) -> np.ndarray:
        """Column-concatenation of the agents' rows."""
        return np.hstack(self.agent_rows)

    def post_burn_rows(self, n_burn: int) -> np.ndarray:
        return self.joint[self.steps > n_burn]

    def mean_rewards(self, n_burn: int) -> list[float]:
        if self.diverged or len(self.rewards) <= n_burn:
            return [float("nan")] * len(self.agent_meta)
        return [float(v) for v in self.rewards[n_burn:].mean(axis=0)]


def _divergence_check(learners, config: SimConfig, h: int, run_index: int) -> None:
    for agent_index, learner in enumerate(learners):
        value = learner.max_abs_param()
        if not np.isfinite(value) or value > config.divergence_threshold:
            report = DivergenceReport(
                update_index=h,
                run_index=run_index,
                agent_index=agent_index,
                value=value if np.isfinite(value) else None,
                threshold=config.divergence_threshold,
            )
            raise DivergenceError(
                f"Agent {agent_index} diverged at update {h} (max |theta| = {value})", report
            )


def run_training(config: SimConfig, run_index: int) -> TrajectoryTrace:
    """Simulate one ensemble member; raises DivergenceError on a runaway parameter."""
    seed = derive_seed(config.seed, run_index)
    game = make_game(config.game)
    learners = [
        build_learner(spec, game, RngStreams.from_seed(seed, agent_index), config.n_steps)
        for agent_index, spec in enumerate(config.agents)
    ]
    env_rng = RngStreams.from_seed(seed, len(learners)).environment
    stateless = isinstance(game, MatrixGame)

    stride = config.record_stride
    rows = [np.empty((config.n_rows, learner.flatten_params().size)) for learner in learners]
    rewards = np.empty((config.n_steps, len(learners)))
    progress_every = max(1, config.n_steps // 10)

    logger.info(
        "Run %d started: game=%s, n_steps=%d, seed=%d", run_index, config.game.name, config.n_steps, seed
    )
    state, t = reset(game), 0
    for h in range(1, config.n_steps + 1):
        actions = [learner.act(state, h - 1) for learner in learners]
        next_state, reward, episode_end = step(game, state, actions, env_rng, t)
        # Repeated matrix games bootstrap across repetitions unless disabled.
        terminal = not config.bootstrap_repeated if stateless else is_absorbing(game, next_state)
        for agent_index, learner in enumerate(learners):
            learner.observe(
                Transition(
                    state=state,
                    action=actions[agent_index],
                    reward=float(reward[agent_index]),
                    next_state=next_state,
                    terminal=terminal,
                    episode_end=episode_end,
                )
            )
        rewards[h - 1] = reward
        _divergence_check(learners, config, h, run_index)

        if h % stride == 0:
            for agent_rows, learner in zip(rows, learners, strict=True):
                agent_rows[h // stride - 1] = learner.flatten_params()
        if episode_end:
            state, t = reset(game), 0
        else:
            state, t = next_state, t + 1
        if h % progress_every == 0:
            logger.debug("Run %d: %d/%d updates", run_index, h, config.n_steps)

    raw = TrajectoryTrace(
        run_index=run_index,
        seed=seed,
        config_hash=config.config_hash,
        projection_mode=ProjectionMode.RAW_PARAMS.value,
        agent_rows=tuple(rows),
        steps=np.arange(1, config.n_rows + 1) * stride,
        rewards=rewards,
        agent_meta=tuple(learner.meta() for learner in learners),
    )
    logger.info("Run %d finished: %d rows recorded", run_index, raw.n_rows)
    return project_trace(raw, config.projection_mode)


def project_trace(trace: TrajectoryTrace, mode: str) -> TrajectoryTrace:
    if mode == trace.projection_mode:
        return trace
    if trace.projection_mode != ProjectionMode.RAW_PARAMS.value:
        raise ConfigurationError(
            f"trace is already projected to '{trace.projection_mode}'", key="projection_mode"
        )
    error = check_projection(
        mode,
        [(meta.kind, meta.exploration_mode) for meta in trace.agent_meta],
        stateless=all(meta.n_states == 1 for meta in trace.agent_meta),
    )
    if error:
        raise ConfigurationError(error, key="projection_mode")

    rows = tuple(
        project_agent_rows(agent_rows, meta, mode)
        if len(agent_rows)
        else np.empty((0, projected_width(meta, mode)))
        for agent_rows, meta in zip(trace.agent_rows, trace.agent_meta, strict=True)
    )
    return replace(trace, agent_rows=rows, projection_mode=mode)


def diverged_trace(config: SimConfig, run_index: int, report: DivergenceReport) -> TrajectoryTrace:
    """Placeholder for a member that aborted: metadata only, zero rows."""
    game = make_game(config.game)
    seed = derive_seed(config.seed, run_index)
    meta = tuple(
        build_learner(spec, game, RngStreams.from_seed(seed, agent_index), config.n_steps).meta()
        for agent_index, spec in enumerate(config.agents)
    )
    return TrajectoryTrace(
        run_index=run_index,
        seed=seed,
        config_hash=config.config_hash,
        projection_mode=config.projection_mode,
        agent_rows=tuple(np.empty((0, projected_width(m, config.projection_mode))) for m in meta),
        steps=np.empty(0, dtype=np.int64),
        rewards=np.empty((0, len(meta))),
        agent_meta=meta,
        divergence=report,
    )


def run_member(config: SimConfig, run_index: int) -> TrajectoryTrace:
    """run_training that turns divergence into a flagged trace instead of raising."""
    try:
        return run_training(config, run_index)
    except DivergenceError as e:
        logger.warning("Run %d diverged: %s", run_index, e)
        return diverged_trace(config, run_index, e.report)


def _call(job: tuple[Callable[..., Any], tuple]) -> Any:
    func, args = job
    return func(*args)


def run_jobs(jobs: Iterable[tuple[Callable[..., Any], tuple]], workers: int = 1) -> list[Any]:
    """Evaluate ``func(*args)`` jobs, in order, serially or on a process pool."""
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [_call(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as executor:
        return list(executor.map(_call, jobs))


def run_ensemble(config: SimConfig, workers: int = 1) -> list[TrajectoryTrace]:
    """``n_runs`` members ordered by run_index; diverged members are flagged, not raised."""
    traces = run_jobs(((run_member, (config, i)) for i in range(config.n_runs)), workers)
    n_diverged = sum(trace.diverged for trace in traces)
    if n_diverged:
        logger.warning("%d of %d ensemble members diverged", n_diverged, len(traces))
    return traces


def post_burn_samples(traces: list[TrajectoryTrace], n_burn: int) -> np.ndarray:
    """Pool every recorded row with h > n_burn across the live members."""
    live = [trace for trace in traces if not trace.diverged]
    if not live:
        raise ContractViolationError("no live traces to sample", operation="post_burn_samples")
    if any(trace.n_rows == 0 or trace.steps[-1] <= n_burn for trace in live):
        raise ConfigurationError(
            f"n_burn={n_burn} leaves no recorded rows in at least one trace", key="n_burn"
        )
    return np.vstack([trace.post_burn_rows(n_burn) for trace in live])
