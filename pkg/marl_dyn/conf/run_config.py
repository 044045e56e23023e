"""
On-disk run configuration: strict schema, defaults and canonical persistence.

A run config is a JSON (or YAML) document with the simulation keys at the top
level plus optional ``diagnostics`` and ``sweep`` sections. Every validation
failure raises :class:`ConfigurationError` naming the dotted key path and the
violated constraint.
"""

import copy
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, ClassVar, NoReturn

import yaml

from marl_dyn.conf.defaults import (
    CUSTOM_GAME_NAME,
    DIAGNOSTICS_DEFAULTS,
    EXPLORATION_DEFAULTS,
    GRIDWORLD_DEFAULTS,
    GRIDWORLD_NAME,
    GRIDWORLD_SIMULATION_DEFAULTS,
    LEARNER_DEFAULTS,
    LEARNER_PRESETS,
    LEARNING_RATE_DEFAULTS,
    MATRIX_GAME_NAMES,
    SCHEMA_VERSION,
    SIMULATION_DEFAULTS,
    SWEEP_GRIDS,
)
from marl_dyn.utils.commons.file_utils import canonical_json, write_file
from marl_dyn.utils.commons.hashing import config_hash
from marl_dyn.utils.exceptions import ConfigurationError
from marl_dyn.utils.learners.enums import (
    BaselineMode,
    ExplorationMode,
    LearnerKind,
    ProjectionMode,
    choices,
)
from marl_dyn.utils.learners.projection import check_projection

EMBEDDING_CHOICES = ("auto", "always", "never")
SCALAR_TYPES = (bool, int, float, str)


def _fmt(value: float) -> str:
    return f"{value:g}"


@dataclass(frozen=True)
class Bound:
    low: float | None = None
    high: float | None = None
    low_open: bool = False
    high_open: bool = False

    def __contains__(self, value: float) -> bool:
        if self.low is not None and (value <= self.low if self.low_open else value < self.low):
            return False
        return not (
            self.high is not None and (value >= self.high if self.high_open else value > self.high)
        )

    def __str__(self) -> str:
        left = "(" if self.low is None or self.low_open else "["
        right = ")" if self.high is None or self.high_open else "]"
        low = "-inf" if self.low is None else _fmt(self.low)
        high = "inf" if self.high is None else _fmt(self.high)
        return f"{left}{low}, {high}{right}"


NON_NEGATIVE = Bound(0)
POSITIVE_INT = Bound(1)
POSITIVE = Bound(0, low_open=True)
UNIT = Bound(0, 1)


class SectionValidator:
    """Validates one mapping of the run config against declared types, ranges and choices."""

    types: ClassVar[dict[str, tuple[type, ...]]] = {}
    ranges: ClassVar[dict[str, Bound]] = {}
    choices: ClassVar[dict[str, tuple[str, ...]]] = {}
    required: ClassVar[tuple[str, ...]] = ()

    def __init__(self, path: str = ""):
        self.path = path

    def key_path(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def fail(self, key: str, message: str) -> NoReturn:
        path = self.key_path(key)
        raise ConfigurationError(f"{path} {message}", key=path)

    def validate(self, data: Any, defaults: Mapping[str, Any]) -> dict[str, Any]:
        if not isinstance(data, Mapping):
            where = self.path or "config"
            raise ConfigurationError(
                f"{where} must be a mapping, got {type(data).__name__}", key=self.path or None
            )

        for key in data:
            if key not in self.types:
                self.fail(str(key), f"is not a recognised key (allowed: {', '.join(sorted(self.types))})")
        for key in self.required:
            if key not in data:
                self.fail(key, "is required")

        values = {}
        for key in self.types:
            value = data[key] if key in data else copy.deepcopy(defaults.get(key))
            values[key] = self.validate_value(key, value)
        return values

    def validate_value(self, key: str, value: Any) -> Any:
        value = self._validate_type(key, value)
        self._validate_choice(key, value)
        self._validate_range(key, value)
        return value

    def _validate_type(self, key: str, value: Any) -> Any:
        expected = self.types[key]
        # bool is an int subclass; only accept it where bool is declared
        if isinstance(value, bool) and bool not in expected:
            valid = False
        elif isinstance(value, int) and not isinstance(value, bool) and float in expected:
            return float(value) if int not in expected else value
        else:
            valid = isinstance(value, expected)
        if not valid:
            names = " | ".join("null" if t is type(None) else t.__name__ for t in expected)
            self.fail(key, f"must be of type {names}, got {type(value).__name__}")
        if isinstance(value, float) and not math.isfinite(value):
            self.fail(key, f"must be finite, got {value}")
        return value

    def _validate_choice(self, key: str, value: Any) -> None:
        if key in self.choices and value is not None and value not in self.choices[key]:
            self.fail(key, f"must be one of {', '.join(self.choices[key])}, got {value!r}")

    def _validate_range(self, key: str, value: Any) -> None:
        if key in self.ranges and value is not None and value not in self.ranges[key]:
            self.fail(key, f"must be in {self.ranges[key]}, got {value}")


class ExplorationValidator(SectionValidator):
    types: ClassVar = {
        "mode": (str,),
        "temperature": (float,),
        "eps_start": (float,),
        "eps_end": (float,),
        "decay_rate": (float, type(None)),
    }
    ranges: ClassVar = {
        "temperature": POSITIVE,
        "eps_start": UNIT,
        "eps_end": UNIT,
        "decay_rate": POSITIVE,
    }
    choices: ClassVar = {"mode": choices(ExplorationMode)}


class LearnerValidator(SectionValidator):
    types: ClassVar = {
        "kind": (str,),
        "preset": (str, type(None)),
        "learning_rate": (float,),
        "gamma": (float,),
        "exploration": (dict,),
        "baseline": (str,),
        "baseline_decay": (float,),
        "hidden_sizes": (list,),
        "buffer_capacity": (int,),
        "batch_size": (int,),
        "target_sync_every": (int,),
        "use_replay": (bool,),
    }
    ranges: ClassVar = {
        "learning_rate": NON_NEGATIVE,
        "gamma": Bound(0, 1, high_open=True),
        "baseline_decay": Bound(0, 1, low_open=True),
        "buffer_capacity": POSITIVE_INT,
        "batch_size": POSITIVE_INT,
        "target_sync_every": POSITIVE_INT,
    }
    choices: ClassVar = {
        "kind": choices(LearnerKind),
        "baseline": choices(BaselineMode),
        "preset": tuple(LEARNER_PRESETS),
    }
    required: ClassVar = ("kind",)

    @staticmethod
    def defaults_for(data: Any) -> dict[str, Any]:
        defaults: dict[str, Any] = {**LEARNER_DEFAULTS, "exploration": {}, "preset": None}
        if not isinstance(data, Mapping):
            return defaults
        kind = data.get("kind")
        if isinstance(kind, str) and kind in LEARNING_RATE_DEFAULTS:
            defaults["learning_rate"] = LEARNING_RATE_DEFAULTS[kind]
        preset = data.get("preset")
        if isinstance(preset, str) and preset in LEARNER_PRESETS:
            defaults.update(LEARNER_PRESETS[preset])
        return defaults


class CustomGameValidator(SectionValidator):
    types: ClassVar = {"name": (str,), "payoffs": (list,), "zero_sum": (bool,)}
    required: ClassVar = ("payoffs",)


class MatrixGameValidator(SectionValidator):
    types: ClassVar = {"name": (str,)}


class GridworldValidator(SectionValidator):
    types: ClassVar = {
        "name": (str,),
        "width": (int,),
        "height": (int,),
        "start_positions": (list,),
        "goal_cells": (list,),
        "max_episode_steps": (int,),
        "step_penalty": (float,),
        "joint_goal_reward": (float,),
    }
    ranges: ClassVar = {
        "width": Bound(2, 16),
        "height": Bound(2, 16),
        "max_episode_steps": POSITIVE_INT,
    }


class SimulationValidator(SectionValidator):
    types: ClassVar = {
        "game": (str, dict),
        "agents": (list,),
        "seed": (int,),
        "n_steps": (int,),
        "n_burn": (int,),
        "n_runs": (int,),
        "record_stride": (int,),
        "projection_mode": (str,),
        "bootstrap_repeated": (bool,),
        "divergence_threshold": (float,),
    }
    ranges: ClassVar = {
        "seed": NON_NEGATIVE,
        "n_steps": POSITIVE_INT,
        "n_burn": NON_NEGATIVE,
        "n_runs": POSITIVE_INT,
        "record_stride": POSITIVE_INT,
        "divergence_threshold": POSITIVE,
    }
    choices: ClassVar = {"projection_mode": choices(ProjectionMode)}
    required: ClassVar = ("game", "agents")


class DiagnosticsValidator(SectionValidator):
    types: ClassVar = {
        "bins": (int, list),
        "density_range": (list, type(None)),
        "density_dims": (list, type(None)),
        "theiler_w": (int,),
        "z_min": (int,),
        "z_max": (int,),
        "target_rate": (float,),
        "theiler_mask_width": (int, type(None)),
        "n_radii": (int,),
        "min_window": (int,),
        "embedding": (str,),
        "embed_m": (int,),
        "embed_tau": (int,),
        "resolution": (float,),
    }
    ranges: ClassVar = {
        "bins": POSITIVE_INT,
        "theiler_w": NON_NEGATIVE,
        "z_min": NON_NEGATIVE,
        "z_max": POSITIVE_INT,
        "target_rate": Bound(0, 1, low_open=True, high_open=True),
        "theiler_mask_width": NON_NEGATIVE,
        "n_radii": Bound(2),
        "min_window": Bound(2),
        "embed_m": POSITIVE_INT,
        "embed_tau": POSITIVE_INT,
        "resolution": NON_NEGATIVE,
    }
    choices: ClassVar = {"embedding": EMBEDDING_CHOICES}

    def _validate_range(self, key: str, value: Any) -> None:
        if key == "bins" and isinstance(value, list):
            return
        super()._validate_range(key, value)


class SweepValidator(SectionValidator):
    types: ClassVar = {"parameter": (str,), "values": (list, type(None))}
    required: ClassVar = ("parameter",)


def _is_real(value: Any) -> bool:
    return isinstance(value, int | float) and not isinstance(value, bool) and math.isfinite(value)


def _cell_list(validator: SectionValidator, key: str, value: list, width: int, height: int):
    cells = []
    for index, cell in enumerate(value):
        if (
            not isinstance(cell, list | tuple)
            or len(cell) != 2
            or not all(isinstance(c, int) and not isinstance(c, bool) for c in cell)
        ):
            validator.fail(f"{key}[{index}]", f"must be an [x, y] integer pair, got {cell!r}")
        x, y = cell
        if not (0 <= x < width and 0 <= y < height):
            validator.fail(f"{key}[{index}]", f"must lie inside the {width}x{height} grid, got {cell!r}")
        cells.append((x, y))
    if len(set(cells)) != len(cells):
        validator.fail(key, "must not contain duplicate cells")
    return tuple(cells)


@dataclass(frozen=True)
class GameSpec:
    name: str
    payoffs: tuple[float, ...] | None = None
    zero_sum: bool = False
    width: int = GRIDWORLD_DEFAULTS["width"]
    height: int = GRIDWORLD_DEFAULTS["height"]
    start_positions: tuple[tuple[int, int], ...] = ((0, 0), (4, 0))
    goal_cells: tuple[tuple[int, int], ...] = ((0, 4), (4, 4))
    max_episode_steps: int = GRIDWORLD_DEFAULTS["max_episode_steps"]
    step_penalty: float = GRIDWORLD_DEFAULTS["step_penalty"]
    joint_goal_reward: float = GRIDWORLD_DEFAULTS["joint_goal_reward"]

    @property
    def is_gridworld(self) -> bool:
        return self.name == GRIDWORLD_NAME

    @property
    def is_stateless(self) -> bool:
        return not self.is_gridworld

    def to_dict(self) -> str | dict[str, Any]:
        if self.name in MATRIX_GAME_NAMES:
            return self.name
        if self.name == CUSTOM_GAME_NAME:
            return {"name": self.name, "payoffs": list(self.payoffs or ()), "zero_sum": self.zero_sum}
        return {
            "name": self.name,
            "width": self.width,
            "height": self.height,
            "start_positions": [list(cell) for cell in self.start_positions],
            "goal_cells": [list(cell) for cell in self.goal_cells],
            "max_episode_steps": self.max_episode_steps,
            "step_penalty": self.step_penalty,
            "joint_goal_reward": self.joint_goal_reward,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "game") -> "GameSpec":
        if isinstance(data, str):
            data = {"name": data}
        if not isinstance(data, Mapping):
            raise ConfigurationError(f"{path} must be a game name or mapping", key=path)
        name = data.get("name", CUSTOM_GAME_NAME if "payoffs" in data else None)
        allowed = (*MATRIX_GAME_NAMES, GRIDWORLD_NAME, CUSTOM_GAME_NAME)
        if name not in allowed:
            raise ConfigurationError(
                f"{path}.name must be one of {', '.join(allowed)}, got {name!r}", key=f"{path}.name"
            )

        if name in MATRIX_GAME_NAMES:
            MatrixGameValidator(path).validate(data, {"name": name})
            return cls(name=name)

        if name == CUSTOM_GAME_NAME:
            validator = CustomGameValidator(path)
            values = validator.validate(data, {"name": name, "zero_sum": False})
            payoffs = values["payoffs"]
            if len(payoffs) != 8 or not all(_is_real(v) for v in payoffs):
                validator.fail("payoffs", "must be a list of 8 finite reals")
            payoffs = tuple(float(v) for v in payoffs)
            if values["zero_sum"] and any(
                payoffs[i] + payoffs[i + 1] != 0.0 for i in range(0, 8, 2)
            ):
                validator.fail("zero_sum", "is set but the row and column payoffs do not cancel")
            return cls(name=name, payoffs=payoffs, zero_sum=values["zero_sum"])

        validator = GridworldValidator(path)
        values = validator.validate(data, {"name": name, **GRIDWORLD_DEFAULTS})
        width, height = values["width"], values["height"]
        starts = _cell_list(validator, "start_positions", values["start_positions"], width, height)
        goals = _cell_list(validator, "goal_cells", values["goal_cells"], width, height)
        if len(starts) != 2:
            validator.fail("start_positions", "must hold exactly one cell per agent")
        if len(goals) < 2:
            validator.fail("goal_cells", "must hold at least two distinct cells")
        return cls(
            name=name,
            width=width,
            height=height,
            start_positions=starts,
            goal_cells=goals,
            max_episode_steps=values["max_episode_steps"],
            step_penalty=values["step_penalty"],
            joint_goal_reward=values["joint_goal_reward"],
        )


@dataclass(frozen=True)
class ExplorationSpec:
    mode: str = EXPLORATION_DEFAULTS["mode"]
    temperature: float = EXPLORATION_DEFAULTS["temperature"]
    eps_start: float = EXPLORATION_DEFAULTS["eps_start"]
    eps_end: float = EXPLORATION_DEFAULTS["eps_end"]
    decay_rate: float | None = None

    def resolved_decay_rate(self, n_steps: int) -> float:
        return self.decay_rate if self.decay_rate is not None else 5.0 / n_steps

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "temperature": self.temperature,
            "eps_start": self.eps_start,
            "eps_end": self.eps_end,
            "decay_rate": self.decay_rate,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "ExplorationSpec":
        validator = ExplorationValidator(path)
        values = validator.validate(data, EXPLORATION_DEFAULTS)
        if values["eps_end"] > values["eps_start"]:
            validator.fail("eps_end", f"must not exceed eps_start ({_fmt(values['eps_start'])})")
        return cls(**values)


@dataclass(frozen=True)
class LearnerSpec:
    kind: str
    learning_rate: float
    gamma: float = LEARNER_DEFAULTS["gamma"]
    exploration: ExplorationSpec = field(default_factory=ExplorationSpec)
    baseline: str = LEARNER_DEFAULTS["baseline"]
    baseline_decay: float = LEARNER_DEFAULTS["baseline_decay"]
    hidden_sizes: tuple[int, ...] = (32, 32)
    buffer_capacity: int = LEARNER_DEFAULTS["buffer_capacity"]
    batch_size: int = LEARNER_DEFAULTS["batch_size"]
    target_sync_every: int = LEARNER_DEFAULTS["target_sync_every"]
    use_replay: bool = LEARNER_DEFAULTS["use_replay"]

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "learning_rate": self.learning_rate,
            "gamma": self.gamma,
            "exploration": self.exploration.to_dict(),
            "baseline": self.baseline,
            "baseline_decay": self.baseline_decay,
            "hidden_sizes": list(self.hidden_sizes),
            "buffer_capacity": self.buffer_capacity,
            "batch_size": self.batch_size,
            "target_sync_every": self.target_sync_every,
            "use_replay": self.use_replay,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "LearnerSpec":
        validator = LearnerValidator(path)
        values = validator.validate(data, LearnerValidator.defaults_for(data))
        values.pop("preset")

        hidden = values["hidden_sizes"]
        if not all(isinstance(h, int) and not isinstance(h, bool) and h >= 1 for h in hidden):
            validator.fail("hidden_sizes", "must be a list of positive integers")
        values["hidden_sizes"] = tuple(hidden)
        if values["batch_size"] > values["buffer_capacity"]:
            validator.fail(
                "batch_size", f"must not exceed buffer_capacity ({values['buffer_capacity']})"
            )

        exploration = ExplorationSpec.from_dict(
            values["exploration"], validator.key_path("exploration")
        )
        if values["kind"] == LearnerKind.POLICY_GRADIENT.value and (
            exploration.mode != ExplorationMode.BOLTZMANN.value or exploration.temperature != 1.0
        ):
            raise ConfigurationError(
                f"{validator.key_path('exploration')} must be boltzmann with temperature 1 "
                "for policy_gradient learners",
                key=validator.key_path("exploration"),
            )
        values["exploration"] = exploration
        return cls(**values)


@dataclass(frozen=True)
class SimConfig:
    game: GameSpec
    agents: tuple[LearnerSpec, LearnerSpec]
    seed: int = SIMULATION_DEFAULTS["seed"]
    n_steps: int = SIMULATION_DEFAULTS["n_steps"]
    n_burn: int = SIMULATION_DEFAULTS["n_burn"]
    n_runs: int = SIMULATION_DEFAULTS["n_runs"]
    record_stride: int = SIMULATION_DEFAULTS["record_stride"]
    projection_mode: str = SIMULATION_DEFAULTS["projection_mode"]
    bootstrap_repeated: bool = SIMULATION_DEFAULTS["bootstrap_repeated"]
    divergence_threshold: float = SIMULATION_DEFAULTS["divergence_threshold"]

    @property
    def n_rows(self) -> int:
        return self.n_steps // self.record_stride

    @property
    def config_hash(self) -> str:
        return config_hash(self.to_dict())

    def with_seed(self, seed: int) -> "SimConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "game": self.game.to_dict(),
            "agents": [agent.to_dict() for agent in self.agents],
            "seed": self.seed,
            "n_steps": self.n_steps,
            "n_burn": self.n_burn,
            "n_runs": self.n_runs,
            "record_stride": self.record_stride,
            "projection_mode": self.projection_mode,
            "bootstrap_repeated": self.bootstrap_repeated,
            "divergence_threshold": self.divergence_threshold,
        }

    @classmethod
    def from_dict(cls, data: Any) -> "SimConfig":
        validator = SimulationValidator()
        if not isinstance(data, Mapping):
            raise ConfigurationError(f"config must be a mapping, got {type(data).__name__}")
        if "game" not in data:
            validator.fail("game", "is required")
        game = GameSpec.from_dict(data["game"])
        defaults = dict(SIMULATION_DEFAULTS)
        if game.is_gridworld:
            defaults.update(GRIDWORLD_SIMULATION_DEFAULTS)
        values = validator.validate(data, defaults)

        agents = values["agents"]
        if len(agents) != 2:
            validator.fail("agents", f"must list exactly 2 learner specs, got {len(agents)}")
        values["agents"] = tuple(
            LearnerSpec.from_dict(agent, f"agents[{index}]") for index, agent in enumerate(agents)
        )
        values["game"] = game

        if values["n_burn"] >= values["n_steps"]:
            validator.fail("n_burn", f"must satisfy 0 <= n_burn < n_steps ({values['n_steps']})")
        if values["record_stride"] > values["n_steps"]:
            validator.fail("record_stride", f"must not exceed n_steps ({values['n_steps']})")
        last_recorded = (values["n_steps"] // values["record_stride"]) * values["record_stride"]
        if last_recorded <= values["n_burn"]:
            validator.fail("n_burn", "leaves no recorded rows after burn-in")

        error = check_projection(
            values["projection_mode"],
            [(agent.kind, agent.exploration.mode) for agent in values["agents"]],
            stateless=game.is_stateless,
        )
        if error:
            validator.fail("projection_mode", error)
        return cls(**values)


@dataclass(frozen=True)
class DiagnosticsSettings:
    bins: int | tuple[int, ...] = DIAGNOSTICS_DEFAULTS["bins"]
    density_range: tuple[tuple[float, float], ...] | None = None
    density_dims: tuple[int, int] | None = None
    theiler_w: int = DIAGNOSTICS_DEFAULTS["theiler_w"]
    z_min: int = DIAGNOSTICS_DEFAULTS["z_min"]
    z_max: int = DIAGNOSTICS_DEFAULTS["z_max"]
    target_rate: float = DIAGNOSTICS_DEFAULTS["target_rate"]
    theiler_mask_width: int | None = None
    n_radii: int = DIAGNOSTICS_DEFAULTS["n_radii"]
    min_window: int = DIAGNOSTICS_DEFAULTS["min_window"]
    embedding: str = DIAGNOSTICS_DEFAULTS["embedding"]
    embed_m: int = DIAGNOSTICS_DEFAULTS["embed_m"]
    embed_tau: int = DIAGNOSTICS_DEFAULTS["embed_tau"]
    resolution: float = DIAGNOSTICS_DEFAULTS["resolution"]

    @property
    def mask_width(self) -> int:
        return self.theiler_w if self.theiler_mask_width is None else self.theiler_mask_width

    def to_dict(self) -> dict[str, Any]:
        return {
            "bins": list(self.bins) if isinstance(self.bins, tuple) else self.bins,
            "density_range": (
                [list(pair) for pair in self.density_range] if self.density_range else None
            ),
            "density_dims": list(self.density_dims) if self.density_dims else None,
            "theiler_w": self.theiler_w,
            "z_min": self.z_min,
            "z_max": self.z_max,
            "target_rate": self.target_rate,
            "theiler_mask_width": self.theiler_mask_width,
            "n_radii": self.n_radii,
            "min_window": self.min_window,
            "embedding": self.embedding,
            "embed_m": self.embed_m,
            "embed_tau": self.embed_tau,
            "resolution": self.resolution,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "diagnostics") -> "DiagnosticsSettings":
        validator = DiagnosticsValidator(path)
        values = validator.validate({} if data is None else data, DIAGNOSTICS_DEFAULTS)

        bins = values["bins"]
        if isinstance(bins, list):
            if not 1 <= len(bins) <= 2 or not all(
                isinstance(b, int) and not isinstance(b, bool) and b >= 1 for b in bins
            ):
                validator.fail("bins", "must be a positive integer or a list of 1 or 2 of them")
            values["bins"] = tuple(bins)

        density_range = values["density_range"]
        if density_range is not None:
            pairs = []
            for index, pair in enumerate(density_range):
                if (
                    not isinstance(pair, list | tuple)
                    or len(pair) != 2
                    or not all(_is_real(v) for v in pair)
                    or pair[0] >= pair[1]
                ):
                    validator.fail(f"density_range[{index}]", "must be a finite [lo, hi] pair with lo < hi")
                pairs.append((float(pair[0]), float(pair[1])))
            if not 1 <= len(pairs) <= 2:
                validator.fail("density_range", "must hold one [lo, hi] pair per dimension (1 or 2)")
            values["density_range"] = tuple(pairs)

        dims = values["density_dims"]
        if dims is not None:
            if (
                len(dims) != 2
                or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 0 for d in dims)
                or dims[0] == dims[1]
            ):
                validator.fail("density_dims", "must be two distinct non-negative column indices")
            values["density_dims"] = tuple(dims)

        if values["z_min"] >= values["z_max"]:
            validator.fail("z_min", f"must be less than z_max ({values['z_max']})")
        if values["min_window"] > values["n_radii"]:
            validator.fail("min_window", f"must not exceed n_radii ({values['n_radii']})")
        return cls(**values)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[Any, ...]

    def to_dict(self) -> dict[str, Any]:
        return {"parameter": self.parameter, "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: Any, simulation: SimConfig, path: str = "sweep") -> "SweepSpec":
        validator = SweepValidator(path)
        values = validator.validate(data, {"values": None})
        parameter = values["parameter"]
        grid = values["values"]
        if grid is None:
            leaf = parameter.rsplit(".", 1)[-1]
            if leaf not in SWEEP_GRIDS:
                validator.fail("values", "is required when the parameter has no default grid")
            grid = list(SWEEP_GRIDS[leaf])
        if not grid:
            validator.fail("values", "must be a non-empty list")
        for index, value in enumerate(grid):
            if not isinstance(value, SCALAR_TYPES):
                validator.fail(f"values[{index}]", f"must be a scalar, got {type(value).__name__}")
        if len({json.dumps(v) for v in grid}) != len(grid):
            validator.fail("values", "must not contain duplicates")

        # Every grid value must produce a valid simulation config.
        for value in grid:
            patch_simulation(simulation, parameter, value)
        return cls(parameter=parameter, values=tuple(grid))


@dataclass(frozen=True)
class RunConfig:
    simulation: SimConfig
    diagnostics: DiagnosticsSettings = field(default_factory=DiagnosticsSettings)
    sweep: SweepSpec | None = None
    schema_version: int = SCHEMA_VERSION

    @property
    def config_hash(self) -> str:
        return self.simulation.config_hash

    def to_dict(self) -> dict[str, Any]:
        data = {
            "schema_version": self.schema_version,
            **self.simulation.to_dict(),
            "diagnostics": self.diagnostics.to_dict(),
        }
        if self.sweep is not None:
            data["sweep"] = self.sweep.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Any) -> "RunConfig":
        if not isinstance(data, Mapping):
            raise ConfigurationError(f"config must be a mapping, got {type(data).__name__}")
        version = data.get("schema_version", SCHEMA_VERSION)
        if isinstance(version, bool) or version != SCHEMA_VERSION:
            raise ConfigurationError(
                f"schema_version must be {SCHEMA_VERSION}, got {version!r}", key="schema_version"
            )
        sections = {"schema_version", "diagnostics", "sweep"}
        simulation = SimConfig.from_dict({k: v for k, v in data.items() if k not in sections})
        diagnostics = DiagnosticsSettings.from_dict(data.get("diagnostics"))
        sweep = data.get("sweep")
        return cls(
            simulation=simulation,
            diagnostics=diagnostics,
            sweep=SweepSpec.from_dict(sweep, simulation) if sweep is not None else None,
        )


def _split_path(parameter: str) -> list[str]:
    parts = parameter.split(".")
    if not parameter or any(not part for part in parts):
        raise ConfigurationError(f"sweep.parameter {parameter!r} is not a dotted key path", key="sweep.parameter")
    return parts


def _patch(node: Any, parts: list[str], value: Any, parameter: str) -> None:
    head, rest = parts[0], parts[1:]
    if isinstance(node, list):
        if head == "*":
            indices = range(len(node))
        elif head.isdigit() and int(head) < len(node):
            indices = [int(head)]
        else:
            raise ConfigurationError(
                f"sweep.parameter {parameter!r}: {head!r} is not a valid list index",
                key="sweep.parameter",
            )
        for index in indices:
            _patch_child(node, index, rest, value, parameter)
        return
    if not isinstance(node, dict) or head not in node:
        raise ConfigurationError(
            f"sweep.parameter {parameter!r} does not resolve to a config field",
            key="sweep.parameter",
        )
    _patch_child(node, head, rest, value, parameter)


def _patch_child(node: Any, key: Any, rest: list[str], value: Any, parameter: str) -> None:
    if rest:
        _patch(node[key], rest, value, parameter)
        return
    current = node[key]
    if isinstance(current, dict | list):
        raise ConfigurationError(
            f"sweep.parameter {parameter!r} must resolve to a scalar field", key="sweep.parameter"
        )
    node[key] = value


def patch_simulation(simulation: SimConfig, parameter: str, value: Any) -> SimConfig:
    """Return a new config with the dotted ``parameter`` set to ``value``; ``*`` matches every agent."""
    parts = _split_path(parameter)
    data = simulation.to_dict()
    if isinstance(data["game"], str):
        data["game"] = {"name": data["game"]}
    _patch(data, parts, value, parameter)
    return SimConfig.from_dict(data)


def parse_config_text(text: str, suffix: str = ".json") -> RunConfig:
    if suffix.lower() in {".yaml", ".yml"}:
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML: {e}") from e
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Invalid JSON: {e}") from e
    return RunConfig.from_dict(data)


def load_config(path: str | Path) -> RunConfig:
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigurationError(f"Config file not found: {config_path}", key="config")
    try:
        text = config_path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Config file {config_path} could not be read: {e}") from e
    return parse_config_text(text, config_path.suffix)


def dump_config(config: RunConfig) -> str:
    return canonical_json(config.to_dict())


def save_config(config: RunConfig, path: str | Path) -> Path:
    return write_file(path, dump_config(config))
