import os
from pathlib import Path
from typing import Any, ClassVar

from django.conf import settings

from marl_dyn.conf.defaults import DEFAULTS

WORKERS_ENV_VAR = "MARL_DYN_WORKERS"


def available_cpus() -> int:
    if hasattr(os, "sched_getaffinity"):
        return max(1, len(os.sched_getaffinity(0)))
    return max(1, os.cpu_count() or 1)


class MarlDynSettings:
    project_settings: ClassVar[dict[str, Any]] = {"PROJECT_NAME": "marl-dyn"}

    settings_types: ClassVar[dict[str, type | tuple[type, ...]]] = {
        "WORKERS": (int, type(None)),
        "OUTPUT_DIR": str,
        "PLOT_WIDTH": int,
        "PLOT_HEIGHT": int,
        "PLOT_PRECISION": int,
        "FORCE_MIXED_TRACES": bool,
    }

    settings_ranges: ClassVar[dict[str, tuple[int, int]]] = {
        "WORKERS": (1, 1024),
        "PLOT_WIDTH": (200, 4000),
        "PLOT_HEIGHT": (200, 4000),
        "PLOT_PRECISION": (1, 6),
    }

    path_settings = {"OUTPUT_DIR"}

    def __init__(self, user_settings_key="MARL_DYN", defaults=None):
        self.user_settings_key = user_settings_key
        self.defaults = defaults or {}

    @property
    def _user_settings(self) -> dict[str, Any]:
        # Read lazily so overrides made by tests and callers are honoured
        return getattr(settings, self.user_settings_key, {})

    def _validate_type(self, key: str, value: Any) -> None:
        """Validate the type of setting value."""
        if key not in self.settings_types:
            return

        expected_type = self.settings_types[key]
        expected = expected_type if isinstance(expected_type, tuple) else (expected_type,)
        # bool is an int subclass; only accept it where bool is declared
        if isinstance(value, bool) and bool not in expected:
            valid = False
        else:
            valid = isinstance(value, expected)
        if not valid:
            type_names = " | ".join(t.__name__ for t in expected)
            raise TypeError(
                f"MARL_DYN setting '{key}' must be of type {type_names}, "
                f"got {type(value).__name__} instead."
            )

    def _validate_range(self, key: str, value: Any) -> None:
        """Validate the range of a setting value."""
        if key in self.settings_ranges and value is not None:
            min_val, max_val = self.settings_ranges[key]
            if not min_val <= value <= max_val:
                raise ValueError(
                    f"MARL_DYN setting '{key}' must be between {min_val} and {max_val}, "
                    f"got {value} instead."
                )

    def _validate_dir(self, key: str, value: Any) -> None:
        if key not in self.path_settings or not isinstance(value, str):
            return

        if not value.strip():
            raise ValueError(
                f"MARL_DYN path setting '{key}' cannot be empty or contain only whitespace."
            )

        for part in Path(value).parts:
            if part in {"..", "~"}:
                raise ValueError(
                    f"MARL_DYN path setting '{key}' contains unsafe path component '{part}'."
                )

        invalid_chars = '<>:"|?*'
        if any(char in value for char in invalid_chars):
            raise ValueError(
                f"MARL_DYN path setting '{key}' contains invalid characters. "
                f"Avoid using: {invalid_chars}"
            )

    def _from_environment(self, key: str) -> Any:
        if key != "WORKERS":
            return None
        raw = os.environ.get(WORKERS_ENV_VAR)
        if raw is None or not raw.strip():
            return None
        try:
            return int(raw)
        except ValueError as e:
            raise ValueError(
                f"{WORKERS_ENV_VAR} must be a positive integer, got {raw!r} instead."
            ) from e

    def get(self, key):
        if key in self.project_settings:
            return self.project_settings[key]
        if key not in self.defaults:
            raise AttributeError(f"Invalid MARL_DYN setting: '{key}'")

        env_value = self._from_environment(key)
        if env_value is not None:
            value = env_value
        elif key in self._user_settings:
            # User-provided settings take precedence
            value = self._user_settings[key]
        else:
            value = self.defaults.get(key)

        self._validate_type(key, value)
        self._validate_range(key, value)
        self._validate_dir(key, value)

        return value

    def __getattr__(self, key):
        if key.startswith("_"):
            raise AttributeError(key)
        return self.get(key)

    def unknown_keys(self) -> list[str]:
        return sorted(set(self._user_settings) - set(self.defaults))

    def worker_count(self) -> int:
        """Resolved worker cap: environment, then settings, then available CPUs."""
        workers = self.get("WORKERS")
        return workers if workers is not None else available_cpus()


marl_dyn_settings = MarlDynSettings(defaults=DEFAULTS)
