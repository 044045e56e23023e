from dataclasses import dataclass
from typing import Any


class MarlDynError(Exception):
    """Base exception for marl-dyn errors"""

    def _meta(self) -> dict[str, Any]:
        return {}

    def __str__(self) -> str:
        base = super().__str__()
        meta = ", ".join(f"{key}={value}" for key, value in self._meta().items() if value is not None)
        return f"{base} ({meta})" if meta else base


class ConfigurationError(MarlDynError):
    """Invalid configuration value, unknown key or incompatible mode."""

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(message)

    def _meta(self) -> dict[str, Any]:
        return {"key": self.key}


class ContractViolationError(MarlDynError, ValueError):
    """An operation was called outside its preconditions."""

    def __init__(self, message: str, operation: str | None = None):
        self.operation = operation
        super().__init__(message)

    def _meta(self) -> dict[str, Any]:
        return {"operation": self.operation}


@dataclass(frozen=True)
class DivergenceReport:
    update_index: int
    run_index: int | None
    agent_index: int | None
    value: float | None
    threshold: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "update_index": self.update_index,
            "run_index": self.run_index,
            "agent_index": self.agent_index,
            "value": self.value,
            "threshold": self.threshold,
        }


class DivergenceError(MarlDynError):
    """A learner produced a non-finite or over-threshold parameter."""

    def __init__(self, message: str, report: DivergenceReport):
        self.report = report
        super().__init__(message)

    @property
    def update_index(self) -> int:
        return self.report.update_index

    def _meta(self) -> dict[str, Any]:
        return {"update_index": self.report.update_index, "run_index": self.report.run_index}


class DegenerateTraceError(MarlDynError):
    """The trace carries no information for the requested estimator."""


class PlotInputError(MarlDynError):
    """A plot input file is missing, empty or lacks a required column."""

    def __init__(self, message: str, column: str | None = None, path: str | None = None):
        self.column = column
        self.path = path
        super().__init__(message)

    def _meta(self) -> dict[str, Any]:
        return {"column": self.column, "path": self.path}


class MixedTraceError(MarlDynError):
    """A trace directory holds traces produced by different configurations."""

    def __init__(self, message: str, hashes: tuple[str, ...] = ()):
        self.hashes = hashes
        super().__init__(message)

    def _meta(self) -> dict[str, Any]:
        return {"hashes": ",".join(self.hashes) if self.hashes else None}
