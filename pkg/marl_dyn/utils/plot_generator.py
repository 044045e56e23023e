"""
SVG rendering for traces, replicator fields and diagnostic tables.

Every plot is a Django template under ``marl_dyn/plots/``; this module only
reads the CSV/PGM inputs, maps data to canvas coordinates and fills the
template context. Outputs are written atomically and carry the config hash of
the run that produced their inputs.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from django.template.loader import render_to_string
from scipy.stats import linregress

from marl_dyn.conf.settings import marl_dyn_settings
from marl_dyn.utils.commons.file_utils import load_json_data, write_file
from marl_dyn.utils.exceptions import ConfigurationError, PlotInputError

logger = logging.getLogger(__name__)

MARGIN_LEFT = 60.0
MARGIN_RIGHT = 20.0
MARGIN_TOP = 30.0
MARGIN_BOTTOM = 45.0
PANEL_GAP = 40.0
MARKER_RADIUS = 4.0
STAR_RADIUS = 7.0
RECURRENT_FILL = "#000000"
MASKED_FILL = "#808080"

SIDECAR_NAMES = ("report.json", "ensemble.json", "sweep_report.json")


class PlotKind(Enum):
    PHASE_PORTRAIT = "phase_portrait"
    DENSITY = "density"
    RECURRENCE = "recurrence"
    SENSITIVITY = "sensitivity"
    DIVERGENCE_CURVE = "divergence_curve"
    CORRELATION_CURVE = "correlation_curve"

    def __str__(self):
        return self.value


REQUIRED_INPUTS: dict[PlotKind, tuple[str, ...]] = {
    PlotKind.PHASE_PORTRAIT: ("trajectory",),
    PlotKind.DENSITY: ("density",),
    PlotKind.RECURRENCE: ("recurrence",),
    PlotKind.SENSITIVITY: ("sensitivity",),
    PlotKind.DIVERGENCE_CURVE: ("curve",),
    PlotKind.CORRELATION_CURVE: ("curve",),
}
OPTIONAL_INPUTS: dict[PlotKind, tuple[str, ...]] = {PlotKind.PHASE_PORTRAIT: ("field",)}


def _check_range(name: str, value) -> tuple[float, float] | None:
    if value is None:
        return None
    try:
        low, high = (float(v) for v in value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"{name} must be two numbers", key=name) from e
    if not (math.isfinite(low) and math.isfinite(high)):
        raise ConfigurationError(f"{name} must be finite, got [{low}, {high}]", key=name)
    if low >= high:
        raise ConfigurationError(f"{name} must satisfy low < high, got [{low}, {high}]", key=name)
    return low, high


@dataclass(frozen=True)
class PlotSpec:
    kind: PlotKind
    inputs: dict[str, Path]
    output: Path
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    title: str = ""
    columns: tuple[str, str] | None = None
    config_hash: str | None = None

    def __post_init__(self):
        try:
            kind = PlotKind(str(self.kind))
        except ValueError as e:
            allowed = ", ".join(k.value for k in PlotKind)
            raise ConfigurationError(f"unknown plot kind '{self.kind}' (allowed: {allowed})", key="kind") from e
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "inputs", {name: Path(path) for name, path in self.inputs.items()})
        object.__setattr__(self, "output", Path(self.output))
        object.__setattr__(self, "x_range", _check_range("x_range", self.x_range))
        object.__setattr__(self, "y_range", _check_range("y_range", self.y_range))

        allowed = REQUIRED_INPUTS[kind] + OPTIONAL_INPUTS.get(kind, ())
        for name in self.inputs:
            if name not in allowed:
                raise ConfigurationError(
                    f"input '{name}' is not used by {kind} plots (allowed: {', '.join(allowed)})", key="input"
                )
        for name in REQUIRED_INPUTS[kind]:
            if name not in self.inputs:
                raise ConfigurationError(f"{kind} plots require the '{name}' input", key="input")


@dataclass(frozen=True)
class Frame:
    """Rectangular plot area and the data window it shows."""

    left: float
    top: float
    width: float
    height: float
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    x_label: str = ""
    y_label: str = ""

    @property
    def right(self) -> float:
        return self.left + self.width

    @property
    def bottom(self) -> float:
        return self.top + self.height

    @property
    def centre_x(self) -> float:
        return self.left + self.width / 2

    @property
    def centre_y(self) -> float:
        return self.top + self.height / 2

    @property
    def tick_x(self) -> float:
        return self.left - 4

    @property
    def tick_y(self) -> float:
        return self.bottom + 14

    @property
    def top_label(self) -> float:
        return self.top + 10

    @property
    def x_label_y(self) -> float:
        return self.bottom + 30

    @property
    def y_label_x(self) -> float:
        return self.left - 40

    @property
    def x_low(self) -> float:
        return self.x_range[0]

    @property
    def x_high(self) -> float:
        return self.x_range[1]

    @property
    def y_low(self) -> float:
        return self.y_range[0]

    @property
    def y_high(self) -> float:
        return self.y_range[1]

    def px(self, x: float) -> float:
        low, high = self.x_range
        return self.left + (x - low) / (high - low) * self.width

    def py(self, y: float) -> float:
        low, high = self.y_range
        return self.top + (1.0 - (y - low) / (high - low)) * self.height

    def point(self, x: float, y: float) -> tuple[float, float]:
        return self.px(x), self.py(y)


@dataclass
class Table:
    path: Path
    header: list[str]
    rows: list[list[str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def has(self, column: str) -> bool:
        return column in self.header

    def require(self, *columns: str) -> None:
        for column in columns:
            if column not in self.header:
                raise PlotInputError(f"missing column '{column}'", column=column, path=str(self.path))

    def numbers(self, column: str) -> np.ndarray:
        """Column as floats; blank cells become NaN."""
        self.require(column)
        index = self.header.index(column)
        values = []
        for row in self.rows:
            cell = row[index].strip() if index < len(row) else ""
            try:
                values.append(float(cell) if cell else math.nan)
            except ValueError as e:
                raise PlotInputError(
                    f"column '{column}' holds a non-numeric value {cell!r}", column=column, path=str(self.path)
                ) from e
        return np.asarray(values, dtype=np.float64)


def read_table(path: Path) -> Table:
    if not path.is_file():
        raise PlotInputError("input file not found", path=str(path))
    with path.open("r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise PlotInputError("input file is empty", path=str(path))
        return Table(path=path, header=[name.strip() for name in header], rows=[row for row in reader if row])


def read_pgm(path: Path) -> tuple[np.ndarray, list[str]]:
    """Pixels and header comments of a binary 8-bit PGM."""
    if not path.is_file():
        raise PlotInputError("input file not found", path=str(path))
    data = path.read_bytes()
    tokens, comments, pos = [], [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise PlotInputError("truncated PGM header", path=str(path))
        if data[pos : pos + 1] == b"#":
            end = data.find(b"\n", pos)
            end = len(data) if end < 0 else end
            comments.append(data[pos + 1 : end].decode("ascii", errors="replace").strip())
            pos = end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise PlotInputError(f"expected a binary PGM (P5), got {tokens[0]!r}", path=str(path))
    try:
        width, height, max_value = (int(token) for token in tokens[1:])
    except ValueError as e:
        raise PlotInputError("malformed PGM header", path=str(path)) from e
    if max_value > 255:
        raise PlotInputError("only 8-bit PGM images are supported", path=str(path))
    pos += 1
    if len(data) - pos < width * height:
        raise PlotInputError("PGM pixel data is truncated", path=str(path))
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos).reshape(height, width)
    return pixels, comments


def _hash_from_comments(comments: list[str]) -> str | None:
    for comment in comments:
        if comment.startswith("config-hash:"):
            return comment.split(":", 1)[1].strip() or None
    return None


def resolve_config_hash(paths: list[Path]) -> str:
    """Config hash from the JSON sidecar next to the first input that has one."""
    for path in paths:
        candidates = [path.with_suffix(".json"), *(path.parent / name for name in SIDECAR_NAMES)]
        for candidate in candidates:
            if candidate == path or not candidate.is_file():
                continue
            try:
                data = load_json_data(candidate)
            except ValueError:
                continue
            if isinstance(data, dict):
                value = data.get("config_hash") or data.get("base_config_hash")
                if value:
                    return str(value)
    return "unknown"


def _padded(low: float, high: float) -> tuple[float, float]:
    if high > low:
        return low, high
    return low - 0.5, high + 0.5


def _data_range(*arrays: np.ndarray) -> tuple[float, float]:
    values = np.concatenate([np.ravel(a) for a in arrays if np.size(a)])
    values = values[np.isfinite(values)]
    if values.size == 0:
        return 0.0, 1.0
    return _padded(float(values.min()), float(values.max()))


def _unit_or_data_range(*arrays: np.ndarray) -> tuple[float, float]:
    low, high = _data_range(*arrays)
    if 0.0 <= low and high <= 1.0:
        return 0.0, 1.0
    return low, high


def _plot_area(width: int, height: int) -> tuple[float, float, float, float]:
    return MARGIN_LEFT, MARGIN_TOP, width - MARGIN_LEFT - MARGIN_RIGHT, height - MARGIN_TOP - MARGIN_BOTTOM


def _trajectory_columns(spec: PlotSpec, table: Table) -> tuple[str, str]:
    if spec.columns is not None:
        return spec.columns
    return ("x", "y") if table.has("x") else ("a0_0", "a1_0")


def _arrows(frame: Frame, field_table: Table) -> list[tuple[float, float, float, float]]:
    field_table.require("x", "y", "dx", "dy")
    xs, ys = field_table.numbers("x"), field_table.numbers("y")
    # Directions in canvas units, since the two axes can have different scales.
    dxs = field_table.numbers("dx") * frame.width / (frame.x_high - frame.x_low)
    dys = -field_table.numbers("dy") * frame.height / (frame.y_high - frame.y_low)
    magnitudes = np.hypot(dxs, dys)
    largest = float(np.nanmax(magnitudes)) if magnitudes.size else 0.0
    if largest <= 0.0 or not math.isfinite(largest):
        return []
    resolution = max(2, round(math.sqrt(len(xs))))
    cell = min(frame.width, frame.height) / (resolution - 1)
    arrows = []
    for x, y, dx, dy, magnitude in zip(xs, ys, dxs, dys, magnitudes, strict=True):
        if not magnitude > largest * 1e-9:
            continue
        length = 0.8 * cell * magnitude / largest
        x0, y0 = frame.point(x, y)
        arrows.append((x0, y0, x0 + dx / magnitude * length, y0 + dy / magnitude * length))
    return arrows


def _phase_portrait(spec: PlotSpec, width: int, height: int) -> tuple[str, dict[str, Any]]:
    table = read_table(spec.inputs["trajectory"])
    x_column, y_column = _trajectory_columns(spec, table)
    table.require(x_column, y_column)
    if len(table) == 0:
        raise PlotInputError("trajectory has no rows", path=str(table.path))
    xs, ys = table.numbers(x_column), table.numbers(y_column)
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise PlotInputError("trajectory holds non-finite values", path=str(table.path))

    field_table = read_table(spec.inputs["field"]) if "field" in spec.inputs else None
    field_x = field_table.numbers("x") if field_table is not None else np.empty(0)
    field_y = field_table.numbers("y") if field_table is not None else np.empty(0)

    left, top, plot_width, plot_height = _plot_area(width, height)
    side = min(plot_width, plot_height)
    frame = Frame(
        left=left,
        top=top,
        width=side,
        height=side,
        x_range=spec.x_range or _unit_or_data_range(xs, field_x),
        y_range=spec.y_range or _unit_or_data_range(ys, field_y),
        x_label=x_column,
        y_label=y_column,
    )
    trajectory = [frame.point(x, y) for x, y in zip(xs, ys, strict=True)]
    return "phase_portrait.svg", {
        "frame": frame,
        "arrows": _arrows(frame, field_table) if field_table is not None else [],
        "trajectory": trajectory,
        "start": trajectory[0],
        "end": trajectory[-1],
        "marker_radius": MARKER_RADIUS,
        "star_radius": STAR_RADIUS,
    }


def _density(spec: PlotSpec, width: int, height: int) -> tuple[str, dict[str, Any]]:
    table = read_table(spec.inputs["density"])
    table.require("lo0", "hi0", "density")
    if len(table) == 0:
        raise PlotInputError("density table has no bins", path=str(table.path))
    lo0, hi0, density = table.numbers("lo0"), table.numbers("hi0"), table.numbers("density")
    peak = float(np.nanmax(density))
    left, top, plot_width, plot_height = _plot_area(width, height)

    if table.has("lo1"):
        table.require("hi1")
        lo1, hi1 = table.numbers("lo1"), table.numbers("hi1")
        side = min(plot_width, plot_height)
        frame = Frame(
            left, top, side, side,
            x_range=spec.x_range or _padded(float(lo0.min()), float(hi0.max())),
            y_range=spec.y_range or _padded(float(lo1.min()), float(hi1.max())),
            x_label="coordinate 0",
            y_label="coordinate 1",
        )
        boxes = zip(lo0, lo1, hi0, hi1, density, strict=True)
    else:
        frame = Frame(
            left, top, plot_width, plot_height,
            x_range=spec.x_range or _padded(float(lo0.min()), float(hi0.max())),
            y_range=spec.y_range or (0.0, peak * 1.05 if peak > 0 else 1.0),
            x_label="coordinate 0",
            y_label="density",
        )
        boxes = ((a, 0.0, b, d, d if peak > 0 else 0.0) for a, b, d in zip(lo0, hi0, density, strict=True))

    cells = []
    for x_low, y_low, x_high, y_high, value in boxes:
        if not value > 0.0:
            continue
        x0, y0 = frame.point(x_low, y_high)
        x1, y1 = frame.point(x_high, y_low)
        cells.append(
            {"x": x0, "y": y0, "width": x1 - x0, "height": y1 - y0, "opacity": value / peak if peak > 0 else 0.0}
        )
    return "density.svg", {"frame": frame, "cells": cells, "max_density": peak}


def _recurrence(spec: PlotSpec, width: int, height: int) -> tuple[str, dict[str, Any]]:
    pixels, _ = read_pgm(spec.inputs["recurrence"])
    n_rows, n_cols = pixels.shape
    left, top, plot_width, plot_height = _plot_area(width, height)
    side = min(plot_width, plot_height)
    cell = side / max(n_rows, n_cols)
    frame = Frame(
        left, top, cell * n_cols, cell * n_rows,
        x_range=(0.0, float(n_cols - 1)),
        y_range=(float(n_rows - 1), 0.0),
        x_label="time index j",
        y_label="time index i",
    )
    runs = []
    for i, row in enumerate(pixels):
        # Run-length encode each row; white cells are left as background.
        boundaries = np.flatnonzero(np.diff(row.astype(np.int16))) + 1
        starts = np.concatenate([[0], boundaries])
        ends = np.concatenate([boundaries, [n_cols]])
        for start, end in zip(starts, ends, strict=True):
            value = int(row[start])
            if value == 0:
                continue
            runs.append(
                {
                    "x": left + start * cell,
                    "y": top + i * cell,
                    "width": (end - start) * cell,
                    "fill": MASKED_FILL if value < 255 else RECURRENT_FILL,
                }
            )
    return "recurrence.svg", {"frame": frame, "runs": runs, "cell": cell}


def _line_panel(
    frame_box: tuple[float, float, float, float],
    xs: np.ndarray,
    ys: np.ndarray,
    x_range: tuple[float, float] | None,
    y_range: tuple[float, float] | None,
    labels: tuple[str, str],
    sds: np.ndarray | None = None,
    window: np.ndarray | None = None,
) -> dict[str, Any]:
    finite = np.isfinite(xs) & np.isfinite(ys)
    xs, ys = xs[finite], ys[finite]
    sds = np.nan_to_num(sds[finite]) if sds is not None else np.zeros_like(ys)
    window = window[finite].astype(bool) if window is not None else None

    frame = Frame(
        *frame_box,
        x_range=x_range or _data_range(xs),
        y_range=y_range or _data_range(ys - sds, ys + sds),
        x_label=labels[0],
        y_label=labels[1],
    )
    panel: dict[str, Any] = {
        "frame": frame,
        "line": [frame.point(x, y) for x, y in zip(xs, ys, strict=True)],
        "error_bars": [
            (frame.px(x), frame.py(y - sd), frame.py(y + sd))
            for x, y, sd in zip(xs, ys, sds, strict=True)
            if sd > 0.0
        ],
        "window": None,
        "fit": None,
        "slope": None,
    }
    if window is not None and np.count_nonzero(window) >= 2:
        wx, wy = xs[window], ys[window]
        fit = linregress(wx, wy)
        x0, x1 = float(wx.min()), float(wx.max())
        panel["window"] = (frame.px(x0), frame.px(x1) - frame.px(x0))
        panel["fit"] = (*frame.point(x0, fit.intercept + fit.slope * x0), *frame.point(x1, fit.intercept + fit.slope * x1))
        panel["slope"] = float(fit.slope)
    return panel


def _sensitivity(spec: PlotSpec, width: int, height: int) -> tuple[str, dict[str, Any]]:
    table = read_table(spec.inputs["sensitivity"])
    table.require("value", "lambda_mean", "lambda_sd", "d2_mean", "d2_sd")
    values = table.numbers("value")
    lambda_mean, d2_mean = table.numbers("lambda_mean"), table.numbers("d2_mean")
    if not np.any(np.isfinite(lambda_mean) | np.isfinite(d2_mean)):
        raise PlotInputError("no sweep point has a finite result", column="lambda_mean", path=str(table.path))

    left, top, plot_width, plot_height = _plot_area(width, height)
    panel_height = (plot_height - PANEL_GAP) / 2
    panels = [
        _line_panel(
            (left, top + offset, plot_width, panel_height),
            values,
            means,
            spec.x_range,
            None,
            ("value", label),
            sds=table.numbers(sd_column),
        )
        for offset, means, sd_column, label in (
            (0.0, lambda_mean, "lambda_sd", "lambda_max"),
            (panel_height + PANEL_GAP, d2_mean, "d2_sd", "D2"),
        )
    ]
    return "panels.svg", {"panels": panels}


def _divergence_curve(spec: PlotSpec, width: int, height: int) -> tuple[str, dict[str, Any]]:
    table = read_table(spec.inputs["curve"])
    table.require("z", "log_divergence")
    if len(table) == 0:
        raise PlotInputError("divergence curve has no rows", path=str(table.path))
    window = table.numbers("in_window") if table.has("in_window") else None
    panel = _line_panel(
        _plot_area(width, height),
        table.numbers("z"),
        table.numbers("log_divergence"),
        spec.x_range,
        spec.y_range,
        ("z (recorded rows)", "mean log separation"),
        window=window,
    )
    return "panels.svg", {"panels": [panel]}


def _correlation_curve(spec: PlotSpec, width: int, height: int) -> tuple[str, dict[str, Any]]:
    table = read_table(spec.inputs["curve"])
    table.require("radius", "correlation_sum")
    if len(table) == 0:
        raise PlotInputError("correlation curve has no rows", path=str(table.path))
    radii, sums = table.numbers("radius"), table.numbers("correlation_sum")
    positive = (radii > 0) & (sums > 0)
    window = table.numbers("in_window")[positive] if table.has("in_window") else None
    panel = _line_panel(
        _plot_area(width, height),
        np.log10(radii[positive]),
        np.log10(sums[positive]),
        spec.x_range,
        spec.y_range,
        ("log10 r", "log10 C(r)"),
        window=window,
    )
    return "panels.svg", {"panels": [panel]}


RENDERERS = {
    PlotKind.PHASE_PORTRAIT: _phase_portrait,
    PlotKind.DENSITY: _density,
    PlotKind.RECURRENCE: _recurrence,
    PlotKind.SENSITIVITY: _sensitivity,
    PlotKind.DIVERGENCE_CURVE: _divergence_curve,
    PlotKind.CORRELATION_CURVE: _correlation_curve,
}


def render_plot(spec: PlotSpec) -> Path:
    """Render ``spec`` to its output path; nothing is written if an input is unusable."""
    if spec.kind is PlotKind.RECURRENCE and spec.output.suffix.lower() == ".pgm":
        # Pass-through after validating the image.
        source = spec.inputs["recurrence"]
        read_pgm(source)
        return write_file(spec.output, source.read_bytes())

    width, height = marl_dyn_settings.PLOT_WIDTH, marl_dyn_settings.PLOT_HEIGHT
    template_name, context = RENDERERS[spec.kind](spec, width, height)

    config_hash = spec.config_hash
    if config_hash is None and spec.kind is PlotKind.RECURRENCE:
        config_hash = _hash_from_comments(read_pgm(spec.inputs["recurrence"])[1])
    if config_hash is None:
        config_hash = resolve_config_hash(list(spec.inputs.values()))

    context.update(
        {
            "kind": spec.kind.value,
            "title": spec.title,
            "title_x": width / 2,
            "width": width,
            "height": height,
            "config_hash": config_hash,
        }
    )
    svg = render_to_string(f"marl_dyn/plots/{template_name}", context)
    logger.debug("Rendered %s plot to %s", spec.kind, spec.output)
    return write_file(spec.output, svg)
