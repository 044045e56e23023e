from pathlib import Path

from marl_dyn.management.base import MarlDynCommand
from marl_dyn.utils.exceptions import ConfigurationError
from marl_dyn.utils.plot_generator import PlotKind, PlotSpec, render_plot


def parse_inputs(values: list[str]) -> dict[str, Path]:
    inputs = {}
    for value in values:
        name, sep, path = value.partition("=")
        if not sep or not name or not path:
            raise ConfigurationError(f"--input expects name=path, got {value!r}", key="input")
        if name in inputs:
            raise ConfigurationError(f"input '{name}' given more than once", key="input")
        inputs[name] = Path(path)
    return inputs


class Command(MarlDynCommand):
    help = "Render a trace, replicator field or diagnostic table to SVG"

    def add_command_arguments(self, parser):
        parser.add_argument("--kind", required=True, choices=[kind.value for kind in PlotKind])
        parser.add_argument(
            "--input",
            action="append",
            default=[],
            metavar="NAME=PATH",
            help="Named input, e.g. trajectory=traces/run_000.csv or field=field.csv",
        )
        parser.add_argument("--x-range", type=float, nargs=2, default=None, metavar=("LOW", "HIGH"))
        parser.add_argument("--y-range", type=float, nargs=2, default=None, metavar=("LOW", "HIGH"))
        parser.add_argument("--columns", nargs=2, default=None, metavar=("X", "Y"))
        parser.add_argument("--title", default="")
        parser.add_argument("--config-hash", default=None, help="Hash to embed instead of the sidecar's")

    def run(self, **options):
        kind = PlotKind(options["kind"])
        spec = PlotSpec(
            kind=kind,
            inputs=parse_inputs(options["input"]),
            output=self.out_path(options, f"{kind.value}.svg"),
            x_range=options["x_range"],
            y_range=options["y_range"],
            title=options["title"],
            columns=tuple(options["columns"]) if options["columns"] else None,
            config_hash=options["config_hash"],
        )
        path = render_plot(spec)
        self.success(f"Wrote {kind.value} plot to {path}")
