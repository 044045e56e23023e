import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from marl_dyn.conf.run_config import RunConfig, load_config
from marl_dyn.conf.settings import marl_dyn_settings
from marl_dyn.utils.exceptions import (
    ConfigurationError,
    ContractViolationError,
    DegenerateTraceError,
    DivergenceError,
    MixedTraceError,
    PlotInputError,
)

VALIDATION_ERRORS = (ConfigurationError, ContractViolationError, PlotInputError, MixedTraceError)
RUNTIME_ERRORS = (DivergenceError, DegenerateTraceError, OSError)

EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class MarlDynCommand(BaseCommand):
    """
    Shared surface for every ``marl-dyn`` subcommand.

    Subclasses implement ``run(**options)``. Validation failures leave with
    exit code 1 and runtime failures (divergence, I/O) with exit code 2.
    """

    requires_system_checks = []
    config_required = False

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # Usage errors surface as CommandError so the CLI maps them to exit code 1.
        parser.called_from_command_line = False
        return parser

    def add_arguments(self, parser):
        parser.add_argument(
            "--config",
            required=self.config_required,
            help="Run config (JSON or YAML)",
        )
        parser.add_argument("--out", default=None, help="Output path (defaults under the OUTPUT_DIR setting)")
        parser.add_argument("--seed", type=int, default=None, help="Override the config seed")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        self._verbosity = options.get("verbosity", 1)
        if self._verbosity >= 2:
            logging.getLogger("marl_dyn").setLevel(logging.DEBUG)
        try:
            self.run(**options)
        except VALIDATION_ERRORS as e:
            raise CommandError(str(e), returncode=EXIT_VALIDATION) from e
        except RUNTIME_ERRORS as e:
            raise CommandError(str(e), returncode=EXIT_RUNTIME) from e

    def run(self, **options):
        raise NotImplementedError("subclasses of MarlDynCommand must provide a run() method")

    def load_run_config(self, options) -> RunConfig:
        config = load_config(options["config"])
        seed = options.get("seed")
        if seed is not None:
            if seed < 0:
                raise ConfigurationError(f"seed must be >= 0, got {seed}", key="seed")
            config = RunConfig(
                simulation=config.simulation.with_seed(seed),
                diagnostics=config.diagnostics,
                sweep=config.sweep,
            )
        return config

    def out_path(self, options, default_name: str | None = None) -> Path:
        out = options.get("out")
        if out:
            return Path(out)
        base = Path(marl_dyn_settings.OUTPUT_DIR)
        return base / default_name if default_name else base

    def workers(self, options) -> int:
        cap = marl_dyn_settings.worker_count()
        requested = options.get("workers")
        if requested is None:
            return cap
        if requested < 1:
            raise ConfigurationError(f"workers must be >= 1, got {requested}", key="workers")
        return min(requested, cap)

    def success(self, message: str) -> None:
        self.stdout.write(self.style.SUCCESS(f"✅ {message}"))

    def note(self, message: str) -> None:
        if self.verbosity_level >= 1:
            self.stdout.write(message)

    @property
    def verbosity_level(self) -> int:
        return getattr(self, "_verbosity", 1)
