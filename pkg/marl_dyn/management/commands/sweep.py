from django.core.management.base import CommandError

from marl_dyn.management.base import EXIT_RUNTIME, MarlDynCommand
from marl_dyn.utils.commons.report_io import write_sweep
from marl_dyn.utils.exceptions import ConfigurationError
from marl_dyn.utils.sweep import run_sweep


class Command(MarlDynCommand):
    help = "Run and diagnose one ensemble per value of a swept config parameter"
    config_required = True

    def add_command_arguments(self, parser):
        parser.add_argument(
            "--workers",
            type=int,
            default=None,
            help="Worker processes (capped by MARL_DYN_WORKERS)",
        )

    def run(self, **options):
        config = self.load_run_config(options)
        if config.sweep is None:
            raise ConfigurationError("config has no sweep section", key="sweep")
        out_dir = self.out_path(options, "sweep")

        self.note(
            f"🚀 Sweeping {config.sweep.parameter} over {len(config.sweep.values)} value(s) "
            f"x {config.simulation.n_runs} run(s)..."
        )
        result = run_sweep(config, workers=self.workers(options))
        write_sweep(out_dir, result, config)

        if result.n_failed == len(result.points):
            raise CommandError(f"every sweep point failed; see {out_dir}", returncode=EXIT_RUNTIME)
        if result.n_failed:
            self.stdout.write(self.style.WARNING(f"⚠️ {result.n_failed} sweep point(s) failed"))
        self.success(f"Wrote sweep over {result.parameter} to {out_dir}")
