from pathlib import Path

from marl_dyn.conf.settings import marl_dyn_settings
from marl_dyn.management.base import MarlDynCommand
from marl_dyn.utils.commons.report_io import REPORT_NAME, write_diagnostics
from marl_dyn.utils.commons.trace_io import load_traces
from marl_dyn.utils.diagnostics.report import diagnose
from marl_dyn.utils.exceptions import ConfigurationError


def _describe(value) -> str:
    return "n/a" if value is None else f"{value:.6g}"


class Command(MarlDynCommand):
    help = "Compute density, covariance, Lyapunov, correlation-dimension and recurrence diagnostics"

    def add_command_arguments(self, parser):
        parser.add_argument("--traces", required=True, help="Directory written by `simulate`")
        parser.add_argument(
            "--force",
            action="store_true",
            default=marl_dyn_settings.FORCE_MIXED_TRACES,
            help="Diagnose traces even when they come from different configs",
        )

    def run(self, **options):
        traces, manifest_config = load_traces(options["traces"], force=options["force"])
        if options.get("config"):
            config = self.load_run_config(options)
        elif manifest_config is not None:
            config = manifest_config
        else:
            raise ConfigurationError(
                "no config found: pass --config or point --traces at a directory written by simulate",
                key="config",
            )

        # --out may name the report file itself or the directory for every output.
        out = Path(options["out"]) if options.get("out") else Path(options["traces"])
        out_dir, report_name = (out.parent, out.name) if out.suffix == ".json" else (out, REPORT_NAME)

        report = diagnose(traces, config.diagnostics, config.simulation.n_burn)
        written = write_diagnostics(out_dir, report, report_name=report_name)

        for name, value in (
            ("frobenius_norm", report.frobenius_norm),
            ("lambda_max", report.lambda_stats[0]),
            ("d2", report.d2_stats[0]),
            ("recurrence_rate", report.recurrence_rate),
        ):
            self.note(f"📊 {name}: {_describe(value)}")
        for name, error in sorted(report.errors.items()):
            self.stdout.write(self.style.WARNING(f"⚠️ {name}: {error}"))
        self.success(f"Wrote {len(written)} diagnostic file(s) to {out_dir}")
