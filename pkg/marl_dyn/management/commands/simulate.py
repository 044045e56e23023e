from marl_dyn.management.base import MarlDynCommand
from marl_dyn.utils.commons.trace_io import write_traces
from marl_dyn.utils.coupled_sim import run_ensemble
from marl_dyn.utils.exceptions import DivergenceError


class Command(MarlDynCommand):
    help = "Train an ensemble of coupled learners and write one trace per run"
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
        simulation = config.simulation
        out_dir = self.out_path(options, "traces")

        self.note(
            f"🚀 Simulating {simulation.n_runs} run(s) of {simulation.game.name} "
            f"for {simulation.n_steps} steps (config {config.config_hash})..."
        )
        traces = run_ensemble(simulation, workers=self.workers(options))
        write_traces(out_dir, traces, config)

        n_diverged = sum(trace.diverged for trace in traces)
        if n_diverged == len(traces):
            raise DivergenceError(f"all {len(traces)} ensemble members diverged", traces[0].divergence)
        if n_diverged:
            self.stdout.write(self.style.WARNING(f"⚠️ {n_diverged} of {len(traces)} runs diverged"))
        self.success(f"Wrote {len(traces)} trace(s) to {out_dir}")
