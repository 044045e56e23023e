import yaml

from marl_dyn.conf.run_config import save_config
from marl_dyn.management.base import MarlDynCommand


class Command(MarlDynCommand):
    help = "Print a config with every default filled in"
    config_required = True

    def run(self, **options):
        config = self.load_run_config(options)
        self.stdout.write(f"# config-hash: {config.config_hash}")
        self.stdout.write(yaml.safe_dump(config.to_dict(), sort_keys=True, default_flow_style=False), ending="")
        if options.get("out"):
            path = save_config(config, options["out"])
            self.success(f"Wrote resolved config to {path}")
