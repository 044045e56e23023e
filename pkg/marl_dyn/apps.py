import logging

from django.apps import AppConfig

logger = logging.getLogger(__name__)


class MarlDynConfig(AppConfig):
    name = "marl_dyn"
    verbose_name = "marl-dyn"

    def ready(self):
        from marl_dyn.conf.settings import marl_dyn_settings

        unknown = marl_dyn_settings.unknown_keys()
        if unknown:
            logger.warning("Ignoring unknown MARL_DYN settings: %s", ", ".join(unknown))
