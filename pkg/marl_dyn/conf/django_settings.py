"""
Minimal Django settings used by the ``marl-dyn`` console script.

Projects embedding marl_dyn add it to INSTALLED_APPS and configure ``MARL_DYN`` instead.
"""

import os

SECRET_KEY = os.environ.get("MARL_DYN_SECRET_KEY", "marl-dyn-local")  # noqa: S105

DEBUG = False

INSTALLED_APPS = ["marl_dyn"]

DATABASES: dict = {}

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {},
    },
]

USE_TZ = True

MARL_DYN: dict = {}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "marl_dyn": {
            "handlers": ["console"],
            "level": os.environ.get("MARL_DYN_LOG_LEVEL", "WARNING"),
            "propagate": False,
        },
    },
}
