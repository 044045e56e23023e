"""``marl-dyn`` console script: dispatches to the app's management commands."""

import os
import sys

import django
from django.core.management import load_command_class
from django.core.management.base import CommandError

SUBCOMMANDS = ("simulate", "diagnose", "sweep", "replicator", "plot", "describe")
PROG = "marl-dyn"


def usage() -> str:
    return (
        f"usage: {PROG} <subcommand> [options]\n\n"
        f"subcommands: {', '.join(SUBCOMMANDS)}\n"
        f"Run '{PROG} <subcommand> --help' for the options of one subcommand.\n"
    )


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in SUBCOMMANDS:
        if argv and argv[0] not in {"-h", "--help"}:
            sys.stderr.write(f"{PROG}: unknown subcommand '{argv[0]}'\n")
        sys.stderr.write(usage())
        return 0 if argv and argv[0] in {"-h", "--help"} else 1

    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "marl_dyn.conf.django_settings")
    django.setup()

    name = argv[0]
    command = load_command_class("marl_dyn", name)
    try:
        command.run_from_argv([PROG, name, *argv[1:]])
    except CommandError as e:
        # Raised by the argument parser for usage errors.
        sys.stderr.write(f"{e}\n")
        command.create_parser(PROG, name).print_usage(sys.stderr)
        return 1
    except SystemExit as e:
        code = e.code
        return code if isinstance(code, int) else (0 if code is None else 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
