"""
The hilfer-impulse console script: runs the package's management commands
without needing a Django project around them.
"""

import sys

import django
from django.conf import settings
from django.core.management import load_command_class

COMMANDS = {
    "simulate": "simulate",
    "reproduce-example": "reproduce_example",
    "check": "check",
    "selftest": "selftest",
}

USAGE = "usage: hilfer-impulse {" + ",".join(COMMANDS) + "} [options]"


def configure():
    if not settings.configured:
        settings.configure(INSTALLED_APPS=["hilfer_impulse"])
    django.setup()


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv if argv is None else argv)
    if len(argv) < 2:
        print(USAGE, file=sys.stderr)
        return 2
    if argv[1] in ("-h", "--help"):
        print(USAGE)
        return 0
    name = COMMANDS.get(argv[1])
    if name is None:
        print(f"Unknown command {argv[1]!r}\n{USAGE}", file=sys.stderr)
        return 2
    configure()
    # Exits with the command's return code on CommandError
    load_command_class("hilfer_impulse", name).run_from_argv(["hilfer-impulse", name, *argv[2:]])
    return 0
