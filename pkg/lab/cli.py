"""
Programmatic entry point for the ``runlab`` command.

    from lab.cli import run
    code = run(["graph", "--k", "2", "--m", "3"])
"""

import json
import os
import sys
from typing import Optional, Sequence, TextIO

import django
from django.core.management import call_command
from django.core.management.base import CommandError

from lab.constants import EXIT_OK, EXIT_USAGE


def run(
    argv: Optional[Sequence[str]] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """
    Run one subcommand and return its exit code instead of exiting.

    Args:
        argv: Subcommand and options; defaults to sys.argv[1:]
        stdout: Report stream (default sys.stdout)
        stderr: Error stream (default sys.stderr)

    Returns:
        0 ok, 1 property violated, 2 usage error, 3 budget exceeded or timeout,
        4 internal error
    """
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "runlab.settings")
    django.setup()
    args = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        call_command("runlab", *args, stdout=stdout, stderr=stderr)
    except CommandError as e:
        stderr.write(json.dumps({"error": "usage", "message": str(e), "details": {}}) + "\n")
        return EXIT_USAGE
    except SystemExit as e:
        if e.code is None:
            return EXIT_OK
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
