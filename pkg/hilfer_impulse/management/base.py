import logging
from contextlib import contextmanager

from django.core.management.base import BaseCommand, CommandError

from hilfer_impulse.exceptions import ConfigError, NumericError, SolveTimeout

logger = logging.getLogger(__name__)

EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_ERROR = 3

VERBOSITY_LEVELS = {0: logging.WARNING, 1: logging.INFO}


class HilferCommand(BaseCommand):
    """
    Shared plumbing for the hilfer_impulse commands: logging setup and the
    translation of library errors into exit codes.
    """

    requires_system_checks: list[str] = []

    def execute(self, *args, **options):
        logging.basicConfig(
            format="[%(asctime)s] %(levelname)8s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
            level=VERBOSITY_LEVELS.get(options.get("verbosity", 1), logging.DEBUG),
            force=True,
        )
        with self.exit_codes():
            return super().execute(*args, **options)

    @contextmanager
    def exit_codes(self):
        try:
            yield
        except ConfigError as error:
            raise CommandError(str(error), returncode=EXIT_CONFIG_ERROR) from error
        except (NumericError, SolveTimeout) as error:
            raise CommandError(str(error), returncode=EXIT_NUMERIC_ERROR) from error

    def fail_check(self, message: str):
        raise CommandError(message, returncode=EXIT_CHECK_FAILED)
