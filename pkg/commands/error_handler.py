import logging
import sys
import traceback

from commands import UsageError
from utils.errors import ForensicsError

logger = logging.getLogger(__name__)


class ErrorHandler:
    def __init__(self, cli):
        self.cli = cli

    def handle(self, command: str, error: Exception) -> int:
        """Report an exception raised while running a command and return the exit code."""

        if isinstance(error, UsageError):
            # Flag problems: usage text plus the reason, like argparse does
            parser = self.cli.commands.get(command, self.cli.parser)
            parser.print_usage(sys.stderr)
            print(f"{parser.prog}: error: {error}", file=sys.stderr)
            return 2

        elif isinstance(error, ForensicsError):
            # Operational errors carry the file they came from
            print(f"{type(error).__name__}: {error}", file=sys.stderr)
            logger.debug(f"{command} failed with {type(error).__name__}")
            return 1

        # For all other errors, log them
        logger.error(f"Command error in {command}:")
        logger.error(''.join(traceback.format_exception(type(error), error, error.__traceback__)))
        print(f"{type(error).__name__}: {error}", file=sys.stderr)
        return 1


def setup(cli):
    cli.error_handler = ErrorHandler(cli)
