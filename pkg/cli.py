import argparse
import importlib
import logging
import os
import sys
from typing import Callable, Dict, List, Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Configure logging
logging.basicConfig(
    level=os.getenv('INPAINT_FORENSICS_LOG_LEVEL', 'INFO').upper(),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

from utils import FILTER_BANK, __version__  # noqa: E402

Handler = Callable[["ForensicsCLI", argparse.Namespace], Optional[int]]


class ForensicsCLI:
    def __init__(self):
        self.parser = argparse.ArgumentParser(
            prog='inpaint-forensics',
            description='Localise inpainted regions from DT-CWT noise inconsistencies.'
        )
        biort, qshift = FILTER_BANK.identifiers
        self.parser.add_argument(
            '--version', action='version',
            version=f'%(prog)s {__version__} (filters: {biort}, {qshift})'
        )
        self.subparsers = self.parser.add_subparsers(dest='command', metavar='COMMAND', required=True)

        # Options shared by every subcommand
        self.common = argparse.ArgumentParser(add_help=False)
        self.common.add_argument('--config', help='JSON pipeline configuration file')
        self.common.add_argument('--jobs', type=int, help='worker threads (default: CPU count)')
        self.common.add_argument('--seed', type=int, help='seed for clustering and synthesis (default 0)')
        self.common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])

        self.handlers: Dict[str, Handler] = {}
        self.commands: Dict[str, argparse.ArgumentParser] = {}
        self.error_handler = None
        self.initial_extensions = [
            'commands.detect',
            'commands.evaluate',
            'commands.segment',
            'commands.noise',
            'commands.enhance',
            'commands.synth',
            'commands.dump_bands',
            'commands.error_handler'
        ]
        self.load_extensions()

    def load_extensions(self) -> None:
        for extension in self.initial_extensions:
            try:
                importlib.import_module(extension).setup(self)
                logger.debug(f"Loaded extension: {extension}")
            except Exception as e:
                logger.error(f"Failed to load extension {extension}: {e}")

    def add_command(self, name: str, handler: Handler, help: str) -> argparse.ArgumentParser:
        """Register a subcommand and return its parser so the extension can add flags."""
        parser = self.subparsers.add_parser(name, parents=[self.common], help=help, description=help)
        self.handlers[name] = handler
        self.commands[name] = parser
        return parser

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Parse argv, dispatch to the subcommand and return the process exit code."""
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            # argparse exits 2 on usage errors and 0 for --help / --version
            return e.code if isinstance(e.code, int) else 2

        if args.log_level:
            logging.getLogger().setLevel(args.log_level)

        try:
            return self.handlers[args.command](self, args) or 0
        except Exception as e:
            if self.error_handler is None:
                raise
            return self.error_handler.handle(args.command, e)


def main() -> int:
    return ForensicsCLI().run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
