import argparse
import logging
import sys
from typing import Optional, Sequence

from hydromonitor import __version__
from hydromonitor.errors import MonitoringError
from hydromonitor.utils.log import configure_logging

# Import commands
from hydromonitor.commands.compare import register as register_compare
from hydromonitor.commands.evaluate import register as register_eval
from hydromonitor.commands.train import register as register_train
from hydromonitor.commands.transfer import register as register_transfer

logger = logging.getLogger("hydromonitor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hydromonitor",
        description="Persistent monitoring of mobile targets by a hybrid aerial-underwater vehicle",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Include commands
    register_train(subparsers)
    register_eval(subparsers)
    register_transfer(subparsers)
    register_compare(subparsers)
    return parser


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv and run the selected subcommand.

    Returns:
        0 on success, 1 when the command failed, 2 for usage errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(getattr(args, "log_level", None))
    try:
        return args.func(args)
    except MonitoringError as e:
        logger.error("%s failed: %s", args.command, e)
        return 1
    except OSError as e:
        logger.error("%s failed: %s", args.command, e)
        return 1


def main() -> None:
    sys.exit(dispatch())
