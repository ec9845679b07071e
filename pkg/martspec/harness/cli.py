"""
Command-line front end.

    martspec [--config FILE] [--seed S] [--out DIR] [--threads K]
             [--log-level LEVEL] [--quiet] VERB

with one verb per experiment pipeline. The exit code is 0 only when every
(size, seed) cell succeeded and every configured assertion passed.
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from ..log_config import configure_logging
from .context_manager import ExperimentContext
from .experiment_config import Verb, build_config, load_document
from .run import run

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    """The argument parser with the global flags and the verbs."""
    parser = argparse.ArgumentParser(
        prog="martspec",
        description="Spectral experiments for random matrices with "
        + "martingale difference entries.",
    )
    parser.add_argument(
        "--config", default=None, help="YAML experiment config file"
    )
    parser.add_argument(
        "--seed", type=int, default=None, help="run this single seed"
    )
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument(
        "--threads", type=int, default=None, help="worker processes"
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
    )
    parser.add_argument(
        "--quiet", action="store_true", help="no progress bars"
    )
    parser.add_argument("verb", choices=[verb.value for verb in Verb])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parses arguments, runs one experiment and returns the exit code."""
    args = build_parser().parse_args(argv)
    level = getattr(logging, args.log_level)
    logger = configure_logging(filename="", level=level)
    verb = Verb(args.verb)
    try:
        document = (
            load_document(args.config, logger) if args.config else None
        )
        config = build_config(
            verb,
            document,
            {"seed": args.seed, "out": args.out, "threads": args.threads},
            logger,
        )
    except (OSError, ValueError) as e:
        logger.error(f"cannot load the experiment config: {e}")
        return EXIT_BAD_CONFIG
    with ExperimentContext(config, log_level=level) as context:
        report = run(config, context, quiet=args.quiet)
    print(report)
    return EXIT_OK if report.ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
