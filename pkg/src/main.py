import argparse
import logging
import sys
import os
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

# Load environment variables from .env file
load_dotenv()

sys.path.append(os.path.dirname(__file__))

from core import __version__
from core.config import settings, validate_settings
from core.exceptions import ConfigError, DomainError, InconclusiveResult, OutputError
from commands import register_all
from commands.common import global_parser
from services.experiment_service import run_experiment
from utils.serialization import dumps

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peeling",
        description="Peeling-process Monte Carlo for percolation on half-planar triangulations and quadrangulations",
        parents=[global_parser()],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_all(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    # Configure logging
    logging.basicConfig(level=getattr(logging, (args.log_level or settings.LOG_LEVEL).upper(), logging.INFO))

    try:
        validate_settings()
        config = args.build_config(args)
        record = run_experiment(config)
    except (ConfigError, DomainError, ValidationError, ValueError) as e:
        logger.error(f"❌ Invalid configuration: {e}")
        return EXIT_CONFIG
    except InconclusiveResult as e:
        logger.error(f"❌ Inconclusive: {e}")
        if e.partial is not None:
            print(dumps({"inconclusive": str(e), "partial": e.partial}))
        return EXIT_INCONCLUSIVE
    except OutputError as e:
        logger.error(f"❌ Cannot write output: {e}")
        return EXIT_IO

    print(dumps(record.outputs))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
