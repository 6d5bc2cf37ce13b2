"""
Options shared by every sub-command
"""
import argparse
from typing import Any, Dict

from core.config import settings


def global_parser(for_subcommand: bool = False) -> argparse.ArgumentParser:
    """
    Parent parser holding --seed, --workers, --out and --log-level.

    The sub-command copy leaves unset options out of the namespace, so a value
    given before the sub-command survives.
    """
    default = argparse.SUPPRESS if for_subcommand else None
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--seed", type=int, default=default, help=f"Master seed (default {settings.DEFAULT_SEED})")
    parser.add_argument("--workers", type=int, default=default, help=f"Worker processes (default {settings.WORKERS})")
    parser.add_argument("--out", default=default, help=f"Output directory (default {settings.OUTPUT_DIR})")
    parser.add_argument("--log-level", dest="log_level", default=default, choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    return parser


def global_options(args: argparse.Namespace) -> Dict[str, Any]:
    """Seed, worker count and output directory, leaving unset ones to the config defaults."""
    options = {"seed": args.seed, "workers": args.workers, "out": args.out}
    return {key: value for key, value in options.items() if value is not None}


def given(args: argparse.Namespace, *names: str) -> Dict[str, Any]:
    return {name: getattr(args, name) for name in names if getattr(args, name, None) is not None}
