"""
reference-tables: exact constants as golden JSON
"""
from commands.common import global_options
from schemas.experiment import ReferenceTablesConfig


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("reference-tables", parents=parents,
                                   help="Write the exact thresholds, moments and q-law heads")
    parser.set_defaults(build_config=build_config)


def build_config(args) -> ReferenceTablesConfig:
    return ReferenceTablesConfig(**global_options(args))
