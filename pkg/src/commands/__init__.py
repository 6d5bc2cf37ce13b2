# Command-line sub-commands
from commands import crossing, law, limit_check, reference_tables, threshold
from commands.common import global_parser

COMMANDS = (law, threshold, crossing, limit_check, reference_tables)


def register_all(subparsers) -> None:
    parents = [global_parser(for_subcommand=True)]
    for command in COMMANDS:
        command.register(subparsers, parents)
