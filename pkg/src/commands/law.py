"""
law dump: exact q-law head
"""
from commands.common import global_options
from schemas.experiment import LawDumpConfig


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("law", help="Exact peeling-step laws")
    actions = parser.add_subparsers(dest="law_action", required=True)
    dump = actions.add_parser("dump", parents=parents, help="Write q_side(k) for k <= kmax as CSV with a JSON header")
    dump.add_argument("--model", choices=("tri", "quad"), required=True)
    dump.add_argument("--kmax", type=int, required=True)
    dump.set_defaults(build_config=build_config)


def build_config(args) -> LawDumpConfig:
    return LawDumpConfig(model=args.model, kmax=args.kmax, **global_options(args))
