"""
crossing: limit-rule estimate of crossing probabilities
"""
from commands.common import given, global_options
from schemas.experiment import CrossingConfig


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("crossing", parents=parents,
                                   help="Estimate a crossing probability over a lambda sweep")
    parser.add_argument("--kernel", choices=("bond", "face", "site"), required=True)
    parser.add_argument("--model", choices=("tri", "quad"), required=True)
    parser.add_argument("-a", type=float)
    parser.add_argument("-b", type=float)
    parser.add_argument("--lambda", dest="lambdas", type=float, action="append", required=True,
                        help="Scale; repeat for a sweep")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--max-steps", dest="max_steps", type=int)
    parser.add_argument("--emit-outcomes", dest="emit_outcomes", help="CSV path for per-trial outcomes")
    parser.set_defaults(build_config=build_config)


def build_config(args) -> CrossingConfig:
    fields = given(args, "a", "b", "trials", "max_steps", "emit_outcomes")
    return CrossingConfig(kernel=args.kernel, model=args.model, lambdas=args.lambdas, **fields,
                          **global_options(args))
