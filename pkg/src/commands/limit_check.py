"""
limit-check: stable scaling-limit checks
"""
from commands.common import given, global_options
from schemas.experiment import LimitCheckConfig


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("limit-check", parents=parents, help="Check the stable scaling limit of a walk")
    parser.add_argument("--check", choices=("positivity", "ladder", "selfsim", "xi", "overshoot", "coupling"),
                        required=True)
    parser.add_argument("--kernel", choices=("bond", "face", "site"))
    parser.add_argument("--model", choices=("tri", "quad"))
    parser.add_argument("--component", choices=("free", "black"))
    parser.add_argument("--trials", type=int)
    parser.add_argument("--horizon", type=int)
    parser.add_argument("--horizons", type=int, nargs="+")
    parser.add_argument("--lambdas", type=float, nargs="+")
    parser.add_argument("-t", type=float)
    parser.add_argument("-a", type=float)
    parser.add_argument("--bs", type=float, nargs="+")
    parser.add_argument("--max-steps", dest="max_steps", type=int)
    parser.set_defaults(build_config=build_config)


def build_config(args) -> LimitCheckConfig:
    fields = given(args, "kernel", "model", "component", "trials", "horizon", "horizons", "lambdas", "t", "a",
                   "bs", "max_steps")
    return LimitCheckConfig(check=args.check, **fields, **global_options(args))
