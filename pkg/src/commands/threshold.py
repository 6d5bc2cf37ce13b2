"""
threshold: site percolation threshold by bisection
"""
from commands.common import given, global_options
from schemas.experiment import ThresholdConfig


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("threshold", parents=parents, help="Bracket the site threshold by bisection")
    parser.add_argument("--model", choices=("tri", "quad"))
    parser.add_argument("--tol", type=float)
    parser.add_argument("--trials", type=int, help="Trials per probe")
    parser.add_argument("--escape-height", dest="escape_height", type=int)
    parser.add_argument("--max-steps", dest="max_steps", type=int)
    parser.add_argument("--max-probes", dest="max_probes", type=int)
    parser.add_argument("--threshold-guess", dest="threshold_guess", type=float)
    parser.set_defaults(build_config=build_config)


def build_config(args) -> ThresholdConfig:
    fields = given(args, "model", "tol", "trials", "escape_height", "max_steps", "max_probes", "threshold_guess")
    return ThresholdConfig(**fields, **global_options(args))
