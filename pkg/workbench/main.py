# =============================================================================
# CLI Entry Point
# O2 cocycle workbench
# =============================================================================
#
# Subcommands: orbit, lyapunov, diagnose, induce, search-reducibility,
# verify-counterexamples, reproduce-paper
#
# Exit codes:
# 0  success
# 2  usage error, invalid config, DomainError
# 3  ResourceCapError
# 4  InvariantBreach
#
# =============================================================================

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from . import TOOL_NAME, __version__
from .config import get_settings
from .errors import WorkbenchError
from .schemas.experiment import ExperimentKind, InduceFormula, load_experiment_config
from .services.experiment_runner import run
from .utils.constants import HEURISTIC_LABEL

logger = logging.getLogger("workbench")

COCYCLES = ("example1", "example2", "example3", "cex1", "cex2", "table")


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS keeps subcommand parsers from clobbering flags given earlier
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS, help="TOML experiment config")
    common.add_argument("--seed", type=_u64, default=argparse.SUPPRESS, help="RNG seed (u64)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads over starts")
    common.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS, help="output directory")
    return common


def _system_flags(p: argparse.ArgumentParser, fibre: bool = True) -> None:
    if fibre:
        p.add_argument("--system", choices=("S", "R", "N", "Z3"), help="skew system")
    p.add_argument("--cocycle", choices=COCYCLES)
    p.add_argument("--base", choices=("rotation", "bernoulli"), help="defaults to the cocycle's base")
    p.add_argument("--eta", help="base rotation: decimal, p/q or sqrt2-1")
    p.add_argument("--alpha", help="cocycle angle: decimal, p/q or sqrt3-1")


def _scan_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--N", dest="n", type=int, help="orbit length")
    p.add_argument("--starts", type=int, help="independent starts")


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(
        prog="workbench",
        description="Numerical workbench for 2x2 orthogonal matrix cocycles. " + HEURISTIC_LABEL,
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="COMMAND")

    p = sub.add_parser("orbit", parents=[common], help="dump an orbit of a skew system as CSV")
    _system_flags(p)
    p.add_argument("--length", type=int, help="iterates to write")

    p = sub.add_parser("lyapunov", parents=[common], help="growth rates |A(n, x) v| at random (x, v)")
    _system_flags(p, fibre=False)
    p.add_argument("--N", dest="n", type=int, help="product length")
    p.add_argument("--samples", type=int, help="random (x, v) pairs")
    p.add_argument("--method", choices=("angle", "matrix"))

    p = sub.add_parser("diagnose", parents=[common], help="ergodicity scan of one skew system")
    _system_flags(p)
    _scan_flags(p)
    p.add_argument("--trajectories", action="store_true", default=None, help="write Birkhoff trajectories")
    p.add_argument("--ulam", action="store_true", default=None, help="also run the Ulam invariant-set detector")
    p.add_argument("--grid", type=int, help="Ulam grid side")

    p = sub.add_parser("induce", parents=[common], help="induced maps and their closed forms")
    _system_flags(p, fibre=False)
    p.add_argument("--formula", choices=[f.value for f in InduceFormula])
    p.add_argument("--section", nargs=2, metavar=("A", "B"), help="section [A, B)")
    p.add_argument("--orientation", choices=("preserving", "reversing"))
    p.add_argument("--samples", type=int, help="return events")

    p = sub.add_parser("search-reducibility", parents=[common], help="scans, sections and bundle verdicts")
    _system_flags(p, fibre=False)
    _scan_flags(p)

    p = sub.add_parser("verify-counterexamples", parents=[common], help="both counterexample cocycles")
    p.add_argument("--eta", help="base rotation for the first counterexample")
    _scan_flags(p)

    p = sub.add_parser("reproduce-paper", parents=[common], help="every worked example and the summary table")
    p.add_argument("--eta", help="base rotation")
    p.add_argument("--alpha", help="cocycle angle")
    _scan_flags(p)
    return parser


def _set(target: Dict[str, Any], path: str, value: Any) -> None:
    if value is None:
        return
    section, _, key = path.rpartition(".")
    node = target
    for part in filter(None, section.split(".")):
        node = node.setdefault(part, {})
    node[key] = value


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Nested config overrides for every flag given on the command line."""
    overrides: Dict[str, Any] = {"experiment": args.experiment}

    def flag(name: str):
        return getattr(args, name, None)

    _set(overrides, "seed", flag("seed"))
    _set(overrides, "threads", flag("threads"))
    _set(overrides, "out", flag("out"))
    _set(overrides, "skew.system", flag("system"))
    _set(overrides, "cocycle.kind", flag("cocycle"))
    _set(overrides, "base.kind", flag("base"))
    _set(overrides, "base.eta", flag("eta"))
    _set(overrides, "cocycle.alpha", flag("alpha"))
    _set(overrides, "numerics.n", flag("n"))
    _set(overrides, "numerics.starts", flag("starts"))
    _set(overrides, "numerics.orbit_length", flag("length"))
    _set(overrides, "numerics.trajectories", flag("trajectories"))
    _set(overrides, "numerics.lyapunov_method", flag("method"))
    _set(overrides, "ulam.enabled", flag("ulam"))
    if flag("grid") is not None:
        _set(overrides, "ulam.grid", (flag("grid"), flag("grid")))
    if args.experiment == ExperimentKind.LYAPUNOV.value:
        _set(overrides, "numerics.lyapunov_samples", flag("samples"))
    else:
        _set(overrides, "inducing.samples", flag("samples"))
    _set(overrides, "inducing.formula", flag("formula"))
    _set(overrides, "inducing.section", flag("section"))
    _set(overrides, "inducing.orientation", flag("orientation"))
    return overrides


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level),
        format="[%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    configure_logging(settings.log_level)

    try:
        config = load_experiment_config(getattr(args, "config", None), overrides_from_args(args))
        writer = run(config, settings)
    except WorkbenchError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code

    for path in writer.written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
