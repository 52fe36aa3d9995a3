"""Linha de comando do dephasim: eval, compare, limits e sweep."""

import argparse
import logging
import os
import sys

from typing import List
from typing import Optional

from src import __version__
from src.config.constants import EXIT_COMPUTE
from src.config.constants import EXIT_OK
from src.config.constants import EXIT_SCHEMA
from src.config.constants import METRICS_FILE_ENV_VAR
from src.evaluators import EVALUATOR_MAP
from src.exceptions import DephasimException
from src.exceptions import SchemaError
from src.exceptions import SpecInvalidError
from src.execution_manager import SPLIT_METHODS
from src.execution_manager import SWEEP_AXES
from src.execution_manager import ExecutionManager
from src.execution_manager import SweepRange
from src.monitoring.metrics import metrics_collector
from src.run_config import load_run_config
from src.utils.csv_writer import write_text
from src.utils.parallel import resolve_threads


logger = logging.getLogger("dephasim")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

_MAX_SEED = 2**64 - 1


def _seed(value: str) -> int:
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {value!r}") from None
    if not 0 <= seed <= _MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dephasim",
        description="Decoherence of a central spin in a phonon-coupled spin bath.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="run configuration (JSON)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--seed", type=_seed, default=None, help="ensemble seed override")
    common.add_argument("--threads", type=int, default=None, help="worker threads")

    commands = parser.add_subparsers(dest="command", required=True)

    eval_cmd = commands.add_parser("eval", parents=[common], help="evaluate r(t)")
    eval_cmd.add_argument(
        "--method",
        required=True,
        choices=sorted(EVALUATOR_MAP) + sorted(SPLIT_METHODS),
    )

    commands.add_parser("compare", parents=[common], help="closed form vs oracle")
    commands.add_parser("limits", parents=[common], help="limit checks")

    sweep_cmd = commands.add_parser("sweep", parents=[common], help="parameter sweeps")
    sweep_cmd.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sweep_cmd.add_argument("--range", required=True, dest="sweep_range", help="LO:HI:STEPS")
    sweep_cmd.add_argument("--probe-time", dest="sample_time", type=float, default=None)
    return parser


def exit_code_for(error: DephasimException) -> int:
    """SchemaError/SpecInvalidError exit 2; numerical and physical errors exit 3."""
    if isinstance(error, (SchemaError, SpecInvalidError)):
        return EXIT_SCHEMA
    return EXIT_COMPUTE


def _dispatch(args: argparse.Namespace) -> int:
    manager = ExecutionManager(threads=resolve_threads(args.threads))
    run_config = load_run_config(args.config)

    if args.command == "eval":
        write_text(manager.run_eval(run_config, args.method, args.seed), args.out)
        return EXIT_OK
    if args.command == "compare":
        report = manager.run_compare(run_config, args.seed)
        write_text(report.render(), args.out)
        return report.exit_code
    if args.command == "limits":
        report = manager.run_limits(run_config, args.seed)
        write_text(report.render(), args.out)
        return report.exit_code
    sweep_range = SweepRange.parse(args.sweep_range)
    write_text(
        manager.run_sweep(run_config, args.axis, sweep_range, args.seed, args.sample_time),
        args.out,
    )
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    if os.path.exists(".env"):
        from dotenv import load_dotenv

        load_dotenv()

    logging.basicConfig(
        level=os.getenv("LOG_LEVEL", "INFO").upper(),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    metrics_collector.set_app_info(__version__)

    try:
        code = _dispatch(args)
    except DephasimException as e:
        code = exit_code_for(e)
        logger.error(f"Falha em {args.command}: {e.message}")
        print(f"error: {e.message}", file=sys.stderr)
    finally:
        metrics_path = os.getenv(METRICS_FILE_ENV_VAR)
        if metrics_path:
            metrics_collector.write_to_file(metrics_path)

    logger.info(f"Comando {args.command} terminou com código {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
