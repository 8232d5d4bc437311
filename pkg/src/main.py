"""
src/main.py
============================================
Command-Line Entry Point for the Nyström-Sinkhorn Solver
============================================

Subcommands:
-----------
- compute:   entropic OT between two CSV point clouds → JSON
- benchmark: dense Sinkhorn vs nys_sink over an (η, rank, repeat) grid → CSV
- validate:  seeded property suites → pass/fail table

Usage:
------
    python -m src.main compute --points-a a.csv --points-b b.csv --eta 5 --eps 0.05
    python -m src.main benchmark --etas 1,5 --ranks 16,64 --repeats 3 --n 500 --output bench.csv
    python -m src.main benchmark --instance curve --d 20 --ranks 300 --n 1000
    python -m src.main validate --seed 7

Exit Codes:
----------
0 success, 1 validation failure, 2 input/parse, 3 rank exhausted,
4 no convergence, 5 retries exhausted, 6 capacity, 7 degenerate landmarks,
8 nonpositive operator, 9 invalid operator.
"""

# Environment Configuration
from dotenv import load_dotenv
load_dotenv()

import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from src.Controller.Commands import run_benchmark, run_compute, run_validate
from src.Core.config import settings
from src.Core.errors import InputError
from src.Core.log_stream import log_from_thread, log_manager
from src.Schemas.cli_config import BenchmarkGrid, CliConfig
from src.Services.result_serialization import serialize_error, write_json

COMMANDS = {
    "compute": run_compute,
    "benchmark": run_benchmark,
    "validate": run_validate,
}


# ============================================================
# ARGUMENT PARSING
# ============================================================
def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--points-a", dest="points_a", help="CSV of the first cloud")
    sub.add_argument("--points-b", dest="points_b", help="CSV of the second cloud")
    sub.add_argument("--eta", type=float, default=settings.DEFAULT_ETA)
    sub.add_argument("--eps", type=float, default=settings.DEFAULT_EPS)
    sub.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    sub.add_argument("--r-max", dest="r_max", type=int)
    sub.add_argument("--dense-cap", dest="dense_cap", type=int, default=settings.DENSE_CAP)
    sub.add_argument("--threads", type=int, default=settings.THREADS, help="0 = all cores")
    sub.add_argument("--output", help="result path (stdout when omitted)")
    sub.add_argument("--log-file", dest="log_file", help="append JSON-lines log records here")
    sub.add_argument("--fixed-rank", dest="fixed_rank", type=int)
    sub.add_argument("--fixed-iterations", dest="fixed_iterations", type=int)
    sub.add_argument("--sampler", choices=["leverage", "uniform"], default="leverage")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=settings.PROJECT_NAME,
                                     description="Nyström-accelerated Sinkhorn distances")
    parser.add_argument("--version", action="version", version=settings.PROJECT_VERSION)
    subs = parser.add_subparsers(dest="subcommand", required=True)

    _add_common(subs.add_parser("compute", help="solve between two point clouds"))

    bench = subs.add_parser("benchmark", help="time-accuracy sweep as CSV")
    _add_common(bench)
    bench.add_argument("--etas", type=_float_list, default=[1.0])
    bench.add_argument("--ranks", type=_int_list, default=[32])
    bench.add_argument("--repeats", type=int, default=1)
    bench.add_argument("--n", type=int, default=500, help="synthetic instance size")
    bench.add_argument("--instance", choices=["square", "curve"], default="square",
                       help="synthetic instance: uniform cube or 1-D curve (needs --d ≥ 3)")
    bench.add_argument("--d", type=int, default=2, help="synthetic instance dimension")
    bench.add_argument("--reference-tol", dest="reference_tol", type=float, default=1e-9)

    val = subs.add_parser("validate", help="run the property suites")
    _add_common(val)
    val.add_argument("--samples", dest="validate_samples", type=int, default=1000)
    val.add_argument("--inject-fault", dest="inject_fault", choices=["skip_rounding"])
    return parser


def to_config(args: argparse.Namespace) -> CliConfig:
    """Namespace → CliConfig; raises pydantic ValidationError on bad values."""
    raw = {k: v for k, v in vars(args).items() if v is not None}
    grid_keys = ("etas", "ranks", "repeats", "instance", "n", "d", "reference_tol")
    grid = {k: raw.pop(k) for k in grid_keys if k in raw}
    if grid:
        raw["grid"] = BenchmarkGrid(**grid)
    return CliConfig(**raw)


# ============================================================
# ENTRY POINT
# ============================================================
def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    sink = None
    if args.log_file:
        sink = log_manager.file_sink(args.log_file)
        log_manager.register(sink)

    try:
        try:
            config = to_config(args)
        except ValidationError as exc:
            err = InputError(f"invalid arguments: {exc.errors()[0].get('msg', str(exc))}")
            log_from_thread(f"[CLI] {err.message}", "error")
            write_json(serialize_error(err), getattr(args, "output", None))
            return err.code

        if config.threads:
            settings.THREADS = config.threads

        log_from_thread(f"[CLI] {config.subcommand} seed={config.seed} eta={config.eta:g} eps={config.eps:g}")
        return COMMANDS[config.subcommand](config)
    finally:
        if sink is not None:
            log_manager.unregister(sink)


if __name__ == "__main__":
    sys.exit(main())
