# src/Controller/Commands/__init__.py
"""
CLI subcommands. Each run_* takes a validated CliConfig and returns the
process exit code; solver failures become an error object on the output.
"""

import functools
from typing import Callable

from src.Core.errors import SolverError
from src.Core.log_stream import log_from_thread
from src.Schemas.cli_config import CliConfig
from src.Services.result_serialization import serialize_error, write_json

Command = Callable[[CliConfig], int]


def solver_command(fn: Command) -> Command:
    """Map SolverError to its exit code and a machine-readable error object."""

    @functools.wraps(fn)
    def wrapper(config: CliConfig) -> int:
        try:
            return fn(config)
        except SolverError as exc:
            log_from_thread(f"[CLI] {type(exc).__name__}: {exc.message}", "error")
            write_json(serialize_error(exc), config.output)
            return exc.code

    return wrapper


from .compute import run_compute  # noqa: E402
from .benchmark import run_benchmark  # noqa: E402
from .validate import run_validate  # noqa: E402

__all__ = ["run_compute", "run_benchmark", "run_validate", "solver_command"]
