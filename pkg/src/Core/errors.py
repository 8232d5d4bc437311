"""
Solver Errors
=============

Every failure the solver can report is a SolverError carrying the CLI exit
code and a context dict. Stages add a "stage" entry before re-raising so the
CLI can say where a solve failed.
"""

from typing import Any, Dict, Optional


class SolverError(Exception):
    """Base class; `code` is the CLI exit code."""

    code: int = 1

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = dict(context or {})

    def with_stage(self, stage: str) -> "SolverError":
        self.context.setdefault("stage", stage)
        return self

    def to_payload(self) -> Dict[str, Any]:
        return {
            "error": {
                "type": type(self).__name__,
                "message": self.message,
                "code": self.code,
                "context": self.context,
            }
        }


class InputError(SolverError):
    code = 2


class ParseError(InputError):
    """CSV ingestion failure; `line` is 1-based (0 when file-level)."""

    def __init__(self, message: str, line: int = 0, path: Optional[str] = None):
        super().__init__(f"line {line}: {message}" if line else message,
                         {"line": line, "path": path})
        self.line = line


class RankExhaustedError(SolverError):
    code = 3

    def __init__(self, message: str, err: float, rank: int):
        super().__init__(message, {"err": err, "rank": rank})
        self.err = err
        self.rank = rank


class NoConvergenceError(SolverError):
    code = 4

    def __init__(self, message: str, violation: float, iterations: int):
        super().__init__(message, {"violation": violation, "iterations": iterations})
        self.violation = violation
        self.iterations = iterations


class OracleError(NoConvergenceError):
    """Dense oracle failed to converge."""


class RetryExhaustedError(SolverError):
    code = 5


class CapacityError(SolverError):
    code = 6

    def __init__(self, message: str, n: int, cap: int):
        super().__init__(message, {"n": n, "cap": cap})


class DegenerateLandmarksError(SolverError):
    code = 7


class NonPositiveOperatorError(SolverError):
    code = 8


class InvalidOperatorError(SolverError):
    code = 9
