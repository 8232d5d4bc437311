# src/Services/result_serialization.py
"""
Result serialization: SolveReport → compute JSON, BenchmarkRow → CSV,
SolverError → error object.

JSON is written with sorted keys and a trailing LF so two runs with the
same seed differ only in wall_times.
"""

import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

from src.Core.config import settings
from src.Core.errors import SolverError
from src.Schemas.point_cloud import ProblemInstance
from src.Schemas.report import BenchmarkRow, ComputeResult, SolveReport


def serialize_compute_result(
    report: SolveReport,
    instance: ProblemInstance,
    seed: int,
    transport_cost: float,
) -> Dict[str, Any]:
    """
    Flatten a report plus instance metadata into the documented schema.

    - Validated through ComputeResult (unknown keys rejected)
    - version is settings.PROJECT_VERSION
    """
    result = ComputeResult(
        w_hat=report.w_hat,
        rank=report.rank,
        eps_prime=report.eps_prime,
        tau=report.tau,
        sinkhorn_iterations=report.sinkhorn_iterations,
        nystrom_rounds=report.nystrom_rounds,
        retries=report.retries,
        marginal_violation=report.marginal_violation,
        wall_times=report.wall_times,
        seed=seed,
        eta=instance.eta,
        eps=instance.eps,
        n=instance.m,
        d=instance.d,
        transport_cost=transport_cost,
        kernel_path=report.kernel_path,
        warnings=report.warnings,
        version=settings.PROJECT_VERSION,
    )
    return result.model_dump()


def serialize_error(exc: SolverError) -> Dict[str, Any]:
    return exc.to_payload()


def to_json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=float) + "\n"


def write_json(payload: Dict[str, Any], output: Optional[str] = None) -> None:
    """Write to `output`, or stdout when it is None or "-"."""
    text = to_json(payload)
    if output is None or output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    Path(output).write_text(text, encoding="utf-8", newline="\n")


def benchmark_csv(rows: Iterable[BenchmarkRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BenchmarkRow.columns(), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.model_dump().items()})
    return buf.getvalue()


def write_benchmark_csv(rows: Iterable[BenchmarkRow], output: Optional[str] = None) -> None:
    text = benchmark_csv(rows)
    if output is None or output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    Path(output).write_text(text, encoding="utf-8", newline="\n")
