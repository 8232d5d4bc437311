# src/Controller/Commands/validate.py
import sys
from typing import List

from src.Controller.Commands import solver_command
from src.Schemas.cli_config import CliConfig
from src.Services.property_suites import SuiteResult, run_suites
from src.Services.result_serialization import write_json


def format_table(results: List[SuiteResult]) -> str:
    header = f"{'suite':<24}{'samples':>9}{'violations':>12}{'worst':>14}  verdict"
    lines = [header, "-" * len(header)]
    for r in results:
        lines.append(
            f"{r.name:<24}{r.samples:>9}{r.violations:>12}{r.worst_excess:>14.3e}  {'PASS' if r.passed else 'FAIL'}"
        )
    return "\n".join(lines) + "\n"


@solver_command
def run_validate(config: CliConfig) -> int:
    """
    Run every property suite and print a pass/fail table.

    Exit 0 iff all suites pass; otherwise 1, with the failing suite names on
    the last line. --output additionally receives a JSON summary.
    """
    results = run_suites(config.seed, config.validate_samples, inject_fault=config.inject_fault)
    sys.stdout.write(format_table(results))

    failing = [r.name for r in results if not r.passed]
    if failing:
        sys.stdout.write(f"FAILED: {', '.join(failing)}\n")
    sys.stdout.flush()

    if config.output:
        write_json({
            "passed": not failing,
            "failing": failing,
            "seed": config.seed,
            "suites": [
                {"name": r.name, "samples": r.samples, "violations": r.violations,
                 "worst_excess": r.worst_excess, "passed": r.passed}
                for r in results
            ],
        }, config.output)
    return 1 if failing else 0
