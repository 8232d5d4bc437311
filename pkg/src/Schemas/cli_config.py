# src/Schemas/cli_config.py
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import List, Literal, Optional


# ============================================
# BENCHMARK GRID
# ============================================
class BenchmarkGrid(BaseModel):
    """
    Sweep of the `benchmark` subcommand.

    One row per (method, eta, rank, repeat). `instance`, `n` and `d` describe
    the synthetic instance when no input clouds are given.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    etas: List[float] = Field(default_factory=lambda: [1.0], min_length=1)
    ranks: List[int] = Field(default_factory=lambda: [32], min_length=1)
    repeats: int = Field(1, ge=1)
    instance: Literal["square", "curve"] = "square"
    n: int = Field(500, ge=2, description="Points per synthetic cloud")
    d: int = Field(2, ge=1)
    reference_tol: float = Field(1e-9, gt=0)

    @model_validator(mode="after")
    def _positive(self):
        if any(e <= 0 for e in self.etas):
            raise ValueError("every eta must be > 0")
        if any(r < 2 for r in self.ranks):
            raise ValueError("every rank must be ≥ 2")
        if self.instance == "curve" and self.d < 3:
            raise ValueError("the curve instance needs d ≥ 3")
        return self


# ============================================
# CLI CONFIG
# ============================================
class CliConfig(BaseModel):
    """
    Validated command line of one CLI invocation.

    Built from argparse output; extra keys are rejected rather than ignored.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    subcommand: Literal["compute", "benchmark", "validate"]
    points_a: Optional[str] = None
    points_b: Optional[str] = None
    eta: float = Field(..., gt=0)
    eps: float = Field(..., gt=0, le=1)
    seed: int = Field(0, ge=0, lt=2**64)
    r_max: Optional[int] = Field(None, ge=2)
    dense_cap: int = Field(..., ge=1)
    threads: int = Field(0, ge=0)
    output: Optional[str] = None
    log_file: Optional[str] = None
    fixed_rank: Optional[int] = Field(None, ge=2)
    fixed_iterations: Optional[int] = Field(None, ge=1)
    sampler: Literal["leverage", "uniform"] = "leverage"
    grid: BenchmarkGrid = Field(default_factory=BenchmarkGrid)
    inject_fault: Optional[Literal["skip_rounding"]] = None
    validate_samples: int = Field(1000, ge=1)

    @model_validator(mode="after")
    def _inputs(self):
        if self.subcommand == "compute" and not (self.points_a and self.points_b):
            raise ValueError("compute needs --points-a and --points-b")
        if (self.points_a is None) != (self.points_b is None):
            raise ValueError("--points-a and --points-b must be given together")
        return self
