# src/Schemas/report.py
from pydantic import BaseModel, ConfigDict, Field
from typing import List, Literal


# ============================================
# STAGE TIMINGS
# ============================================
class WallTimes(BaseModel):
    """Per-stage wall-clock durations in milliseconds."""
    model_config = ConfigDict(extra="forbid")

    nystrom_ms: float = Field(0.0, ge=0)
    sinkhorn_ms: float = Field(0.0, ge=0)
    round_ms: float = Field(0.0, ge=0)
    total_ms: float = Field(0.0, ge=0)


# ============================================
# SOLVE REPORT
# ============================================
class SolveReport(BaseModel):
    """
    Everything nys_sink reports next to the factored plan.

    Used by:
    - run_compute (JSON result)
    - run_benchmark (elapsed and error columns)
    """
    model_config = ConfigDict(extra="forbid")

    w_hat: float = Field(..., description="Estimate of W_eta(p, q)")
    rank: int = Field(..., ge=2, description="Rank of the kernel approximation")
    sinkhorn_iterations: int = Field(..., ge=0)
    nystrom_rounds: int = Field(..., ge=0)
    retries: int = Field(0, ge=0)
    wall_times: WallTimes
    eps_prime: float = Field(..., gt=0, le=1)
    tau: float = Field(..., gt=0, description="Nyström tolerance used")

    certificate_err: float = Field(..., ge=0, description="1 - min_i diag(K~) at termination")
    jitter: float = Field(0.0, ge=0)
    final_violation: float = Field(..., ge=0, description="Sinkhorn violation vs p', q'")
    marginal_violation: float = Field(..., ge=0, description="Rounded plan violation vs p, q")
    kernel_path: Literal["nystrom", "dense"] = "nystrom"
    warnings: List[str] = Field(default_factory=list)


# ============================================
# COMPUTE RESULT (JSON output of `compute`)
# ============================================
class ComputeResult(BaseModel):
    """
    Documented schema of the `compute` JSON object.

    Unknown keys are rejected so the emitted file always matches this schema.
    """
    model_config = ConfigDict(extra="forbid")

    w_hat: float
    rank: int
    eps_prime: float
    tau: float
    sinkhorn_iterations: int
    nystrom_rounds: int
    retries: int
    marginal_violation: float
    wall_times: WallTimes
    seed: int
    eta: float
    eps: float
    n: int
    d: int
    transport_cost: float
    kernel_path: Literal["nystrom", "dense"]
    warnings: List[str]
    version: str


# ============================================
# BENCHMARK ROW
# ============================================
class BenchmarkRow(BaseModel):
    """One CSV row of `benchmark`; every column except method is numeric."""
    model_config = ConfigDict(extra="forbid")

    method: Literal["dense_sinkhorn", "nys_sink"]
    eta: float
    rank: int
    repeat: int
    elapsed_ms: float
    abs_error_vs_reference: float
    n: int
    d: int
    seed: int

    @classmethod
    def columns(cls) -> List[str]:
        return list(cls.model_fields.keys())
