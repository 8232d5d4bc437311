"""
=================================
Solver Configuration Module
=================================

This module defines the centralized configuration system for the
Nyström-Sinkhorn solver using Pydantic Settings. All configuration parameters
are loaded from environment variables and validated at startup.

Architecture:
------------
- Pydantic BaseSettings: Type-safe configuration with automatic validation
- Environment Variables: Every default below can be overridden from .env
- SolverConfig: Per-solve record built from settings plus CLI flags

Configuration Categories:
------------------------
1. **Project Metadata**: Name and version written into JSON results
2. **Problem Defaults**: eta, eps and seed used when CLI flags are absent
3. **Dense Caps**: Size limits for the dense oracle and diagnostics
4. **Nyström**: Leverage-score estimator and Cholesky jitter ladder
5. **Execution**: Thread count, row blocking, console log level

Usage Example:
-------------
    from src.Core.config import settings

    if n > settings.DENSE_CAP:
        raise CapacityError(...)

Note:
    Configuration validation occurs at module import time. Invalid values
    raise validation errors immediately (fail-fast).
"""

import os
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Solver configuration settings with environment variable support.

    Values are automatically loaded from environment variables or use the
    defaults below.
    """

    model_config = SettingsConfigDict(env_file=None, case_sensitive=False)

    # ============================================================
    # PROJECT METADATA
    # ============================================================
    PROJECT_NAME: str = "nystrom-sinkhorn"
    """Application name identifier."""

    PROJECT_VERSION: str = "1.0.0"
    """Current application version following semantic versioning."""

    # ============================================================
    # PROBLEM DEFAULTS
    # ============================================================
    DEFAULT_ETA: float = Field(1.0, gt=0)
    """
    Regularization η used when --eta is not given.

    The kernel is exp(-η‖x-y‖²); larger η means weaker entropic smoothing
    and a kernel that is harder to approximate at low rank.
    """

    DEFAULT_EPS: float = Field(0.1, gt=0, le=1)
    """Target additive accuracy ε used when --eps is not given."""

    DEFAULT_SEED: int = Field(0, ge=0, lt=2**64)
    """Master seed; split per stage by src.Controller.deps.get_rng."""

    # ============================================================
    # DENSE CAPS
    # ============================================================
    DENSE_CAP: int = Field(20_000, ge=1)
    """
    Largest support size for dense kernel assembly and plan densification.

    Beyond this the pipeline never falls back to the exact kernel path, and
    densify_plan / dense_kernel raise CapacityError.
    """

    PROJECTION_CAP: int = Field(2_000, ge=1)
    """Largest support size accepted by the dense Sinkhorn oracle."""

    EIGEN_CAP: int = Field(2_000, ge=1)
    """Largest matrix accepted by eigen_spectrum (diagnostics only)."""

    # ============================================================
    # NYSTRÖM
    # ============================================================
    MAX_RETRIES: int = Field(5, ge=0)
    """Nonpositive-operator retries before the dense fallback is attempted."""

    EXACT_LEVERAGE_CUTOFF: int = Field(512, ge=1)
    """
    Support size at or below which ridge leverage scores are computed exactly.

    Above it the recursive half-sampling estimator is used.
    """

    LEVERAGE_OVERSAMPLING: float = Field(16.0, ge=1)
    """Constant factor applied to estimated leverage scores."""

    LEVERAGE_BUDGET: int = Field(256, ge=1)
    """
    Most points kept per level of the recursive estimator.

    The restricted solve at each level costs O(n·budget²); scores stay
    upper bounds for any kept set, only their sharpness depends on it.
    """

    JITTER_LADDER: Tuple[float, ...] = (0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4)
    """
    Diagonal shifts tried in order when the landmark Gram matrix is singular.

    Duplicate landmarks make A singular; the first value for which Cholesky
    succeeds is stored on the factor as `jitter`.
    """

    ORACLE_MAX_ITERS: int = Field(10_000_000, ge=1)
    """Iteration ceiling of the dense log-domain Sinkhorn oracle."""

    # ============================================================
    # EXECUTION
    # ============================================================
    THREADS: int = Field(0, ge=0)
    """Worker threads for row-blocked kernel assembly (0 = os.cpu_count())."""

    ROW_BLOCK: int = Field(4096, ge=1)
    """Rows per block when assembling kernel columns."""

    LOG_LEVEL: Literal["log", "warning", "error"] = "log"
    """Minimum level printed by the console fallback of the log stream."""

    @property
    def worker_count(self) -> int:
        return self.THREADS or (os.cpu_count() or 1)


# ============================================================
# PER-SOLVE CONFIGURATION
# ============================================================
class SolverConfig(BaseModel):
    """
    Immutable configuration of one nys_sink call.

    Built by the CLI from Settings defaults and flags; tests build it
    directly. Unknown keys are rejected.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    eta: float = Field(..., gt=0)
    eps: float = Field(..., gt=0, le=1)
    seed: int = Field(0, ge=0, lt=2**64)
    r_max: Optional[int] = Field(None, ge=2, description="Rank ceiling (None = n)")
    dense_cap: int = Field(default_factory=lambda: settings.DENSE_CAP, ge=1)
    max_retries: int = Field(default_factory=lambda: settings.MAX_RETRIES, ge=0)
    fixed_rank: Optional[int] = Field(None, ge=2, description="Skip the doubling loop")
    fixed_iterations: Optional[int] = Field(None, ge=1, description="Run exactly T renormalizations")
    sampler: Literal["leverage", "uniform"] = "leverage"


# ============================================================
# SETTINGS INSTANCE
# ============================================================
settings = Settings()  # type: ignore
"""
Global settings instance.

Imported throughout the package; validation occurs immediately on import.
"""
