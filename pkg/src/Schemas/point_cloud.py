# src/Schemas/point_cloud.py
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
import numpy as np


SIMPLEX_TOL = 1e-12


def _as_readonly(value, ndim: int) -> np.ndarray:
    arr = np.array(value, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("array contains non-finite values")
    arr.setflags(write=False)
    return arr


def _check_simplex(w: np.ndarray, name: str) -> None:
    if np.any(w < 0):
        raise ValueError(f"{name} has negative entries")
    total = float(w.sum())
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"{name} sums to {total!r}, expected 1 within {SIMPLEX_TOL}")


# ============================================
# WEIGHTED CLOUD
# ============================================
class WeightedCloud(BaseModel):
    """
    Points with simplex weights; the raw input of a solve.

    points is an (n, d) array with d ≥ 1, weights a length-n vector that is
    nonnegative and sums to 1 within 1e-12.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    points: np.ndarray = Field(..., description="(n, d) coordinates")
    weights: np.ndarray = Field(..., description="length-n simplex vector")

    @field_validator("points", mode="before")
    @classmethod
    def _points(cls, v):
        arr = _as_readonly(v, 2)
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("a cloud needs at least one point of dimension ≥ 1")
        return arr

    @field_validator("weights", mode="before")
    @classmethod
    def _weights(cls, v):
        return _as_readonly(v, 1)

    @model_validator(mode="after")
    def _consistent(self):
        if self.weights.shape[0] != self.points.shape[0]:
            raise ValueError("weights and points disagree on n")
        _check_simplex(self.weights, "weights")
        return self

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def d(self) -> int:
        return int(self.points.shape[1])


# ============================================
# PROBLEM INSTANCE
# ============================================
class ProblemInstance(BaseModel):
    """
    Merged, centered support with the two marginals and solve parameters.

    Every support point has norm ≤ radius; p and q are simplex vectors of
    length m; eta > 0 and 0 < eps ≤ 1.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    support: np.ndarray = Field(..., description="(m, d) centered support")
    p: np.ndarray
    q: np.ndarray
    eta: float = Field(..., gt=0)
    eps: float = Field(..., gt=0, le=1)
    radius: float = Field(..., ge=0)

    @field_validator("support", mode="before")
    @classmethod
    def _support(cls, v):
        return _as_readonly(v, 2)

    @field_validator("p", "q", mode="before")
    @classmethod
    def _marginal(cls, v):
        return _as_readonly(v, 1)

    @model_validator(mode="after")
    def _consistent(self):
        m = self.support.shape[0]
        if self.p.shape[0] != m or self.q.shape[0] != m:
            raise ValueError("marginals and support disagree on m")
        _check_simplex(self.p, "p")
        _check_simplex(self.q, "q")
        norms = np.linalg.norm(self.support, axis=1)
        if norms.size and float(norms.max()) > self.radius * (1 + 1e-12) + 1e-300:
            raise ValueError("support point outside the declared radius")
        return self

    @property
    def m(self) -> int:
        return int(self.support.shape[0])

    @property
    def d(self) -> int:
        return int(self.support.shape[1])

    def with_params(self, eta: float | None = None, eps: float | None = None) -> "ProblemInstance":
        """Copy with a different eta and/or eps (support and marginals shared)."""
        return ProblemInstance(
            support=self.support, p=self.p, q=self.q,
            eta=self.eta if eta is None else eta,
            eps=self.eps if eps is None else eps,
            radius=self.radius,
        )
