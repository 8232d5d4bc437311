# src/Models/scaling.py
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScalingPair:
    """
    Log-domain diagonal scalings: u = log diag D₁, v = log diag D₂.

    Sinkhorn output always has finite entries. Rounded plans may carry -inf
    where a row or column was scaled to zero mass.
    """

    u: np.ndarray
    v: np.ndarray

    @classmethod
    def identity(cls, n: int) -> "ScalingPair":
        return cls(u=np.zeros(n), v=np.zeros(n))

    @property
    def d1(self) -> np.ndarray:
        return np.exp(self.u)

    @property
    def d2(self) -> np.ndarray:
        return np.exp(self.v)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)))


@dataclass(frozen=True)
class SinkhornResult:
    """
    Output of sinkhorn_scale.

    row_marginals / col_marginals are P̃1 and P̃ᵀ1 for the returned scalings,
    cached so rounding can start without another matvec pair.
    """

    scalings: ScalingPair
    w_hat: float
    iterations: int
    final_violation: float
    row_marginals: np.ndarray
    col_marginals: np.ndarray
    p_target: np.ndarray
    q_target: np.ndarray
