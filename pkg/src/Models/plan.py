# src/Models/plan.py
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator

from src.Models.scaling import ScalingPair


class ScaledOperator(LinearOperator):
    """
    D₁ · op · D₂ for a black-box operator, D's given as log-scalings.

    matvec(w)  = e^u ⊙ op(e^v ⊙ w)
    rmatvec(w) = e^v ⊙ opᵀ(e^u ⊙ w)
    """

    def __init__(self, op: LinearOperator, scalings: ScalingPair):
        super().__init__(dtype=np.float64, shape=op.shape)
        self.op = op
        self.scalings = scalings
        self._d1 = np.exp(scalings.u)
        self._d2 = np.exp(scalings.v)

    def _matvec(self, x):
        x = np.asarray(x, dtype=np.float64).ravel()
        return self._d1 * self.op.matvec(self._d2 * x)

    def _rmatvec(self, x):
        x = np.asarray(x, dtype=np.float64).ravel()
        return self._d2 * self.op.rmatvec(self._d1 * x)

    def row_sums(self) -> np.ndarray:
        return self._matvec(np.ones(self.shape[1]))

    def col_sums(self) -> np.ndarray:
        return self._rmatvec(np.ones(self.shape[0]))


@dataclass(frozen=True)
class FactoredPlan:
    """
    Feasible coupling P̂ = base + correction_scale · correction_row correction_colᵀ.

    base is D₁′K̃D₂′ held as a ScaledOperator; the rank-one term repairs the
    marginals exactly. correction_scale is 1/‖correction_row‖₁, or 0 when the
    correction vanishes. P̂ is never materialized.
    """

    base: ScaledOperator
    correction_row: np.ndarray
    correction_col: np.ndarray
    correction_scale: float

    @property
    def n(self) -> int:
        return int(self.base.shape[0])


@dataclass(frozen=True)
class DensePlan:
    """Dense n×n coupling; entries ≥ 0 with total mass 1 within 1e-12."""

    entries: np.ndarray

    @classmethod
    def from_matrix(cls, matrix) -> "DensePlan":
        P = np.array(matrix, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError(f"a dense plan must be square, got {P.shape}")
        if np.any(P < 0):
            raise ValueError("a dense plan has nonnegative entries")
        total = float(P.sum())
        if abs(total - 1.0) > 1e-12 * max(1, P.size) ** 0.5:
            raise ValueError(f"plan mass is {total!r}, expected 1")
        P.setflags(write=False)
        return cls(entries=P)

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])
