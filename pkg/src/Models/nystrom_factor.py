# src/Models/nystrom_factor.py
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NystromFactor:
    """
    Matrix-free Nyström approximation K̃ = V (L Lᵀ)⁻¹ Vᵀ.

    Attributes:
        support: (n, d) points the factor was built on
        eta: kernel width
        landmarks: r distinct indices into support
        V: (n, r) with V[i, j] = k(x_i, x_landmark_j)
        L: (r, r) lower-triangular, L Lᵀ = A + jitter·I
        jitter: diagonal shift actually added to A

    Immutable once built; matvecs on it are reentrant.
    """

    support: np.ndarray
    eta: float
    landmarks: np.ndarray
    V: np.ndarray
    L: np.ndarray
    jitter: float

    def __post_init__(self):
        for arr in (self.landmarks, self.V, self.L):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self.V.shape[0])

    @property
    def rank(self) -> int:
        return int(self.V.shape[1])
