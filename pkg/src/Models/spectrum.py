# src/Models/spectrum.py
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class KernelParams(BaseModel):
    """Gaussian kernel width; bandwidth σ² = 1/(2η)."""
    model_config = ConfigDict(frozen=True)

    eta: float = Field(..., gt=0)

    @property
    def sigma_sq(self) -> float:
        return 1.0 / (2.0 * self.eta)


PSD_SLACK = 1e-10


@dataclass(frozen=True)
class SymmetricSpectrum:
    """
    Descending eigenvalues λ₁ ≥ … ≥ λ_n of a PSD kernel matrix.

    Build with from_eigenvalues(): values down to -1e-10·λ₁ are treated as
    round-off and clamped to 0, anything more negative is rejected.
    """

    eigenvalues: np.ndarray

    @classmethod
    def from_eigenvalues(cls, values) -> "SymmetricSpectrum":
        lam = np.sort(np.asarray(values, dtype=np.float64))[::-1].copy()
        if lam.size:
            floor = -PSD_SLACK * max(float(lam[0]), 0.0)
            if float(lam[-1]) < floor - 1e-300:
                raise ValueError(f"eigenvalue {lam[-1]:.3e} below PSD slack {floor:.3e}")
            np.maximum(lam, 0.0, out=lam)
        lam.setflags(write=False)
        return cls(eigenvalues=lam)

    @property
    def n(self) -> int:
        return int(self.eigenvalues.shape[0])
