# src/Services/nystrom_core/leverage_scores.py
"""
Ridge Leverage Scores
=====================
ℓ_i(λ) = (K (K + λnI)⁻¹)_ii, the sampling importance of point i.

Two regimes:
- n ≤ settings.EXACT_LEVERAGE_CUTOFF: exact scores from a dense eigendecomposition
- larger n: recursive half-sampling. Recurse on a uniform half to get scores
  there, keep s = min(budget, ⌈oversampling·Σℓ̂⌉) half points drawn without
  replacement with probability ∝ score, then score every point against the
  kept set S:

      ℓ̂_i = min(1, (1/μ)·max(0, K_ii − k_iS (K_SS + μI)⁻¹ k_Si) + 1/n),   μ = λn

  Restricting to S can only shrink k_i(K+μI)⁻¹k_i and ℓ_i ≤ 1, so ℓ̂_i
  upper-bounds ℓ_i for every choice of S.

μ stays the absolute ridge of the full problem at every recursion level.
"""

import math
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigh

from src.Core.config import settings
from src.Core.errors import InputError
from src.Services.kernel import KernelFunction, gaussian_kernel, kernel_columns

_FLOOR = np.finfo(np.float64).tiny


def exact_ridge_leverage_scores(
    X: np.ndarray, eta: float, ridge: float, kernel: KernelFunction = gaussian_kernel
) -> np.ndarray:
    """diag(K (K + ridge·I)⁻¹) from a dense eigendecomposition of K."""
    K = kernel_columns(X, X, eta, kernel=kernel)
    K = 0.5 * (K + K.T)
    lam, U = eigh(K)
    np.maximum(lam, 0.0, out=lam)
    scores = (U * U) @ (lam / (lam + ridge))
    return np.maximum(scores, _FLOOR)


def _restricted_scores(
    X: np.ndarray, S: np.ndarray, eta: float, ridge: float, n_total: int, kernel: KernelFunction
) -> np.ndarray:
    KS = kernel_columns(X, X[S], eta, kernel=kernel)
    KSS = KS[S]
    KSS = 0.5 * (KSS + KSS.T) + ridge * np.eye(S.shape[0])
    try:
        factor = cho_factor(KSS, lower=True)
        solved = cho_solve(factor, KS.T)
    except LinAlgError:
        solved = np.linalg.lstsq(KSS, KS.T, rcond=None)[0]
    residual = 1.0 - np.einsum("ij,ji->i", KS, solved)
    return np.minimum(np.maximum(residual, 0.0) / ridge + 1.0 / n_total, 1.0)


def _kept_set(half: np.ndarray, half_scores: np.ndarray, oversampling: float, budget: int,
              rng: np.random.Generator) -> np.ndarray:
    p = half_scores / half_scores.sum()
    size = min(int(np.count_nonzero(p)), budget, max(1, math.ceil(oversampling * float(half_scores.sum()))))
    chosen = rng.choice(half.shape[0], size=size, replace=False, p=p)
    return np.sort(half[chosen])


def _recursive(
    X: np.ndarray,
    eta: float,
    ridge: float,
    rng: np.random.Generator,
    cutoff: int,
    oversampling: float,
    budget: int,
    n_total: int,
    kernel: KernelFunction,
) -> np.ndarray:
    n = X.shape[0]
    if n <= cutoff:
        return exact_ridge_leverage_scores(X, eta, ridge, kernel=kernel)

    half = np.sort(rng.choice(n, size=math.ceil(n / 2), replace=False))
    half_scores = _recursive(X[half], eta, ridge, rng, cutoff, oversampling, budget, n_total, kernel)
    kept = _kept_set(half, half_scores, oversampling, budget, rng)
    return _restricted_scores(X, kept, eta, ridge, n_total, kernel)


def approximate_ridge_leverage_scores(
    X,
    eta: float,
    lam: float,
    rng: np.random.Generator,
    exact_cutoff: Optional[int] = None,
    oversampling: Optional[float] = None,
    budget: Optional[int] = None,
    kernel: KernelFunction = gaussian_kernel,
) -> np.ndarray:
    """
    Positive leverage-score estimates at ridge level λ (ridge μ = λn).

    Exact below the cutoff; otherwise the recursive estimator, which
    upper-bounds the exact scores. `budget` caps the kept set per level
    (default settings.LEVERAGE_BUDGET).

    Raises:
        InputError: lam ≤ 0 or empty support
    """
    X = np.asarray(X, dtype=np.float64)
    if lam <= 0:
        raise InputError(f"lambda must be > 0, got {lam}")
    n = X.shape[0]
    if n == 0:
        raise InputError("cannot score an empty support")

    cutoff = settings.EXACT_LEVERAGE_CUTOFF if exact_cutoff is None else exact_cutoff
    factor = settings.LEVERAGE_OVERSAMPLING if oversampling is None else oversampling
    kept = settings.LEVERAGE_BUDGET if budget is None else budget
    if kept < 1:
        raise InputError(f"budget must be ≥ 1, got {kept}")
    return _recursive(X, eta, lam * n, rng, cutoff, factor, kept, n, kernel)
