# src/Services/nystrom_core/factor.py
"""
Nyström Factor
==============
K̃ = V (L Lᵀ)⁻¹ Vᵀ with V_ij = k(x_i, x̃_j) and L the Cholesky factor of the
landmark block A (plus jitter). Nothing n×n is ever formed here.

A factorization is accepted at the first jitter on settings.JITTER_LADDER
where Cholesky succeeds and the reproduced diagonal stays within 1 + 1e-8;
near-singular landmark blocks that pass Cholesky with tiny pivots would
otherwise blow up K̃.
"""

from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular
from scipy.sparse.linalg import LinearOperator

from src.Core.config import settings
from src.Core.errors import DegenerateLandmarksError, InputError
from src.Core.log_stream import log_from_thread
from src.Models.nystrom_factor import NystromFactor
from src.Services.kernel import KernelFunction, gaussian_kernel, kernel_columns

DIAGONAL_SLACK = 1e-8


def _diagonal(V: np.ndarray, L: np.ndarray) -> np.ndarray:
    W = solve_triangular(L, V.T, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", W, W)


def build_factor(
    X,
    eta: float,
    landmarks,
    kernel: KernelFunction = gaussian_kernel,
    threads: Optional[int] = None,
) -> NystromFactor:
    """
    Assemble V and the smallest-jitter Cholesky factor of A.

    Raises:
        InputError: empty or repeated landmark indices
        DegenerateLandmarksError: no jitter on the ladder yields a usable factor
    """
    X = np.asarray(X, dtype=np.float64)
    idx = np.asarray(landmarks, dtype=np.intp).ravel()
    if idx.size == 0:
        raise InputError("landmark set is empty")
    if np.unique(idx).size != idx.size:
        raise InputError("landmark indices must be distinct")
    if idx.min() < 0 or idx.max() >= X.shape[0]:
        raise InputError("landmark index out of range")

    r = idx.size
    V = kernel_columns(X, X[idx], eta, kernel=kernel, threads=threads)
    V[idx, np.arange(r)] = 1.0
    A = V[idx]
    A = 0.5 * (A + A.T)

    for jitter in settings.JITTER_LADDER:
        try:
            L = cholesky(A + jitter * np.eye(r), lower=True, check_finite=False)
        except LinAlgError:
            continue
        if not np.all(np.diag(L) > 0):
            continue
        diag = _diagonal(V, L)
        if not np.all(np.isfinite(diag)) or diag.max() > 1.0 + DIAGONAL_SLACK:
            continue
        if jitter > 0:
            log_from_thread(f"[NYSTROM] landmark block singular, added jitter {jitter:g} (r={r})", "warning")
        return NystromFactor(support=X, eta=float(eta), landmarks=idx, V=V, L=L, jitter=float(jitter))

    raise DegenerateLandmarksError(
        f"Cholesky of the {r}x{r} landmark block failed up to jitter {settings.JITTER_LADDER[-1]:g}",
        {"rank": r},
    )


def factor_matvec(F: NystromFactor, w) -> np.ndarray:
    """
    K̃w = V (L⁻ᵀ (L⁻¹ (Vᵀ w))) in O(nr). K̃ is symmetric, so this is also K̃ᵀw.

    Raises:
        InputError: length mismatch
    """
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.shape[0] != F.n:
        raise InputError(f"vector length {w.shape[0]} does not match factor size {F.n}")
    z = solve_triangular(F.L, F.V.T @ w, lower=True, check_finite=False)
    z = solve_triangular(F.L, z, lower=True, trans="T", check_finite=False)
    return F.V @ z


def factor_diagonal(F: NystromFactor) -> np.ndarray:
    """K̃_ii = ‖L⁻¹ V_iᵀ‖² for every i."""
    return _diagonal(F.V, F.L)


def certificate_error(F: NystromFactor) -> float:
    """1 − min_i K̃_ii, the entrywise bound on K − K̃."""
    return float(1.0 - factor_diagonal(F).min())


def factor_operator(F: NystromFactor) -> LinearOperator:
    """K̃ as a scipy LinearOperator (matvec and rmatvec coincide)."""
    return LinearOperator(
        shape=(F.n, F.n),
        matvec=lambda w: factor_matvec(F, w),
        rmatvec=lambda w: factor_matvec(F, w),
        dtype=np.float64,
    )
