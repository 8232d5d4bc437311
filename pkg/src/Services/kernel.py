# src/Services/kernel.py
"""
Kernel Service
==============

Gaussian kernel k_η(x, y) = exp(−η‖x−y‖²): entry evaluation, row-blocked
assembly (dense matrix or tall landmark columns), and spectral diagnostics
used by tests and `validate`:

- eigen_spectrum / effective_dimension (d_eff(τ) = Σ λ_j/(λ_j + τn))
- taylor_error_bound, eigen_decay_bound, effective_dimension_bound
  (ball-of-radius-R bounds on the spectrum)
- approximation_rank (d_eff at the pipeline tolerance)

Kernel assembly is the only place that touches O(n·r) or O(n²) kernel
entries; rows are split into blocks of settings.ROW_BLOCK and evaluated on a
thread pool (numpy releases the GIL in exp and matmul).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigvalsh
from scipy.special import gammaln

from src.Core.config import settings
from src.Core.errors import CapacityError, InputError
from src.Models.spectrum import KernelParams, SymmetricSpectrum
from src.Services.geometry import pairwise_squared_costs, squared_cost

KernelFunction = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


def gaussian_kernel(X: np.ndarray, Y: np.ndarray, eta: float) -> np.ndarray:
    """Block of exp(−η‖x_i − y_j‖²) for rows of X and Y."""
    return np.exp(-eta * pairwise_squared_costs(X, Y))


def kernel_entry(x, y, params: KernelParams) -> float:
    """
    exp(−η·‖x−y‖²); equals 1 exactly when x = y.

    Raises:
        InputError: dimension mismatch
    """
    return math.exp(-params.eta * squared_cost(x, y))


def kernel_columns(
    X: np.ndarray,
    Y: np.ndarray,
    eta: float,
    kernel: KernelFunction = gaussian_kernel,
    threads: Optional[int] = None,
) -> np.ndarray:
    """
    (n, r) matrix k(X_i, Y_j), assembled in row blocks on a thread pool.

    Entries whose rows coincide exactly with a column point equal 1.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")

    n = X.shape[0]
    block = settings.ROW_BLOCK
    workers = threads or settings.worker_count
    out = np.empty((n, Y.shape[0]), dtype=np.float64)

    def _fill(start: int) -> None:
        stop = min(start + block, n)
        out[start:stop] = kernel(X[start:stop], Y, eta)

    starts = range(0, n, block)
    if workers <= 1 or n <= block:
        for s in starts:
            _fill(s)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(_fill, starts))
    return out


def dense_kernel(
    X,
    params: KernelParams,
    dense_cap: Optional[int] = None,
    kernel: KernelFunction = gaussian_kernel,
) -> np.ndarray:
    """
    Symmetric n×n kernel matrix with unit diagonal.

    Raises:
        InputError: empty support
        CapacityError: n above the dense cap (default settings.DENSE_CAP)
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    cap = settings.DENSE_CAP if dense_cap is None else dense_cap
    if n < 1:
        raise InputError("dense_kernel needs at least one point")
    if n > cap:
        raise CapacityError(f"dense kernel of size {n} exceeds cap {cap}", n=n, cap=cap)
    K = kernel_columns(X, X, params.eta, kernel=kernel)
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, 1.0)
    return K


# ==========================================================
# SPECTRAL DIAGNOSTICS
# ==========================================================

def eigen_spectrum(K, eigen_cap: Optional[int] = None) -> SymmetricSpectrum:
    """
    Descending eigenvalues of a dense symmetric matrix.

    Raises:
        InputError: K not square or not symmetric within 1e-10
        CapacityError: size above settings.EIGEN_CAP
    """
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InputError(f"expected a square matrix, got shape {K.shape}")
    cap = settings.EIGEN_CAP if eigen_cap is None else eigen_cap
    if K.shape[0] > cap:
        raise CapacityError(f"eigendecomposition of size {K.shape[0]} exceeds cap {cap}",
                            n=K.shape[0], cap=cap)
    if K.size and float(np.abs(K - K.T).max()) > 1e-10:
        raise InputError("matrix is not symmetric within 1e-10")
    try:
        return SymmetricSpectrum.from_eigenvalues(eigvalsh(K))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def effective_dimension(spectrum: SymmetricSpectrum, tau: float, n: Optional[int] = None) -> float:
    """
    d_eff(τ) = Σ_j λ_j / (λ_j + τn), a value in [0, n].

    Raises:
        InputError: tau ≤ 0
    """
    if tau <= 0:
        raise InputError(f"tau must be > 0, got {tau}")
    n = spectrum.n if n is None else n
    lam = spectrum.eigenvalues
    return float(np.sum(lam / (lam + tau * n)))


def taylor_error_bound(T: int, eta: float, R: float) -> float:
    """
    (2ηR²)^{T+1} / (T+1)!, evaluated in log space (finite for T up to 1e4+).
    """
    if T < 0:
        raise InputError(f"T must be ≥ 0, got {T}")
    base = 2.0 * eta * R * R
    if base == 0.0:
        return 0.0
    return float(np.exp((T + 1) * math.log(base) - gammaln(T + 2)))


def eigen_decay_bound(t: int, d: int, eta: float, R: float, n: int) -> float:
    """
    Upper bound on λ_{t+1}(K) for n points in a d-dimensional ball of radius R.

    n·exp(−(d/2e)·t^{1/d}·log(d·t^{1/d} / (4e²ηR²))), valid for t ≥ (2e)^d with a
    positive log factor; returns +inf where the bound does not apply.
    """
    if t < (2 * math.e) ** d or eta * R * R == 0.0:
        return math.inf
    root = t ** (1.0 / d)
    log_factor = math.log(d * root / (4 * math.e ** 2 * eta * R * R))
    if log_factor <= 0:
        return math.inf
    return n * math.exp(-(d / (2 * math.e)) * root * log_factor)


def effective_dimension_bound(tau: float, d: int, eta: float, R: float) -> float:
    """3(6 + (41/d)ηR² + (3/d)log(1/τ))^d for τ ∈ (0, 1]."""
    if not 0 < tau <= 1:
        raise InputError(f"tau must lie in (0, 1], got {tau}")
    return 3.0 * (6.0 + (41.0 / d) * eta * R * R + (3.0 / d) * math.log(1.0 / tau)) ** d


def approximation_rank(spectrum: SymmetricSpectrum, eps_prime: float, eta: float, R: float, n: Optional[int] = None) -> float:
    """d_eff at the pipeline tolerance (ε′/2n)·e^{−4ηR²}."""
    n = spectrum.n if n is None else n
    tau = eps_prime / (2.0 * n) * math.exp(-4.0 * eta * R * R)
    return effective_dimension(spectrum, tau, n)
