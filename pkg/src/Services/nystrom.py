# src/Services/nystrom.py
"""
Adaptive Nyström
================
Orchestrates nystrom_core into the rank-doubling loop:

1. r ← min(2r, r_max), starting from max(2, min_rank)
2. Sample r landmarks from leverage scores at ridge level τ, computed once
   per call (the ridge does not change between rounds)
3. Build the factor, err ← 1 − min_i K̃_ii
4. Stop when err ≤ τ; at r = r_max with err > τ raise RankExhaustedError

err ≤ τ certifies ‖K − K̃‖_∞ ≤ τ because K − K̃ is PSD and the largest entry
of a PSD matrix sits on its diagonal.
"""

from typing import Literal, NamedTuple, Optional

import numpy as np

from src.Core.errors import InputError, RankExhaustedError
from src.Core.log_stream import log_from_thread
from src.Models.nystrom_factor import NystromFactor
from src.Services.kernel import KernelFunction, gaussian_kernel
from src.Services.nystrom_core import (
    approximate_ridge_leverage_scores,
    build_factor,
    certificate_error,
    sample_landmarks,
    sample_uniform_landmarks,
)

Sampler = Literal["leverage", "uniform"]


class AdaptiveNystromResult(NamedTuple):
    factor: NystromFactor
    rank: int
    rounds: int
    err: float


def _scores(X, eta, lam, rng, sampler: Sampler, kernel: KernelFunction) -> Optional[np.ndarray]:
    if sampler == "uniform":
        return None
    return approximate_ridge_leverage_scores(X, eta, lam, rng, kernel=kernel)


def _draw(n: int, r: int, scores: Optional[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    if scores is None or r == n:
        return sample_uniform_landmarks(n, r, rng)
    return sample_landmarks(scores, r, rng)


def nystrom_fixed_rank(
    X,
    eta: float,
    r: int,
    rng: np.random.Generator,
    lam: float = 1e-6,
    sampler: Sampler = "leverage",
    kernel: KernelFunction = gaussian_kernel,
    threads: Optional[int] = None,
) -> AdaptiveNystromResult:
    """
    One factor at a caller-chosen rank (no doubling). Reports the achieved err.

    Raises:
        InputError: r outside [1, n]
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= r <= n:
        raise InputError(f"fixed rank must lie in [1, {n}], got {r}")
    scores = _scores(X, eta, lam, rng, sampler, kernel) if r < n else None
    landmarks = _draw(n, r, scores, rng)
    factor = build_factor(X, eta, landmarks, kernel=kernel, threads=threads)
    err = certificate_error(factor)
    log_from_thread(f"[NYSTROM] fixed rank r={r} err={err:.3e} jitter={factor.jitter:g}")
    return AdaptiveNystromResult(factor=factor, rank=r, rounds=1, err=err)


def adaptive_nystrom(
    X,
    eta: float,
    tau: float,
    rng: np.random.Generator,
    r_max: Optional[int] = None,
    min_rank: int = 2,
    sampler: Sampler = "leverage",
    kernel: KernelFunction = gaussian_kernel,
    threads: Optional[int] = None,
) -> AdaptiveNystromResult:
    """
    Double the rank until the diagonal certificate reaches τ.

    Args:
        r_max: rank ceiling, defaults to n
        min_rank: first rank tried (the pipeline raises it on retries)

    Raises:
        InputError: tau ≤ 0, r_max outside [1, n] or empty support
        RankExhaustedError: err > τ at r = r_max (carries the last err)
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if tau <= 0:
        raise InputError(f"tau must be > 0, got {tau}")
    if n == 0:
        raise InputError("cannot approximate the kernel of an empty support")
    r_max = n if r_max is None else int(r_max)
    if not 1 <= r_max <= n:
        raise InputError(f"r_max must lie in [1, {n}], got {r_max}")

    r = min(max(2, int(min_rank)), r_max)
    scores = _scores(X, eta, tau, rng, sampler, kernel) if r < n else None
    rounds = 0
    while True:
        rounds += 1
        landmarks = _draw(n, r, scores, rng)
        factor = build_factor(X, eta, landmarks, kernel=kernel, threads=threads)
        err = certificate_error(factor)
        log_from_thread(f"[NYSTROM] round {rounds}: r={r} err={err:.3e} tau={tau:.3e}")

        if err <= tau:
            return AdaptiveNystromResult(factor=factor, rank=r, rounds=rounds, err=err)
        if r >= r_max:
            raise RankExhaustedError(
                f"certificate {err:.3e} above tau {tau:.3e} at r_max={r_max}", err=err, rank=r
            )
        r = min(2 * r, r_max)
