# src/Services/sinkhorn.py
"""
Sinkhorn Service
================

Matrix-free alternating scaling against any positive LinearOperator.

Flow:
1. Smooth the targets: p′ = (1−τ)p + τ/n, q′ likewise, τ = δ/8
2. Odd steps renormalize rows, even steps columns
3. Stop once ‖P̃1 − p′‖₁ + ‖P̃ᵀ1 − q′‖₁ ≤ δ/2
4. Ŵ = η⁻¹(Σ u_i (P̃1)_i + Σ v_j (P̃ᵀ1)_j)

Scalings live in log domain (u, v) and are applied as e^u, e^v. Each step
costs one operator application: the product computed for one side's
renormalization is reused for the other side's marginal on the next step.

A renormalization denominator that is nonpositive, nonfinite or whose
scaling leaves [1e-300, 1e300] raises NonPositiveOperatorError; the pipeline
treats that as a signal to retry with a better kernel approximation.
"""

import math
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from src.Core.errors import InputError, NoConvergenceError, NonPositiveOperatorError
from src.Core.log_stream import log_from_thread
from src.Models.plan import ScaledOperator
from src.Models.scaling import ScalingPair, SinkhornResult

OVERFLOW = 1e300


def default_max_iters(delta: float, n: int, eta: float = 1.0, radius: float = 0.0) -> int:
    """128·⌈δ⁻¹(4ηR² + log(8n/δ))⌉."""
    return 128 * math.ceil((4.0 * eta * radius * radius + math.log(8.0 * n / delta)) / delta)


def smooth_marginal(p: np.ndarray, delta: float) -> np.ndarray:
    """(1 − δ/8)·p + (δ/8)/n, strictly positive and summing to 1."""
    tau = delta / 8.0
    return (1.0 - tau) * p + tau / p.shape[0]


def _as_operator(op) -> LinearOperator:
    return op if isinstance(op, LinearOperator) else aslinearoperator(op)


def _renormalize(target: np.ndarray, product: np.ndarray, side: str, iteration: int) -> np.ndarray:
    if not np.all(np.isfinite(product)) or np.any(product <= 0):
        raise NonPositiveOperatorError(
            f"nonpositive {side} denominator at iteration {iteration}",
            {"iteration": iteration, "side": side},
        )
    log_scale = np.log(target) - np.log(product)
    if log_scale.max() > math.log(OVERFLOW) or log_scale.min() < -math.log(OVERFLOW):
        raise NonPositiveOperatorError(
            f"{side} scaling left [1e-300, 1e300] at iteration {iteration}",
            {"iteration": iteration, "side": side},
        )
    return log_scale


def _violation(r, c, p_target, q_target) -> float:
    return float(np.abs(r - p_target).sum() + np.abs(c - q_target).sum())


def marginal_violation(op, scalings: ScalingPair, p_target, q_target) -> float:
    """‖P̃1 − p‖₁ + ‖P̃ᵀ1 − q‖₁ for P̃ = e^u · op · e^v, via two operator applications."""
    op = _as_operator(op)
    p_target = np.asarray(p_target, dtype=np.float64)
    q_target = np.asarray(q_target, dtype=np.float64)
    n = op.shape[0]
    if not (p_target.shape[0] == q_target.shape[0] == scalings.u.shape[0] == n):
        raise InputError("marginal_violation: inconsistent lengths")
    scaled = ScaledOperator(op, scalings)
    return _violation(scaled.row_sums(), scaled.col_sums(), p_target, q_target)


def scaling_cost(scalings: ScalingPair, row_marginals, col_marginals, eta: float = 1.0) -> float:
    """
    Ŵ = η⁻¹(Σ u_i r_i + Σ v_j c_j), equal to ⟨C̃, P̃⟩ − η⁻¹H(P̃) for C̃ = −η⁻¹ log K̃.

    O(n) given the marginals of P̃.
    """
    r = np.asarray(row_marginals, dtype=np.float64)
    c = np.asarray(col_marginals, dtype=np.float64)
    return float((scalings.u @ r + scalings.v @ c) / eta)


def sinkhorn_scale(
    op,
    p,
    q,
    delta: float,
    max_iters: Optional[int] = None,
    eta: float = 1.0,
    radius: float = 0.0,
    fixed_iterations: Optional[int] = None,
) -> SinkhornResult:
    """
    Scale op toward the smoothed marginals p′, q′.

    Args:
        op: square operator with positive entries (LinearOperator or array)
        p, q: simplex vectors
        delta: tolerance in (0, 1]
        max_iters: iteration ceiling, default_max_iters(δ, n, η, R) when None
        eta: divides Ŵ; also enters the default ceiling
        radius: support radius, only used for the default ceiling
        fixed_iterations: run exactly this many renormalizations and never
            raise NoConvergenceError

    Raises:
        InputError: δ outside (0, 1] or length mismatch
        NonPositiveOperatorError: renormalization denominator ≤ 0, or overflow
        NoConvergenceError: violation still > δ/2 after max_iters
    """
    op = _as_operator(op)
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    n = op.shape[0]
    if not 0 < delta <= 1:
        raise InputError(f"delta must lie in (0, 1], got {delta}")
    if op.shape != (n, n) or p.shape[0] != n or q.shape[0] != n:
        raise InputError(f"shape mismatch: op {op.shape}, p {p.shape[0]}, q {q.shape[0]}")

    p_target = smooth_marginal(p, delta)
    q_target = smooth_marginal(q, delta)
    limit = default_max_iters(delta, n, eta, radius) if max_iters is None else int(max_iters)
    threshold = delta / 2.0

    u = np.zeros(n)
    v = np.zeros(n)
    d1 = np.ones(n)
    d2 = np.ones(n)
    K_d2 = op.matvec(d2)
    Kt_d1 = op.rmatvec(d1)
    r = d1 * K_d2
    c = d2 * Kt_d1
    violation = _violation(r, c, p_target, q_target)

    iterations = 0
    while True:
        if fixed_iterations is not None:
            if iterations >= fixed_iterations:
                break
        elif violation <= threshold:
            break
        elif iterations >= limit:
            raise NoConvergenceError(
                f"violation {violation:.3e} above {threshold:.3e} after {iterations} iterations",
                violation=violation,
                iterations=iterations,
            )

        iterations += 1
        if iterations % 2 == 1:
            u = _renormalize(p_target, K_d2, "row", iterations)
            d1 = np.exp(u)
            r = d1 * K_d2
            Kt_d1 = op.rmatvec(d1)
            c = d2 * Kt_d1
        else:
            v = _renormalize(q_target, Kt_d1, "column", iterations)
            d2 = np.exp(v)
            c = d2 * Kt_d1
            K_d2 = op.matvec(d2)
            r = d1 * K_d2
        violation = _violation(r, c, p_target, q_target)

    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(c))):
        raise NonPositiveOperatorError("nonfinite marginals after scaling", {"iteration": iterations})

    scalings = ScalingPair(u=u, v=v)
    w_hat = scaling_cost(scalings, r, c, eta)
    log_from_thread(
        f"[SINKHORN] {iterations} iterations, violation {violation:.3e} (delta/2 = {threshold:.3e})"
    )
    return SinkhornResult(
        scalings=scalings,
        w_hat=w_hat,
        iterations=iterations,
        final_violation=violation,
        row_marginals=r,
        col_marginals=c,
        p_target=p_target,
        q_target=q_target,
    )
