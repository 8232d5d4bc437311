# src/Services/reference.py
"""
Reference Oracle
================

Dense ground truth for desk-scale instances. Never on the large-scale path.

- entropic_objective / shannon_entropy / kl_divergence (0·log 0 = 0)
- dense_sinkhorn_projection: log-domain alternating scaling with
  scipy.special.logsumexp, then exact dense rounding onto M(p, q)
- sinkhorn_2x2_closed_form: closed-form projection of [[1−ε, ε], [1−δ, δ]]
  onto uniform marginals
- densify_plan: materialize a factored plan or Nyström factor column by column
- reference_w_eta: W_η(p, q) and P^η for a ProblemInstance
"""

import math
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import entr, logsumexp, rel_entr

from src.Core.config import settings
from src.Core.errors import CapacityError, InputError, OracleError
from src.Core.log_stream import log_from_thread
from src.Models.nystrom_factor import NystromFactor
from src.Models.plan import DensePlan, FactoredPlan
from src.Schemas.point_cloud import ProblemInstance
from src.Services.geometry import pairwise_squared_costs
from src.Services.nystrom_core import factor_matvec
from src.Services.rounding import plan_matvec

PlanLike = Union[DensePlan, np.ndarray]


def _entries(P: PlanLike) -> np.ndarray:
    return P.entries if isinstance(P, DensePlan) else np.asarray(P, dtype=np.float64)


# ==========================================================
# OBJECTIVE, ENTROPY, DIVERGENCE
# ==========================================================

def cost_matrix(X) -> np.ndarray:
    """C_ij = ‖x_i − x_j‖² with an exact zero diagonal."""
    return pairwise_squared_costs(np.asarray(X, dtype=np.float64))


def shannon_entropy(P: PlanLike) -> float:
    """H(P) = Σ P_ij log(1/P_ij)."""
    return float(entr(_entries(P)).sum())


def entropic_objective(C, P: PlanLike, eta: float) -> float:
    """
    V_C(P) = ⟨C, P⟩ − η⁻¹H(P).

    Raises:
        InputError: shape mismatch, eta ≤ 0 or a negative entry in P
    """
    C = np.asarray(C, dtype=np.float64)
    E = _entries(P)
    if C.shape != E.shape:
        raise InputError(f"cost {C.shape} and plan {E.shape} disagree")
    if eta <= 0:
        raise InputError(f"eta must be > 0, got {eta}")
    if np.any(E < 0):
        raise InputError("plan has negative entries")
    return float((C * E).sum() - shannon_entropy(E) / eta)


def objective_gradient(C, P: PlanLike, eta: float) -> np.ndarray:
    """∇V_C(P) = C + η⁻¹(log P + 1), for P with positive entries."""
    return np.asarray(C, dtype=np.float64) + (np.log(_entries(P)) + 1.0) / eta


def kl_divergence(P: PlanLike, Q: PlanLike) -> float:
    """Σ P_ij log(P_ij / Q_ij); +inf when P charges an entry where Q vanishes."""
    return float(rel_entr(_entries(P), _entries(Q)).sum())


# ==========================================================
# DENSE PROJECTION
# ==========================================================

def dense_round(F, p, q) -> np.ndarray:
    """Dense rounding of a nonnegative matrix onto M(p, q)."""
    F = np.array(F, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)

    r = F.sum(axis=1)
    x = np.where(r > 0, np.minimum(p / np.where(r > 0, r, 1.0), 1.0), 1.0)
    F *= x[:, None]
    c = F.sum(axis=0)
    y = np.where(c > 0, np.minimum(q / np.where(c > 0, c, 1.0), 1.0), 1.0)
    F *= y[None, :]

    err_r = np.maximum(p - F.sum(axis=1), 0.0)
    err_c = np.maximum(q - F.sum(axis=0), 0.0)
    mass = err_r.sum()
    if mass > 0:
        F += np.outer(err_r, err_c) / mass
    return F


def _log_projection(log_K: np.ndarray, p: np.ndarray, q: np.ndarray, tol: float, max_iters: int) -> np.ndarray:
    with np.errstate(divide="ignore"):
        log_p = np.log(p)
        log_q = np.log(q)

    f = np.zeros(p.shape[0])
    g = np.zeros(q.shape[0])

    def _violation(f, g):
        P = np.exp(log_K + f[:, None] + g[None, :])
        return P, float(np.abs(P.sum(axis=1) - p).sum() + np.abs(P.sum(axis=0) - q).sum())

    P, violation = _violation(f, g)
    iterations = 0
    while violation > tol:
        if iterations >= max_iters:
            raise OracleError(
                f"dense projection stuck at violation {violation:.3e}",
                violation=violation, iterations=iterations,
            )
        f = log_p - logsumexp(log_K + g[None, :], axis=1)
        g = log_q - logsumexp(log_K + f[:, None], axis=0)
        iterations += 1
        P, violation = _violation(f, g)
    log_from_thread(f"[REFERENCE] dense projection: {iterations} iterations, violation {violation:.3e}")
    return P


def dense_sinkhorn_projection(
    K,
    p,
    q,
    tol: float = 1e-12,
    log_kernel: Optional[np.ndarray] = None,
    max_iters: Optional[int] = None,
    cap: Optional[int] = None,
) -> DensePlan:
    """
    Sinkhorn projection of a positive matrix onto M(p, q).

    Alternating row/column normalization in log domain until the ℓ₁
    violation is ≤ tol, then exact dense rounding. Pass `log_kernel` (e.g.
    −ηC) instead of K when entries would underflow.

    Raises:
        InputError: nonpositive K, tol ≤ 0 or shape mismatch
        CapacityError: n above settings.PROJECTION_CAP
        OracleError: no convergence within settings.ORACLE_MAX_ITERS
    """
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if tol <= 0:
        raise InputError(f"tol must be > 0, got {tol}")

    if log_kernel is None:
        K = np.asarray(K, dtype=np.float64)
        if np.any(K <= 0) or not np.all(np.isfinite(K)):
            raise InputError("dense projection needs a strictly positive kernel")
        log_K = np.log(K)
    else:
        log_K = np.asarray(log_kernel, dtype=np.float64)

    n = log_K.shape[0]
    limit = settings.PROJECTION_CAP if cap is None else cap
    if n > limit:
        raise CapacityError(f"dense projection of size {n} exceeds cap {limit}", n=n, cap=limit)
    if log_K.shape != (n, n) or p.shape[0] != n or q.shape[0] != n:
        raise InputError(f"shape mismatch: kernel {log_K.shape}, p {p.shape[0]}, q {q.shape[0]}")

    P = _log_projection(log_K, p, q, tol, settings.ORACLE_MAX_ITERS if max_iters is None else max_iters)
    rounded = dense_round(P, p, q)
    return DensePlan.from_matrix(rounded / rounded.sum())


def sinkhorn_2x2_closed_form(epsilon: float, delta: float) -> float:
    """
    a such that the projection of [[1−ε, ε], [1−δ, δ]] onto uniform marginals
    is [[a, ½−a], [½−a, a]]:

        a = √(δ(1−ε)) / (2(√(δ(1−ε)) + √(ε(1−δ))))

    Raises:
        InputError: epsilon or delta outside (0, 1)
    """
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise InputError(f"epsilon and delta must lie in (0, 1), got {epsilon}, {delta}")
    s = math.sqrt(delta * (1 - epsilon))
    t = math.sqrt(epsilon * (1 - delta))
    return s / (2.0 * (s + t))


def two_by_two_kernel(epsilon: float, delta: float) -> np.ndarray:
    """[[1−ε, ε], [1−δ, δ]]."""
    return np.array([[1.0 - epsilon, epsilon], [1.0 - delta, delta]])


# ==========================================================
# DENSIFICATION
# ==========================================================

def densify_plan(plan: Union[FactoredPlan, NystromFactor], n: Optional[int] = None,
                 dense_cap: Optional[int] = None) -> np.ndarray:
    """
    Materialize a factored plan (or K̃ of a Nyström factor) by applying it to
    the n standard basis vectors.

    Raises:
        CapacityError: n above the dense cap
    """
    size = plan.n if n is None else n
    cap = settings.DENSE_CAP if dense_cap is None else dense_cap
    if size > cap:
        raise CapacityError(f"densifying size {size} exceeds cap {cap}", n=size, cap=cap)

    apply = (lambda w: factor_matvec(plan, w)) if isinstance(plan, NystromFactor) else (lambda w: plan_matvec(plan, w))
    out = np.empty((size, size))
    basis = np.zeros(size)
    for j in range(size):
        basis[j] = 1.0
        out[:, j] = apply(basis)
        basis[j] = 0.0
    return out


# ==========================================================
# GROUND TRUTH
# ==========================================================

def reference_w_eta(instance: ProblemInstance, tol: float = 1e-10) -> Tuple[float, DensePlan]:
    """
    W_η(p, q) = min over M(p, q) of ⟨C, P⟩ − η⁻¹H(P), with its minimizer P^η.

    Raises:
        CapacityError: m above settings.PROJECTION_CAP
        OracleError: projection did not converge
    """
    if instance.m > settings.PROJECTION_CAP:
        raise CapacityError(f"reference of size {instance.m} exceeds cap {settings.PROJECTION_CAP}",
                            n=instance.m, cap=settings.PROJECTION_CAP)
    C = cost_matrix(instance.support)
    plan = dense_sinkhorn_projection(None, instance.p, instance.q, tol=tol, log_kernel=-instance.eta * C)
    return entropic_objective(C, plan, instance.eta), plan
