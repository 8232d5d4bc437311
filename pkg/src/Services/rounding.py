# src/Services/rounding.py
"""
Rounding Service
================

Repairs an approximately feasible nonnegative matrix F = e^u · op · e^v into
an exact coupling G ∈ M(p, q) without ever forming F:

1. x = min(p / F1, 1)                → u′ = u + log x
2. y = min(q / F′ᵀ1, 1)              → v′ = v + log y
3. err_r = p − F″1, err_c = q − F″ᵀ1 (both ≥ 0)
4. G = F″ + err_r err_cᵀ / ‖err_r‖₁

The rows and columns scaled to zero carry log-scalings of -inf. Three
operator applications in total; everything else is O(n).
"""

from typing import Optional, Tuple

import numpy as np
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from src.Core.errors import InputError, InvalidOperatorError
from src.Models.plan import FactoredPlan, ScaledOperator
from src.Models.scaling import ScalingPair

CLAMP_TOL = 1e-14
IMBALANCE_TOL = 1e-12


def _scale_down(target: np.ndarray, marginal: np.ndarray) -> np.ndarray:
    safe = np.where(marginal > 0, marginal, 1.0)
    return np.where(marginal > 0, np.minimum(target / safe, 1.0), 1.0)


def clamp_tolerance(target: np.ndarray) -> float:
    """Largest negative residual clamped to 0: CLAMP_TOL · n · max(1, ‖target‖₁)."""
    return CLAMP_TOL * max(1, target.shape[0]) * max(1.0, float(np.abs(target).sum()))


def _residual(target: np.ndarray, marginal: np.ndarray, side: str) -> np.ndarray:
    err = target - marginal
    worst = float(err.min()) if err.size else 0.0
    if worst < -clamp_tolerance(target):
        raise InvalidOperatorError(
            f"{side} marginal exceeds its target by {-worst:.3e} after scaling",
            {"side": side, "excess": -worst},
        )
    return np.maximum(err, 0.0)


def round_to_polytope(
    op,
    scalings: ScalingPair,
    p,
    q,
    row_marginals: Optional[np.ndarray] = None,
) -> FactoredPlan:
    """
    Feasible factored plan from F = e^u · op · e^v.

    Args:
        row_marginals: cached F1 (e.g. SinkhornResult.row_marginals); one
            operator application is saved when given

    Raises:
        InputError: length mismatch
        InvalidOperatorError: negative marginal, or mass imbalance between
            the row and column corrections
    """
    op = op if isinstance(op, LinearOperator) else aslinearoperator(op)
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    n = op.shape[0]
    if p.shape[0] != n or q.shape[0] != n or scalings.u.shape[0] != n:
        raise InputError("round_to_polytope: inconsistent lengths")

    F = ScaledOperator(op, scalings)
    r = F.row_sums() if row_marginals is None else np.asarray(row_marginals, dtype=np.float64)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise InvalidOperatorError("negative or nonfinite row marginal", {"side": "row"})

    with np.errstate(divide="ignore"):
        u_prime = scalings.u + np.log(_scale_down(p, r))
    F_row = ScaledOperator(op, ScalingPair(u=u_prime, v=scalings.v))
    c_prime = F_row.col_sums()
    if np.any(c_prime < 0) or not np.all(np.isfinite(c_prime)):
        raise InvalidOperatorError("negative or nonfinite column marginal", {"side": "column"})

    y = _scale_down(q, c_prime)
    with np.errstate(divide="ignore"):
        v_prime = scalings.v + np.log(y)
    base = ScaledOperator(op, ScalingPair(u=u_prime, v=v_prime))
    r_final = base.row_sums()
    c_final = y * c_prime

    err_r = _residual(p, r_final, "row")
    err_c = _residual(q, c_final, "column")
    mass_r = float(err_r.sum())
    mass_c = float(err_c.sum())
    if (mass_r == 0.0) != (mass_c == 0.0) and max(mass_r, mass_c) > IMBALANCE_TOL:
        raise InvalidOperatorError(
            f"unbalanced corrections: row {mass_r:.3e} vs column {mass_c:.3e}",
            {"row_mass": mass_r, "col_mass": mass_c},
        )

    scale = 1.0 / mass_r if mass_r > 0 else 0.0
    err_r.setflags(write=False)
    err_c.setflags(write=False)
    return FactoredPlan(base=base, correction_row=err_r, correction_col=err_c, correction_scale=scale)


def plan_matvec(plan: FactoredPlan, w) -> np.ndarray:
    """P̂w = base·w + correction_row·(correction_col·w)·scale."""
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.shape[0] != plan.n:
        raise InputError(f"vector length {w.shape[0]} does not match plan size {plan.n}")
    return plan.base.matvec(w) + plan.correction_row * (plan.correction_col @ w) * plan.correction_scale


def plan_rmatvec(plan: FactoredPlan, w) -> np.ndarray:
    """P̂ᵀw."""
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.shape[0] != plan.n:
        raise InputError(f"vector length {w.shape[0]} does not match plan size {plan.n}")
    return plan.base.rmatvec(w) + plan.correction_col * (plan.correction_row @ w) * plan.correction_scale


def plan_marginals(plan: FactoredPlan) -> Tuple[np.ndarray, np.ndarray]:
    """(P̂1, P̂ᵀ1) through factored matvecs."""
    ones = np.ones(plan.n)
    return plan_matvec(plan, ones), plan_rmatvec(plan, ones)


def plan_transport_cost(plan: FactoredPlan, X) -> float:
    """
    ⟨C, P̂⟩ for C_ij = ‖x_i − x_j‖², using d plan matvecs:

        Σ_ij P_ij(‖x_i‖² + ‖x_j‖²) − 2 Σ_k X[:,k]ᵀ P̂ X[:,k]
    """
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] != plan.n:
        raise InputError(f"support size {X.shape[0]} does not match plan size {plan.n}")
    sq = (X * X).sum(axis=1)
    rows, cols = plan_marginals(plan)
    cross = sum(float(X[:, k] @ plan_matvec(plan, X[:, k])) for k in range(X.shape[1]))
    return max(float(sq @ rows + sq @ cols - 2.0 * cross), 0.0)
