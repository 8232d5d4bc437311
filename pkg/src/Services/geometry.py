# src/Services/geometry.py
"""
Geometry Service
================

Input representation plumbing: squared-Euclidean cost, centering, and
merging two weighted clouds into one ProblemInstance.

Key Concepts:
- ‖x−y‖² is translation invariant, so the union is centered at its mean
  to shrink R (R enters every tolerance through e^{4ηR²})
- Duplicates across the two clouds are kept; zero-weight points stay in
  the support (m = n_a + n_b)

All functions are pure and safe to call concurrently.
"""

from typing import Tuple

import numpy as np

from src.Core.errors import InputError
from src.Schemas.point_cloud import ProblemInstance, WeightedCloud


def squared_cost(x, y) -> float:
    """
    ‖x − y‖₂² for two vectors of equal dimension.

    Raises:
        InputError: dimension mismatch
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise InputError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    diff = x - y
    return float(diff @ diff)


def pairwise_squared_costs(X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    """
    Matrix of ‖x_i − y_j‖² for the rows of X and Y (Y defaults to X).

    Uses the expansion ‖x‖² + ‖y‖² − 2x·y, clamped at 0 against round-off,
    and sets exact zeros on the diagonal when Y is X.
    """
    X = np.asarray(X, dtype=np.float64)
    same = Y is None
    Y = X if same else np.asarray(Y, dtype=np.float64)
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    sq = (X * X).sum(axis=1)[:, None] + (Y * Y).sum(axis=1)[None, :] - 2.0 * (X @ Y.T)
    np.maximum(sq, 0.0, out=sq)
    if same:
        np.fill_diagonal(sq, 0.0)
    return sq


def center_and_radius(points) -> Tuple[np.ndarray, float]:
    """
    Translate points by minus their coordinate-wise mean.

    Returns:
        (centered points, R) with R the largest centered norm

    Raises:
        InputError: empty input
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InputError("cannot center an empty point set")
    centered = pts - pts.mean(axis=0, keepdims=True)
    radius = float(np.linalg.norm(centered, axis=1).max())
    return centered, radius


def merge_supports(a: WeightedCloud, b: WeightedCloud, eta: float = 1.0, eps: float = 1.0) -> ProblemInstance:
    """
    Stack two clouds into one centered support with padded marginals.

    support = [a.points; b.points] − mean, p = [a.weights, 0], q = [0, b.weights].

    Raises:
        InputError: dimension mismatch or empty cloud
    """
    if a.n == 0 or b.n == 0:
        raise InputError("empty cloud")
    if a.d != b.d:
        raise InputError(f"dimension mismatch: clouds have d={a.d} and d={b.d}")

    support, radius = center_and_radius(np.vstack([a.points, b.points]))
    p = np.concatenate([a.weights, np.zeros(b.n)])
    q = np.concatenate([np.zeros(a.n), b.weights])
    return ProblemInstance(support=support, p=p, q=q, eta=eta, eps=eps, radius=radius)
