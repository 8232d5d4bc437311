# src/Services/instance_generator.py
"""
Synthetic instances for the benchmark, validation suites and tests.

- uniform_cloud: points uniform in the unit cube [0, 1]^d (d=2 is the unit square)
- curve_cloud: points on a 1-D curve in R^d, a helix in R^3 grown by one
  perpendicular segment of length 1/k² per extra dimension k, so the
  intrinsic dimension stays 1 while the ambient dimension varies
- uniform_square_instance / curve_instance: two such clouds merged

Every generator draws from the Generator it is handed; nothing is global.
"""

import numpy as np

from src.Core.errors import InputError
from src.Schemas.point_cloud import ProblemInstance, WeightedCloud
from src.Services.geometry import merge_supports

HELIX_TURNS = 1.5
HELIX_RADIUS = 0.5
HELIX_LENGTH = float(np.hypot(2.0 * np.pi * HELIX_TURNS * HELIX_RADIUS, 1.0))


def _uniform_weights(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def uniform_cloud(n: int, rng: np.random.Generator, d: int = 2) -> WeightedCloud:
    if n < 1 or d < 1:
        raise InputError(f"need n ≥ 1 and d ≥ 1, got n={n}, d={d}")
    return WeightedCloud(points=rng.random((n, d)), weights=_uniform_weights(n))


def _helix(s: np.ndarray) -> np.ndarray:
    # unit-speed open helix, one and a half turns around the z axis
    t = s / HELIX_LENGTH
    angle = 2.0 * np.pi * HELIX_TURNS * t
    return np.column_stack([HELIX_RADIUS * np.cos(angle), HELIX_RADIUS * np.sin(angle), t - 0.5])


def _check_curve_dimension(d: int) -> None:
    if d < 3:
        raise InputError(f"the curve needs d ≥ 3, got {d}")


def curve_length(d: int) -> float:
    """Helix length plus the segments 1/k² for k = 4..d."""
    _check_curve_dimension(d)
    total = HELIX_LENGTH
    for k in range(4, d + 1):
        total += 1.0 / k ** 2
    return total


def curve_points(s, d: int) -> np.ndarray:
    """
    Points at arc lengths s on the curve in R^d.

    The R^3 part is the helix; for each k = 4..d the curve in R^k extends
    the one in R^{k-1} by a segment of length 1/k² along axis k, starting at
    the current endpoint. Arc lengths are clipped to [0, curve_length(d)].
    """
    _check_curve_dimension(d)
    s = np.clip(np.atleast_1d(np.asarray(s, dtype=np.float64)), 0.0, curve_length(d))
    points = np.zeros((s.shape[0], d))
    points[:, :3] = _helix(np.minimum(s, HELIX_LENGTH))
    start = HELIX_LENGTH
    for k in range(4, d + 1):
        points[:, k - 1] = np.clip(s - start, 0.0, 1.0 / k ** 2)
        start += 1.0 / k ** 2
    return points


def curve_cloud(n: int, d: int, rng: np.random.Generator) -> WeightedCloud:
    """n points uniform in arc length on the curve in R^d."""
    if n < 1:
        raise InputError(f"need n ≥ 1, got {n}")
    s = rng.uniform(0.0, curve_length(d), n)
    return WeightedCloud(points=curve_points(s, d), weights=_uniform_weights(n))


def uniform_square_instance(n: int, rng: np.random.Generator, d: int = 2,
                            eta: float = 1.0, eps: float = 0.1) -> ProblemInstance:
    """Two uniform clouds of ⌈n/2⌉ and ⌊n/2⌋ points, merged and centered (m = n)."""
    if n < 2:
        raise InputError(f"an instance needs n ≥ 2, got {n}")
    a = uniform_cloud(n - n // 2, rng, d)
    b = uniform_cloud(n // 2, rng, d)
    return merge_supports(a, b, eta=eta, eps=eps)


def curve_instance(n: int, d: int, rng: np.random.Generator,
                   eta: float = 1.0, eps: float = 0.1) -> ProblemInstance:
    if n < 2:
        raise InputError(f"an instance needs n ≥ 2, got {n}")
    a = curve_cloud(n - n // 2, d, rng)
    b = curve_cloud(n // 2, d, rng)
    return merge_supports(a, b, eta=eta, eps=eps)
