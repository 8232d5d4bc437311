# src/Services/nystrom_core/landmarks.py
"""
Landmark Sampling
=================
Probability-proportional-to-score sampling without replacement, plus the
uniform baseline.
"""

import numpy as np

from src.Core.errors import InputError


def sample_landmarks(scores, r: int, rng: np.random.Generator) -> np.ndarray:
    """
    r distinct indices drawn without replacement with probability ∝ score.

    Returns sorted indices; r = n returns every index.

    Raises:
        InputError: r > n, r < 1 or a nonpositive score
    """
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.shape[0]
    if r > n:
        raise InputError(f"cannot sample {r} landmarks from {n} points")
    if r < 1:
        raise InputError(f"landmark count must be ≥ 1, got {r}")
    if np.any(~np.isfinite(scores)) or np.any(scores <= 0):
        raise InputError("leverage scores must be finite and positive")
    if r == n:
        return np.arange(n)
    chosen = rng.choice(n, size=r, replace=False, p=scores / scores.sum())
    return np.sort(chosen)


def sample_uniform_landmarks(n: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """r distinct indices drawn uniformly (the plain Nyström baseline)."""
    return sample_landmarks(np.ones(n), r, rng)
