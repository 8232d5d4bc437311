# src/Services/nystrom_core/__init__.py
"""
Nyström Core Module
===================
Building blocks of the low-rank kernel approximation.

Components:
- leverage_scores: exact and recursive ridge leverage-score estimates
- landmarks: score-proportional and uniform landmark sampling
- factor: V/L construction with the jitter ladder, O(nr) matvec, diagonal
"""

from .leverage_scores import approximate_ridge_leverage_scores, exact_ridge_leverage_scores
from .landmarks import sample_landmarks, sample_uniform_landmarks
from .factor import (
    build_factor,
    certificate_error,
    factor_diagonal,
    factor_matvec,
    factor_operator,
)

__all__ = [
    # Leverage scores
    'approximate_ridge_leverage_scores',
    'exact_ridge_leverage_scores',

    # Landmarks
    'sample_landmarks',
    'sample_uniform_landmarks',

    # Factor
    'build_factor',
    'certificate_error',
    'factor_diagonal',
    'factor_matvec',
    'factor_operator',
]
