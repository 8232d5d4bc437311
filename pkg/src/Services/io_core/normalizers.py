# src/Services/io_core/normalizers.py
"""
Point-Cloud Normalizers
=======================
Field coercion and weight normalization for CSV ingestion.

Funciones:
- coerce_number(): strict float parse of one CSV field
- is_weight_column(): header name test for the optional weight column
- normalize_weights(): rescale to the simplex, warning when far off
"""

import math
from typing import Optional

import numpy as np

from src.Core.log_stream import log_from_thread

WEIGHT_HEADERS = {"weight", "weights", "w", "mass"}
"""Accepted (case-insensitive) names of the final weight column."""

RENORMALIZE_WARN_TOL = 1e-6


def coerce_number(value: str) -> Optional[float]:
    """
    Parse a CSV field as a finite float.

    Returns:
        The float, or None when the field is empty, non-numeric or not finite.

    Examples:
        >>> coerce_number(" 1.5 ")
        1.5
        >>> coerce_number("abc") is None
        True
    """
    text = value.strip()
    if not text:
        return None
    try:
        number = float(text)
    except ValueError:
        return None
    return number if math.isfinite(number) else None


def is_weight_column(name: str) -> bool:
    return name.strip().strip('"').lower() in WEIGHT_HEADERS


def normalize_weights(weights: np.ndarray, source: str = "") -> np.ndarray:
    """
    Divide by the total so the weights sum to 1.

    Logs a warning when the total was off by more than 1e-6. The caller
    guarantees nonnegative weights with a positive total.
    """
    total = float(weights.sum())
    if abs(total - 1.0) > RENORMALIZE_WARN_TOL:
        log_from_thread(f"[IO] weights in {source or 'input'} sum to {total:.6g}; renormalized", "warning")
    return weights / total
