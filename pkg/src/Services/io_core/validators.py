# src/Services/io_core/validators.py
"""
Validators Module
=================
Schema validation of parsed clouds.

Parsing errors keep their 1-based line numbers; schema failures that
concern the whole file are reported at line 0.
"""

from typing import Optional

import numpy as np
from pydantic import ValidationError

from src.Core.errors import ParseError
from src.Schemas.point_cloud import WeightedCloud


def validate_row_width(fields: list, expected: int, line: int, path: Optional[str]) -> None:
    if len(fields) != expected:
        raise ParseError(f"expected {expected} fields, found {len(fields)}", line=line, path=path)


def validate_weight(value: float, line: int, path: Optional[str]) -> None:
    if value < 0:
        raise ParseError(f"negative weight {value!r}", line=line, path=path)


def validate_cloud_schema(points: np.ndarray, weights: np.ndarray, path: Optional[str]) -> WeightedCloud:
    """
    Build the WeightedCloud, converting pydantic failures to ParseError.

    Raises:
        ParseError: zero total weight or any schema violation
    """
    if float(weights.sum()) <= 0:
        raise ParseError("weights sum to zero", path=path)
    try:
        return WeightedCloud(points=points, weights=weights)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ParseError(f"invalid cloud: {first.get('msg', str(exc))}", path=path) from exc
