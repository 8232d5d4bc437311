# src/Services/io_core/__init__.py
"""
IO Core Module
==============
CSV ingestion of weighted point clouds.

Components:
- cloud_parser: CSV text/file → WeightedCloud, and the matching writer
- normalizers: field coercion, weight-column detection, renormalization
- validators: row width, weight sign, pydantic schema → ParseError
"""

from .cloud_parser import load_point_cloud, parse_point_cloud, write_point_cloud
from .normalizers import WEIGHT_HEADERS, coerce_number, is_weight_column, normalize_weights
from .validators import validate_cloud_schema, validate_row_width, validate_weight

__all__ = [
    # Parser
    'load_point_cloud',
    'parse_point_cloud',
    'write_point_cloud',

    # Normalizers
    'WEIGHT_HEADERS',
    'coerce_number',
    'is_weight_column',
    'normalize_weights',

    # Validators
    'validate_cloud_schema',
    'validate_row_width',
    'validate_weight',
]
