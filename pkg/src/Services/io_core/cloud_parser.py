# src/Services/io_core/cloud_parser.py
"""
Point-Cloud CSV Parser
======================
One point per row, d numeric coordinate columns. An optional header row may
name a final "weight" column; without one, weights are uniform 1/n.

Format:
    x,y,weight
    0.0,1.0,2
    1.5,0.5,1

Comma delimiter, period decimal point, LF line endings. Blank lines are
skipped; every error carries the 1-based line number where it occurred.
"""

import csv
import io
from pathlib import Path
from typing import List, Optional

import numpy as np

from src.Core.errors import ParseError
from src.Schemas.point_cloud import WeightedCloud
from .normalizers import coerce_number, is_weight_column, normalize_weights
from .validators import validate_cloud_schema, validate_row_width, validate_weight


def _is_header(fields: List[str]) -> bool:
    return all(coerce_number(f) is None for f in fields)


def parse_point_cloud(text: str, path: Optional[str] = None) -> WeightedCloud:
    """
    Parse CSV text into a WeightedCloud.

    Raises:
        ParseError: empty input, ragged rows, non-numeric fields, negative
            or all-zero weights
    """
    rows = [(i, fields) for i, fields in enumerate(csv.reader(io.StringIO(text)), start=1)
            if fields and any(f.strip() for f in fields)]
    if not rows:
        raise ParseError("empty file", path=path)

    has_weight = False
    first_line, first = rows[0]
    if _is_header(first):
        has_weight = is_weight_column(first[-1])
        width = len(first)
        rows = rows[1:]
        if not rows:
            raise ParseError("header without data rows", line=first_line, path=path)
    else:
        width = len(first)

    dim = width - 1 if has_weight else width
    if dim < 1:
        raise ParseError("no coordinate columns", line=first_line, path=path)

    points = np.empty((len(rows), dim))
    weights = np.empty(len(rows)) if has_weight else None
    for k, (line, fields) in enumerate(rows):
        validate_row_width(fields, width, line, path)
        values = [coerce_number(f) for f in fields]
        for col, value in enumerate(values):
            if value is None:
                raise ParseError(f"non-numeric field {fields[col]!r} in column {col + 1}", line=line, path=path)
        points[k] = values[:dim]
        if weights is not None:
            validate_weight(values[-1], line, path)
            weights[k] = values[-1]

    if weights is None:
        weights = np.full(len(rows), 1.0 / len(rows))
    else:
        if float(weights.sum()) <= 0:
            raise ParseError("weights sum to zero", path=path)
        weights = normalize_weights(weights, source=path or "")

    return validate_cloud_schema(points, weights, path)


def load_point_cloud(path) -> WeightedCloud:
    """
    Read a CSV point cloud from disk.

    Raises:
        ParseError: missing/unreadable file or malformed content
    """
    target = Path(path)
    try:
        text = target.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {target}: {exc}", path=str(target)) from exc
    return parse_point_cloud(text, path=str(target))


def write_point_cloud(cloud: WeightedCloud, path, with_weights: bool = True) -> None:
    """Write a cloud in the format parse_point_cloud reads (shortest round-trip floats)."""
    target = Path(path)
    with target.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if with_weights:
            writer.writerow([f"x{k}" for k in range(cloud.d)] + ["weight"])
        for k in range(cloud.n):
            row = [repr(float(v)) for v in cloud.points[k]]
            if with_weights:
                row.append(repr(float(cloud.weights[k])))
            writer.writerow(row)
