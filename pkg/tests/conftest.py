"""Shared fixtures: seeded generators, log capture, small instances and CSV clouds."""

from __future__ import annotations

from typing import Any, Dict, List

import numpy as np
import pytest

from src.Core.log_stream import log_manager
from src.Schemas.point_cloud import WeightedCloud
from src.Services.instance_generator import uniform_square_instance
from src.Services.io_core import write_point_cloud
from src.Services.reference_cache import reference_cache


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def captured_logs():
    """Register a capture sink for the duration of one test."""
    records: List[Dict[str, Any]] = []
    log_manager.register(records.append)
    yield records
    log_manager.unregister(records.append)


@pytest.fixture
def small_instance(rng):
    return uniform_square_instance(40, rng, eta=1.0, eps=0.2)


@pytest.fixture(autouse=True)
def _fresh_reference_cache():
    reference_cache.clear()
    yield
    reference_cache.clear()


@pytest.fixture
def cloud_files(tmp_path):
    """Write two clouds to CSV and return their paths."""

    def _write(a_points, b_points, a_weights=None, b_weights=None):
        paths = []
        for name, pts, w in (("a.csv", a_points, a_weights), ("b.csv", b_points, b_weights)):
            pts = np.asarray(pts, dtype=np.float64)
            weights = np.full(pts.shape[0], 1.0 / pts.shape[0]) if w is None else np.asarray(w, dtype=np.float64)
            path = tmp_path / name
            write_point_cloud(WeightedCloud(points=pts, weights=weights), path)
            paths.append(str(path))
        return paths

    return _write


def messages(records: List[Dict[str, Any]], tag: str = "") -> List[str]:
    return [r["message"] for r in records if tag in r["message"]]
