"""Shared fixtures."""

import os
from pathlib import Path

import numpy as np
import pytest

from src.hard_tsp.core import TspInstance, num_edges, random_metric_instance
from tests.oracles import prism_vertex

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_integer_instance():
    return random_metric_instance(7, np.random.default_rng(3), integer=True, scale=50, name="small7")


@pytest.fixture
def four_node_instance():
    # optimal tour (0, 2, 1, 3) has length 12
    matrix = [
        [0, 5, 3, 2],
        [5, 0, 4, 3],
        [3, 4, 0, 5],
        [2, 3, 5, 0],
    ]
    return TspInstance.from_matrix(matrix, name="four", cost_kind="integer")


@pytest.fixture
def unit_instance():
    def build(n):
        return TspInstance(n, np.ones(num_edges(n)), name=f"unit{n}")
    return build


@pytest.fixture
def prism():
    return prism_vertex()


@pytest.fixture
def gr24_path():
    """Path to gr24 from ``$TSPLIB_DIR`` or ``tests/data``; skips when absent."""
    candidates = []
    if os.getenv("TSPLIB_DIR"):
        base = Path(os.environ["TSPLIB_DIR"])
        candidates += [base / "gr24.tsp", base / "gr24.tsp.gz"]
    candidates += [DATA_DIR / "gr24.tsp", DATA_DIR / "gr24.tsp.gz"]
    for path in candidates:
        if path.exists():
            return path
    pytest.skip("gr24 not available; set TSPLIB_DIR or place it in tests/data")
