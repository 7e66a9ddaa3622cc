"""Hit-and-run sampling from the metric polytope.

The polytope holds cost vectors over ``K_n`` with, for every triple
``i < j < k``,

* three triangle rows ``c_ij - c_ik - c_jk <= 0`` (one per long side),
* one perimeter row ``c_ij + c_ik + c_jk <= 2``,

plus ``c_e >= 0`` for every edge. The rows are built once per ``n`` as a
sparse matrix and every chord is a single sparse mat-vec.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterator, List, Optional, Tuple

import numpy as np
from scipy import sparse

from .core import EdgeVector, TspInstance, num_edges
from .errors import ParameterError, SamplerError

logger = logging.getLogger(__name__)

DEFAULT_BURN_IN = 1000
DEFAULT_THIN = 10
MAX_DIRECTION_RETRIES = 100
MIN_CHORD = 1e-12


@dataclass(frozen=True, eq=False)
class MetricPoint:
    """A point of the metric polytope."""

    n: int
    values: EdgeVector

    def instance(self, name: str = "") -> TspInstance:
        return TspInstance.from_edge_vector(self.values, name=name)


def _pair_index(i: np.ndarray, j: np.ndarray, n: int) -> np.ndarray:
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


@lru_cache(maxsize=16)
def metric_polytope_rows(n: int) -> Tuple[sparse.csr_matrix, np.ndarray]:
    """``(A, b)`` with the polytope written as ``A c <= b``.

    Row order: for each triple in lexicographic order its three triangle rows
    (long side ij, ik, jk) and its perimeter row; then one ``-c_e <= 0`` row
    per edge.
    """
    if n < 3:
        raise ParameterError(f"the metric polytope needs n >= 3, got {n}")
    triples = np.array(list(combinations(range(n), 3)), dtype=np.int64)
    i, j, k = triples.T
    ij, ik, jk = _pair_index(i, j, n), _pair_index(i, k, n), _pair_index(j, k, n)
    t = len(triples)
    base = 4 * np.arange(t)

    rows = np.concatenate([np.repeat(base + r, 3) for r in range(4)])
    cols = np.concatenate([
        np.column_stack([ij, ik, jk]).ravel(),
        np.column_stack([ik, ij, jk]).ravel(),
        np.column_stack([jk, ij, ik]).ravel(),
        np.column_stack([ij, ik, jk]).ravel(),
    ])
    signs = np.tile([1.0, -1.0, -1.0], 3 * t)
    data = np.concatenate([signs, np.ones(3 * t)])

    m = num_edges(n)
    rows = np.concatenate([rows, 4 * t + np.arange(m)])
    cols = np.concatenate([cols, np.arange(m)])
    data = np.concatenate([data, -np.ones(m)])

    a = sparse.csr_matrix((data, (rows, cols)), shape=(4 * t + m, m))
    b = np.zeros(4 * t + m)
    b[base + 3] = 2.0
    b.setflags(write=False)
    return a, b


def row_slacks(values: np.ndarray, n: int) -> np.ndarray:
    """``b - A c`` for every polytope row."""
    a, b = metric_polytope_rows(n)
    return b - a @ values


def in_polytope(values: np.ndarray, n: int, tol: float = 1e-9) -> bool:
    return bool(np.all(row_slacks(values, n) >= -tol))


def initial_interior_point(n: int) -> MetricPoint:
    """All entries 0.5: every triangle, perimeter and sign row has slack 0.5."""
    if n < 3:
        raise ParameterError(f"n must be at least 3, got {n}")
    return MetricPoint(n, EdgeVector(n, np.full(num_edges(n), 0.5)))


def chord(point: MetricPoint, direction: EdgeVector) -> Tuple[float, float]:
    """Feasible interval ``[lambda_min, lambda_max]`` of ``point + lambda * direction``.

    Raises:
        ParameterError: If ``direction`` is zero
    """
    d = direction.values
    if not np.any(d):
        raise ParameterError("chord direction must be nonzero")
    a, _ = metric_polytope_rows(point.n)
    slack = np.maximum(row_slacks(point.values.values, point.n), 0.0)
    ad = a @ d
    pos = ad > 0
    neg = ad < 0
    lam_max = float(np.min(slack[pos] / ad[pos])) if pos.any() else np.inf
    lam_min = float(np.max(slack[neg] / ad[neg])) if neg.any() else -np.inf
    return lam_min, lam_max


def random_direction(m: int, rng: np.random.Generator) -> np.ndarray:
    """Isotropic unit vector: normalized independent standard normals."""
    while True:
        d = rng.standard_normal(m)
        norm = np.linalg.norm(d)
        if norm > 0:
            return d / norm


def hit_and_run_step(point: MetricPoint, rng: np.random.Generator,
                     max_retries: int = MAX_DIRECTION_RETRIES) -> MetricPoint:
    """Move to a uniform point on a random chord through ``point``.

    Raises:
        SamplerError: If ``max_retries`` directions in a row give a degenerate chord
    """
    m = num_edges(point.n)
    for _ in range(max_retries):
        d = random_direction(m, rng)
        lam_min, lam_max = chord(point, EdgeVector(point.n, d))
        if lam_max - lam_min > MIN_CHORD and np.isfinite(lam_min) and np.isfinite(lam_max):
            lam = rng.uniform(lam_min, lam_max)
            return MetricPoint(point.n, EdgeVector(point.n, point.values.values + lam * d))
    raise SamplerError(f"{max_retries} consecutive degenerate chords at n={point.n}")


class HitAndRunChain:
    """One Markov chain over the metric polytope.

    Args:
        n: Node count
        rng: Random stream, owned by the chain
        start: Starting point, the all-0.5 interior point when omitted
    """

    def __init__(self, n: int, rng: np.random.Generator, start: Optional[MetricPoint] = None):
        self.n = n
        self.rng = rng
        self.point = start if start is not None else initial_interior_point(n)
        self.steps = 0

    def step(self) -> MetricPoint:
        self.point = hit_and_run_step(self.point, self.rng)
        self.steps += 1
        return self.point

    def burn(self, steps: int) -> None:
        for _ in range(steps):
            self.step()

    def samples(self, thin: int = DEFAULT_THIN) -> Iterator[MetricPoint]:
        """Endless stream keeping every ``thin``-th point."""
        thin = max(1, int(thin))
        while True:
            for _ in range(thin):
                self.step()
            yield self.point


def sample_metric(n: int, count: int, burn_in: int = DEFAULT_BURN_IN, thin: int = DEFAULT_THIN,
                  seed: Optional[int] = None) -> List[MetricPoint]:
    """Draw ``count`` points after ``burn_in`` discarded steps, one every ``thin`` steps.

    Args:
        n: Node count
        count: Number of points to return (at least 1)
        burn_in: Steps discarded first
        thin: Steps between kept points
        seed: Seed for ``numpy.random.default_rng``

    Returns:
        The sampled points, reproducible from ``seed``
    """
    if count < 1:
        raise ParameterError(f"count must be at least 1, got {count}")
    chain = HitAndRunChain(n, np.random.default_rng(seed))
    chain.burn(burn_in)
    stream = chain.samples(thin)
    points = [next(stream) for _ in range(count)]
    logger.debug("sampled n=%d count=%d burn_in=%d thin=%d steps=%d", n, count, burn_in, thin, chain.steps)
    return points
