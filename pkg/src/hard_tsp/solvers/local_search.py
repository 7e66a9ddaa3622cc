"""Nearest-neighbour construction improved by 2-opt and Or-opt moves."""

import logging
import time
from typing import Optional

import numpy as np

from ..base import BaseTspSolver, TspResult
from ..config import SolveLimits
from ..core import Tour, TspInstance

logger = logging.getLogger(__name__)

FLOAT_GAIN_TOL = 1e-10
MAX_SEGMENT = 3


def nearest_neighbor(matrix: np.ndarray, start: int = 0) -> np.ndarray:
    """Greedy tour from ``start``; ties go to the lowest node index."""
    n = matrix.shape[0]
    visited = np.zeros(n, dtype=bool)
    order = np.empty(n, dtype=np.int64)
    order[0] = start
    visited[start] = True
    for pos in range(1, n):
        row = np.where(visited, np.inf, matrix[order[pos - 1]].astype(float))
        nxt = int(np.argmin(row))
        order[pos] = nxt
        visited[nxt] = True
    return order


def tour_length(matrix: np.ndarray, order: np.ndarray):
    return matrix[order, np.roll(order, -1)].sum()


def two_opt(matrix: np.ndarray, order: np.ndarray, tol: float = FLOAT_GAIN_TOL) -> bool:
    """Apply best-improvement 2-opt moves in place until none gains more than ``tol``.

    Returns:
        Whether the tour changed
    """
    n = len(order)
    if n < 4:
        return False
    i_idx, j_idx = np.triu_indices(n, 2)
    valid = ~((i_idx == 0) & (j_idx == n - 1))
    i_idx, j_idx = i_idx[valid], j_idx[valid]
    changed = False
    while True:
        a = order
        b = np.roll(order, -1)
        # replace (a_i, b_i), (a_j, b_j) by (a_i, a_j), (b_i, b_j)
        delta = (matrix[a[i_idx], a[j_idx]] + matrix[b[i_idx], b[j_idx]]
                 - matrix[a[i_idx], b[i_idx]] - matrix[a[j_idx], b[j_idx]])
        best = int(np.argmin(delta))
        if not delta[best] < -tol:
            return changed
        i, j = i_idx[best], j_idx[best]
        order[i + 1:j + 1] = order[i + 1:j + 1][::-1].copy()
        changed = True


def or_opt(matrix: np.ndarray, order: np.ndarray, tol: float = FLOAT_GAIN_TOL) -> bool:
    """One first-improvement pass relocating segments of 1 to 3 nodes, possibly reversed.

    Returns:
        Whether the tour changed
    """
    n = len(order)
    changed = False
    for length in range(1, MAX_SEGMENT + 1):
        if n - length < 3:
            break
        start = 0
        while start < n:
            rolled = np.roll(order, -start)
            segment = rolled[:length]
            rest = rolled[length:]
            first, last = segment[0], segment[-1]
            prev, nxt = rest[-1], rest[0]
            removal = matrix[prev, first] + matrix[last, nxt] - matrix[prev, nxt]

            left = rest[:-1]
            right = rest[1:]
            base = matrix[left, right]
            forward = matrix[left, first] + matrix[last, right] - base
            backward = matrix[left, last] + matrix[first, right] - base
            options = np.minimum(forward, backward)
            k = int(np.argmin(options))
            if options[k] - removal < -tol:
                piece = segment if forward[k] <= backward[k] else segment[::-1]
                order[:] = np.concatenate([rest[:k + 1], piece, rest[k + 1:]])
                changed = True
            start += 1
    return changed


def improve(matrix: np.ndarray, order: np.ndarray, tol: float = FLOAT_GAIN_TOL) -> np.ndarray:
    """Alternate 2-opt and Or-opt until neither improves the tour."""
    order = np.array(order, dtype=np.int64)
    while True:
        two_opt(matrix, order, tol)
        if not or_opt(matrix, order, tol):
            return order


def double_bridge(order: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = len(order)
    if n < 8:
        return rng.permutation(order)
    p1, p2, p3 = np.sort(rng.choice(np.arange(1, n), size=3, replace=False))
    return np.concatenate([order[:p1], order[p3:], order[p2:p3], order[p1:p2]])


class LocalSearchSolver(BaseTspSolver):
    """Multi-start local search; never claims optimality.

    Restart 0 starts from nearest neighbour at node 0. Every later restart
    draws its own generator from ``rng.spawn`` and starts from nearest
    neighbour at a random node followed by a double-bridge kick.
    """

    name = "local_search"

    def __init__(self, restarts: int = 10, rng: Optional[np.random.Generator] = None,
                 limits: Optional[SolveLimits] = None):
        super().__init__(limits)
        self.restarts = max(1, int(restarts))
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def solve(self, inst: TspInstance, cutoff: Optional[float] = None) -> TspResult:
        started = time.perf_counter()
        matrix = inst.matrix()
        tol = 0 if inst.is_integer else FLOAT_GAIN_TOL
        streams = self.rng.spawn(self.restarts - 1)

        best = improve(matrix, nearest_neighbor(matrix, 0), tol)
        best_value = tour_length(matrix, best)
        runs = 1
        for child in streams:
            if cutoff is not None and best_value < cutoff:
                break
            start = int(child.integers(inst.n))
            order = improve(matrix, double_bridge(nearest_neighbor(matrix, start), child), tol)
            value = tour_length(matrix, order)
            runs += 1
            if value < best_value - tol:
                best, best_value = order, value

        result = self._result(inst, Tour(best), proven_optimal=False, started=started)
        logger.debug("local search n=%d restarts=%d value=%s", inst.n, runs, result.value)
        return result

    def improve_tour(self, inst: TspInstance, tour: Tour) -> TspResult:
        started = time.perf_counter()
        tol = 0 if inst.is_integer else FLOAT_GAIN_TOL
        order = improve(inst.matrix(), np.asarray(tour.order), tol)
        return self._result(inst, Tour(order), proven_optimal=False, started=started)
