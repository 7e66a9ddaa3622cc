"""Instance and tour data model, metric checks and repairs, cost transforms.

Every cost, solution or direction vector in the package is indexed by the
same lexicographic order over unordered pairs ``{i, j}`` with ``i < j``::

    index(i, j) = i * (2n - i - 1) / 2 + (j - i - 1)

which is the order produced by ``numpy.triu_indices(n, 1)``.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import CostRangeError, DimensionMismatchError, ParameterError

logger = logging.getLogger(__name__)

FRACTIONAL = "fractional"
INTEGER = "integer"

DEFAULT_METRIC_TOL = 1e-9
INT_COST_LIMIT = 2 ** 62


def num_edges(n: int) -> int:
    return n * (n - 1) // 2


def edge_index(i: int, j: int, n: int) -> int:
    """Position of edge ``{i, j}`` in every edge vector over ``K_n``."""
    if i == j:
        raise ParameterError(f"no self-loop edge ({i}, {i})")
    if i > j:
        i, j = j, i
    if i < 0 or j >= n:
        raise ParameterError(f"edge ({i}, {j}) out of range for n={n}")
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


@lru_cache(maxsize=64)
def edge_endpoints(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Arrays ``(rows, cols)`` of edge endpoints in edge-index order."""
    rows, cols = np.triu_indices(n, 1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def nodes_from_edge_count(m: int) -> int:
    n = int(round((1 + np.sqrt(1 + 8 * m)) / 2))
    if num_edges(n) != m:
        raise DimensionMismatchError(f"{m} is not a triangular edge count")
    return n


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class EdgeVector:
    """A real vector over the edges of ``K_n`` (costs, LP points, directions)."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(np.asarray(self.values, dtype=float))
        if values.shape != (num_edges(self.n),):
            raise DimensionMismatchError(
                f"edge vector for n={self.n} needs {num_edges(self.n)} entries, got {values.shape}"
            )
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def matrix(self) -> np.ndarray:
        """Symmetric ``n x n`` matrix with a zero diagonal."""
        rows, cols = edge_endpoints(self.n)
        out = np.zeros((self.n, self.n), dtype=self.values.dtype)
        out[rows, cols] = self.values
        out[cols, rows] = self.values
        return out

    def cut_value(self, subset: Iterable[int]) -> float:
        """Sum of entries over ``delta(S)``, the edges with one end in ``subset``."""
        inside = np.zeros(self.n, dtype=bool)
        inside[list(subset)] = True
        rows, cols = edge_endpoints(self.n)
        return float(self.values[inside[rows] != inside[cols]].sum())

    def degree(self, node: int) -> float:
        return self.cut_value([node])


class MetricViolation(NamedTuple):
    """Triangle ``c_ij <= c_ik + c_jk`` broken by ``amount`` (``i < j``, apex ``k``)."""

    i: int
    j: int
    k: int
    amount: float


@dataclass(frozen=True, eq=False)
class TspInstance:
    """Symmetric nonnegative costs over ``K_n`` in upper-triangular edge order.

    Attributes:
        n: Node count (at least 3)
        costs: One entry per unordered pair, float64 or int64 by ``cost_kind``
        name: Free-form label
        cost_kind: ``"fractional"`` or ``"integer"``
        metric_validated: True once a metric check at tolerance 0 passed
        metric_report: Violations found when the instance was built by rounding
    """

    n: int
    costs: np.ndarray
    name: str = ""
    cost_kind: str = FRACTIONAL
    metric_validated: bool = False
    metric_report: Tuple[MetricViolation, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.n < 3:
            raise ParameterError(f"a TSP instance needs at least 3 nodes, got {self.n}")
        if self.cost_kind not in (FRACTIONAL, INTEGER):
            raise ParameterError(f"unknown cost kind {self.cost_kind!r}")

        raw = np.asarray(self.costs)
        if self.cost_kind == INTEGER:
            if raw.dtype.kind == "f":
                if not np.all(np.isfinite(raw)) or np.any(raw != np.rint(raw)):
                    raise ParameterError("integer instance given non-integral costs")
            costs = _frozen(raw.astype(np.int64))
        else:
            costs = _frozen(raw.astype(np.float64))

        if costs.shape != (num_edges(self.n),):
            raise DimensionMismatchError(
                f"instance with n={self.n} needs {num_edges(self.n)} costs, got {costs.shape}"
            )
        if np.any(costs < 0):
            raise ParameterError("edge costs must be nonnegative")
        object.__setattr__(self, "costs", costs)

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[float]], name: str = "",
                    cost_kind: str = FRACTIONAL) -> "TspInstance":
        """Build an instance from a square matrix, reading the upper triangle."""
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"cost matrix must be square, got {matrix.shape}")
        rows, cols = edge_endpoints(matrix.shape[0])
        return cls(n=matrix.shape[0], costs=matrix[rows, cols], name=name, cost_kind=cost_kind)

    @classmethod
    def from_edge_vector(cls, vector: EdgeVector, name: str = "") -> "TspInstance":
        return cls(n=vector.n, costs=vector.values, name=name)

    @property
    def is_integer(self) -> bool:
        return self.cost_kind == INTEGER

    def matrix(self) -> np.ndarray:
        rows, cols = edge_endpoints(self.n)
        out = np.zeros((self.n, self.n), dtype=self.costs.dtype)
        out[rows, cols] = self.costs
        out[cols, rows] = self.costs
        return out

    def cost(self, i: int, j: int):
        return self.costs[edge_index(i, j, self.n)]

    def edge_vector(self) -> EdgeVector:
        return EdgeVector(self.n, self.costs.astype(float))

    def zero_cost_edges(self) -> int:
        """Number of zero-cost pairs (semi-metric instances are allowed, only flagged)."""
        return int(np.count_nonzero(self.costs == 0))

    def scaled(self, gamma: float) -> "TspInstance":
        if gamma <= 0:
            raise ParameterError(f"scale factor must be positive, got {gamma}")
        return TspInstance(self.n, self.costs.astype(float) * gamma, name=self.name)


@dataclass(frozen=True)
class Tour:
    """A Hamiltonian cycle given as a node order; its length is never stored."""

    order: Tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        if sorted(order) != list(range(len(order))):
            raise ParameterError("tour order must be a permutation of 0..n-1")
        if len(order) < 3:
            raise ParameterError("a tour needs at least 3 nodes")
        object.__setattr__(self, "order", order)

    @property
    def n(self) -> int:
        return len(self.order)

    def edges(self) -> List[Tuple[int, int]]:
        nxt = self.order[1:] + self.order[:1]
        return [(min(a, b), max(a, b)) for a, b in zip(self.order, nxt)]

    def edge_indices(self) -> np.ndarray:
        return np.array([edge_index(a, b, self.n) for a, b in self.edges()], dtype=np.int64)

    def incidence(self) -> EdgeVector:
        z = np.zeros(num_edges(self.n))
        z[self.edge_indices()] = 1.0
        return EdgeVector(self.n, z)

    def canonical(self) -> "Tour":
        """Rotate to start at node 0 and orient toward the smaller neighbour."""
        start = self.order.index(0)
        rotated = self.order[start:] + self.order[:start]
        if rotated[1] > rotated[-1]:
            rotated = (0,) + tuple(reversed(rotated[1:]))
        return Tour(rotated)


@dataclass(frozen=True)
class HcGraph:
    """Undirected simple graph fed to the Hamiltonian-cycle reduction."""

    n: int
    edges: FrozenSet[Tuple[int, int]]

    def __post_init__(self):
        normalized = set()
        for a, b in self.edges:
            if a == b:
                raise ParameterError(f"self-loop at node {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ParameterError(f"edge ({a}, {b}) out of range for n={self.n}")
            normalized.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(normalized))

    @classmethod
    def cycle(cls, n: int) -> "HcGraph":
        return cls(n, frozenset((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def star(cls, leaves: int) -> "HcGraph":
        return cls(leaves + 1, frozenset((0, i) for i in range(1, leaves + 1)))

    @classmethod
    def petersen(cls) -> "HcGraph":
        outer = [(i, (i + 1) % 5) for i in range(5)]
        spokes = [(i, i + 5) for i in range(5)]
        inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
        return cls(10, frozenset(outer + spokes + inner))


def tour_cost(inst: TspInstance, t: Tour):
    """Sum of edge costs around the tour (``int`` for integer instances).

    Raises:
        DimensionMismatchError: If the tour and the instance disagree on ``n``
    """
    if t.n != inst.n:
        raise DimensionMismatchError(f"tour has {t.n} nodes, instance has {inst.n}")
    total = inst.costs[t.edge_indices()].sum()
    return int(total) if inst.is_integer else float(total)


def violation_tensor(matrix: np.ndarray) -> np.ndarray:
    # v[i, j, k] = c_ij - (c_ik + c_jk)
    return matrix[:, :, None] - (matrix[:, None, :] + matrix[None, :, :])


def triangle_violations(matrix: np.ndarray, tol: float = DEFAULT_METRIC_TOL) -> List[MetricViolation]:
    """Triangle inequalities of a symmetric matrix violated by more than ``tol``.

    Returns:
        Violations sorted by decreasing amount, ties by ``(i, j, k)``
    """
    v = violation_tensor(matrix)
    i, j, k = np.nonzero(v > tol)
    keep = (i < j) & (k != i) & (k != j)
    i, j, k = i[keep], j[keep], k[keep]
    amounts = v[i, j, k]
    order = np.lexsort((k, j, i, -amounts))
    found = [MetricViolation(int(i[p]), int(j[p]), int(k[p]), amounts[p].item()) for p in order]
    return found


def check_metric(inst: TspInstance, tol: float = DEFAULT_METRIC_TOL) -> List[MetricViolation]:
    """All triangle inequalities violated by more than ``tol``.

    Args:
        inst: Instance to check
        tol: Absolute tolerance

    Returns:
        Violations sorted by decreasing amount, ties by ``(i, j, k)``
    """
    found = triangle_violations(inst.matrix(), tol)
    if found:
        logger.debug("metric check n=%d violations=%d worst=%s", inst.n, len(found), found[0].amount)
    return found


def metric_closure(inst: TspInstance) -> TspInstance:
    """All-pairs shortest-path closure.

    Floyd-Warshall sweeps repeat until a sweep changes nothing, so the result
    passes ``check_metric(tol=0)`` in floating point and a second closure is
    the identity.
    """
    d = inst.matrix()
    for _ in range(inst.n + 1):
        before = d.copy()
        for k in range(inst.n):
            d = np.minimum(d, d[:, k, None] + d[None, k, :])
        if np.array_equal(before, d):
            break
    rows, cols = edge_endpoints(inst.n)
    return TspInstance(inst.n, d[rows, cols], name=inst.name, cost_kind=inst.cost_kind,
                       metric_validated=True)


def scale_and_round(costs: EdgeVector, factor: float, name: str = "") -> TspInstance:
    """Multiply by ``factor`` and round to the nearest integer.

    Rounding may break metricity; the violations at tolerance 0 are attached
    as ``metric_report`` and it is up to the caller to apply ``metric_closure``.

    Raises:
        ParameterError: If ``factor`` is not positive
        CostRangeError: If a scaled cost leaves the int64 range
    """
    if factor <= 0:
        raise ParameterError(f"scale factor must be positive, got {factor}")
    scaled = np.rint(costs.values * factor)
    if not np.all(np.isfinite(scaled)) or np.any(np.abs(scaled) >= INT_COST_LIMIT):
        raise CostRangeError(f"costs scaled by {factor} exceed the integer cost range")
    inst = TspInstance(costs.n, scaled.astype(np.int64), name=name, cost_kind=INTEGER)
    report = tuple(check_metric(inst, tol=0))
    if report:
        logger.warning("rounding by factor=%s broke %d triangle inequalities", factor, len(report))
    return TspInstance(inst.n, inst.costs, name=name, cost_kind=INTEGER,
                       metric_validated=not report, metric_report=report)


def hc_reduction(g: HcGraph, eps: float) -> TspInstance:
    """Metric instance whose optimal tour is below 1 iff ``g`` is Hamiltonian.

    Graph edges cost ``(1 - eps/2)/n`` and non-edges ``(2 - eps)/n``.

    Raises:
        ParameterError: Unless ``0 < eps < 2/(n+1)``
    """
    n = g.n
    beta = 2.0 / (n + 1)
    if not 0 < eps < beta:
        raise ParameterError(f"eps must lie in (0, {beta}), got {eps}")
    costs = np.full(num_edges(n), (2.0 - eps) / n)
    for a, b in g.edges:
        costs[edge_index(a, b, n)] = (1.0 - eps / 2.0) / n
    return TspInstance(n, costs, name=f"hc_reduction_n{n}")


def random_metric_instance(n: int, rng: Optional[np.random.Generator] = None, integer: bool = False,
                           scale: int = 100, name: str = "") -> TspInstance:
    """Metric closure of uniform random costs; handy for oracles and demos."""
    rng = rng if rng is not None else np.random.default_rng()
    if integer:
        raw = TspInstance(n, rng.integers(1, scale + 1, size=num_edges(n)), cost_kind=INTEGER, name=name)
    else:
        raw = TspInstance(n, rng.uniform(0.05, 1.0, size=num_edges(n)), name=name)
    return metric_closure(raw)
