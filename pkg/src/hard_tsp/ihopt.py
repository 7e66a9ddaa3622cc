"""Hardening LPs: metric costs that make a fixed SEP vertex as cheap as possible.

H-OPT minimizes ``x_bar . c`` over nonnegative costs that satisfy every
triangle inequality and give every tour length at least ``delta``. Both row
families are exponential or cubic in ``n``, so they are generated lazily:

* triangle rows by a full scan, the ``k`` most violated per round;
* tour rows by solving a TSP on the current costs, heuristically first and
  exactly (with cutoff ``delta``) only when the heuristic finds nothing.

IH-OPT adds integrality of the costs and is solved by branch-and-cut on one
shared LP; every generated row is globally valid, so nodes differ only in
their variable bounds and the basis they restart from.
"""

import heapq
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Set, Tuple

import numpy as np

from .config import LpLimits, SolveLimits
from .core import (INTEGER, EdgeVector, MetricViolation, Tour, TspInstance, check_metric, edge_index,
                   num_edges, triangle_violations, violation_tensor)
from .errors import LpError, SeparationTimeoutError
from .lp import GE, INFEASIBLE, LE, LinearProgram, Row, SimplexSolver
from .sep import SepSolution
from .tsp import heuristic_tour, solve_exact

logger = logging.getLogger(__name__)

HEURISTIC = "heuristic"
EXACT = "exact"
WARM = "warm"
TRIANGLE = "triangle"

OPTIMAL = "optimal"
TIME_LIMIT = "time_limit"
INFEASIBLE_STATUS = "infeasible"

DEFAULT_TRIANGLE_K = 50
DEFAULT_TAU = 0.05
DEFAULT_DELTA = 1000
DEFAULT_RESTARTS = 10
VIOLATION_TOL = 1e-6
INTEGRALITY_TOL = 1e-6
PRUNE_TOL = 1e-9

TriangleKey = Tuple[int, int, int]


def triangle_row(key: TriangleKey, n: int) -> Row:
    """``c_ij - c_ik - c_jk <= 0`` for ``key = (i, j, k)``."""
    i, j, k = key
    return Row((edge_index(i, j, n), edge_index(i, k, n), edge_index(j, k, n)), (1.0, -1.0, -1.0), LE, 0.0,
               name=f"tri_{i}_{j}_{k}")


def tour_row(tour: Tour, delta: float) -> Row:
    """``z . c >= delta`` for the incidence vector ``z`` of ``tour``."""
    idx = tour.edge_indices()
    return Row(tuple(idx), (1.0,) * len(idx), GE, float(delta), name="tour_" + "_".join(map(str, tour.order)))


@dataclass
class CutPool:
    """Triangle and tour rows shared between hardening solves, without duplicates.

    Tours are stored in canonical form; ``origins`` tags each row with
    ``heuristic``, ``exact``, ``warm`` or ``triangle``.
    """

    n: int
    triangle_rows: List[TriangleKey] = field(default_factory=list)
    tour_rows: List[Tour] = field(default_factory=list)
    origins: Dict[Any, str] = field(default_factory=dict)
    _triangles: Set[TriangleKey] = field(default_factory=set, repr=False)
    _tours: Set[Tuple[int, ...]] = field(default_factory=set, repr=False)

    def __len__(self) -> int:
        return len(self.triangle_rows) + len(self.tour_rows)

    def add_triangle(self, key: TriangleKey, origin: str = TRIANGLE) -> bool:
        i, j, k = (int(v) for v in key)
        if i > j:
            i, j = j, i
        key = (i, j, k)
        if key in self._triangles:
            return False
        self._triangles.add(key)
        self.triangle_rows.append(key)
        self.origins[key] = origin
        return True

    def add_tour(self, tour: Tour, origin: str) -> bool:
        if tour.n != self.n:
            raise ValueError(f"tour on {tour.n} nodes added to a pool for n={self.n}")
        canonical = tour.canonical()
        if canonical.order in self._tours:
            return False
        self._tours.add(canonical.order)
        self.tour_rows.append(canonical)
        self.origins[canonical.order] = origin
        return True

    def rows(self, delta: float) -> List[Row]:
        return ([triangle_row(key, self.n) for key in self.triangle_rows]
                + [tour_row(t, delta) for t in self.tour_rows])

    def counts(self) -> Dict[str, int]:
        tally: Dict[str, int] = {}
        for origin in self.origins.values():
            tally[origin] = tally.get(origin, 0) + 1
        return tally


@dataclass(frozen=True)
class SeparationRecord:
    """One separation round for the run log."""

    kind: str
    rows_added: int
    max_violation: float
    lp_objective: float
    node: int
    elapsed: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class HardeningResult:
    """Outcome of an H-OPT or IH-OPT solve.

    Attributes:
        costs: Optimal (or best known) cost vector
        objective: ``x_bar . costs``
        lower_bound: Proven lower bound on the optimum
        upper_bound: Objective of the best feasible costs (inf if none)
        status: ``optimal``, ``time_limit`` or ``infeasible``
        cuts: Rows generated during the run
        delta: Tour right-hand side
        integer: True for IH-OPT results
        stats: Separation counts and times, node and LP iteration counts
        log: One record per separation round
        tight_box_edges: Edge indices with ``c_e == delta``
        certified: A final check confirmed metricity and ``TOUR >= delta``
        min_tour: TOUR(costs) from the certificate, when computed
    """

    costs: EdgeVector
    objective: float
    lower_bound: float
    upper_bound: float
    status: str
    cuts: CutPool
    delta: float
    integer: bool = False
    stats: Dict[str, float] = field(default_factory=dict)
    log: List[SeparationRecord] = field(default_factory=list)
    tight_box_edges: Tuple[int, ...] = ()
    certified: bool = False
    min_tour: Optional[float] = None

    @property
    def n(self) -> int:
        return self.costs.n

    def instance(self, name: str = "") -> TspInstance:
        if self.integer:
            return TspInstance(self.n, np.rint(self.costs.values).astype(np.int64), name=name, cost_kind=INTEGER,
                               metric_validated=self.certified)
        return TspInstance(self.n, np.clip(self.costs.values, 0.0, None), name=name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'delta': self.delta,
            'integer': self.integer,
            'status': self.status,
            'objective': self.objective,
            'lower_bound': self.lower_bound,
            'upper_bound': self.upper_bound,
            'costs': self.costs.values.tolist(),
            'tight_box_edges': list(self.tight_box_edges),
            'certified': self.certified,
            'min_tour': self.min_tour,
            'cuts': self.cuts.counts(),
            'stats': dict(self.stats),
        }


def separate_triangles(c: EdgeVector, k: int = DEFAULT_TRIANGLE_K,
                       tol: float = VIOLATION_TOL) -> List[MetricViolation]:
    """The ``k`` most violated triangle rows, largest violation first, ties by ``(i, j, k)``."""
    return triangle_violations(c.matrix(), tol)[:k]


@dataclass(frozen=True)
class TourSeparation:
    """Result of a tour-row separation call."""

    tour: Optional[Tour]
    value: Optional[float]
    source: Optional[str]
    exact_called: bool
    nodes_explored: int = 0


def _cost_instance(c: EdgeVector, integer: bool) -> TspInstance:
    values = np.clip(c.values, 0.0, None)
    if integer:
        return TspInstance(c.n, np.rint(values).astype(np.int64), cost_kind=INTEGER)
    return TspInstance(c.n, values)


def separate_tour(c: EdgeVector, delta: float, restarts: int = DEFAULT_RESTARTS,
                  rng: Optional[np.random.Generator] = None, integer: bool = False,
                  limits: Optional[SolveLimits] = None, tol: float = VIOLATION_TOL) -> TourSeparation:
    """Find a tour shorter than ``delta`` under costs ``c``.

    Local search runs first; the exact solver (cutoff ``delta``, warm started
    from the local-search tour) runs only when local search finds nothing.

    Args:
        c: Nonnegative costs
        delta: Tour right-hand side
        restarts: Local-search restarts
        rng: Random stream for local search
        integer: Round ``c`` and compare exactly
        limits: Budget for the exact solver
        tol: Violation tolerance in fractional mode

    Returns:
        The violating tour, or ``tour=None`` when the exact solver proved none exists

    Raises:
        SeparationTimeoutError: If the exact solver stopped before a decision
    """
    inst = _cost_instance(c, integer)
    threshold = delta if integer else delta - tol

    heuristic = heuristic_tour(inst, restarts, rng, cutoff=threshold)
    if heuristic.value < threshold:
        return TourSeparation(heuristic.tour, heuristic.value, HEURISTIC, exact_called=False)

    exact = solve_exact(inst, cutoff=threshold, limits=limits, warm_start=heuristic.tour)
    if exact.value < threshold:
        return TourSeparation(exact.tour, exact.value, EXACT, True, exact.nodes_explored)
    if not exact.proven_optimal:
        raise SeparationTimeoutError(f"exact tour separation stopped after {exact.nodes_explored} nodes")
    return TourSeparation(None, None, None, True, exact.nodes_explored)


def all_triangle_slacks(c: EdgeVector) -> List[Tuple[TriangleKey, float]]:
    """Slack ``c_ik + c_jk - c_ij`` of every oriented triangle row, ``i < j``."""
    n = c.n
    slack = -violation_tensor(c.matrix())
    i, j, k = np.indices((n, n, n)).reshape(3, -1)
    keep = (i < j) & (k != i) & (k != j)
    i, j, k = i[keep], j[keep], k[keep]
    return [((int(a), int(b), int(d)), float(s)) for a, b, d, s in zip(i, j, k, slack[i, j, k])]


def warm_pool(hopt_result: HardeningResult, tau: float = DEFAULT_TAU) -> CutPool:
    """Seed pool for IH-OPT.

    Every tour row of the H-OPT run plus every triangle row whose slack at
    the H-OPT optimum is at most ``tau``, all tagged ``warm``.
    """
    pool = CutPool(hopt_result.n)
    for tour in hopt_result.cuts.tour_rows:
        pool.add_tour(tour, WARM)
    for key, slack in all_triangle_slacks(hopt_result.costs):
        if slack <= tau + PRUNE_TOL:
            pool.add_triangle(key, WARM)
    logger.info("warm pool n=%d tau=%s tours=%d triangles=%d", pool.n, tau, len(pool.tour_rows),
                len(pool.triangle_rows))
    return pool


class _Separator:
    """Lazy row generation shared by the H-OPT loop and the IH-OPT tree."""

    def __init__(self, solver: SimplexSolver, pool: CutPool, delta: float, triangle_k: int, restarts: int,
                 rng: np.random.Generator, integer: bool, started: float, deadline: Optional[float]):
        self.solver = solver
        self.pool = pool
        self.delta = delta
        self.triangle_k = triangle_k
        self.restarts = restarts
        self.rng = rng
        self.integer = integer
        self.started = started
        self.deadline = deadline
        self.log: List[SeparationRecord] = []
        self.stats: Dict[str, float] = {
            'triangle_rounds': 0, 'triangle_rows': 0, 'heuristic_tours': 0, 'exact_tours': 0,
            'exact_calls': 0, 'separation_time': 0.0,
        }

    def _record(self, kind: str, rows: int, violation: float, objective: float, node: int) -> None:
        record = SeparationRecord(kind, rows, violation, objective, node, time.perf_counter() - self.started)
        self.log.append(record)
        logger.debug("separation %s", record.to_dict())

    def triangles(self, c: EdgeVector, objective: float, node: int) -> int:
        t0 = time.perf_counter()
        found = separate_triangles(c, self.triangle_k)
        added = [v for v in found if self.pool.add_triangle((v.i, v.j, v.k))]
        if added:
            self.solver.add_rows([triangle_row((v.i, v.j, v.k), c.n) for v in added])
            self.stats['triangle_rounds'] += 1
            self.stats['triangle_rows'] += len(added)
            self._record(TRIANGLE, len(added), float(added[0].amount), objective, node)
        self.stats['separation_time'] += time.perf_counter() - t0
        return len(added)

    def tour(self, c: EdgeVector, objective: float, node: int) -> int:
        """Add one violated tour row; 0 when none exists.

        Raises:
            SeparationTimeoutError: If the exact solver ran out of time
        """
        t0 = time.perf_counter()
        limits = None
        if self.deadline is not None:
            limits = SolveLimits(time_limit=max(self.deadline - time.perf_counter(), 0.0))
        try:
            found = separate_tour(c, self.delta, self.restarts, self.rng, self.integer, limits)
        finally:
            self.stats['separation_time'] += time.perf_counter() - t0
        if found.exact_called:
            self.stats['exact_calls'] += 1
        if found.tour is None:
            return 0
        if not self.pool.add_tour(found.tour, found.source):
            logger.warning("tour separation returned a pooled tour (value=%s delta=%s); treating as satisfied",
                           found.value, self.delta)
            return 0
        self.solver.add_rows([tour_row(found.tour, self.delta)])
        self.stats['heuristic_tours' if found.source == HEURISTIC else 'exact_tours'] += 1
        self._record(found.source, 1, float(self.delta - found.value), objective, node)
        return 1


def _new_solver(x_bar: SepSolution, delta: float, pool: CutPool, lp_limits: Optional[LpLimits]) -> SimplexSolver:
    m = num_edges(x_bar.n)
    lp = LinearProgram(m, x_bar.x.values.copy(), np.zeros(m), np.full(m, float(delta)), pool.rows(delta))
    return SimplexSolver(lp, lp_limits)


def solve_hopt(x_bar: SepSolution, delta: float = 1.0, triangle_k: int = DEFAULT_TRIANGLE_K,
               restarts: int = DEFAULT_RESTARTS, seed: int = 0, limits: Optional[SolveLimits] = None,
               lp_limits: Optional[LpLimits] = None, pool: Optional[CutPool] = None,
               max_rounds: int = 100000) -> HardeningResult:
    """H-OPT by cutting planes.

    Each round solves the LP over the current pool, then adds the
    ``triangle_k`` most violated triangle rows, or failing that one violated
    tour row. The loop ends when the exact solver certifies no tour below
    ``delta``, so the final costs are optimal for the full H-OPT LP.

    Args:
        x_bar: SEP vertex whose cost is minimized
        delta: Tour right-hand side
        triangle_k: Triangle rows per round
        restarts: Local-search restarts per tour separation
        seed: Seed for local search
        limits: Time budget for the whole loop
        lp_limits: Simplex tolerances
        pool: Rows to start from
        max_rounds: Round cap

    Returns:
        HardeningResult with fractional costs

    Raises:
        LpError: If an LP solve fails
    """
    started = time.perf_counter()
    limits = limits or SolveLimits()
    deadline = None if limits.time_limit is None else started + limits.time_limit
    pool = pool if pool is not None else CutPool(x_bar.n)
    solver = _new_solver(x_bar, delta, pool, lp_limits)
    sep = _Separator(solver, pool, delta, triangle_k, restarts, np.random.default_rng(seed), False, started, deadline)

    status = OPTIMAL
    solution = solver.solve()
    c = EdgeVector(x_bar.n, np.zeros(num_edges(x_bar.n)))
    for _ in range(max_rounds):
        if solution.status == INFEASIBLE:
            status = INFEASIBLE_STATUS
            break
        if not solution.optimal:
            raise LpError(solution.status, f"H-OPT LP ended {solution.status}")
        c = EdgeVector(x_bar.n, np.clip(solution.x, 0.0, delta))
        if deadline is not None and time.perf_counter() > deadline:
            status = TIME_LIMIT
            break
        if sep.triangles(c, solution.objective, 0):
            solution = solver.resolve()
            continue
        try:
            added = sep.tour(c, solution.objective, 0)
        except SeparationTimeoutError:
            status = TIME_LIMIT
            break
        if not added:
            break
        solution = solver.resolve()
    else:
        status = TIME_LIMIT

    objective = float(x_bar.x.values @ c.values)
    upper = objective if status == OPTIMAL else math.inf
    lower = math.inf if status == INFEASIBLE_STATUS else solution.objective
    sep.stats['lp_iterations'] = solver.total_iterations
    sep.stats['runtime'] = time.perf_counter() - started
    result = HardeningResult(c, objective, lower, upper, status, pool, float(delta), False,
                             sep.stats, sep.log, certified=status == OPTIMAL)
    logger.info("H-OPT n=%d delta=%s status=%s objective=%.9g triangles=%d tours=%d", x_bar.n, delta, status,
                objective, len(pool.triangle_rows), len(pool.tour_rows))
    return result


@dataclass
class _TreeNode:
    bound: float
    seq: int
    lower: np.ndarray
    upper: np.ndarray
    basis: Any
    depth: int = 0

    def __lt__(self, other: "_TreeNode") -> bool:
        return (self.bound, self.seq) < (other.bound, other.seq)


def _most_fractional(values: np.ndarray) -> Optional[int]:
    frac = values - np.floor(values)
    distance = np.abs(frac - 0.5)
    fractional = np.minimum(frac, 1.0 - frac) > INTEGRALITY_TOL
    if not fractional.any():
        return None
    candidates = np.flatnonzero(fractional)
    return int(candidates[np.argmin(distance[candidates])])


def certify(costs: np.ndarray, n: int, delta: float) -> Tuple[bool, float]:
    """Exact metric check and exact TOUR (no cutoff) of integer costs.

    Returns:
        ``(metric and TOUR >= delta, TOUR)``
    """
    inst = TspInstance(n, np.rint(costs).astype(np.int64), cost_kind=INTEGER)
    metric = not check_metric(inst, tol=0)
    tour = solve_exact(inst).value
    return metric and tour >= delta, tour


def solve_ihopt(x_bar: SepSolution, delta: int = DEFAULT_DELTA, limits: Optional[SolveLimits] = None,
                pool: Optional[CutPool] = None, triangle_k: int = DEFAULT_TRIANGLE_K,
                restarts: int = DEFAULT_RESTARTS, seed: int = 0, lp_limits: Optional[LpLimits] = None,
                certify_result: bool = True) -> HardeningResult:
    """IH-OPT by best-bound branch-and-cut over integer costs in ``[0, delta]``.

    Every LP point gets triangle separation. Integral points additionally get
    lazy tour separation, and become incumbents when no tour row is violated;
    fractional points branch on the most fractional cost. The uniform costs
    ``ceil(delta / n)`` are feasible and serve as the first incumbent.

    Args:
        x_bar: SEP vertex whose cost is minimized
        delta: Integer tour right-hand side
        limits: Time and node budgets
        pool: Warm rows, typically from ``warm_pool``. Without one every tour row is
            found from scratch, which can take minutes from n=10 on
        triangle_k: Triangle rows per round
        restarts: Local-search restarts per tour separation
        seed: Seed for local search
        lp_limits: Simplex tolerances
        certify_result: Re-check the final costs with an exact metric test and exact TOUR

    Returns:
        HardeningResult with integer costs

    Raises:
        LpError: If an LP solve fails with a status other than infeasible
    """
    started = time.perf_counter()
    limits = limits or SolveLimits()
    deadline = None if limits.time_limit is None else started + limits.time_limit
    n = x_bar.n
    m = num_edges(n)
    delta = int(delta)
    if delta < n:
        logger.warning("delta=%d below n=%d: the all-ones costs are already feasible", delta, n)

    if pool is None:
        logger.warning("IH-OPT n=%d started without a cut pool; pass warm_pool(solve_hopt(...)) "
                       "to skip the cold start", n)
        pool = CutPool(n)
    solver = _new_solver(x_bar, delta, pool, lp_limits)
    sep = _Separator(solver, pool, delta, triangle_k, restarts, np.random.default_rng(seed), True, started, deadline)
    weights = x_bar.x.values

    incumbent = np.full(m, math.ceil(delta / n), dtype=float)
    upper_bound = float(weights @ incumbent)
    heap: List[_TreeNode] = [_TreeNode(-math.inf, 0, np.zeros(m), np.full(m, float(delta)), None)]
    seq = 0
    nodes = 0
    status = OPTIMAL

    while heap:
        if deadline is not None and time.perf_counter() > deadline:
            status = TIME_LIMIT
            break
        if limits.node_limit is not None and nodes >= limits.node_limit:
            status = TIME_LIMIT
            break
        node = heapq.heappop(heap)
        if node.bound >= upper_bound - PRUNE_TOL:
            continue
        nodes += 1

        solver.set_all_bounds(node.lower, node.upper)
        if node.basis is None:
            solution = solver.solve()
        else:
            solver.restore(node.basis)
            solution = solver.resolve()

        while True:
            if solution.status == INFEASIBLE:
                break
            if not solution.optimal:
                raise LpError(solution.status, f"IH-OPT LP at node {nodes} ended {solution.status}")
            if solution.objective >= upper_bound - PRUNE_TOL:
                break
            c = EdgeVector(n, np.clip(solution.x, 0.0, delta))
            if sep.triangles(c, solution.objective, nodes):
                solution = solver.resolve()
                continue

            branch_on = _most_fractional(c.values)
            if branch_on is None:
                rounded = np.rint(c.values)
                try:
                    added = sep.tour(EdgeVector(n, rounded), solution.objective, nodes)
                except SeparationTimeoutError:
                    status = TIME_LIMIT
                    heapq.heappush(heap, _TreeNode(solution.objective, seq, node.lower, node.upper, None))
                    break
                if added:
                    solution = solver.resolve()
                    continue
                value = float(weights @ rounded)
                if value < upper_bound:
                    incumbent, upper_bound = rounded, value
                    logger.info("IH-OPT incumbent objective=%.9g node=%d", value, nodes)
                break

            snapshot = solver.snapshot()
            value = c.values[branch_on]
            down_upper = node.upper.copy()
            down_upper[branch_on] = math.floor(value)
            up_lower = node.lower.copy()
            up_lower[branch_on] = math.ceil(value)
            for lower, upper in ((node.lower, down_upper), (up_lower, node.upper)):
                seq += 1
                heapq.heappush(heap, _TreeNode(solution.objective, seq, lower, upper, snapshot, node.depth + 1))
            logger.debug("branch edge=%d value=%.6g bound=%.9g open=%d", branch_on, value, solution.objective,
                         len(heap))
            break

        if status == TIME_LIMIT:
            break

    if status == OPTIMAL:
        lower_bound = upper_bound
    else:
        open_bounds = [nd.bound for nd in heap if nd.bound < upper_bound]
        lower_bound = min([upper_bound] + open_bounds)
        lower_bound = max(lower_bound, 0.0) if math.isfinite(lower_bound) else 0.0

    costs = EdgeVector(n, incumbent)
    tight = tuple(int(e) for e in np.flatnonzero(incumbent >= delta))
    if tight:
        logger.warning("%d edges sit on the box bound c_e = %d; a larger box may admit better costs",
                       len(tight), delta)

    certified, min_tour = False, None
    if certify_result:
        certified, min_tour = certify(incumbent, n, delta)
        if not certified:
            logger.warning("IH-OPT costs failed certification: min tour %s vs delta %d", min_tour, delta)

    sep.stats['nodes'] = nodes
    sep.stats['lp_iterations'] = solver.total_iterations
    sep.stats['runtime'] = time.perf_counter() - started
    result = HardeningResult(costs, upper_bound, lower_bound, upper_bound, status, pool, float(delta), True,
                             sep.stats, sep.log, tight, certified, min_tour)
    logger.info("IH-OPT n=%d delta=%d status=%s objective=%.9g lb=%.9g nodes=%d", n, delta, status, upper_bound,
                lower_bound, nodes)
    return result
