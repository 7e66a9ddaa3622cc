"""Subtour elimination LP solved by cutting planes with min-cut separation."""

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np

from .config import LpLimits
from .core import EdgeVector, TspInstance, edge_endpoints, edge_index, num_edges
from .errors import IterationCapError, LpError
from .lp import EQ, GE, LinearProgram, Row, SimplexSolver

logger = logging.getLogger(__name__)

SUPPORT_TOL = 1e-9
CUT_TOL = 1e-7
FRACTIONAL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SepSolution:
    """Optimal basic solution of SEP(c).

    Attributes:
        x: Edge values in [0, 1]
        value: SUBT(c), the LP optimum ``c . x``
        n_cuts_added: Subtour rows added by separation
        fractional: True when some ``x_e`` is not within 1e-6 of 0 or 1
        cuts: The node sets ``S`` of every added row, in order
        objective_history: LP optimum after every round
    """

    x: EdgeVector
    value: float
    n_cuts_added: int
    fractional: bool
    cuts: Tuple[FrozenSet[int], ...] = ()
    objective_history: Tuple[float, ...] = field(default=(), compare=False)

    @property
    def n(self) -> int:
        return self.x.n

    def support(self, tol: float = SUPPORT_TOL) -> np.ndarray:
        """Edge indices with ``x_e > tol``."""
        return np.flatnonzero(self.x.values > tol)


def is_fractional(x: EdgeVector, tol: float = FRACTIONAL_TOL) -> bool:
    v = x.values
    return bool(np.any((np.abs(v) > tol) & (np.abs(v - 1.0) > tol)))


def degree_rows(n: int) -> List[Row]:
    """``sum_{e in delta(v)} x_e = 2`` for every node ``v``."""
    rows = []
    for v in range(n):
        idx = [edge_index(v, u, n) for u in range(n) if u != v]
        rows.append(Row(tuple(idx), (1.0,) * len(idx), EQ, 2.0, name=f"deg_{v}"))
    return rows


def subtour_row(subset: Iterable[int], n: int) -> Row:
    """``sum_{e in delta(S)} x_e >= 2``."""
    inside = np.zeros(n, dtype=bool)
    inside[list(subset)] = True
    rows, cols = edge_endpoints(n)
    idx = np.flatnonzero(inside[rows] != inside[cols])
    members = "_".join(str(v) for v in np.flatnonzero(inside))
    return Row(tuple(idx), (1.0,) * len(idx), GE, 2.0, name=f"sec_{members}")


def support_graph(x: EdgeVector, tol: float = SUPPORT_TOL) -> nx.Graph:
    """Graph on all ``n`` nodes with the edges where ``x_e > tol``, weighted by ``x_e``."""
    graph = nx.Graph()
    graph.add_nodes_from(range(x.n))
    rows, cols = edge_endpoints(x.n)
    for e in np.flatnonzero(x.values > tol):
        graph.add_edge(int(rows[e]), int(cols[e]), weight=float(x.values[e]))
    return graph


def separate_subtour(x: EdgeVector, tol: float = CUT_TOL) -> Optional[Tuple[FrozenSet[int], float]]:
    """Find a subtour row violated by ``x``.

    Cuts around one or two nodes cannot drop below 2 once degree rows hold
    and ``x <= 1``, so the global minimum cut needs no size filter.

    The reported shore ``S`` is the one holding node 0, the lowest-numbered
    node. Among several minimum cuts of equal value the one Stoer-Wagner
    returns on the node-ordered support graph wins; for a disconnected
    support it is the component of node 0. Both choices depend on ``x`` only.

    Args:
        x: Point satisfying the degree equalities
        tol: A cut counts as violated when below ``2 - tol``

    Returns:
        ``(S, cut value)`` with ``0 in S``, or None if every cut is at least ``2 - tol``
    """
    graph = support_graph(x)
    if not nx.is_connected(graph):
        subset = frozenset(nx.node_connected_component(graph, 0))
        return subset, x.cut_value(subset)

    _, (left, right) = nx.stoer_wagner(graph)
    subset = frozenset(left if 0 in left else right)
    value = x.cut_value(subset)
    if value < 2.0 - tol:
        return subset, value
    return None


def solve_sep(inst: TspInstance, lp_limits: Optional[LpLimits] = None, max_rounds: int = 10000) -> SepSolution:
    """Solve SEP(c) by adding one global-min-cut row per round.

    Args:
        inst: Instance whose costs form the objective
        lp_limits: Simplex tolerances
        max_rounds: Separation rounds before giving up

    Returns:
        The optimal basic solution and SUBT(c)

    Raises:
        LpError: If an LP solve does not end optimal
        IterationCapError: If ``max_rounds`` pass without a certificate
    """
    n = inst.n
    costs = inst.costs.astype(float)
    lp = LinearProgram(num_edges(n), costs, np.zeros(num_edges(n)), np.ones(num_edges(n)), degree_rows(n))
    solver = SimplexSolver(lp, lp_limits)
    solution = solver.solve()

    cuts: List[FrozenSet[int]] = []
    history: List[float] = []
    for _ in range(max_rounds):
        if not solution.optimal:
            raise LpError(solution.status, f"SEP LP for {inst.name or f'n={n}'} ended {solution.status}")
        history.append(solution.objective)
        x = EdgeVector(n, np.clip(solution.x, 0.0, 1.0))
        found = separate_subtour(x)
        if found is None:
            fractional = is_fractional(x)
            value = float(costs @ x.values)
            logger.info("SEP solved name=%s n=%d value=%.9g cuts=%d fractional=%s",
                        inst.name, n, value, len(cuts), fractional)
            return SepSolution(x, value, len(cuts), fractional, tuple(cuts), tuple(history))
        subset, cut = found
        logger.debug("subtour cut |S|=%d value=%.6g objective=%.9g", len(subset), cut, solution.objective)
        cuts.append(subset)
        solver.add_rows([subtour_row(subset, n)])
        solution = solver.resolve()

    raise IterationCapError(f"SEP separation did not converge in {max_rounds} rounds")
