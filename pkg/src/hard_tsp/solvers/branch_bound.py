"""Best-first branch-and-bound over include/exclude edge decisions with 1-tree bounds."""

import heapq
import logging
import math
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..base import BaseTspSolver, TspResult
from ..config import SolveLimits
from ..core import Tour, TspInstance, tour_cost
from .local_search import LocalSearchSolver
from .one_tree import OneTree, subgradient_ascent

logger = logging.getLogger(__name__)

INTEGER_BOUND_TOL = 1e-6
FLOAT_BOUND_TOL = 1e-9


@dataclass
class SearchNode:
    """Open subproblem: the edges still usable, those forced in, and its bound."""

    bound: float
    seq: int
    allowed: np.ndarray
    forced: np.ndarray
    penalties: np.ndarray
    tree: OneTree
    depth: int = 0

    def __lt__(self, other: "SearchNode") -> bool:
        return (self.bound, self.seq) < (other.bound, other.seq)


def propagate(allowed: np.ndarray, forced: np.ndarray) -> bool:
    """Tighten masks in place from degree-2 requirements; False if infeasible."""
    while True:
        forced_deg = forced.sum(axis=1)
        if np.any(forced_deg > 2):
            return False
        changed = False
        full = np.flatnonzero(forced_deg == 2)
        if full.size:
            extra = allowed[full] & ~forced[full]
            if extra.any():
                allowed[full] &= forced[full]
                allowed[:, full] &= forced[:, full]
                changed = True
        allowed_deg = allowed.sum(axis=1)
        if np.any(allowed_deg < 2):
            return False
        tight = np.flatnonzero(allowed_deg == 2)
        if tight.size:
            missing = allowed[tight] & ~forced[tight]
            if missing.any():
                forced[tight] |= allowed[tight]
                forced[:, tight] |= allowed[:, tight]
                changed = True
        if not changed:
            return True


def tour_from_edges(n: int, edges: np.ndarray) -> Tour:
    neighbours: List[List[int]] = [[] for _ in range(n)]
    for a, b in edges:
        neighbours[int(a)].append(int(b))
        neighbours[int(b)].append(int(a))
    order = [0]
    prev, current = -1, 0
    for _ in range(n - 1):
        nxt = neighbours[current][0] if neighbours[current][0] != prev else neighbours[current][1]
        order.append(nxt)
        prev, current = current, nxt
    return Tour(tuple(order))


class BranchAndBoundSolver(BaseTspSolver):
    """Exact solver for instances past the Held-Karp size.

    Every open node carries a Lagrangian 1-tree bound (subgradient ascent,
    ``root_iterations`` at the root and ``child_iterations`` below, warm
    started from the parent's penalties). A node branches on a free 1-tree
    edge at the lowest-index node of degree above 2: one child excludes the
    edge, the other forces it in.
    """

    name = "branch_and_bound"

    def __init__(self, limits: Optional[SolveLimits] = None, seed: int = 0, heuristic_restarts: int = 10,
                 root_iterations: int = 30, child_iterations: int = 5):
        super().__init__(limits)
        self.seed = seed
        self.heuristic_restarts = heuristic_restarts
        self.root_iterations = root_iterations
        self.child_iterations = child_iterations

    def solve(self, inst: TspInstance, cutoff: Optional[float] = None,
              warm_start: Optional[Tour] = None) -> TspResult:
        """Exact search, optionally stopping at the first tour below ``cutoff``.

        Args:
            inst: Instance to solve
            cutoff: Return as soon as a tour shorter than this is known
            warm_start: Initial incumbent; local search runs when omitted

        Returns:
            With no cutoff, a proven optimal tour. With a cutoff, either a tour
            below it (``proven_optimal`` False) or a proof that none exists
        """
        started = time.perf_counter()
        deadline = self._deadline(started)
        n = inst.n

        if warm_start is None:
            warm = LocalSearchSolver(self.heuristic_restarts, np.random.default_rng(self.seed)).solve(inst, cutoff)
            incumbent, upper = warm.tour, warm.value
        else:
            incumbent, upper = warm_start, tour_cost(inst, warm_start)
        if cutoff is not None and upper < cutoff:
            return self._result(inst, incumbent, proven_optimal=False, started=started)

        matrix = inst.matrix().astype(float)

        def threshold() -> float:
            return upper if cutoff is None else min(upper, cutoff)

        def prunable(bound: float) -> bool:
            if inst.is_integer:
                return math.ceil(bound - INTEGER_BOUND_TOL) >= threshold()
            return bound >= threshold() - FLOAT_BOUND_TOL

        allowed = ~np.eye(n, dtype=bool)
        forced = np.zeros((n, n), dtype=bool)
        bound, penalties, tree = subgradient_ascent(matrix, self.root_iterations, threshold())
        seq = 0
        heap: List[SearchNode] = [SearchNode(bound, seq, allowed, forced, penalties, tree)]
        nodes = 1
        timed_out = False

        while heap:
            if deadline is not None and time.perf_counter() > deadline:
                timed_out = True
                break
            if self.limits.node_limit is not None and nodes >= self.limits.node_limit:
                timed_out = True
                break

            node = heapq.heappop(heap)
            if prunable(node.bound):
                continue
            if node.depth > 0:
                nodes += 1

            if node.tree.is_tour():
                tour = tour_from_edges(n, node.tree.edges)
                value = tour_cost(inst, tour)
                if value < upper:
                    incumbent, upper = tour, value
                    logger.debug("branch-and-bound incumbent=%s nodes=%d", value, nodes)
                    if cutoff is not None and upper < cutoff:
                        return self._result(inst, incumbent, proven_optimal=False, started=started,
                                            nodes_explored=nodes)
                continue

            for child in self._branch(node, matrix):
                bound, penalties, tree = subgradient_ascent(
                    matrix, self.child_iterations, threshold(), child[2], child[0], child[1])
                if bound is None or prunable(bound):
                    continue
                seq += 1
                heapq.heappush(heap, SearchNode(bound, seq, child[0], child[1], penalties, tree, node.depth + 1))

        result = self._result(inst, incumbent, proven_optimal=not timed_out, started=started,
                              nodes_explored=nodes, timed_out=timed_out)
        logger.debug("branch-and-bound n=%d value=%s nodes=%d timed_out=%s", n, result.value, nodes, timed_out)
        return result

    def _branch(self, node: SearchNode, matrix: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
        degrees = node.tree.degrees
        v = int(np.flatnonzero(degrees > 2)[0])
        edges = node.tree.edges
        at_v = edges[(edges[:, 0] == v) | (edges[:, 1] == v)]
        others = np.where(at_v[:, 0] == v, at_v[:, 1], at_v[:, 0])
        free = others[~node.forced[v, others]]
        weights = matrix[v, free] + node.penalties[free]
        # costliest free edge first, ties to the lowest endpoint
        u = int(free[np.lexsort((free, -weights))[0]])

        children = []
        for include in (False, True):
            allowed = node.allowed.copy()
            forced = node.forced.copy()
            if include:
                forced[v, u] = forced[u, v] = True
            else:
                allowed[v, u] = allowed[u, v] = False
            if propagate(allowed, forced):
                children.append((allowed, forced, node.penalties))
        return children
