"""TOUR(c): exact and heuristic TSP solving behind one dispatching facade."""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from .base import BaseTspSolver, TspResult
from .config import SolveLimits
from .core import Tour, TspInstance
from .errors import MemoryLimitError, ParameterError
from .solvers import BranchAndBoundSolver, HeldKarpSolver, LocalSearchSolver
from .solvers.one_tree import one_tree_value, subgradient_ascent
from .solvers.local_search import nearest_neighbor, tour_length

logger = logging.getLogger(__name__)

DEFAULT_DP_THRESHOLD = 16
METHODS = ("auto", "dp", "bnb")


def get_solver(solver_type: str, limits: Optional[SolveLimits] = None, seed: int = 0,
               restarts: int = 10) -> BaseTspSolver:
    """Build a solver by name.

    Args:
        solver_type: ``held_karp``/``dp``, ``branch_and_bound``/``bnb`` or ``local_search``/``heuristic``
        limits: Time and node budgets
        seed: Seed for the randomized parts
        restarts: Local-search restarts

    Returns:
        A solver instance
    """
    solver_type = solver_type.lower()

    if solver_type in ['held_karp', 'dp']:
        return HeldKarpSolver(limits)
    elif solver_type in ['branch_and_bound', 'bnb']:
        return BranchAndBoundSolver(limits, seed=seed, heuristic_restarts=restarts)
    elif solver_type in ['local_search', 'heuristic']:
        return LocalSearchSolver(restarts, np.random.default_rng(seed), limits)
    else:
        raise ParameterError(
            f"Invalid solver type: {solver_type}. "
            f"Valid types: held_karp, branch_and_bound, local_search"
        )


def held_karp_dp(inst: TspInstance) -> TspResult:
    return HeldKarpSolver().solve(inst)


def solve_exact(inst: TspInstance, cutoff: Optional[float] = None, limits: Optional[SolveLimits] = None,
                dp_threshold: int = DEFAULT_DP_THRESHOLD, method: str = "auto", seed: int = 0,
                warm_start: Optional[Tour] = None) -> TspResult:
    """Exact TSP with an optional early-exit cutoff.

    Held-Karp runs when ``n <= dp_threshold``, branch-and-bound otherwise.

    Args:
        inst: Instance to solve
        cutoff: Return any tour below this value as soon as one is known;
            ``inf`` behaves like no cutoff
        limits: Time and node budgets for branch-and-bound
        dp_threshold: Largest ``n`` handed to the DP
        method: ``auto``, ``dp`` or ``bnb``
        seed: Seed for the warm-start heuristic
        warm_start: Initial incumbent for branch-and-bound

    Returns:
        TspResult; ``proven_optimal`` means optimal, or under a cutoff that no
        tour is below it

    Raises:
        MemoryLimitError: If ``method="dp"`` and ``n > dp_threshold``
    """
    if method not in METHODS:
        raise ParameterError(f"method must be one of {METHODS}, got {method!r}")
    if cutoff is not None and math.isinf(cutoff) and cutoff > 0:
        cutoff = None

    if method == "dp" and inst.n > dp_threshold:
        raise MemoryLimitError(f"n={inst.n} exceeds dp_threshold={dp_threshold}")
    use_dp = method == "dp" or (method == "auto" and inst.n <= dp_threshold)

    if use_dp:
        result = HeldKarpSolver(limits).solve(inst, cutoff)
    else:
        result = BranchAndBoundSolver(limits, seed=seed).solve(inst, cutoff, warm_start=warm_start)
    logger.debug("solve_exact n=%d solver=%s value=%s proven=%s", inst.n, result.solver, result.value,
                 result.proven_optimal)
    return result


def one_tree_bound(inst: TspInstance, node_penalties: Optional[np.ndarray] = None) -> float:
    """Min 1-tree under ``c_ij + pi_i + pi_j`` minus ``2 sum(pi)``; never above TOUR(c)."""
    penalties = np.zeros(inst.n) if node_penalties is None else np.asarray(node_penalties, dtype=float)
    value, _ = one_tree_value(inst.matrix(), penalties)
    return value


def subgradient_bound(inst: TspInstance, iterations: int = 50,
                      upper_bound: Optional[float] = None) -> Tuple[float, np.ndarray]:
    """Held-Karp ascent from zero penalties.

    Args:
        inst: Instance to bound
        iterations: Ascent iterations
        upper_bound: Target for the step length, a nearest-neighbour tour when omitted

    Returns:
        ``(best bound, penalties achieving it)``
    """
    matrix = inst.matrix()
    if upper_bound is None:
        upper_bound = float(tour_length(matrix, nearest_neighbor(matrix)))
    bound, penalties, _ = subgradient_ascent(matrix, iterations, upper_bound)
    return bound, penalties


def heuristic_tour(inst: TspInstance, restarts: int = 10, rng: Optional[np.random.Generator] = None,
                   cutoff: Optional[float] = None) -> TspResult:
    """Best of ``restarts`` nearest-neighbour + 2-opt + Or-opt runs (never proven optimal)."""
    return LocalSearchSolver(restarts, rng).solve(inst, cutoff)


def improve_tour(inst: TspInstance, tour: Tour) -> TspResult:
    """2-opt + Or-opt from ``tour`` to a local optimum."""
    return LocalSearchSolver(1).improve_tour(inst, tour)
