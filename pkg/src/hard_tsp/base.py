"""Base class and result type shared by the TSP solvers."""

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Optional

from .config import SolveLimits
from .core import Tour, TspInstance, tour_cost


@dataclass(frozen=True)
class TspResult:
    """A tour and what the solver could prove about it.

    Attributes:
        tour: Best tour found
        value: ``tour_cost(inst, tour)``
        proven_optimal: No tour is shorter (or, under a cutoff, none is below it)
        nodes_explored: Branch-and-bound nodes processed
        runtime: Wall time in seconds
        timed_out: A time or node budget stopped the search early
        solver: Name of the solver that produced the result
    """

    tour: Tour
    value: float
    proven_optimal: bool
    nodes_explored: int = 0
    runtime: float = 0.0
    timed_out: bool = False
    solver: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tour': list(self.tour.order),
            'value': self.value,
            'proven_optimal': self.proven_optimal,
            'nodes_explored': self.nodes_explored,
            'runtime': self.runtime,
            'timed_out': self.timed_out,
            'solver': self.solver,
        }


class BaseTspSolver(ABC):
    """Base class for all TSP solvers."""

    name = "base"

    def __init__(self, limits: Optional[SolveLimits] = None):
        """Initialize the solver.

        Args:
            limits: Time and node budgets (unlimited when omitted)
        """
        self.limits = limits or SolveLimits()

    def _deadline(self, started: float) -> Optional[float]:
        if self.limits.time_limit is None:
            return None
        return started + self.limits.time_limit

    def _result(self, inst: TspInstance, tour: Tour, proven_optimal: bool, started: float,
                nodes_explored: int = 0, timed_out: bool = False) -> TspResult:
        return TspResult(
            tour=tour,
            value=tour_cost(inst, tour),
            proven_optimal=proven_optimal,
            nodes_explored=nodes_explored,
            runtime=time.perf_counter() - started,
            timed_out=timed_out,
            solver=self.name,
        )

    @abstractmethod
    def solve(self, inst: TspInstance, cutoff: Optional[float] = None) -> TspResult:
        """Solve an instance.

        Args:
            inst: Instance to solve
            cutoff: Stop as soon as a tour shorter than this is known

        Returns:
            The best tour found and its certificate flags
        """
        pass
