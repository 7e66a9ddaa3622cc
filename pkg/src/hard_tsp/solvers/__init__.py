"""Solvers package for the exact and heuristic TSP back ends."""

from .held_karp import HeldKarpSolver
from .branch_bound import BranchAndBoundSolver
from .local_search import LocalSearchSolver

__all__ = [
    'HeldKarpSolver',
    'BranchAndBoundSolver',
    'LocalSearchSolver'
]
