"""Hard metric TSP instance generation.

This package samples fractional vertices of the subtour elimination
relaxation (SEP), turns each into a metric TSP instance with a large
integrality gap by solving the hardening integer program with branch-and-cut,
and evaluates, stores and reports the results.
"""

__version__ = "1.0.0"

from .client import HardTspClient
from .config import LpLimits, Settings, SolveLimits, configure_logging
from .core import EdgeVector, HcGraph, Tour, TspInstance, check_metric, metric_closure, scale_and_round, tour_cost
from .errors import HardTspError
from .ihopt import solve_hopt, solve_ihopt, warm_pool
from .lp import LinearProgram, SimplexSolver
from .pipeline import algorithm1_sample_vertices, delta_sweep, evaluate, harden, pipeline_generate
from .reports import export_dot, fit_runtime_regression
from .sampler import sample_metric
from .sep import solve_sep
from .tsp import heuristic_tour, solve_exact
from .tsplib import tsplib_fetch, tsplib_read, tsplib_write

__all__ = [
    'HardTspClient',
    'LpLimits',
    'Settings',
    'SolveLimits',
    'configure_logging',
    'EdgeVector',
    'HcGraph',
    'Tour',
    'TspInstance',
    'check_metric',
    'metric_closure',
    'scale_and_round',
    'tour_cost',
    'HardTspError',
    'solve_hopt',
    'solve_ihopt',
    'warm_pool',
    'LinearProgram',
    'SimplexSolver',
    'algorithm1_sample_vertices',
    'delta_sweep',
    'evaluate',
    'harden',
    'pipeline_generate',
    'export_dot',
    'fit_runtime_regression',
    'sample_metric',
    'solve_sep',
    'heuristic_tour',
    'solve_exact',
    'tsplib_fetch',
    'tsplib_read',
    'tsplib_write',
]
