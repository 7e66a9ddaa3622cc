"""Runtime configuration, solver limits and logging setup."""

import logging
import os
from dataclasses import dataclass, field, fields
from typing import Dict, Optional

from dotenv import load_dotenv

LOG_FORMAT = "%(asctime)s level=%(levelname)s logger=%(name)s %(message)s"

DEFAULT_TSPLIB_BASE_URL = "http://comopt.ifi.uni-heidelberg.de/software/TSPLIB95/tsp"


@dataclass(frozen=True)
class LpLimits:
    """Tolerances and budgets for the simplex engine.

    Attributes:
        tol_feas: Primal feasibility tolerance on rows and bounds.
        tol_opt: Reduced-cost (dual feasibility) tolerance.
        pivot_tol: Smallest pivot magnitude accepted in a ratio test.
        bland_after: Consecutive degenerate pivots before Bland's rule.
        refactor_every: Pivots between explicit basis re-inversions.
        max_iterations: Pivot budget per (re)solve.
        artificial_bound: Box imposed on variables with an infinite bound.
    """

    tol_feas: float = 1e-7
    tol_opt: float = 1e-7
    pivot_tol: float = 1e-9
    bland_after: int = 1000
    refactor_every: int = 50
    max_iterations: int = 50000
    artificial_bound: float = 1e7


@dataclass(frozen=True)
class SolveLimits:
    """Search budgets shared by branch-and-bound and branch-and-cut.

    ``None`` means unlimited.
    """

    time_limit: Optional[float] = None
    node_limit: Optional[int] = None


@dataclass(frozen=True)
class Settings:
    """Pipeline defaults, overridable from the environment or a ``.env`` file."""

    seed: int = 0
    delta: int = 1000
    time_limit: Optional[float] = None
    node_limit: Optional[int] = None
    reps: int = 5
    out_dir: str = "out"
    workers: int = 1
    log_level: str = "INFO"
    triangle_k: int = 50
    tau: float = 0.05
    dp_threshold: int = 16
    burn_in: int = 1000
    thin: int = 10
    max_draws: int = 100000
    tsplib_base_url: str = DEFAULT_TSPLIB_BASE_URL
    from_environment: Dict[str, bool] = field(default_factory=dict, compare=False)

    @classmethod
    def from_env(cls, load_env: bool = True) -> "Settings":
        """Build settings from ``HARD_TSP_*`` environment variables.

        Args:
            load_env: Whether to load a ``.env`` file first

        Returns:
            Settings with every unset variable at its default
        """
        if load_env:
            load_dotenv()

        values = {}
        seen = {}
        for f in fields(cls):
            if f.name == "from_environment":
                continue
            env_name = "TSPLIB_BASE_URL" if f.name == "tsplib_base_url" else f"HARD_TSP_{f.name.upper()}"
            raw = os.getenv(env_name)
            seen[f.name] = raw is not None and raw != ""
            if not seen[f.name]:
                continue
            values[f.name] = _coerce(f.name, raw, f.default)

        return cls(**values, from_environment=seen)

    @property
    def limits(self) -> SolveLimits:
        return SolveLimits(time_limit=self.time_limit, node_limit=self.node_limit)


_OPTIONAL_FLOATS = {"time_limit"}
_OPTIONAL_INTS = {"node_limit"}


def _coerce(name: str, raw: str, default):
    if name in _OPTIONAL_FLOATS:
        return None if raw.lower() in ("none", "") else float(raw)
    if name in _OPTIONAL_INTS:
        return None if raw.lower() in ("none", "") else int(raw)
    if isinstance(default, bool):
        return raw.lower() == "true"
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def configure_logging(level: str = "INFO") -> None:
    """Install the package log format on the root logger.

    Args:
        level: Level name such as ``DEBUG`` or ``INFO``
    """
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT)
