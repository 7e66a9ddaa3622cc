"""A small bounded-variable revised simplex engine.

Rows ``a x (<=|=|>=) b`` get one slack column each, ``a x + s = b``, with
slack bounds ``[0, inf)``, ``[0, 0]`` or ``(-inf, 0]``. The engine keeps an
explicit dense basis inverse, updated by eta transformations and re-inverted
every ``LpLimits.refactor_every`` pivots.

Every solve runs the dual simplex. A cold start puts each structural column
at the bound its cost sign prefers, which is dual feasible once infinite
bounds are replaced by ``LpLimits.artificial_bound``; a nonbasic column left
on such an artificial bound with a nonzero reduced cost means the LP is
unbounded. Added rows and tightened bounds keep the last basis dual
feasible, so cutting-plane loops and branch-and-bound nodes re-solve from it.

Leaving rows are priced by largest infeasibility (Dantzig); after
``LpLimits.bland_after`` consecutive degenerate pivots the solve switches to
Bland's smallest-index rule until it ends.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config import LpLimits
from .errors import DimensionMismatchError, ParameterError

logger = logging.getLogger(__name__)

LE = "<="
EQ = "="
GE = ">="
SENSES = (LE, EQ, GE)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"
NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class Row:
    """Sparse constraint row ``sum(values[k] * x[indices[k]]) sense rhs``."""

    indices: Tuple[int, ...]
    values: Tuple[float, ...]
    sense: str
    rhs: float
    name: str = ""

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ParameterError(f"row sense must be one of {SENSES}, got {self.sense!r}")
        if len(self.indices) != len(self.values):
            raise DimensionMismatchError("row indices and values differ in length")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "rhs", float(self.rhs))

    @classmethod
    def from_dense(cls, coefficients: Sequence[float], sense: str, rhs: float, name: str = "") -> "Row":
        coefficients = np.asarray(coefficients, dtype=float)
        nz = np.flatnonzero(coefficients)
        return cls(tuple(nz), tuple(coefficients[nz]), sense, rhs, name)

    def activity(self, x: np.ndarray) -> float:
        return float(np.dot(np.asarray(self.values), x[list(self.indices)])) if self.indices else 0.0

    def violation(self, x: np.ndarray) -> float:
        """How far ``x`` is outside the row (0 when satisfied)."""
        lhs = self.activity(x)
        if self.sense == LE:
            return max(lhs - self.rhs, 0.0)
        if self.sense == GE:
            return max(self.rhs - lhs, 0.0)
        return abs(lhs - self.rhs)


@dataclass
class LinearProgram:
    """``min c x`` subject to rows and ``lower <= x <= upper``."""

    num_vars: int
    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    rows: List[Row] = field(default_factory=list)
    names: Optional[List[str]] = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        for label, arr in (("objective", self.objective), ("lower", self.lower), ("upper", self.upper)):
            if arr.shape != (self.num_vars,):
                raise DimensionMismatchError(f"{label} must have length {self.num_vars}")
        if np.any(self.lower > self.upper):
            raise ParameterError("every lower bound must be <= its upper bound")
        for row in self.rows:
            self._check_row(row)

    def _check_row(self, row: Row) -> None:
        if row.indices and (min(row.indices) < 0 or max(row.indices) >= self.num_vars):
            raise DimensionMismatchError(f"row {row.name or '?'} references a column outside 0..{self.num_vars - 1}")

    def to_lp_format(self) -> str:
        """Render in the CPLEX-style LP text format (debugging aid only)."""
        names = self.names or [f"x{j}" for j in range(self.num_vars)]

        def term_list(pairs):
            parts = []
            for j, v in pairs:
                sign = "-" if v < 0 else "+"
                parts.append(f"{sign} {abs(v):.12g} {names[j]}")
            text = " ".join(parts) if parts else "0"
            return text[2:] if text.startswith("+ ") else text

        lines = ["Minimize", " obj: " + term_list((j, v) for j, v in enumerate(self.objective) if v != 0),
                 "Subject To"]
        for r, row in enumerate(self.rows):
            lines.append(f" {row.name or f'r{r}'}: {term_list(zip(row.indices, row.values))} {row.sense} {row.rhs:.12g}")
        lines.append("Bounds")
        for j in range(self.num_vars):
            lo = "-inf" if np.isneginf(self.lower[j]) else f"{self.lower[j]:.12g}"
            hi = "+inf" if np.isposinf(self.upper[j]) else f"{self.upper[j]:.12g}"
            lines.append(f" {lo} <= {names[j]} <= {hi}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class LpSolution:
    """Outcome of a solve.

    ``basis`` lists basic columns, structural ``j < num_vars`` and the slack
    of row ``r`` as ``num_vars + r``; ``at_upper`` lists nonbasic columns
    resting on their upper bound.
    """

    status: str
    x: np.ndarray
    objective: float
    basis: Tuple[int, ...] = ()
    at_upper: Tuple[int, ...] = ()
    duals: Optional[np.ndarray] = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass(frozen=True)
class BasisSnapshot:
    """A basis to restart from, valid for any LP that only appended rows since."""

    basis: Tuple[int, ...]
    at_upper: Tuple[int, ...]
    num_rows: int


class SimplexSolver:
    """Single-owner solver state for one LP that may grow by rows.

    Args:
        lp: The program to solve; rows added later go through ``add_rows``
        limits: Tolerances and budgets
    """

    def __init__(self, lp: LinearProgram, limits: Optional[LpLimits] = None):
        self.limits = limits or LpLimits()
        self.num_vars = lp.num_vars
        self._cost = lp.objective.copy()
        self._lower = lp.lower.copy()
        self._upper = lp.upper.copy()
        self._names = lp.names
        self._rows: List[Row] = []
        self._a = np.zeros((0, self.num_vars))
        self._b = np.zeros(0)
        self._basis: Optional[np.ndarray] = None
        self._at_upper = np.zeros(self.num_vars, dtype=bool)
        self._binv = np.zeros((0, 0))
        self.total_iterations = 0
        self._append_rows(lp.rows)

    # -- model edits -------------------------------------------------------

    @property
    def num_rows(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> List[Row]:
        return list(self._rows)

    @property
    def program(self) -> LinearProgram:
        return LinearProgram(self.num_vars, self._cost.copy(), self._lower.copy(), self._upper.copy(),
                             list(self._rows), self._names)

    def _append_rows(self, rows: Iterable[Row]) -> int:
        rows = list(rows)
        if not rows:
            return 0
        block = np.zeros((len(rows), self.num_vars))
        for r, row in enumerate(rows):
            if row.indices and (min(row.indices) < 0 or max(row.indices) >= self.num_vars):
                raise DimensionMismatchError(f"row {row.name or r} references a column outside the LP")
            np.add.at(block[r], list(row.indices), list(row.values))
        self._a = np.vstack([self._a, block])
        self._b = np.concatenate([self._b, [row.rhs for row in rows]])
        self._rows.extend(rows)
        self._at_upper = np.concatenate([self._at_upper, np.zeros(len(rows), dtype=bool)])
        return len(rows)

    def add_rows(self, rows: Iterable[Row]) -> int:
        """Append rows; their slacks join the current basis."""
        first = self.num_rows
        added = self._append_rows(rows)
        if added and self._basis is not None:
            new_slacks = self.num_vars + np.arange(first, first + added)
            self._basis = np.concatenate([self._basis, new_slacks])
        return added

    def set_bounds(self, column: int, lower: float, upper: float) -> None:
        if lower > upper:
            raise ParameterError(f"empty bound interval [{lower}, {upper}] on column {column}")
        self._lower[column] = lower
        self._upper[column] = upper

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self._lower.copy(), self._upper.copy()

    def set_all_bounds(self, lower: np.ndarray, upper: np.ndarray) -> None:
        if np.any(lower > upper):
            raise ParameterError("every lower bound must be <= its upper bound")
        self._lower = np.asarray(lower, dtype=float).copy()
        self._upper = np.asarray(upper, dtype=float).copy()

    def snapshot(self) -> BasisSnapshot:
        if self._basis is None:
            raise ParameterError("no basis to snapshot; solve first")
        return BasisSnapshot(tuple(int(j) for j in self._basis),
                             tuple(int(j) for j in np.flatnonzero(self._at_upper)), self.num_rows)

    def restore(self, snap: BasisSnapshot) -> None:
        """Reinstate a basis, adding slacks of rows appended after the snapshot."""
        later = self.num_vars + np.arange(snap.num_rows, self.num_rows)
        self._basis = np.concatenate([np.asarray(snap.basis, dtype=np.int64), later]).astype(np.int64)
        self._at_upper = np.zeros(self.num_vars + self.num_rows, dtype=bool)
        self._at_upper[list(snap.at_upper)] = True

    # -- solving -----------------------------------------------------------

    def solve(self) -> LpSolution:
        """Cold solve from the all-slack basis."""
        self._basis = self.num_vars + np.arange(self.num_rows)
        self._at_upper = np.zeros(self.num_vars + self.num_rows, dtype=bool)
        self._at_upper[:self.num_vars] = self._cost < 0
        return self._dual_simplex()

    def resolve(self) -> LpSolution:
        """Dual simplex from the current (dual feasible) basis."""
        if self._basis is None:
            return self.solve()
        return self._dual_simplex()

    def _full_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        big = self.limits.artificial_bound
        lo = np.where(np.isneginf(self._lower), -big, self._lower)
        hi = np.where(np.isposinf(self._upper), big, self._upper)
        senses = [row.sense for row in self._rows]
        slack_lo = np.array([-np.inf if s == GE else 0.0 for s in senses])
        slack_hi = np.array([np.inf if s == LE else 0.0 for s in senses])
        return np.concatenate([lo, slack_lo]), np.concatenate([hi, slack_hi])

    def _refactor(self, matrix: np.ndarray) -> bool:
        m = self.num_rows
        if m == 0:
            self._binv = np.zeros((0, 0))
            return True
        try:
            self._binv = np.linalg.inv(matrix[:, self._basis])
        except np.linalg.LinAlgError:
            return False
        return bool(np.all(np.isfinite(self._binv)))

    def _primal_values(self, matrix: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        x = np.where(self._at_upper, hi, lo)
        x[self._basis] = 0.0
        x[self._basis] = self._binv @ (self._b - matrix @ x)
        return x

    def _dual_simplex(self) -> LpSolution:
        lim = self.limits
        n, m = self.num_vars, self.num_rows
        matrix = np.hstack([self._a, np.eye(m)])
        cost = np.concatenate([self._cost, np.zeros(m)])
        lo, hi = self._full_bounds()
        self._at_upper[self._basis] = False

        if not self._refactor(matrix):
            return self._finish(NUMERICAL_FAILURE, matrix, cost, lo, hi, 0)

        iterations = 0
        degenerate_run = 0
        bland = False
        since_refactor = 0
        while True:
            if iterations >= lim.max_iterations:
                logger.warning("simplex iteration limit %d reached rows=%d cols=%d", lim.max_iterations, m, n)
                return self._finish(ITERATION_LIMIT, matrix, cost, lo, hi, iterations)

            x = self._primal_values(matrix, lo, hi)
            xb = x[self._basis]
            below = lo[self._basis] - xb
            above = xb - hi[self._basis]
            infeasibility = np.maximum(below, above)
            candidates = np.flatnonzero(infeasibility > lim.tol_feas)
            if candidates.size == 0:
                return self._finish(OPTIMAL, matrix, cost, lo, hi, iterations)

            if bland:
                r = int(candidates[np.argmin(self._basis[candidates])])
            else:
                r = int(candidates[np.argmax(infeasibility[candidates])])
            leaving = int(self._basis[r])
            going_up = below[r] > lim.tol_feas

            y = cost[self._basis] @ self._binv
            reduced = cost - y @ matrix
            alpha = self._binv[r] @ matrix

            nonbasic = np.ones(n + m, dtype=bool)
            nonbasic[self._basis] = False
            movable = nonbasic & (lo < hi)
            s_alpha = -alpha if going_up else alpha
            eligible = movable & np.where(self._at_upper, s_alpha < -lim.pivot_tol, s_alpha > lim.pivot_tol)
            if not eligible.any():
                logger.debug("dual ratio test empty on row of column %d: primal infeasible", leaving)
                return self._finish(INFEASIBLE, matrix, cost, lo, hi, iterations)

            cols = np.flatnonzero(eligible)
            signed_d = np.where(self._at_upper[cols], -reduced[cols], reduced[cols])
            ratios = np.maximum(signed_d, 0.0) / np.abs(alpha[cols])
            step = ratios.min()
            ties = cols[ratios <= step + 1e-12]
            if bland:
                q = int(ties.min())
            else:
                q = int(ties[np.argmax(np.abs(alpha[ties]))])

            column = self._binv @ matrix[:, q]
            pivot = column[r]
            if abs(pivot) < lim.pivot_tol:
                if since_refactor == 0:
                    logger.warning("pivot %.3e below tolerance right after refactorization", pivot)
                    return self._finish(NUMERICAL_FAILURE, matrix, cost, lo, hi, iterations)
                since_refactor = 0
                if not self._refactor(matrix):
                    return self._finish(NUMERICAL_FAILURE, matrix, cost, lo, hi, iterations)
                continue

            self._basis[r] = q
            self._at_upper[q] = False
            self._at_upper[leaving] = not going_up and lo[leaving] < hi[leaving]

            pivot_row = self._binv[r] / pivot
            self._binv -= np.outer(column, pivot_row)
            self._binv[r] = pivot_row

            iterations += 1
            since_refactor += 1
            if step <= lim.tol_opt:
                degenerate_run += 1
                if not bland and degenerate_run >= lim.bland_after:
                    logger.info("switching to Bland's rule after %d degenerate pivots", degenerate_run)
                    bland = True
            else:
                degenerate_run = 0

            if since_refactor >= lim.refactor_every:
                since_refactor = 0
                if not self._refactor(matrix):
                    return self._finish(NUMERICAL_FAILURE, matrix, cost, lo, hi, iterations)

    def _finish(self, status: str, matrix: np.ndarray, cost: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                iterations: int) -> LpSolution:
        self.total_iterations += iterations
        n = self.num_vars
        if status == NUMERICAL_FAILURE:
            return LpSolution(status, np.full(n, np.nan), np.nan, iterations=iterations)

        x = self._primal_values(matrix, lo, hi)
        y = cost[self._basis] @ self._binv
        if status == OPTIMAL:
            reduced = cost - y @ matrix
            nonbasic = np.ones(len(cost), dtype=bool)
            nonbasic[self._basis] = False
            artificial = np.concatenate([
                (np.isneginf(self._lower) & ~self._at_upper[:n]) | (np.isposinf(self._upper) & self._at_upper[:n]),
                np.zeros(self.num_rows, dtype=bool),
            ])
            if np.any(artificial & nonbasic & (np.abs(reduced) > self.limits.tol_opt)):
                status = UNBOUNDED

        objective = float(self._cost @ x[:n])
        logger.debug("simplex status=%s objective=%.10g iterations=%d rows=%d", status, objective,
                     iterations, self.num_rows)
        return LpSolution(
            status=status,
            x=x[:n].copy(),
            objective=objective,
            basis=tuple(int(j) for j in self._basis),
            at_upper=tuple(int(j) for j in np.flatnonzero(self._at_upper)),
            duals=y,
            iterations=iterations,
        )


def solve(lp: LinearProgram, limits: Optional[LpLimits] = None) -> LpSolution:
    """Solve ``lp`` from scratch."""
    return SimplexSolver(lp, limits).solve()


def add_rows_and_resolve(state: SimplexSolver, new_rows: Iterable[Row]) -> LpSolution:
    """Append rows to a solved LP and re-optimize with the dual simplex."""
    state.add_rows(new_rows)
    return state.resolve()
