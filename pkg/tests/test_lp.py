import numpy as np
import pytest
from scipy.optimize import linprog

from src.hard_tsp.config import LpLimits
from src.hard_tsp.errors import DimensionMismatchError, ParameterError
from src.hard_tsp.lp import (EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED, LinearProgram, Row, SimplexSolver,
                             add_rows_and_resolve, solve)

INF = np.inf


def beale_program():
    # classic cycling example for textbook Dantzig pivoting; optimum -5/4
    objective = [-0.75, 20.0, -0.5, 6.0]
    rows = [
        Row.from_dense([0.25, -8.0, -1.0, 9.0], LE, 0.0),
        Row.from_dense([0.5, -12.0, -0.5, 3.0], LE, 0.0),
        Row.from_dense([0.0, 0.0, 1.0, 0.0], LE, 1.0),
    ]
    return LinearProgram(4, objective, np.zeros(4), np.full(4, INF), rows)


def test_beale_terminates_at_optimum():
    result = solve(beale_program())
    assert result.status == OPTIMAL
    assert result.objective == pytest.approx(-1.25)


def test_beale_with_bland_from_the_start():
    result = solve(beale_program(), LpLimits(bland_after=0))
    assert result.status == OPTIMAL
    assert result.objective == pytest.approx(-1.25)


def test_add_rows_and_resolve_tightens():
    lp = LinearProgram(1, [1.0], [-INF], [INF], [Row((0,), (1.0,), GE, 3.0)])
    state = SimplexSolver(lp)
    first = state.solve()
    assert first.objective == pytest.approx(3.0)
    second = add_rows_and_resolve(state, [Row((0,), (1.0,), GE, 5.0)])
    assert second.status == OPTIMAL
    assert second.objective == pytest.approx(5.0)
    assert state.num_rows == 2


def test_bounded_box_optimum():
    lp = LinearProgram(2, [-1.0, -1.0], [0.0, 0.0], [1.0, 1.0], [Row((0, 1), (1.0, 1.0), LE, 1.0)])
    result = solve(lp)
    assert result.status == OPTIMAL
    assert result.objective == pytest.approx(-1.0)
    assert result.x.sum() == pytest.approx(1.0)


def test_infeasible_status():
    lp = LinearProgram(1, [1.0], [0.0], [1.0], [Row((0,), (1.0,), GE, 2.0)])
    assert solve(lp).status == INFEASIBLE


def test_unbounded_status():
    lp = LinearProgram(2, [-1.0, 0.0], [0.0, 0.0], [INF, INF], [Row((0, 1), (1.0, -1.0), LE, 1.0)])
    assert solve(lp).status == UNBOUNDED


def test_equality_rows():
    rows = [Row((0, 1, 2), (1.0, 1.0, 1.0), EQ, 2.0), Row((0, 1), (1.0, -1.0), EQ, 0.0)]
    lp = LinearProgram(3, [1.0, 1.0, 3.0], np.zeros(3), np.ones(3), rows)
    result = solve(lp)
    assert result.status == OPTIMAL
    assert result.objective == pytest.approx(2.0)
    assert result.x == pytest.approx([1.0, 1.0, 0.0])


def test_bounds_change_and_snapshot_restore():
    lp = LinearProgram(2, [1.0, 2.0], [0.0, 0.0], [4.0, 4.0], [Row((0, 1), (1.0, 1.0), GE, 3.0)])
    state = SimplexSolver(lp)
    assert state.solve().objective == pytest.approx(3.0)
    snap = state.snapshot()

    state.set_bounds(0, 0.0, 1.0)
    assert state.resolve().objective == pytest.approx(5.0)

    state.set_bounds(0, 0.0, 4.0)
    state.restore(snap)
    assert state.resolve().objective == pytest.approx(3.0)


def test_matches_highs_on_random_programs(rng):
    for _ in range(20):
        num_vars, num_rows = 6, 5
        a = rng.uniform(-1.0, 1.0, size=(num_rows, num_vars))
        x0 = rng.uniform(0.0, 1.0, size=num_vars)
        b = a @ x0 + rng.uniform(0.0, 0.5, size=num_rows)
        c = rng.uniform(-1.0, 1.0, size=num_vars)
        rows = [Row.from_dense(a[r], LE, b[r]) for r in range(num_rows)]
        ours = solve(LinearProgram(num_vars, c, np.zeros(num_vars), np.full(num_vars, 2.0), rows))
        reference = linprog(c, A_ub=a, b_ub=b, bounds=(0.0, 2.0), method="highs")
        assert ours.status == OPTIMAL
        assert ours.objective == pytest.approx(reference.fun, abs=1e-7)


def test_row_violation_and_activity():
    row = Row((0, 2), (1.0, 2.0), LE, 3.0)
    x = np.array([1.0, 5.0, 2.0])
    assert row.activity(x) == pytest.approx(5.0)
    assert row.violation(x) == pytest.approx(2.0)
    assert Row((0,), (1.0,), GE, 0.0).violation(x) == 0.0


def test_program_validation():
    with pytest.raises(ParameterError):
        Row((0,), (1.0,), "<", 1.0)
    with pytest.raises(DimensionMismatchError):
        LinearProgram(2, [1.0], [0.0, 0.0], [1.0, 1.0])
    with pytest.raises(DimensionMismatchError):
        LinearProgram(1, [1.0], [0.0], [1.0], [Row((3,), (1.0,), LE, 1.0)])
    with pytest.raises(ParameterError):
        LinearProgram(1, [1.0], [2.0], [1.0])


def test_lp_format_text():
    text = beale_program().to_lp_format()
    assert text.startswith("Minimize")
    assert "Subject To" in text
    assert text.rstrip().endswith("End")
