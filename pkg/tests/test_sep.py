import numpy as np
import pytest

from src.hard_tsp.core import EdgeVector, Tour, TspInstance, edge_index, num_edges, random_metric_instance
from src.hard_tsp.sep import is_fractional, separate_subtour, solve_sep, subtour_row, support_graph
from src.hard_tsp.tsp import solve_exact
from tests.oracles import all_cut_subsets, full_sep_value


def two_cycles(n: int, split: int) -> EdgeVector:
    """Incidence of the cycles on ``0..split-1`` and ``split..n-1``."""
    x = np.zeros(num_edges(n))
    for block in (list(range(split)), list(range(split, n))):
        for a, b in zip(block, block[1:] + block[:1]):
            x[edge_index(a, b, n)] = 1.0
    return EdgeVector(n, x)


def exhaustive_min_cut(x: EdgeVector):
    return min(x.cut_value(s) for s in all_cut_subsets(x.n) if len(s) < x.n)


def test_unit_instance_value(unit_instance):
    sol = solve_sep(unit_instance(8))
    assert sol.value == pytest.approx(8.0)
    assert sol.n_cuts_added >= 0
    for v in range(8):
        assert sol.x.degree(v) == pytest.approx(2.0)


def test_sep_value_never_exceeds_tour(rng):
    for _ in range(5):
        inst = random_metric_instance(8, rng, integer=True, scale=100)
        sol = solve_sep(inst)
        assert sol.value <= solve_exact(inst).value + 1e-6
        assert np.all(sol.x.values >= -1e-9)
        assert np.all(sol.x.values <= 1 + 1e-9)


@pytest.mark.slow
def test_cutting_planes_match_full_formulation():
    rng = np.random.default_rng(2024)
    for trial in range(30):
        n = 6 + trial % 5
        inst = random_metric_instance(n, rng)
        assert solve_sep(inst).value == pytest.approx(full_sep_value(inst), abs=1e-6)


def test_solution_satisfies_every_subtour_row(rng):
    inst = random_metric_instance(8, rng)
    sol = solve_sep(inst)
    for s in all_cut_subsets(8):
        if 2 <= len(s) <= 6:
            assert sol.x.cut_value(s) >= 2.0 - 1e-6


def test_objective_history_is_nondecreasing(rng):
    sol = solve_sep(random_metric_instance(10, rng))
    history = np.asarray(sol.objective_history)
    assert np.all(np.diff(history) >= -1e-7)
    assert len(sol.cuts) == sol.n_cuts_added


def test_separator_finds_disconnected_subtour():
    x = two_cycles(7, 3)
    found = separate_subtour(x)
    assert found is not None
    subset, value = found
    assert subset == frozenset({0, 1, 2})
    assert value == pytest.approx(0.0)


def test_separator_accepts_tour_combinations(rng):
    for _ in range(10):
        n = 8
        weights = rng.dirichlet(np.ones(3))
        x = sum(w * Tour(tuple(rng.permutation(n))).incidence().values for w in weights)
        assert separate_subtour(EdgeVector(n, x)) is None


def test_separator_agrees_with_enumeration(rng):
    for trial in range(50):
        n = 6 + trial % 5
        split = int(rng.integers(3, n - 2))
        w = float(rng.uniform(0.0, 1.0))
        tour = Tour(tuple(rng.permutation(n))).incidence().values
        x = EdgeVector(n, w * two_cycles(n, split).values + (1.0 - w) * tour)
        exhaustive = exhaustive_min_cut(x)
        found = separate_subtour(x)
        if exhaustive < 2.0 - 1e-7:
            assert found is not None
            subset, value = found
            assert 0 in subset
            assert value < 2.0 - 1e-7
            assert x.cut_value(subset) == pytest.approx(value)
        else:
            assert found is None


def test_subtour_row_covers_the_cut():
    row = subtour_row({0, 1}, 4)
    assert row.rhs == 2.0
    assert len(row.indices) == 4


def test_support_graph_keeps_isolated_nodes():
    x = EdgeVector(5, np.zeros(num_edges(5)))
    graph = support_graph(x)
    assert graph.number_of_nodes() == 5
    assert graph.number_of_edges() == 0


def test_is_fractional():
    assert not is_fractional(Tour((0, 1, 2, 3)).incidence())
    assert is_fractional(EdgeVector(3, np.array([0.5, 1.0, 0.0])))


def test_small_instances_have_no_gap(rng):
    for n in (3, 4, 5):
        inst = random_metric_instance(n, rng)
        assert solve_sep(inst).value == pytest.approx(solve_exact(inst).value, abs=1e-7)


def test_four_node_instance(four_node_instance):
    assert solve_sep(four_node_instance).value == pytest.approx(12.0)


def test_instance_type_is_untouched(four_node_instance):
    before = four_node_instance.costs.copy()
    solve_sep(four_node_instance)
    assert isinstance(four_node_instance, TspInstance)
    assert np.array_equal(four_node_instance.costs, before)


def test_tied_minimum_cuts_resolve_to_the_same_shore():
    n, w = 9, 0.6
    x = np.zeros(num_edges(n))
    for block in ((0, 1, 2), (3, 4, 5), (6, 7, 8)):
        for a, b in zip(block, block[1:] + block[:1]):
            x[edge_index(a, b, n)] += w
    x += (1.0 - w) * Tour(tuple(range(n))).incidence().values
    x = EdgeVector(n, x)
    first = separate_subtour(x)
    assert first is not None
    subset, value = first
    assert 0 in subset
    assert value == pytest.approx(2.0 * (1.0 - w))
    for _ in range(5):
        assert separate_subtour(EdgeVector(n, x.values.copy())) == first
