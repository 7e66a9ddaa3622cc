import numpy as np
import pytest

from src.hard_tsp.config import SolveLimits
from src.hard_tsp.core import EdgeVector, Tour, check_metric, edge_index, num_edges
from src.hard_tsp.ihopt import (EXACT, HEURISTIC, WARM, CutPool, all_triangle_slacks, certify, separate_tour,
                                separate_triangles, solve_hopt, solve_ihopt, tour_row, triangle_row, warm_pool)
from src.hard_tsp.pipeline import algorithm1_sample_vertices
from src.hard_tsp.tsp import solve_exact
from tests.oracles import prism_vertex

# the prism vertex reaches the largest SEP gap on six nodes
PRISM_GAP = 10.0 / 9.0


@pytest.fixture(scope="module")
def prism_hopt():
    return solve_hopt(prism_vertex(), delta=1.0, seed=1)


def test_triangle_row_shape():
    row = triangle_row((0, 2, 1), 4)
    assert row.indices == (edge_index(0, 2, 4), edge_index(0, 1, 4), edge_index(2, 1, 4))
    assert row.values == (1.0, -1.0, -1.0)
    assert row.rhs == 0.0


def test_tour_row_covers_every_tour_edge():
    tour = Tour((0, 3, 1, 2))
    row = tour_row(tour, 7.0)
    assert sorted(row.indices) == sorted(tour.edge_indices().tolist())
    assert row.rhs == 7.0


def test_cut_pool_deduplicates():
    pool = CutPool(5)
    assert pool.add_tour(Tour((0, 1, 2, 3, 4)), HEURISTIC)
    assert not pool.add_tour(Tour((2, 1, 0, 4, 3)), EXACT)
    assert pool.add_triangle((3, 1, 0))
    assert not pool.add_triangle((1, 3, 0))
    assert len(pool) == 2
    assert pool.counts() == {HEURISTIC: 1, 'triangle': 1}
    with pytest.raises(ValueError):
        pool.add_tour(Tour((0, 1, 2)), HEURISTIC)


def test_separate_triangles_orders_by_violation():
    n = 4
    c = np.ones(num_edges(n))
    c[edge_index(0, 1, n)] = 5.0
    c[edge_index(2, 3, n)] = 3.0
    found = separate_triangles(EdgeVector(n, c), k=3)
    assert len(found) == 3
    assert found[0].amount == pytest.approx(3.0)
    assert (found[0].i, found[0].j) == (0, 1)
    assert found[0].amount >= found[1].amount >= found[2].amount


def test_separate_tour_finds_a_short_tour():
    c = EdgeVector(5, np.ones(num_edges(5)))
    found = separate_tour(c, delta=6.0, rng=np.random.default_rng(0))
    assert found.tour is not None
    assert found.value == pytest.approx(5.0)
    assert found.source == HEURISTIC
    assert not found.exact_called


def test_separate_tour_proves_nothing_below_delta():
    c = EdgeVector(5, np.ones(num_edges(5)))
    found = separate_tour(c, delta=5.0, rng=np.random.default_rng(0), integer=True)
    assert found.tour is None
    assert found.exact_called


def test_hopt_gap_on_prism(prism_hopt):
    assert prism_hopt.status == "optimal"
    assert prism_hopt.certified
    assert 1.0 / prism_hopt.objective == pytest.approx(PRISM_GAP, abs=1e-6)


def test_hopt_costs_are_feasible(prism_hopt):
    inst = prism_hopt.instance()
    assert check_metric(inst, tol=1e-6) == []
    assert solve_exact(inst).value >= 1.0 - 1e-6
    assert np.all(prism_hopt.costs.values <= 1.0 + 1e-9)
    assert prism_hopt.lower_bound == pytest.approx(prism_hopt.objective, abs=1e-7)


def test_hopt_log_and_stats(prism_hopt):
    assert prism_hopt.log
    assert prism_hopt.stats['exact_calls'] >= 1
    assert prism_hopt.stats['lp_iterations'] > 0
    kinds = {record.kind for record in prism_hopt.log}
    assert kinds <= {'triangle', HEURISTIC, EXACT}
    payload = prism_hopt.to_dict()
    assert payload['n'] == 6
    assert payload['integer'] is False


def test_hopt_scales_with_delta(prism_hopt):
    scaled = solve_hopt(prism_vertex(), delta=10.0, seed=1)
    assert scaled.objective == pytest.approx(10.0 * prism_hopt.objective, rel=1e-6)


def test_warm_pool_keeps_tours_and_tight_triangles(prism_hopt):
    pool = warm_pool(prism_hopt, tau=0.05)
    assert len(pool.tour_rows) == len(prism_hopt.cuts.tour_rows)
    assert set(pool.origins.values()) == {WARM}
    slack = dict(all_triangle_slacks(prism_hopt.costs))
    for key in pool.triangle_rows:
        assert slack[key] <= 0.05 + 1e-9
    loose = warm_pool(prism_hopt, tau=1.0)
    assert len(loose.triangle_rows) >= len(pool.triangle_rows)


def test_ihopt_on_prism(prism_hopt):
    delta = 10
    result = solve_ihopt(prism_vertex(), delta=delta, pool=warm_pool(prism_hopt), seed=2)
    assert result.status == "optimal"
    assert result.integer
    assert result.certified
    assert result.min_tour >= delta
    assert np.array_equal(result.costs.values, np.rint(result.costs.values))
    assert result.objective >= delta * prism_hopt.objective - 1e-6
    # costs 2 inside the triangles, 1 on the matching and 3 across reach 9
    assert result.objective == pytest.approx(9.0)
    inst = result.instance("prism")
    assert inst.is_integer
    assert check_metric(inst, tol=0) == []


def test_ihopt_cold_start_agrees():
    cold = solve_ihopt(prism_vertex(), delta=10, seed=2)
    assert cold.objective == pytest.approx(9.0)


def test_ihopt_node_limit_keeps_a_feasible_incumbent():
    result = solve_ihopt(prism_vertex(), delta=60, limits=SolveLimits(node_limit=1), seed=0)
    assert result.upper_bound <= 60.0 + 1e-9
    assert result.lower_bound <= result.upper_bound
    assert result.certified


def test_certify_uniform_costs():
    ok, tour = certify(np.full(num_edges(6), 2.0), 6, 12)
    assert ok
    assert tour == 12
    ok, tour = certify(np.full(num_edges(6), 2.0), 6, 13)
    assert not ok


def test_separate_tour_returns_a_zero_cost_tour():
    n, delta = 6, 60.0
    c = np.full(num_edges(n), delta / n)
    tour = Tour((0, 2, 4, 1, 3, 5))
    c[tour.edge_indices()] = 0.0
    found = separate_tour(EdgeVector(n, c), delta, rng=np.random.default_rng(3))
    assert found.value == pytest.approx(0.0)
    assert found.tour.canonical() == tour.canonical()


def test_small_delta_is_warned_about(caplog):
    with caplog.at_level("WARNING", logger="src.hard_tsp.ihopt"):
        solve_ihopt(prism_vertex(), delta=5, seed=0)
    assert any("below n=6" in record.getMessage() for record in caplog.records)


def test_cold_start_is_warned_about(caplog):
    with caplog.at_level("WARNING", logger="src.hard_tsp.ihopt"):
        solve_ihopt(prism_vertex(), delta=10, seed=0)
    assert any("without a cut pool" in record.getMessage() for record in caplog.records)


def test_warm_start_is_not_warned_about(caplog, prism_hopt):
    with caplog.at_level("WARNING", logger="src.hard_tsp.ihopt"):
        solve_ihopt(prism_vertex(), delta=10, seed=0, pool=warm_pool(prism_hopt))
    assert not any("without a cut pool" in record.getMessage() for record in caplog.records)


@pytest.fixture(scope="module")
def ten_node_vertex():
    return algorithm1_sample_vertices(10, 1, seed=5)[0].vertex


@pytest.mark.slow
def test_delta_equal_to_n_may_beat_all_ones(ten_node_vertex):
    # zero costs are allowed, so all-ones is feasible but not always optimal
    n = 10
    ok, tour = certify(np.ones(num_edges(n)), n, n)
    assert ok
    assert tour == n
    hopt = solve_hopt(ten_node_vertex)
    result = solve_ihopt(ten_node_vertex, delta=n, pool=warm_pool(hopt))
    assert result.status == "optimal"
    assert result.certified
    assert result.objective <= n + 1e-9
    assert result.lower_bound == pytest.approx(result.upper_bound)


@pytest.mark.slow
@pytest.mark.parametrize("delta", [10, 100])
def test_integer_optimum_dominates_scaled_fractional_optimum(delta):
    for sampled in algorithm1_sample_vertices(8, 3, seed=31):
        hopt = solve_hopt(sampled.vertex)
        ihopt = solve_ihopt(sampled.vertex, delta=delta, pool=warm_pool(hopt))
        assert hopt.status == ihopt.status == "optimal"
        assert ihopt.objective >= delta * hopt.objective - 1e-6
