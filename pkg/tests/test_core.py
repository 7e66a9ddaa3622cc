import numpy as np
import pytest

from src.hard_tsp.core import (EdgeVector, HcGraph, Tour, TspInstance, check_metric, edge_endpoints, edge_index,
                               hc_reduction, metric_closure, nodes_from_edge_count, num_edges,
                               random_metric_instance, scale_and_round, tour_cost)
from src.hard_tsp.errors import CostRangeError, DimensionMismatchError, ParameterError
from src.hard_tsp.tsp import solve_exact


def test_edge_index_matches_triu_order():
    n = 7
    rows, cols = edge_endpoints(n)
    for e, (i, j) in enumerate(zip(rows, cols)):
        assert edge_index(int(i), int(j), n) == e
        assert edge_index(int(j), int(i), n) == e


def test_edge_index_rejects_self_loop():
    with pytest.raises(ParameterError):
        edge_index(2, 2, 5)


def test_nodes_from_edge_count():
    assert nodes_from_edge_count(num_edges(12)) == 12
    with pytest.raises(DimensionMismatchError):
        nodes_from_edge_count(7)


def test_instance_rejects_wrong_length_and_negative_costs():
    with pytest.raises(DimensionMismatchError):
        TspInstance(4, np.ones(5))
    with pytest.raises(ParameterError):
        TspInstance(3, np.array([1.0, -1.0, 1.0]))
    with pytest.raises(ParameterError):
        TspInstance(2, np.ones(1))


def test_integer_instance_rejects_fractional_values():
    with pytest.raises(ParameterError):
        TspInstance(3, np.array([1.0, 2.5, 1.0]), cost_kind="integer")


def test_matrix_round_trip(small_integer_instance):
    inst = small_integer_instance
    again = TspInstance.from_matrix(inst.matrix(), cost_kind="integer")
    assert np.array_equal(again.costs, inst.costs)
    assert inst.matrix().dtype == np.int64


def test_tour_validation_and_cost(four_node_instance):
    with pytest.raises(ParameterError):
        Tour((0, 1, 1, 2))
    tour = Tour((0, 2, 1, 3))
    assert tour_cost(four_node_instance, tour) == 12
    assert isinstance(tour_cost(four_node_instance, tour), int)
    with pytest.raises(DimensionMismatchError):
        tour_cost(four_node_instance, Tour((0, 1, 2)))


def test_tour_canonical_form():
    assert Tour((2, 0, 3, 1)).canonical().order == (0, 2, 1, 3)
    assert Tour((3, 2, 1, 0)).canonical() == Tour((1, 2, 3, 0)).canonical()


def test_tour_incidence_has_degree_two():
    tour = Tour((0, 4, 2, 1, 3))
    z = tour.incidence()
    assert z.values.sum() == 5
    for v in range(5):
        assert z.degree(v) == 2


def test_edge_vector_cut_value():
    x = Tour((0, 1, 2, 3, 4, 5)).incidence()
    assert x.cut_value({0, 1, 2}) == 2
    assert x.cut_value({0, 2}) == 4


def test_check_metric_reports_violation():
    inst = TspInstance(3, np.array([5.0, 1.0, 1.0]))
    violations = check_metric(inst)
    assert len(violations) == 1
    v = violations[0]
    assert (v.i, v.j, v.k) == (0, 1, 2)
    assert v.amount == pytest.approx(3.0)


def test_check_metric_clean_on_random_instance(rng):
    inst = random_metric_instance(9, rng)
    assert check_metric(inst) == []


def test_metric_closure_shortens_and_is_idempotent():
    inst = TspInstance(3, np.array([5.0, 1.0, 1.0]))
    closed = metric_closure(inst)
    assert closed.cost(0, 1) == pytest.approx(2.0)
    assert check_metric(closed, tol=0) == []
    assert np.array_equal(metric_closure(closed).costs, closed.costs)


def test_metric_closure_keeps_integer_kind():
    inst = TspInstance(4, np.array([9, 1, 1, 1, 1, 1]), cost_kind="integer")
    closed = metric_closure(inst)
    assert closed.is_integer
    assert closed.cost(0, 1) == 2


def test_scale_and_round_attaches_report():
    ok = scale_and_round(EdgeVector(3, np.array([0.5, 0.5, 1.0])), 3)
    assert ok.is_integer
    assert list(ok.costs) == [2, 2, 3]
    assert ok.metric_validated

    broken = scale_and_round(EdgeVector(3, np.array([0.34, 0.34, 0.68])), 1)
    assert list(broken.costs) == [0, 0, 1]
    assert broken.metric_report
    assert not broken.metric_validated


def test_scale_and_round_rejects_bad_factor_and_overflow():
    with pytest.raises(ParameterError):
        scale_and_round(EdgeVector(3, np.ones(3)), 0)
    with pytest.raises(CostRangeError):
        scale_and_round(EdgeVector(3, np.ones(3)), 1e19)


def test_scaling_preserves_tour_ratio(small_integer_instance):
    base = solve_exact(small_integer_instance).value
    scaled = solve_exact(small_integer_instance.scaled(2.5)).value
    assert scaled == pytest.approx(2.5 * base)


def test_hc_reduction_hamiltonian_cycle():
    inst = hc_reduction(HcGraph.cycle(5), 0.1)
    assert check_metric(inst) == []
    assert solve_exact(inst).value == pytest.approx(0.95)


def test_hc_reduction_petersen_is_not_hamiltonian():
    inst = hc_reduction(HcGraph.petersen(), 0.1)
    assert solve_exact(inst).value > 1.0


def test_hc_reduction_rejects_large_eps():
    with pytest.raises(ParameterError):
        hc_reduction(HcGraph.cycle(5), 0.5)


def test_hc_graph_rejects_self_loop():
    with pytest.raises(ParameterError):
        HcGraph(3, frozenset({(1, 1)}))


def test_tour_cost_single_triangle():
    inst = TspInstance(3, np.array([1.0, 2.0, 3.0]))
    assert tour_cost(inst, Tour((0, 1, 2))) == pytest.approx(6.0)
    assert tour_cost(inst, Tour((2, 1, 0))) == pytest.approx(6.0)


def test_hc_reduction_star_is_not_hamiltonian():
    inst = hc_reduction(HcGraph.star(4), 0.1)
    assert inst.n == 5
    assert check_metric(inst) == []
    assert solve_exact(inst).value >= 1.0
