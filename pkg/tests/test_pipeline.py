import numpy as np
import pytest

from src.hard_tsp.config import SolveLimits
from src.hard_tsp.core import EdgeVector, TspInstance, edge_index, num_edges
from src.hard_tsp.errors import IntegralVertexError, ParameterError
from src.hard_tsp.ihopt import solve_hopt
from src.hard_tsp.pipeline import (algorithm1_sample_vertices, delta_sweep, derived_seeds, evaluate, harden,
                                   hardness_proxy, instance_gap, pipeline_generate, vertex_key)

PRISM_GAP = 10.0 / 9.0


def ring_instance(n):
    """Cost 1 around the cycle 0..n-1 and 2 elsewhere: the cycle is the unique SEP optimum."""
    matrix = np.full((n, n), 2)
    for i in range(n):
        matrix[i, (i + 1) % n] = matrix[(i + 1) % n, i] = 1
    np.fill_diagonal(matrix, 0)
    return TspInstance.from_matrix(matrix, name=f"ring{n}", cost_kind="integer")


@pytest.fixture
def prism_instance():
    """Costs 2 inside the triangles {0,1,2} and {3,4,5}, 1 on the matching, 3 elsewhere."""
    n = 6
    matrix = np.full((n, n), 3)
    for block in ((0, 1, 2), (3, 4, 5)):
        for i in block:
            for j in block:
                matrix[i, j] = 2
    for i in range(3):
        matrix[i, i + 3] = matrix[i + 3, i] = 1
    np.fill_diagonal(matrix, 0)
    return TspInstance.from_matrix(matrix, name="prism", cost_kind="integer")


def test_vertex_key_folds_negative_zero_and_rounding():
    n = 4
    a = np.zeros(num_edges(n))
    b = a.copy()
    b[0] = -0.0
    b[1] = 1e-12
    assert vertex_key(EdgeVector(n, a)) == vertex_key(EdgeVector(n, b))
    b[edge_index(2, 3, n)] = 0.5
    assert vertex_key(EdgeVector(n, a)) != vertex_key(EdgeVector(n, b))


def test_derived_seeds_are_stable():
    assert derived_seeds(7, 3) == derived_seeds(7, 3)
    assert len(set(derived_seeds(7, 5))) == 5
    assert derived_seeds(7, 3) != derived_seeds(8, 3)


def test_sampling_parameter_errors():
    with pytest.raises(ParameterError):
        algorithm1_sample_vertices(5, 1)
    with pytest.raises(ParameterError):
        algorithm1_sample_vertices(8, 0)


def test_instance_gap_of_prism(prism_instance):
    tour, subt, gap = instance_gap(prism_instance)
    assert tour == 10
    assert subt == pytest.approx(9.0)
    assert gap == pytest.approx(PRISM_GAP)


def test_evaluate_ring_instance():
    report = evaluate(ring_instance(8), reps=2, seed=1)
    assert report.tour_value == pytest.approx(8.0)
    assert report.subt_value == pytest.approx(8.0)
    assert report.gap == pytest.approx(1.0)
    assert not report.sep_fractional
    assert report.hardness.reps == 2
    payload = report.to_dict()
    assert payload['gap'] == pytest.approx(1.0)
    assert payload['hardness']['reps'] == 2


def test_hardness_proxy_is_reproducible(small_integer_instance):
    first = hardness_proxy(small_integer_instance, reps=3, seed=5)
    second = hardness_proxy(small_integer_instance, reps=3, seed=5)
    assert first.nodes == second.nodes
    assert first.median_nodes >= 1
    assert first.stddev_nodes >= 0.0


def test_harden_rejects_integral_vertex():
    with pytest.raises(IntegralVertexError):
        harden(ring_instance(7), delta=100, reps=1)


def test_harden_prism(prism_instance):
    outcome = harden(prism_instance, delta=10, reps=1, seed=3)
    assert outcome.hard.is_integer
    assert outcome.hard.name == "prism_hard"
    assert outcome.ihopt.certified
    assert outcome.after.tour_value >= 10
    assert outcome.after.gap == pytest.approx(PRISM_GAP, abs=1e-6)
    assert outcome.hopt_gap == pytest.approx(PRISM_GAP, abs=1e-6)
    assert not outcome.gap_regression
    payload = outcome.to_dict()
    assert payload['name'] == "prism_hard"
    assert payload['ihopt']['certified']


def test_harden_returns_partial_result_under_a_tiny_time_limit(prism_instance):
    outcome = harden(prism_instance, delta=10, limits=SolveLimits(time_limit=1e-9), reps=1)
    assert outcome.hopt.status == "time_limit"
    assert outcome.ihopt.status == "time_limit"
    assert outcome.ihopt.certified
    assert outcome.hard.n == 6
    assert outcome.after.tour_value >= 10
    assert not outcome.gap_regression


def test_delta_sweep_rows(prism_instance):
    rows = delta_sweep(prism_instance, deltas=(10, 100), reps=1, limits=SolveLimits(time_limit=60.0))
    assert [row['delta'] for row in rows] == [10, 100]
    for row in rows:
        assert row['gap'] >= 1.0
        assert row['status'] in ("optimal", "time_limit")


@pytest.mark.slow
def test_sampled_vertices_are_distinct_and_fractional():
    vertices = algorithm1_sample_vertices(7, 2, seed=11, burn_in=100, thin=5)
    assert len(vertices) == 2
    assert len({v.key for v in vertices}) == 2
    for v in vertices:
        assert v.vertex.fractional
        assert v.draws >= 1
    again = algorithm1_sample_vertices(7, 2, seed=11, burn_in=100, thin=5)
    assert [v.key for v in again] == [v.key for v in vertices]


@pytest.mark.slow
def test_pipeline_generate_small_batch():
    generated = pipeline_generate(6, 1, delta=100, seed=4, reps=1, burn_in=100, thin=5)
    assert len(generated) == 1
    outcome = generated[0].outcome
    assert outcome.ihopt.certified
    assert outcome.after.gap >= 1.0
    assert outcome.after.gap <= PRISM_GAP + 1e-6


@pytest.fixture(scope="module")
def sampled_vertices():
    vertices = []
    for n in (8, 9, 10):
        vertices.extend(algorithm1_sample_vertices(n, 7, seed=100 + n))
    return vertices


@pytest.fixture(scope="module")
def generated_batch():
    return pipeline_generate(10, 10, delta=1000, seed=2024, reps=5)


@pytest.mark.slow
def test_hopt_never_lowers_the_gap(sampled_vertices):
    assert len(sampled_vertices) >= 20
    for v in sampled_vertices:
        hopt = solve_hopt(v.vertex)
        assert hopt.status == "optimal"
        _, _, source_gap = instance_gap(v.source.instance())
        _, _, hopt_gap = instance_gap(hopt.instance())
        assert hopt_gap >= source_gap - 1e-6
        for gap in (source_gap, hopt_gap):
            assert 1.0 - 1e-6 <= gap <= 1.5 + 1e-6


@pytest.mark.slow
def test_best_of_ten_gap_band(generated_batch):
    assert len(generated_batch) == 10
    best = generated_batch[0].gap
    assert best == max(g.gap for g in generated_batch)
    assert 1.10 <= best <= 1.176 + 1e-6


@pytest.mark.slow
def test_hardened_instances_need_more_nodes(generated_batch):
    top = generated_batch[:5]
    harder = sum(g.outcome.after.hardness.median_nodes > g.outcome.before.hardness.median_nodes for g in top)
    assert harder >= 4
