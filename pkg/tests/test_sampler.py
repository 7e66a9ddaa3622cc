import numpy as np
import pytest

from src.hard_tsp.core import EdgeVector, check_metric, edge_index, num_edges
from src.hard_tsp.errors import ParameterError
from src.hard_tsp.sampler import (HitAndRunChain, MetricPoint, chord, hit_and_run_step, in_polytope,
                                  initial_interior_point, metric_polytope_rows, random_direction, row_slacks,
                                  sample_metric)


def unit_direction(n, i, j):
    d = np.zeros(num_edges(n))
    d[edge_index(i, j, n)] = 1.0
    return EdgeVector(n, d)


def test_polytope_row_count():
    n = 6
    a, b = metric_polytope_rows(n)
    triples = n * (n - 1) * (n - 2) // 6
    assert a.shape == (4 * triples + num_edges(n), num_edges(n))
    assert b.shape[0] == a.shape[0]
    assert np.count_nonzero(b == 2.0) == triples


def test_interior_point_has_uniform_slack():
    point = initial_interior_point(7)
    slack = row_slacks(point.values.values, 7)
    assert slack == pytest.approx(np.full(slack.shape, 0.5))


def test_chord_along_a_single_edge():
    point = initial_interior_point(5)
    lam_min, lam_max = chord(point, unit_direction(5, 1, 3))
    assert lam_min == pytest.approx(-0.5)
    assert lam_max == pytest.approx(0.5)


def test_chord_rejects_zero_direction():
    point = initial_interior_point(5)
    with pytest.raises(ParameterError):
        chord(point, EdgeVector(5, np.zeros(num_edges(5))))


def test_chord_endpoints_lie_on_the_boundary(rng):
    point = initial_interior_point(6)
    for _ in range(10):
        d = random_direction(num_edges(6), rng)
        lam_min, lam_max = chord(point, EdgeVector(6, d))
        for lam in (lam_min, lam_max):
            moved = point.values.values + lam * d
            assert in_polytope(moved, 6, tol=1e-9)
            assert row_slacks(moved, 6).min() == pytest.approx(0.0, abs=1e-9)


def test_random_direction_is_unit(rng):
    assert np.linalg.norm(random_direction(21, rng)) == pytest.approx(1.0)


def test_steps_stay_inside(rng):
    point = initial_interior_point(8)
    for _ in range(200):
        point = hit_and_run_step(point, rng)
        assert in_polytope(point.values.values, 8)


def test_samples_are_metric_and_bounded():
    for point in sample_metric(7, 20, burn_in=50, thin=5, seed=9):
        inst = point.instance()
        assert check_metric(inst, tol=1e-9) == []
        assert np.all(point.values.values >= -1e-12)
        assert np.all(point.values.values <= 1.0 + 1e-12)


def test_sampling_is_reproducible():
    first = sample_metric(6, 5, burn_in=20, thin=3, seed=42)
    second = sample_metric(6, 5, burn_in=20, thin=3, seed=42)
    other = sample_metric(6, 5, burn_in=20, thin=3, seed=43)
    for a, b in zip(first, second):
        assert np.array_equal(a.values.values, b.values.values)
    assert not np.array_equal(first[-1].values.values, other[-1].values.values)


def test_chain_counts_steps(rng):
    chain = HitAndRunChain(6, rng)
    chain.burn(10)
    stream = chain.samples(thin=4)
    next(stream)
    next(stream)
    assert chain.steps == 18


def test_chain_accepts_a_start_point(rng):
    start = MetricPoint(5, EdgeVector(5, np.full(num_edges(5), 0.25)))
    chain = HitAndRunChain(5, rng, start)
    assert chain.point is start
    chain.step()
    assert in_polytope(chain.point.values.values, 5)


def test_parameter_errors():
    with pytest.raises(ParameterError):
        sample_metric(6, 0)
    with pytest.raises(ParameterError):
        initial_interior_point(2)


@pytest.mark.slow
@pytest.mark.parametrize("n", [6, 10])
def test_long_run_stays_in_the_polytope(n):
    a, b = metric_polytope_rows(n)
    points = sample_metric(n, 10_000, burn_in=100, thin=1, seed=20240)
    x = np.array([p.values.values for p in points])
    assert x.shape == (10_000, num_edges(n))
    assert np.all(a @ x.T <= b[:, None] + 1e-9)


@pytest.mark.slow
def test_coordinate_means_are_symmetric():
    # batch means absorb the chain's autocorrelation
    n, steps, batches = 5, 10_000, 50
    rng = np.random.default_rng(8675309)
    point = initial_interior_point(n)
    x = np.empty((steps, num_edges(n)))
    for t in range(steps):
        point = hit_and_run_step(point, rng)
        x[t] = point.values.values
    batch_means = x.reshape(batches, steps // batches, -1).mean(axis=1)
    means = batch_means.mean(axis=0)
    stderr = batch_means.std(axis=0, ddof=1) / np.sqrt(batches)
    assert np.all(np.abs(means - means.mean()) <= 3 * stderr)
