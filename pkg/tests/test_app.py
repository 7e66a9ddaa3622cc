import pytest

from app import app
from src.hard_tsp import __version__

FOUR = [[0, 5, 3, 2], [5, 0, 4, 3], [3, 4, 0, 5], [2, 3, 5, 0]]


@pytest.fixture
def http():
    app.config['TESTING'] = True
    with app.test_client() as c:
        yield c


def test_health(http):
    response = http.get('/api/health')
    assert response.status_code == 200
    assert response.get_json() == {'status': 'healthy', 'version': __version__, 'service': 'Hard TSP API'}


def test_operations_and_config(http):
    ops = http.get('/api/operations').get_json()
    assert ops['success']
    assert 'evaluate' in ops['operations']
    config = http.get('/api/config').get_json()
    assert config['success']
    assert 'delta' in config['status']['settings']


def test_missing_instance_is_a_bad_request(http):
    response = http.post('/api/evaluate', json={})
    assert response.status_code == 400
    assert not response.get_json()['success']


def test_paths_are_refused(http):
    response = http.post('/api/harden', json={'instance': '/etc/passwd'})
    assert response.status_code == 400
    response = http.post('/api/evaluate', json={'instance': {'path': '/etc/hosts'}})
    assert response.status_code == 400
    assert 'file paths' in response.get_json()['error']


def test_sample_requires_n(http):
    response = http.post('/api/sample', json={'r': 1})
    assert response.status_code == 400
    assert response.get_json()['error'] == 'n is required'


def test_sample_rejects_small_n(http):
    response = http.post('/api/sample', json={'n': 4})
    assert response.status_code == 400


def test_export_dot_with_explicit_vector(http):
    x = [0, 1, 1, 1, 0, 1]
    response = http.post('/api/export-dot', json={'instance': {'matrix': FOUR, 'name': 'four'}, 'x': x})
    body = response.get_json()
    assert response.status_code == 200
    assert body['success']
    assert body['dot'].startswith('graph "four" {')
    assert body['dot'].count('style=solid') == 4


def test_export_dot_rejects_wrong_length(http):
    response = http.post('/api/export-dot', json={'instance': {'matrix': FOUR}, 'x': [1, 0]})
    assert response.status_code == 400
