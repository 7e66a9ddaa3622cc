"""Flask web application for hard TSP instance generation."""

import os
from flask import Flask, request, jsonify
from flask_cors import CORS
from dotenv import load_dotenv

from src.hard_tsp import HardTspClient, __version__
from src.hard_tsp.errors import HardTspError

# Load environment variables
load_dotenv()

# Initialize Flask app
app = Flask(__name__)
CORS(app)

# Initialize hard-TSP client
client = HardTspClient(load_env=True)


def _instance_from(data):
    instance = data.get('instance')
    if instance is None:
        raise ValueError("'instance' is required (matrix, or n and costs)")
    if isinstance(instance, str) or (isinstance(instance, dict) and 'path' in instance):
        raise ValueError("file paths are not accepted over HTTP; send 'matrix' or 'n' and 'costs'")
    return instance


@app.route('/api/evaluate', methods=['POST'])
def evaluate():
    """Gap and hardness proxy of an instance.

    Request body:
    {
        "instance": {"matrix": [[...]], "name": "optional"},
        "reps": 5,
        "seed": 0
    }
    """
    try:
        data = request.get_json() or {}
        result = client.evaluate(_instance_from(data), reps=data.get('reps'), seed=data.get('seed'))
        return jsonify({'success': True, 'result': result})

    except (HardTspError, ValueError) as e:
        return jsonify({'success': False, 'error': str(e)}), 400
    except Exception as e:
        return jsonify({'success': False, 'error': str(e)}), 500


@app.route('/api/harden', methods=['POST'])
def harden():
    """Harden an instance with a fractional SEP optimum.

    Request body:
    {
        "instance": {"n": 6, "costs": [...]},
        "delta": 1000,
        "reps": 5,
        "seed": 0
    }
    """
    try:
        data = request.get_json() or {}
        result = client.harden(_instance_from(data), delta=data.get('delta'), reps=data.get('reps'),
                               seed=data.get('seed'))
        return jsonify({'success': True, 'result': result})

    except (HardTspError, ValueError) as e:
        return jsonify({'success': False, 'error': str(e)}), 400
    except Exception as e:
        return jsonify({'success': False, 'error': str(e)}), 500


@app.route('/api/sample', methods=['POST'])
def sample():
    """Sample fractional SEP vertices.

    Request body:
    {
        "n": 8,
        "r": 1,
        "seed": 0
    }
    """
    try:
        data = request.get_json() or {}
        if 'n' not in data:
            return jsonify({'success': False, 'error': 'n is required'}), 400
        result = client.sample(data['n'], data.get('r', 1), seed=data.get('seed'))
        return jsonify({'success': True, 'result': result})

    except (HardTspError, ValueError) as e:
        return jsonify({'success': False, 'error': str(e)}), 400
    except Exception as e:
        return jsonify({'success': False, 'error': str(e)}), 500


@app.route('/api/export-dot', methods=['POST'])
def export_dot():
    """DOT text of an edge vector, or of the instance's SEP vertex.

    Request body:
    {
        "instance": {"matrix": [[...]]},
        "x": [optional edge vector]
    }
    """
    try:
        data = request.get_json() or {}
        dot = client.export_dot(_instance_from(data), data.get('x'))
        return jsonify({'success': True, 'dot': dot})

    except (HardTspError, ValueError) as e:
        return jsonify({'success': False, 'error': str(e)}), 400
    except Exception as e:
        return jsonify({'success': False, 'error': str(e)}), 500


@app.route('/api/operations', methods=['GET'])
def get_operations():
    """Get available operations."""
    return jsonify({
        'success': True,
        'operations': client.get_available_operations()
    })


@app.route('/api/config', methods=['GET'])
def get_config_status():
    """Get configuration status."""
    return jsonify({
        'success': True,
        'status': client.get_config_status()
    })


@app.route('/api/health', methods=['GET'])
def health_check():
    """Health check endpoint."""
    return jsonify({
        'status': 'healthy',
        'version': __version__,
        'service': 'Hard TSP API'
    })


if __name__ == '__main__':
    port = int(os.environ.get('PORT', 5000))
    debug = os.environ.get('FLASK_DEBUG', 'False').lower() == 'true'
    app.run(host='0.0.0.0', port=port, debug=debug)
