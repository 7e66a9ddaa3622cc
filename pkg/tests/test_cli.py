import json

import pytest

from src.hard_tsp.cli import build_parser, main, settings_from_args
from src.hard_tsp.config import Settings
from src.hard_tsp.tsplib import tsplib_read, tsplib_write


def run_log(out_dir):
    return [json.loads(line) for line in (out_dir / "runs.jsonl").read_text().splitlines()]


def test_flags_override_settings():
    args = build_parser().parse_args(["evaluate", "x.tsp", "--seed", "9", "--time-limit", "1.5"])
    settings = settings_from_args(args, Settings(reps=3))
    assert settings.seed == 9
    assert settings.time_limit == 1.5
    assert settings.reps == 3


def test_regress(tmp_path, capsys):
    records = tmp_path / "runtimes.csv"
    records.write_text("n,runtime\n10,1\n20,10\n30,100\n")
    out_dir = tmp_path / "out"
    assert main(["regress", str(records), "--out-dir", str(out_dir)]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result['slope'] == pytest.approx(0.1)
    assert result['intercept'] == pytest.approx(-1.0)
    log = run_log(out_dir)
    assert log[-1]['command'] == "regress"
    assert log[-1]['ok']


def test_regress_error_exit_code(tmp_path):
    records = tmp_path / "runtimes.csv"
    records.write_text("n,runtime\n10,1\n10,2\n")
    out_dir = tmp_path / "out"
    assert main(["regress", str(records), "--out-dir", str(out_dir)]) == 2
    entry = run_log(out_dir)[-1]
    assert not entry['ok']
    assert entry['error_type'] == "ParameterError"


def test_convert_json_with_scaling(tmp_path, capsys):
    source = tmp_path / "half.json"
    source.write_text(json.dumps({'n': 4, 'costs': [0.5, 0.5, 0.5, 0.5, 0.5, 0.5]}))
    output = tmp_path / "half.tsp"
    assert main(["convert", str(source), str(output), "--scale", "10", "--closure",
                 "--out-dir", str(tmp_path / "out")]) == 0
    inst = tsplib_read(output)
    assert inst.name == "half"
    assert list(inst.costs) == [5] * 6
    assert json.loads(capsys.readouterr().out)['n'] == 4


def test_convert_fractional_without_scale_fails(tmp_path):
    source = tmp_path / "frac.json"
    source.write_text(json.dumps({'n': 3, 'costs': [0.5, 0.25, 0.5]}))
    assert main(["convert", str(source), str(tmp_path / "frac.tsp"), "--out-dir", str(tmp_path / "out")]) == 2


def test_export_dot_to_file(tmp_path, four_node_instance):
    path = tsplib_write(four_node_instance, tmp_path / "four.tsp")
    target = tmp_path / "four.dot"
    assert main(["export-dot", str(path), "--output", str(target), "--out-dir", str(tmp_path / "out")]) == 0
    assert target.read_text().startswith('graph "four" {')


def test_unsupported_tsplib_type_exits_with_2(tmp_path):
    path = tmp_path / "ceil.tsp"
    path.write_text("NAME: c\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: CEIL_2D\nNODE_COORD_SECTION\n"
                    "1 0 0\n2 1 0\n3 0 1\nEOF\n")
    out_dir = tmp_path / "out"
    assert main(["evaluate", str(path), "--out-dir", str(out_dir)]) == 2
    assert "CEIL_2D" in run_log(out_dir)[-1]['error']
