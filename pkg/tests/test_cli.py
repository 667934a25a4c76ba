from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from dspec.cli import dump_json, main, with_errors

EXAMPLES = Path(__file__).resolve().parents[1] / "examples"

SMALL = {
    "partition": {"points": [1, 2, 3]},
    "strengths": {"values": [-1.0, 2.0, 1.0]},
    "potential": {"pieces": [{"from": 0, "to": 3, "c0": 0, "c1": 0}]},
}

LATTICE = {
    "partition": {"generator": {"kind": "arithmetic", "start": 1, "step": 1, "count": 30}},
    "strengths": {"generator": {"kind": "linear", "slope": 1}},
    "potential": {"pieces": [{"from": 0, "to": "inf", "c0": 0, "c1": 0}]},
}


def _write(tmp_path, cfg, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_with_errors_wraps_floats():
    obj = with_errors({"a": 1.5, "b": [2, math.inf], "c": {"value": 3.0, "err_est": 0.1}, "d": True})
    assert obj == {"a": {"value": 1.5, "err_est": 0.0},
                   "b": [2, {"value": "+inf", "err_est": 0.0}],
                   "c": {"value": 3.0, "err_est": 0.1}, "d": True}


def test_dump_json_is_sorted():
    assert dump_json({"b": 1, "a": 2}).index('"a"') < dump_json({"b": 1, "a": 2}).index('"b"')


def test_check_text(tmp_path, capsys):
    code, out, _ = _run(capsys, "check", str(EXAMPLES / "kp.json"))
    assert code == 0
    assert any(line.startswith("condition ") for line in out.splitlines())


def test_check_json(tmp_path, capsys):
    code, out, _ = _run(capsys, "check", str(EXAMPLES / "kp.json"), "--json")
    assert code == 0
    json.loads(out)


def test_invalid_partition_exit_code(tmp_path, capsys):
    cfg = dict(SMALL, partition={"points": [1, 1, 3]})
    code, out, err = _run(capsys, "check", _write(tmp_path, cfg))
    assert code == 2
    assert out == ""
    rec = json.loads(err.strip().splitlines()[-1])
    assert rec["level"] == "error"


def test_usage_error_is_json(capsys):
    code, _, err = _run(capsys, "spectrum")
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["event"] == "usage"


def test_ess_without_tail_is_undecidable(tmp_path, capsys):
    code, _, err = _run(capsys, "ess", _write(tmp_path, SMALL), "--lambda-max", "20")
    assert code == 4
    assert json.loads(err.strip().splitlines()[-1])["level"] == "error"


def test_spectrum_csv(tmp_path, capsys):
    code, out, _ = _run(capsys, "spectrum", _write(tmp_path, SMALL), "--window", "-10,20")
    assert code == 0
    rows = _rows(out)
    assert list(rows[0]) == ["index", "lambda", "multiplicity", "engine", "err_est"]
    assert float(rows[0]["lambda"]) < 0


def test_spectrum_all_engines_writes_crossval(tmp_path, capsys):
    out_dir = tmp_path / "run"
    code, out, _ = _run(capsys, "spectrum", _write(tmp_path, SMALL), "--window", "-10,20",
                        "--engine", "all", "--out", str(out_dir))
    assert code == 0
    assert {r["engine"] for r in _rows(out)} >= {"shooting"}
    assert (out_dir / "crossval.json").exists()
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["command"] == "spectrum"
    assert manifest["config_hash"]


def test_neumann_deterministic_across_jobs(tmp_path, capsys, monkeypatch):
    path = _write(tmp_path, LATTICE)
    outputs = []
    for jobs in ("1", "4"):
        monkeypatch.setenv("DSPEC_JOBS", jobs)
        code, out, _ = _run(capsys, "neumann", path, "--lambda-max", "50")
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1]


def test_form_indicator(tmp_path, capsys):
    code, out, _ = _run(capsys, "form", _write(tmp_path, SMALL), "--test-fn", "indicator", "--k", "2")
    assert code == 0
    json.loads(out)


def test_oracle_compare(tmp_path, capsys):
    code, out, _ = _run(capsys, "oracle-compare", _write(tmp_path, SMALL), "--n", "4")
    assert code == 0
    report = json.loads(out)
    assert len(set(report["inertia_counts"].values())) == 1


def test_scenario_round_trip(tmp_path, capsys):
    out_dir = tmp_path / "sc"
    code, out, _ = _run(capsys, "scenario", "brinck-gap", "--param", "K=20", "--out", str(out_dir))
    assert code == 0
    scenario = json.loads((out_dir / "scenario.json").read_text())
    assert scenario["passed"] is True
    code, out, _ = _run(capsys, "check", str(out_dir / "spec.json"), "--json")
    assert code == 0
    assert json.loads(out) == scenario["criteria"]


def test_repeated_runs_are_byte_identical(tmp_path, capsys):
    path = _write(tmp_path, SMALL)
    first = _run(capsys, "spectrum", path, "--window", "-10,20")[1]
    second = _run(capsys, "spectrum", path, "--window", "-10,20")[1]
    assert first == second
