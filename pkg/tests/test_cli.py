import json
import subprocess
import sys

import numpy as np
import pytest

from dbc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_factor_identity(capsys):
    code, out = run(capsys, "factor", "--payload", json.dumps({"g": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}))
    assert code == 0
    assert out["input"]["u"] == [1, 2, 3] and out["input"]["v"] == [1, 2, 3]
    assert out["residuals"] == {"left": 0.0, "right": 0.0}
    assert np.allclose(out["left"]["c"]["re"], np.eye(3))


def test_bracket_sl2_entries(capsys):
    g = [[2, 3], [1, 2]]
    code, out = run(capsys, "bracket", "--payload", json.dumps({"g": g, "f1": [1, 1], "f2": [1, 2]}))
    assert code == 0
    assert abs(complex(*out["bracket"]) - 6) < 1e-9


def test_mul_and_twist(capsys):
    code, out = run(capsys, "mul", "--payload", json.dumps({"sample": {"n": 3, "v": "w0", "seed": 2}}))
    assert code == 0 and out["residuals"]["product_forms"] < 1e-9
    code, out = run(capsys, "twist", "--payload",
                    json.dumps({"sample": {"n": 3, "u": [2, 3, 1], "v": "w0", "seed": 2}}))
    assert code == 0 and out["cell"] == [[3, 2, 1], [2, 3, 1]]
    assert out["residuals"]["round_trip"] < 1e-9


def test_leaf_verb(capsys):
    code, out = run(capsys, "leaf", "--payload", json.dumps({"sample": {"n": 3, "u": "e", "v": "w0"}}))
    assert code == 0
    assert out["leaf_rank"] == out["expected_rank"] == 4
    assert out["leaves_per_level"] == 1


def test_payload_from_file(tmp_path, capsys):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"sample": {"n": 2, "seed": 4}}))
    code, out = run(capsys, "factor", "--payload", f"@{f}")
    assert code == 0 and out["input"]["u"] == [2, 1]


@pytest.mark.parametrize("payload", ['{"x": 1}', "not json", '{"g": [[1, 2], [3, 4]]}',
                                     '{"g": [[1, 0], [0, 1]], "f1": [3, 1]}'])
def test_schema_errors_exit_2(payload, capsys):
    verb = "bracket" if "f1" in payload else "factor"
    code, out = run(capsys, verb, "--payload", payload)
    assert code == 2 and out["error"]["type"] == "usage"


def test_math_error_exit_3(capsys):
    payload = {"g": [[1, 0], [0, 1]], "h": [[1, 0], [0, 1]], "v": "w0"}
    code, out = run(capsys, "mul", "--payload", json.dumps(payload))
    assert code == 3 and out["error"]["type"] == "math"


def test_verify_rejects_zero_samples(capsys):
    code, out = run(capsys, "verify", "--samples", "0")
    assert code == 2


def test_verify_golden_writes_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "golden", "--n", "2", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["pass"] and rep["config"]["suites"] == ["golden"]


def test_verify_failure_exit_1(tmp_path):
    # an absurdly tight tolerance makes floating point checks fail
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "golden", "--n", "2", "--tol", "1e-30", "--out", str(out)]) == 1


def test_env_tolerance(monkeypatch, tmp_path):
    monkeypatch.setenv("DBC_TOL", "1e-30")
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "golden", "--n", "2", "--out", str(out)]) == 1
    assert json.loads(out.read_text())["config"]["tol"]["tol_eq"] == 1e-30


def test_console_script_runs():
    res = subprocess.run([sys.executable, "-m", "dbc.cli", "factor", "--payload",
                          '{"sample": {"n": 2, "seed": 1}}'], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["verb"] == "factor"
