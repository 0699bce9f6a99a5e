import csv
import io
import json

import pytest

from funcineq import measures as M
from funcineq.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_functionals_gaussian():
    code, out, _ = run(["functionals", "--gaussian", "0,2"])
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["H"] == pytest.approx(0.1534264, abs=1e-7)
    assert doc["I"] == pytest.approx(0.5, abs=1e-12)


def test_functionals_tilt_and_identity():
    code, out, _ = run(["functionals", "--tilt", "1"])
    assert code == EXIT_OK and abs(json.loads(out)["delta_LSI"]) < 1e-8
    code, out, _ = run(["functionals", "--gaussian", "0,1"])
    doc = json.loads(out)
    for key in ("H", "I", "delta_LSI", "TV", "W1", "W2"):
        assert abs(doc[key]) < 1e-12


def test_functionals_grid_file(tmp_path):
    path = tmp_path / "d.txt"
    M.save_grid_density(M.quartic_tilt(0.5), path)
    code, out, _ = run(["functionals", "--grid", str(path)])
    assert code == EXIT_OK and json.loads(out)["delta_LSI"] > 0


def test_bad_specs_are_usage_errors():
    assert run(["functionals", "--gaussian", "0"])[0] == EXIT_USAGE
    assert run(["functionals", "--gaussian", "0,-1"])[0] == EXIT_USAGE
    assert run(["functionals"])[0] == EXIT_USAGE
    assert run(["verify", "--suite", "nope"])[0] == EXIT_USAGE
    assert run(["nope"])[0] == EXIT_USAGE
    assert run(["flow", "--gaussian", "0,2", "--potential", "cubic"])[0] == EXIT_USAGE


def test_missing_grid_file_is_usage_error(tmp_path):
    code, _, err = run(["functionals", "--grid", str(tmp_path / "absent.txt")])
    assert code == EXIT_USAGE
    assert "error" in err


def test_verify_csv(tmp_path):
    path = tmp_path / "out.csv"
    code, out, _ = run(["verify", "--suite", "tilt", "--format", "csv", "-o", str(path)])
    assert code == EXIT_OK
    assert out.strip().startswith("pass=") and "fail=0" in out
    rows = list(csv.reader(path.open()))
    assert rows[0][:2] == ["name", "status"]


def test_verify_wehrl_has_carlen_rows(tmp_path):
    path = tmp_path / "w.json"
    code, out, _ = run(["verify", "--suite", "wehrl", "-o", str(path)])
    assert code == EXIT_OK
    doc = json.loads(path.read_text())
    import math
    rows = [r for r in doc["reports"] if r["name"] == "carlen_identity"]
    assert len(rows) >= 6
    for r in rows:
        assert r["lhs"] == pytest.approx(4 * math.pi / r["params"]["h"], rel=2e-2)


def test_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"suite": "tilt", "format": "csv", "seed": 3}))
    code, out, _ = run(["verify", "--config", str(cfg)])
    assert code == EXIT_OK and out.startswith("name,status")
    cfg.write_text(json.dumps({"suite": "tilt", "colour": "red"}))
    code, _, err = run(["verify", "--config", str(cfg)])
    assert code == EXIT_USAGE and "colour" in err


def test_flow_gaussian_sum_rule():
    code, out, _ = run(["flow", "--gaussian", "0,2", "--tmax", "8"])
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t", "H", "I", "lambda_cert"]
    last = rows[-1]
    assert last[0] == "de_bruijn"
    dissipated, integral = float(last[1]), float(last[2])
    assert abs(dissipated - integral) < 1e-4
    hs = [float(r[1]) for r in rows[1:-1]]
    assert all(b <= a + 1e-12 for a, b in zip(hs, hs[1:]))


def test_flow_identity_is_constant():
    code, out, _ = run(["flow", "--gaussian", "0,1", "--samples", "5", "--tmax", "1"])
    rows = list(csv.reader(io.StringIO(out)))[1:-1]
    assert all(abs(float(r[1])) < 1e-12 and abs(float(r[2])) < 1e-12 for r in rows)


def test_flow_quartic_even_tilt_decreases():
    code, out, _ = run(["flow", "--potential", "quartic", "--density", "even_tilt", "--tmax", "1",
                        "--samples", "11", "--no-certify"])
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))[1:-1]
    hs = [float(r[1]) for r in rows]
    assert all(b < a for a, b in zip(hs, hs[1:]))
    assert rows[0][3] == ""
