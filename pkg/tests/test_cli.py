import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from fracpoisson import BernsteinSpec, DensityEval, HeatKernelSpec, q_kernel
from fracpoisson.cli import (EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, ConfigError, main,
                             parse_grid, worker_count)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_density_grid(capsys):
    code, out, _ = run(["eval", "density", "--spec", "stable:0.5", "--r", "1",
                        "--t-grid", "0.01:100:50"], capsys)
    assert code == EXIT_OK
    r = rows(out)
    assert r[0] == ["r", "t", "value", "error"] and len(r) == 51
    t, v = float(r[1][1]), float(r[1][2])
    ev = DensityEval.for_spec(BernsteinSpec.stable(0.5))
    assert v == ev.density(1.0, t)


def test_qkernel_bit_for_bit(capsys):
    code, out, _ = run(["eval", "qkernel", "--kernel", "gaussian", "--beta", "0.5", "--t", "1",
                        "--z-grid", "0.1,0.5,1,2", "--workers", "2"], capsys)
    assert code == EXIT_OK
    ev = DensityEval.for_spec(BernsteinSpec.stable(0.5))
    for row, z in zip(rows(out)[1:], (0.1, 0.5, 1.0, 2.0)):
        val, err = q_kernel(HeatKernelSpec.gaussian(), ev, 1.0, z)
        assert row == [f"{x:.17g}" for x in (1.0, z, val, err)]


def test_repeated_output_identical(capsys, monkeypatch):
    argv = ["eval", "pkernel", "--kernel", "cauchy", "--spec", "mixture:0.5@0.3,0.5@0.7",
            "--t-grid", "0.5,2", "--z-grid", "0.5,3"]
    monkeypatch.setenv("FRACPOISSON_WORKERS", "1")
    _, a, _ = run(argv, capsys)
    monkeypatch.setenv("FRACPOISSON_WORKERS", "3")
    _, b, _ = run(argv, capsys)
    assert a == b and len(rows(a)) == 5


def test_other_quantities(capsys, tmp_path):
    code, out, _ = run(["eval", "phi", "--spec", "mixture:0.5@0.3,0.5@0.7", "--lam", "2"],
                       capsys)
    assert code == EXIT_OK
    assert float(rows(out)[1][1]) == pytest.approx(0.5 * 2**0.3 + 0.5 * 2**0.7, rel=1e-15)
    code, out, _ = run(["eval", "potential", "--beta", "0.5", "--t", "1"], capsys)
    assert float(rows(out)[1][1]) == pytest.approx(1 / np.sqrt(np.pi), rel=1e-14)
    code, out, _ = run(["eval", "inverse-density", "--beta", "0.5", "--t", "1", "--r", "1"],
                       capsys)
    assert float(rows(out)[1][2]) == pytest.approx(np.exp(-0.25) / np.sqrt(np.pi), rel=1e-13)
    path = tmp_path / "u.json"
    code, _, _ = run(["eval", "solve", "--nt", "5", "--nx", "16", "--initial", "expcos",
                      "-o", str(path)], capsys)
    doc = json.loads(path.read_text())
    assert code == EXIT_OK and doc["columns"] == ["t", "x", "value", "error"]
    assert len(doc["rows"]) == 5 * 16 and doc["config"]["nx"] == 16


@pytest.mark.parametrize("argv", [
    ["eval", "density", "--spec", "stable:abc", "--r", "1", "--t", "1"],
    ["eval", "density", "--spec", '{"kind": "stable", "beta": }', "--r", "1", "--t", "1"],
    ["eval", "density", "--r", "1"],
    ["eval", "density", "--r", "1", "--t-grid", "0:1:5"],
    ["eval", "density", "--r", "1", "--t-grid", "1:2"],
    ["eval", "qkernel", "--kernel", "levy", "--t", "1", "--z", "1"],
    ["eval", "density", "--spec", "stable:0.9", "--beta", "0.5", "--r", "1", "--t", "1"],
    ["eval", "density", "--spec", "mixture:1@0.3,1@0.9", "--r", "1", "--t", "1"],
    ["eval", "nothing"],
    ["validate", "identities", "--case", "cauchy"],
])
def test_config_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == EXIT_CONFIG
    assert err


def test_json_error_reports_position(capsys):
    code, _, err = run(["eval", "density", "--spec", '{"kind": "stable",\n "beta": }', "--r",
                        "1", "--t", "1"], capsys)
    assert code == EXIT_CONFIG and "line 2" in err and "column" in err


def test_numerical_failure_exit_3(capsys, monkeypatch):
    from fracpoisson import cli
    from fracpoisson.errors import AccuracyError

    def boom(*a, **k):
        raise AccuracyError("did not converge", 1.0)

    monkeypatch.setattr(cli, "evaluate", boom)
    code, _, err = run(["eval", "density", "--r", "1", "--t", "1"], capsys)
    assert code == EXIT_NUMERIC and "numerical failure in eval density" in err


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"spec": "stable:0.5", "r": 1.0, "t-grid": "0.1:10:3"}))
    code, out, _ = run(["eval", "density", "--config", str(cfg)], capsys)
    assert code == EXIT_OK and len(rows(out)) == 4
    # command-line flags win over the file
    code, out, _ = run(["eval", "density", "--config", str(cfg), "--r", "2"], capsys)
    assert float(rows(out)[1][0]) == 2.0
    cfg.write_text(json.dumps({"spec": "stable:0.5", "colour": "red"}))
    code, _, err = run(["eval", "density", "--config", str(cfg)], capsys)
    assert code == EXIT_CONFIG and "colour" in err
    cfg.write_text("{")
    assert run(["eval", "density", "--config", str(cfg)], capsys)[0] == EXIT_CONFIG


def test_validate_quick_suite(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = run(["validate", "scaling", "--quick", "--report", str(report),
                        "--workers", "1"], capsys)
    assert code == EXIT_OK
    assert out.count("[PASS]") >= 2 and "[FAIL]" not in out and "2/2 criteria passed" in out
    doc = json.loads(report.read_text())
    assert doc["passed"] and [c["number"] for c in doc["criteria"]] == [1, 2]


def test_parse_grid():
    assert np.allclose(parse_grid("1:100:3"), [1, 10, 100])
    assert np.allclose(parse_grid("3,1,2"), [3, 1, 2])
    for bad in ("1:100", "a,b", "-1:1:3", "1:10:1"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_worker_count(monkeypatch):
    monkeypatch.setenv("FRACPOISSON_WORKERS", "3")
    assert worker_count(None) == 3
    assert worker_count(2) == 2
    monkeypatch.setenv("FRACPOISSON_WORKERS", "x")
    with pytest.raises(ConfigError):
        worker_count(None)
    with pytest.raises(ConfigError):
        worker_count(0)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fracpoisson", "eval", "phi", "--beta", "0.5",
                          "--lam", "4"], capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1] == "4,2,0"
    res = subprocess.run([sys.executable, "-m", "fracpoisson", "--version"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "0.1.0" in res.stdout
