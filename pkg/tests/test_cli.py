from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from spaceform_float import cli

DISK = {"space": {"lambda": 0.0, "n": 2}, "body": {"type": "ball", "radius": 1.0}}
SQUARE = {"space": {"lambda": 0.0, "n": 2}, "body": {"type": "polytope", "vertices": [[-1, -1], [1, -1], [1, 1], [-1, 1]]}}


def _spec(tmp_path, data, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def _run(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_floatbody_disk_constant_profile(tmp_path, capsys):
    code, payload, _ = _run(capsys, ["floatbody", _spec(tmp_path, DISK), "--delta", "1e-3", "--directions", "256"])
    assert code == cli.EXIT_OK
    assert payload["schema"] == "spaceform-float/v1" and payload["kind"] == "floatbody"
    assert payload["lambda"] == 0.0 and payload["n"] == 2 and "tolerances" in payload
    depths = [p["depth"] for p in payload["result"]["profile"]]
    assert len(depths) == 256 and np.ptp(depths) <= 1e-10
    np.testing.assert_allclose(payload["result"]["support"], 1.0 - depths[0], rtol=1e-10)
    # vertex radius of a circumscribed 256-gon minus the in-radius
    gap = payload["result"]["hausdorff_gap_estimate"]
    assert 0 <= gap <= (1 - depths[0]) * (1 / math.cos(math.pi / 256) - 1) * 1.01


@pytest.mark.parametrize("delta", ["3.0", "1.9"])
def test_floatbody_empty(tmp_path, capsys, delta):
    code, payload, err = _run(capsys, ["floatbody", _spec(tmp_path, SQUARE), "--delta", delta])
    assert code == cli.EXIT_EMPTY and payload is None and "EmptyWulff" in err


def test_malformed_and_usage_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(capsys, ["floatarea", str(bad)])[0] == cli.EXIT_USAGE
    assert _run(capsys, ["floatarea", str(tmp_path / "missing.json")])[0] == cli.EXIT_USAGE
    assert _run(capsys, ["floatarea", _spec(tmp_path, {"body": {"type": "torus"}})])[0] == cli.EXIT_USAGE
    assert _run(capsys, ["floatarea", _spec(tmp_path, {"space": {"n": 5}, "body": {}})])[0] == cli.EXIT_USAGE
    assert _run(capsys, ["floatarea", _spec(tmp_path, DISK), "--bogus"])[0] == cli.EXIT_USAGE
    assert _run(capsys, ["frobnicate"])[0] == cli.EXIT_USAGE
    assert _run(capsys, ["floatbody", _spec(tmp_path, DISK)])[0] == cli.EXIT_USAGE
    assert _run(capsys, ["converge", _spec(tmp_path, DISK), "--delta-grid", "1e-3:1e-2"])[0] == cli.EXIT_USAGE
    # the square does not fit in the hyperbolic model
    assert _run(capsys, ["floatarea", _spec(tmp_path, SQUARE), "--lambda", "-1"])[0] == cli.EXIT_USAGE


def test_converge_3d_polytope_unsupported(tmp_path, capsys):
    cube = {"space": {"lambda": 0.0, "n": 3}, "body": {"type": "polytope", "vertices":
                                                       [[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]}}
    code, _, err = _run(capsys, ["converge", _spec(tmp_path, cube), "--delta-grid", "1e-4:1e-2:3"])
    assert code == cli.EXIT_USAGE and "quadric" in err


def test_floatarea_values(tmp_path, capsys):
    code, payload, _ = _run(capsys, ["floatarea", _spec(tmp_path, SQUARE)])
    assert code == 0 and payload["result"]["value"] == 0.0
    code, payload, _ = _run(capsys, ["floatarea", _spec(tmp_path, DISK), "--lambda", "-1"])
    assert payload["lambda"] == -1.0
    rho = math.tanh(1)
    assert payload["result"]["value"] == pytest.approx(2 * math.pi * rho ** (2 / 3) / math.sqrt(1 - rho * rho),
                                                       rel=1e-12)


def test_floatarea_from_stdin(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(json.dumps(DISK)))
    code, payload, _ = _run(capsys, ["floatarea", "-"])
    assert code == 0 and payload["result"]["value"] == pytest.approx(2 * math.pi, rel=1e-13)


def test_converge_writes_json_and_csv(tmp_path, capsys):
    out = tmp_path / "conv.json"
    code, payload, _ = _run(capsys, ["converge", _spec(tmp_path, DISK), "--delta-grid", "1e-4:1e-2:5",
                                     "--out", str(out), "--csv"])
    assert code == 0 and payload is None
    data = json.loads(out.read_text())
    assert data["kind"] == "theorem1" and data["result"]["relative_error"] <= 1e-2
    rows = list(csv.DictReader(out.with_suffix(".csv").open()))
    assert len(rows) == 5 and float(rows[0]["delta"]) == pytest.approx(1e-2)


def test_determinism_modulo_timestamp(tmp_path, capsys):
    spec = _spec(tmp_path, DISK)
    payloads = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        assert cli.main(["floatbody", spec, "--delta", "1e-2", "--directions", "64", "--seed", "5",
                         "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        data.pop("timestamp")
        payloads.append(data)
    assert payloads[0] == payloads[1]


def test_threads_flag_and_env(monkeypatch):
    parser = cli.build_parser()
    args = parser.parse_args(["sandwich"])
    monkeypatch.delenv(cli.THREADS_ENV, raising=False)
    assert cli._threads(args) == 1
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli._threads(args) == 3
    assert cli._threads(parser.parse_args(["sandwich", "--threads", "2"])) == 2
    monkeypatch.setenv(cli.THREADS_ENV, "zero")
    with pytest.raises(cli.UsageError):
        cli._threads(args)


def test_bad_threads_env_is_usage_error(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "-2")
    assert _run(capsys, ["semicontinuity"])[0] == cli.EXIT_USAGE


def test_parse_delta_grid():
    g = cli.parse_delta_grid("1e-5:1e-2:8")
    assert len(g) == 8 and g[0] == pytest.approx(1e-2) and g[-1] == pytest.approx(1e-5)
    for bad in ("1:2", "a:b:c", "1e-2:1e-5:8", "1e-5:1e-2:2"):
        with pytest.raises(Exception):
            cli.parse_delta_grid(bad)


def test_experiment_commands(capsys):
    code, payload, _ = _run(capsys, ["semicontinuity", "--lambda", "1"])
    assert code == 0 and payload["kind"] == "semicontinuity" and payload["result"]["passed"]
    code, payload, _ = _run(capsys, ["valuation", "--lambda", "-1"])
    assert code == 0 and payload["result"]["relative_error"] <= 1e-3
    code, payload, _ = _run(capsys, ["invariance", "--lambda", "0"])
    assert code == 0 and payload["result"]["affine_max_rel_error"] <= 1e-6
    code, payload, _ = _run(capsys, ["sandwich", "--directions", "256"])
    assert code == 0 and len(payload["result"]["cases"]) == 4
    code, payload, _ = _run(capsys, ["isoperimetric", "--lambda", "0"])
    assert code == 0 and payload["result"]["flat"]


def test_failed_experiment_exits_3(capsys):
    # a negative tolerance cannot be met, so the report fails
    code, payload, _ = _run(capsys, ["valuation", "--lambda", "0", "--tol", "-1"])
    assert code == cli.EXIT_NUMERIC and payload["result"]["passed"] is False


def test_console_entry_point(tmp_path):
    spec = _spec(tmp_path, SQUARE)
    proc = subprocess.run([sys.executable, "-m", "spaceform_float.cli", "floatarea", spec],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["value"] == 0.0
