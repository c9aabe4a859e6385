import csv
import io
import json
import math

import numpy as np
import pytest

from ellcover.cli import DEFAULTS, main, numeric_payload, resolve_config
from ellcover.errors import ConfigError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_dist_theta0(capsys):
    code, out, _ = run(capsys, "dist", "--metric", "theta0", "--x", "0", "2", "--y", "0", "5")
    assert code == 0
    val, case = out.split()[:2]
    assert float(val) == pytest.approx(9 * math.pi, rel=1e-15) and case == "case=1"
    code, out, _ = run(capsys, "dist", "--metric", "theta0", "--x", "1", "1", "--y", "1", "1")
    assert out.startswith("0.0 case=0")


def test_dist_nsw(capsys):
    code, out, _ = run(capsys, "dist", "--metric", "nsw", "--k", "1", "--x", "0", "0", "--y", "0.3", "0.04")
    assert code == 0 and float(out) == pytest.approx(0.3)


def test_usage_errors(capsys):
    assert run(capsys, "dist", "--metric", "bogus", "--x", "0", "0", "--y", "1", "1")[0] == 2
    assert run(capsys, "dist", "--metric", "nsw", "--x", "0", "--y", "1", "1")[0] == 2
    assert run(capsys, "check", "--property", "inner", "--metric", "nsw")[0] == 2
    assert run(capsys, "check", "--property", "ahlfors", "--metric", "induced-nsw")[0] == 2
    assert run(capsys, "validate")[0] == 2
    assert run(capsys, "validate", "--cover", "theta0", "--seed", "-3")[0] == 2
    assert run(capsys, "nonsense")[0] == 2


def test_config_merge(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"cover": "nsw", "samples": 77, "seed": 5}))
    cfg = resolve_config("validate", {"config": str(path), "samples": 11})
    assert cfg["samples"] == 11 and cfg["seed"] == 5 and cfg["cover"] == "nsw"
    assert set(cfg) == set(DEFAULTS["validate"])
    path.write_text(json.dumps({"cover": "nsw", "sampels": 77}))
    with pytest.raises(ConfigError, match="sampels"):
        resolve_config("validate", {"config": str(path)})
    path.write_text(json.dumps({"cover": "nsw", "seed": "7"}))
    with pytest.raises(ConfigError):
        resolve_config("validate", {"config": str(path)})


def test_unknown_config_key_exit_code(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"cover": "nsw", "colour": 1}))
    assert run(capsys, "validate", "--config", str(path))[0] == 2


def test_seed_not_from_environment(monkeypatch):
    monkeypatch.setenv("SEED", "123")
    monkeypatch.setenv("ELLCOVER_SEED", "123")
    assert resolve_config("validate", {"cover": "nsw"})["seed"] == 0


def test_validate_report_schema(capsys, tmp_path):
    code, rep = report(capsys, "validate", "--cover", "nsw", "--samples", "500")
    assert code == 0 and rep["pass"] is True
    assert rep["schema_version"] == 1 and rep["command"] == "validate"
    assert rep["config"]["samples"] == 500 and rep["config"]["seed"] == 0
    assert set(rep) >= {"constants", "witnesses", "reports", "runtime", "timing"}
    assert "wall_seconds" in rep["timing"]
    assert not any("time" in k for k in rep["constants"])
    out = tmp_path / "r.json"
    assert main(["validate", "--cover", "nsw", "--samples", "500", "--workers", "4", "--out", str(out)]) == 0
    assert numeric_payload(json.loads(out.read_text())) == numeric_payload(rep)


def test_validate_corrupted_fails(capsys):
    code, rep = report(capsys, "validate", "--cover", "corrupted", "--samples", "500")
    assert code == 1 and rep["pass"] is False and rep["witnesses"]


def test_check_nsw(capsys):
    code, rep = report(capsys, "check", "--property", "ahlfors", "--metric", "nsw", "--k", "2",
                       "--centers", "2", "--mc-points", "4000")
    assert code == 1
    assert any(np.allclose(w["center"], 0.0) for w in rep["witnesses"])
    code, rep = report(capsys, "check", "--property", "quasi-convex", "--metric", "nsw", "--samples", "32")
    assert code == 0 and rep["constants"]["Q"] == pytest.approx(math.sqrt(2), rel=1e-6)
    code, rep = report(capsys, "check", "--property", "inner", "--metric", "nsw", "--a", "1", "--b", "1",
                       "--samples", "1000")
    assert code == 0


def test_roundtrip_nsw_stops_at_certification(capsys):
    code, rep = report(capsys, "roundtrip", "--metric", "nsw", "--quasi-samples", "16", "--centers", "2",
                       "--mc-points", "2000")
    assert code == 1 and rep["stage"] == "certification"


def _ball_rows(capsys, *argv):
    code, out, _ = run(capsys, "ball", *argv)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    return rows[0], np.array(rows[1:], dtype=float)


def test_ball_nsw_rectangle(capsys):
    header, data = _ball_rows(capsys, "--metric", "nsw", "--k", "1", "--x", "0.5", "0", "--r", "0.1",
                              "--points", "64")
    assert header == ["u1", "u2", "R", "b1", "b2"]
    B = data[:, 3:]
    w, h = 0.1, 0.05
    # every boundary point lies on the rectangle |dx| = w or |dy| = h
    edge = np.maximum(np.abs(B[:, 0] - 0.5) / w, np.abs(B[:, 1]) / h)
    assert np.allclose(edge, 1.0, rtol=1e-5)


def test_ball_theta0_profile(capsys):
    # x2 = 0, r = pi 2^-t with t = 12: semi-axes 2^-4 and 2^-8
    _, data = _ball_rows(capsys, "--metric", "theta0", "--x", "0", "0", "--r", str(math.pi * 2.0 ** -12),
                         "--points", "8")
    U, R = data[:, :2], data[:, 2]
    expected = 1.0 / np.hypot(U[:, 0] / 2.0 ** -4, U[:, 1] / 2.0 ** -8)
    assert np.allclose(R, expected, rtol=1e-5)
    assert np.allclose(data[:, 3:], R[:, None] * U)


def test_ball_unbounded_exit(capsys):
    assert run(capsys, "ball", "--metric", "sup", "--x", "0", "0", "--r", "1e300")[0] == 1
