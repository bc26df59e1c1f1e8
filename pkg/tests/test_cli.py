import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from hyperbn.cli import main


def _run(tmp_path, *args, name="run"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def _manifest_consistent(out: Path):
    man = json.loads((out / "manifest.json").read_text())
    for f in man["outputs"]:
        path = out / f["path"]
        assert path.exists()
        if f["kind"] == "csv":
            with open(path, newline="") as fh:
                rows = list(csv.reader(fh))
            assert len(rows) - 1 == f["rows"]
            assert all(len(r) == f["columns"] for r in rows)
        else:
            json.loads(path.read_text())
    return man


class TestSolve:
    def test_ground_state(self, tmp_path):
        code, out = _run(tmp_path, "solve", "--dim", "5", "--lambda", "3.9", "--p", "critical",
                         "--nodes", "0")
        assert code == 0
        man = _manifest_consistent(out)
        assert man["parameters"]["p"] == "critical" and man["parameters"]["tol"] == 1e-10
        sol = json.loads((out / "solution.json").read_text())
        assert sol["nodes"] == 0 and sol["params"]["p"] == 10 / 3
        with open(out / "profile.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == ["r", "s", "u", "u_prime", "v"]
        assert all(float(r["u"]) > 0 for r in rows)

    def test_below_threshold_no_bracket(self, tmp_path):
        code, out = _run(tmp_path, "solve", "--dim", "5", "--lambda", "3.0", "--p", "critical")
        assert code == 2
        assert json.loads((out / "solution.json").read_text())["status"] == "no-bracket"

    @pytest.mark.parametrize("argv", [
        ["solve", "--dim", "2", "--lambda", "1"],
        ["solve", "--lambda", "1"],
        ["solve", "--dim", "5", "--lambda", "3.9", "--bogus"],
        ["solve", "--dim", "5", "--lambda", "3.9", "--p", "4"],
        ["solve", "--dim", "5", "--lambda", "3.9", "--nodes", "9"],
        ["solve", "--dim", "5", "--lambda", "3.9", "--tol", "-1"],
        ["frobnicate"],
        [],
    ])
    def test_invalid(self, tmp_path, argv, capsys):
        assert main(argv + ["--out", str(tmp_path)] if argv else argv) == 1
        assert "error" in capsys.readouterr().err


class TestOtherCommands:
    def test_scan(self, tmp_path):
        code, out = _run(tmp_path, "scan", "--dim", "4", "--lambda", "2.0")
        assert code == 0
        d = json.loads((out / "scan.json").read_text())
        assert d["verdict"] == "consistent-with-nonexistence" and len(d["amplitudes"]) == 60
        _manifest_consistent(out)

    def test_scan_in_window_rejected(self, tmp_path):
        assert _run(tmp_path, "scan", "--dim", "5", "--lambda", "3.9")[0] == 1

    def test_eig(self, tmp_path, capsys):
        code, out = _run(tmp_path, "eig", "--dim", "3", "--count", "2")
        assert code == 0
        vals = json.loads((out / "eig.json").read_text())["eigenvalues"]
        assert vals[0] == pytest.approx(9.8696044, abs=1e-7)
        assert vals[1] == pytest.approx(39.478418, abs=1e-6)
        assert "9.8696044" in capsys.readouterr().out
        _manifest_consistent(out)

    def test_verify(self, tmp_path):
        code, run = _run(tmp_path, "solve", "--dim", "5", "--lambda", "3.9")
        assert code == 0
        assert main(["verify", "--in", str(run)]) == 0
        rep = json.loads((run / "verify.json").read_text())
        assert max(abs(x) for x in rep["pohozaev"]["relative_residual"]) <= 1e-6
        assert rep["fitted_decay"] == pytest.approx(2.3162, rel=0.02)

    def test_verify_missing(self, tmp_path):
        assert main(["verify", "--in", str(tmp_path / "nothing")]) == 1

    def test_branch_single(self, tmp_path):
        code, out = _run(tmp_path, "branch", "--dim", "7", "--lambda", "8.9", "--p-list", "2.5")
        assert code == 0
        d = json.loads((out / "branch.json").read_text())
        assert d["verdict"] == "incomplete" and d["compactness"] is None
        _manifest_consistent(out)

    def test_sobolev(self, tmp_path):
        code, out = _run(tmp_path, "sobolev", "--dim", "3", "--lambda", "1", "--p", "6",
                         "--grid", "100", "--starts", "1", "--maxiter", "200")
        assert code == 0
        d = json.loads((out / "sobolev.json").read_text())
        assert d["estimate"] > 5.4779
        _manifest_consistent(out)


class TestConfig:
    def test_config_and_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# sweep point\ndim = 3\ncount = 1\n")
        code, out = _run(tmp_path, "eig", "--config", str(cfg), "--count", "3")
        assert code == 0
        man = json.loads((out / "manifest.json").read_text())
        assert man["parameters"]["dim"] == 3 and man["parameters"]["count"] == 3
        assert len(man["config_digest"]) == 64

    def test_lambda_alias(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("dim=4\nlambda=2.0\ngrid_n=5\n")
        code, out = _run(tmp_path, "scan", "--config", str(cfg))
        assert code == 0
        assert json.loads((out / "manifest.json").read_text())["parameters"]["lam"] == 2.0

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("dim=3\ncolour=blue\n")
        assert _run(tmp_path, "eig", "--config", str(cfg))[0] == 1

    def test_env_out(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HYPERBN_OUT", str(tmp_path / "env"))
        assert main(["eig", "--dim", "3", "--count", "1"]) == 0
        assert (tmp_path / "env" / "eig.json").exists()


def test_help_lists_defaults(capsys):
    assert main(["solve", "--help"]) == 0
    text = capsys.readouterr().out
    for flag in ("--dim", "--lambda", "--p", "--nodes", "--tol", "--rmax", "--out", "--seed"):
        assert flag in text
    assert "(default: 1e-10)" in text


def test_deterministic(tmp_path):
    args = ["solve", "--dim", "5", "--lambda", "3.9", "--nodes", "0"]
    _, a = _run(tmp_path, *args, name="a")
    _, b = _run(tmp_path, *args, name="b")
    assert (a / "solution.json").read_bytes() == (b / "solution.json").read_bytes()
    assert (a / "profile.csv").read_bytes() == (b / "profile.csv").read_bytes()


def test_module_entry_point(tmp_path):
    env = dict(os.environ, HYPERBN_OUT=str(tmp_path))
    res = subprocess.run([sys.executable, "-m", "hyperbn", "eig", "--dim", "3", "--count", "1"],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 0 and res.stdout.startswith("9.86960440")
