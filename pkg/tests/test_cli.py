import json
import subprocess
import sys

import pytest

from reslevy import cli
from reslevy.levy_models import make_model
from reslevy.mc_verify import CheckReport
from reslevy.reporting import read_body


def run(args, tmp_path, monkeypatch=None):
    return cli.main(list(args) + ["--output-dir", str(tmp_path)])


class TestClassify:
    def test_example(self, tmp_path, capsys):
        assert run(["classify", "--family", "stable", "--alpha", "1.5", "--rhobar", "0.5"], tmp_path) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["verdict"] == "AbsorbedAS" and out["rule"] == "stable-criterion"
        doc = json.loads((tmp_path / "classify.json").read_text())
        assert doc["results"]["verdict"] == "AbsorbedAS" and doc["header"]["seed"] == 20261016

    def test_missing_parameter(self, tmp_path, capsys):
        assert run(["classify", "--family", "stable", "--alpha", "1.5"], tmp_path) == 1
        assert "rhobar" in capsys.readouterr().err

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "f"
        blocker.write_text("")
        assert cli.main(["classify", "--family", "gamma", "--a", "1", "--b", "1", "--output-dir", str(blocker / "x")]) == 3

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "reslevy", "classify", "--family", "cp", "--lam-down", "1", "--lam-up", "1", "--output-dir", str(tmp_path)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0 and "Conservative" in proc.stdout


class TestCriteriaMap:
    def test_csv(self, tmp_path):
        code = run(["criteria-map", "--family", "stable", "--alpha-grid", "0.1:2.0:0.1", "--rho-grid", "0.05:0.95:0.05"], tmp_path)
        assert code == 0
        lines = [l for l in (tmp_path / "criteria_map.csv").read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == "alpha,rhobar,B,verdict,rule" and len(lines) == 243
        assert (tmp_path / "criteria_map.png").stat().st_size > 0

    def test_missing_grid(self, tmp_path, capsys):
        assert run(["criteria-map", "--family", "stable", "--alpha-grid", "0.1:2.0:0.1"], tmp_path) == 1
        assert "rho_grid" in capsys.readouterr().err


class TestLifetime:
    def test_schema_and_determinism(self, tmp_path):
        args = ["lifetime", "--family", "stable-subordinator", "--alpha", "0.5", "--starts", "0.5,1", "--n-paths", "300"]
        assert run(args, tmp_path / "a") == 0
        assert run(args, tmp_path / "b") == 0
        header = [l for l in (tmp_path / "a" / "lifetimes.csv").read_text().splitlines() if not l.startswith("#")][0]
        assert header == "replica,start,zeta_or_censor,censored,n_resurrections"
        for name in ("lifetimes.csv", "lifetime.json"):
            assert read_body(str(tmp_path / "a" / name)) == read_body(str(tmp_path / "b" / name))
        assert (tmp_path / "a" / "lifetimes.png").exists()

    def test_seed_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RESLEVY_SEED", "5")
        assert run(["lifetime", "--family", "stable-subordinator", "--alpha", "0.5", "--n-paths", "10", "--plots", "false"], tmp_path) == 0
        assert json.loads((tmp_path / "lifetime.json").read_text())["header"]["seed"] == 5


class TestSimulate:
    def test_trace_export(self, tmp_path):
        args = ["simulate", "--family", "cp", "--lam-up", "1", "--lam-down", "1", "--horizon", "30", "--n-paths", "50"]
        assert run(args, tmp_path) == 0
        rows = [l for l in (tmp_path / "trace.csv").read_text().splitlines() if not l.startswith("#")]
        assert rows[0] == "start,n,tau_n,Z_tau_n"
        assert (tmp_path / "trace_0.png").exists()

    def test_needs_horizon(self, tmp_path):
        assert run(["simulate", "--family", "cp", "--lam-down", "1"], tmp_path) == 1


class TestVerify:
    def test_precondition_error_before_compute(self, tmp_path, capsys):
        assert run(["verify", "--family", "cp", "--lam-down", "1", "--checks", "kernel_law"], tmp_path) == 1
        assert "is_neg_subordinator" in capsys.readouterr().err

    def test_failed_check_exit_code(self, tmp_path, monkeypatch):
        model = make_model("cp", lam_down=1.0, lam_up=1.0)
        monkeypatch.setattr(cli, "_run_check", lambda name, cfg, m: CheckReport(name, model, 1, 0, {}, False))
        assert run(["verify", "--family", "cp", "--lam-down", "1", "--lam-up", "1", "--checks", "exponential_law"], tmp_path) == 2
        doc = json.loads((tmp_path / "verify.json").read_text())
        assert doc["results"]["pass"] is False

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "command = verify\nfamily = stable-subordinator\nalpha = 0.5\nchecks = overshoot\nn_paths = 2000\nplots = false\n"
        )
        assert cli.main(["verify", "--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 0
        doc = json.loads((tmp_path / "o" / "verify.json").read_text())
        assert doc["results"]["checks"][0]["check"] == "overshoot"
