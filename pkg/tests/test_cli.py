import json
from pathlib import Path

import numpy as np
import pytest

from kondotri.cli import EXIT_NUMERICAL, EXIT_PARTIAL, EXIT_USAGE, main


def run_cli(*argv) -> int:
    return main(list(argv))


class TestSweepCommand:
    def test_sweep_writes_csv_and_metadata(self, tmp_path, capsys):
        code = run_cli(
            "sweep", "--model", "2ikm", "--jprime", "0.4", "--sizes", "8",
            "--grid", "0.2:0.8:3", "--measure", "e1", "--out", str(tmp_path),
            "--seed", "1",
        )
        assert code == 0
        csv_path = tmp_path / "sweep_2ikm.csv"
        meta_path = tmp_path / "sweep_2ikm.meta.json"
        assert csv_path.exists() and meta_path.exists()
        assert len(csv_path.read_text().strip().splitlines()) == 4
        meta = json.loads(meta_path.read_text())
        assert meta["config"]["solver"]["seed"] == 1
        assert meta["config"]["analysis"]["measures"] == ["e1"]

    def test_rerun_is_byte_identical(self, tmp_path):
        args = ("sweep", "--model", "2ikm", "--jprime", "0.4", "--sizes", "8",
                "--grid", "0.2:0.8:3", "--measure", "e1", "--seed", "7")
        assert run_cli(*args, "--out", str(tmp_path / "a")) == 0
        assert run_cli(*args, "--out", str(tmp_path / "b")) == 0
        a = (tmp_path / "a" / "sweep_2ikm.csv").read_bytes()
        b = (tmp_path / "b" / "sweep_2ikm.csv").read_bytes()
        assert a == b

    def test_odd_size_for_2ikm_is_usage_error(self, tmp_path, capsys):
        code = run_cli("sweep", "--model", "2ikm", "--sizes", "9",
                       "--grid", "0.2:0.8:3", "--out", str(tmp_path))
        assert code == EXIT_USAGE
        assert "sizes" in capsys.readouterr().err

    def test_unknown_config_key_is_usage_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"model": {"kind": "2ikm", "bogus": True}}))
        code = run_cli("sweep", "--config", str(cfg), "--out", str(tmp_path))
        assert code == EXIT_USAGE

    def test_partial_failure_exits_3(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "model": {"kind": "2ikm", "j_prime": [0.4], "sizes": [8, 12]},
            "grid": {"values": [0.3], "spec": None},
            "solver": {"max_iter": 45},
            "analysis": {"measures": ["e1"]},
            "io": {"out_dir": str(tmp_path)},
        }))
        code = run_cli("sweep", "--config", str(cfg))
        assert code == EXIT_PARTIAL
        csv_text = (tmp_path / "sweep_2ikm.csv").read_text()
        assert "false" in csv_text and "true" in csv_text

    def test_all_failed_exits_4(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "model": {"kind": "2ikm", "j_prime": [0.4], "sizes": [12]},
            "grid": {"values": [0.3], "spec": None},
            "solver": {"max_iter": 5},
            "analysis": {"measures": ["e1"]},
            "io": {"out_dir": str(tmp_path)},
        }))
        assert run_cli("sweep", "--config", str(cfg)) == EXIT_NUMERICAL


class TestSynthAndFitCommands:
    def _synth_power_csv(self, tmp_path) -> Path:
        # exact closed-form data whose E(g_c) follows (A/B) N^lam exactly
        out = tmp_path / "synth.csv"
        code = run_cli(
            "synth", "--kind", "ansatz6",
            "--param", "a=0.5", "--param", "b=2.0", "--param", "beta=0.38",
            "--param", "lam=0.19", "--param", "g_c=0.3",
            "--sizes", "32,64,128,256",
            "--grid", "0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5",
            "--out", str(out),
        )
        assert code == 0
        return out

    def test_power_fit_recovers_exact_lambda(self, tmp_path, capsys):
        csv_path = self._synth_power_csv(tmp_path)
        code = run_cli("fit", str(csv_path), "--mode", "power",
                       "--gc-policy", "fixed=0.3", "--out", str(tmp_path / "fits"))
        assert code == 0
        report = json.loads((tmp_path / "fits" / "fit_power_e1.json").read_text())
        assert abs(report["lambda"] - 0.19) <= 1e-10

    def test_collapse_fit_writes_rescaled_table(self, tmp_path):
        out = tmp_path / "c7.csv"
        assert run_cli(
            "synth", "--kind", "collapse7",
            "--param", "nu=2", "--param", "beta=1.0", "--param", "g_c=1.0",
            "--sizes", "33,65,129", "--grid", "0:3:15", "--out", str(out),
        ) == 0
        code = run_cli("fit", str(out), "--mode", "collapse",
                       "--gc-policy", "fixed=1.0", "--restarts", "4",
                       "--out", str(tmp_path / "fits"))
        assert code == 0
        report = json.loads((tmp_path / "fits" / "fit_collapse_e1.json").read_text())
        assert report["nu"] == pytest.approx(2.0, abs=0.01)
        assert report["beta"] == pytest.approx(1.0, abs=0.01)
        rescaled = (tmp_path / "fits" / "fit_collapse_e1_rescaled.csv").read_text()
        assert rescaled.startswith("n_total,x,y")

    def test_identity_mode_on_report(self, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        report_path.write_text(json.dumps({"beta": 0.38, "nu": 2.0, "lambda": 0.19}))
        code = run_cli("fit", str(report_path), "--mode", "identity",
                       "--out", str(tmp_path / "fits"))
        assert code == 0
        out = json.loads((tmp_path / "fits" / "fit_identity_e1.json").read_text())
        assert out["identity_residual"] == 0.0

    def test_synth_deterministic_bytes(self, tmp_path):
        args = ("synth", "--kind", "ansatz6", "--param", "a=0.5", "--param", "b=2.0",
                "--param", "beta=0.38", "--param", "lam=0.19", "--param", "g_c=0.3",
                "--sizes", "32,64", "--grid", "0.1,0.2,0.4", "--noise", "0.01",
                "--seed", "9")
        assert run_cli(*args, "--out", str(tmp_path / "s1.csv")) == 0
        assert run_cli(*args, "--out", str(tmp_path / "s2.csv")) == 0
        assert (tmp_path / "s1.csv").read_bytes() == (tmp_path / "s2.csv").read_bytes()

    def test_fit_garbage_dataset_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("this,is,not\nthe,right,schema\n")
        assert run_cli("fit", str(bad), "--mode", "power",
                       "--out", str(tmp_path)) == EXIT_USAGE

    def test_bad_param_syntax(self, tmp_path, capsys):
        code = run_cli("synth", "--kind", "ansatz6", "--param", "a0.5",
                       "--sizes", "32", "--grid", "0.1,0.2",
                       "--out", str(tmp_path / "x.csv"))
        assert code == EXIT_USAGE


class TestOracleCheckCommand:
    def test_small_battery_passes(self, capsys):
        assert run_cli("oracle-check", "--n-configs", "2", "--seed", "3") == 0
        out = capsys.readouterr().out
        assert "checks passed" in out

    def test_corruption_fails_with_named_check(self, capsys):
        code = run_cli("oracle-check", "--n-configs", "1", "--seed", "3", "--corrupt")
        assert code == EXIT_NUMERICAL
        out = capsys.readouterr().out
        assert "hermiticity" in out


class TestParserBasics:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0

    def test_no_command_is_usage(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == EXIT_USAGE
