"""CLI contract: files, formats, exit codes, manifest replay."""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from odejet.cli import main
from odejet.results import fmt_float, read_csv, read_manifest

FAST_FIT = ["--epochs", "60", "--lam", "0.02", "--hidden", "8"]


def run_cli(args):
    return main([str(a) for a in args])


class TestFormats:
    def test_float_serialization_roundtrips(self):
        rng = np.random.default_rng(0)
        for x in rng.standard_normal(200) * 10.0 ** rng.integers(-30, 30, 200):
            assert float(fmt_float(x)) == x

    def test_csv_contract(self, tmp_path):
        assert run_cli(["nfe-grid", "--max-degree", "2", "--orders", "2",
                        "--outdir", tmp_path]) == 0
        text = (tmp_path / "grid.csv").read_text(encoding="utf-8")
        lines = text.splitlines()
        assert lines[0] == "solver,order,degree,accepted,rejected,nfe"
        assert all(len(l.split(",")) == 6 for l in lines[1:])

    def test_json_format(self, tmp_path):
        assert run_cli(["nfe-grid", "--max-degree", "1", "--orders", "2",
                        "--outdir", tmp_path, "--format", "json"]) == 0
        rows = json.loads((tmp_path / "grid.json").read_text())
        assert rows and rows[0]["solver"] == "heun21"


class TestManifest:
    def test_manifest_written_with_outputs(self, tmp_path):
        run_cli(["bench-jet", "--k-max", "2", "--repetitions", "1",
                 "--dim", "2", "--hidden", "4", "--outdir", tmp_path])
        doc = read_manifest(tmp_path / "manifest.json")
        assert doc["command"] == "bench-jet"
        assert "bench.csv" in doc["outputs"]
        assert doc["seed"] == 0
        assert (tmp_path / "bench.csv").exists()

    def test_replay_reproduces_csv_bytes(self, tmp_path):
        first = tmp_path / "first"
        second = tmp_path / "second"
        assert run_cli(["fit-toy", *FAST_FIT, "--outdir", first]) == 0
        assert run_cli(["replay", first / "manifest.json",
                        "--outdir", second]) == 0
        for name in ("trajectories.csv", "nfe_history.csv", "summary.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_same_flags_twice_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert run_cli(["sweep-lambda", "--epochs", "25",
                            "--lam-lo", "0.01", "--lam-hi", "0.02",
                            "--per-decade", "3", "--orders", "5",
                            "--outdir", d]) == 0
        assert (a / "pareto.csv").read_bytes() == (b / "pareto.csv").read_bytes()


class TestFitToy:
    def test_lambda_zero_emits_baseline_only(self, tmp_path):
        assert run_cli(["fit-toy", "--epochs", "40", "--lam", "0",
                        "--hidden", "8", "--outdir", tmp_path]) == 0
        variants = {r[0] for r in read_csv(tmp_path / "trajectories.csv").rows}
        assert variants == {"baseline"}

    def test_regularized_run_emits_both(self, tmp_path):
        assert run_cli(["fit-toy", *FAST_FIT, "--outdir", tmp_path,
                        "--svg"]) == 0
        variants = {r[0] for r in read_csv(tmp_path / "trajectories.csv").rows}
        assert variants == {"baseline", "regularized"}
        assert (tmp_path / "trajectories.svg").exists()
        svg = (tmp_path / "trajectories.svg").read_text()
        assert svg.startswith("<svg") and "polyline" in svg


class TestExitCodes:
    def test_usage_error_is_2(self):
        with pytest.raises(SystemExit) as e:
            main(["fit-toy", "--no-such-flag"])
        assert e.value.code == 2

    def test_unknown_command_is_2(self):
        with pytest.raises(SystemExit) as e:
            main(["decompile"])
        assert e.value.code == 2

    def test_gradcheck_ok_exit_zero(self, tmp_path):
        assert run_cli(["gradcheck", "--k-list", "1", "--outdir",
                        tmp_path]) == 0
        rows = read_csv(tmp_path / "report.csv").rows
        assert all(r[5] == "pass" for r in rows)

    def test_gradcheck_corrupted_exit_one(self, tmp_path):
        assert run_cli(["gradcheck", "--k-list", "1", "--corrupt", "tanh",
                        "--outdir", tmp_path]) == 1

    def test_gradcheck_report_rows_per_operation(self, tmp_path):
        run_cli(["gradcheck", "--k-list", "1", "2", "--outdir", tmp_path])
        rows = read_csv(tmp_path / "report.csv").rows
        taylor_ks = {r[1] for r in rows if r[0] == "objective[taylor]"}
        assert taylor_ks == {"1", "2"}


class TestEntryPoint:
    def test_module_help(self):
        out = subprocess.run([sys.executable, "-m", "odejet.cli", "--help"],
                             capture_output=True, text=True)
        assert out.returncode == 0
        assert "fit-toy" in out.stdout and "bench-jet" in out.stdout
