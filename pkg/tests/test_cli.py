import json

import pytest
from click.testing import CliRunner

from wtqa.cli import main
from wtqa.harness import ExperimentConfig, read_csv
from wtqa.panel import write_panel_csv
from wtqa.synth import gaussian_panel


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def panel_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "toy.csv"
    write_panel_csv(gaussian_panel(40, 30, feature_dim=3, burn_in=10, seed=8), path)
    return path


def csv_args(panel_csv, out, *extra):
    return ["--panel", str(panel_csv), "--burn-in", "10", "--methods", "split_cp,wtqa",
            "--reps", "2", "--out", str(out), *extra]


class TestBasics:
    @pytest.mark.parametrize("cmd", [[], ["run"], ["sweep"], ["report"], ["simulate"],
                                     ["selftest"]])
    def test_help(self, runner, cmd):
        res = runner.invoke(main, [*cmd, "--help"])
        assert res.exit_code == 0 and "Usage" in res.output

    def test_version(self, runner):
        res = runner.invoke(main, ["--version"])
        assert res.exit_code == 0 and "0.1.0" in res.output

    def test_selftest(self, runner):
        res = runner.invoke(main, ["selftest"])
        assert res.exit_code == 0, res.output
        assert "FAIL" not in res.output and res.output.count("PASS") >= 5

    def test_print_config(self, runner):
        res = runner.invoke(main, ["run", "--scenario", "hard", "--reps", "3", "--print-config"])
        assert res.exit_code == 0
        cfg = ExperimentConfig.from_ini(res.output)
        assert cfg.scenario == "hard" and cfg.reps == 3

    def test_config_file_with_overrides(self, runner, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text(ExperimentConfig(reps=5, alpha=0.2).to_ini())
        res = runner.invoke(main, ["run", "--config", str(path), "--reps", "2", "--print-config"])
        cfg = ExperimentConfig.from_ini(res.output)
        assert cfg.reps == 2 and cfg.alpha == 0.2

    def test_sweep_defaults_to_standard_grid(self, runner):
        res = runner.invoke(main, ["sweep", "--axis", "p", "--print-config"])
        cfg = ExperimentConfig.from_ini(res.output)
        assert cfg.feedback == "mcar" and cfg.sweep_axis == "p" and len(cfg.p) > 3

    def test_panel_replaces_scenario(self, runner, panel_csv):
        res = runner.invoke(main, ["run", "--panel", str(panel_csv), "--burn-in", "10",
                                   "--print-config"])
        assert res.exit_code == 0, res.output
        cfg = ExperimentConfig.from_ini(res.output)
        assert cfg.scenario is None and cfg.panel_path == str(panel_csv)


class TestErrors:
    @pytest.mark.parametrize("args", [
        ["run", "--methods", "wtqa,nope"],
        ["run", "--alpha", "1.5"],
        ["run", "--h", "0.3,0.6"],
        ["sweep", "--axis", "h", "--gamma", "0.01,0.05"],
        ["run", "--reps", "0"],
    ])
    def test_config_errors(self, runner, args):
        res = runner.invoke(main, args)
        assert res.exit_code == 2
        assert "error [config]" in res.output

    def test_data_error(self, runner, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("unit,time,y\nA,0,1.0\n")
        res = runner.invoke(main, ["run", "--panel", str(bad), "--burn-in", "1"])
        assert res.exit_code == 3 and "error [data]" in res.output

    def test_missing_panel(self, runner, tmp_path):
        res = runner.invoke(main, ["run", "--panel", str(tmp_path / "none.csv"), "--burn-in", "1"])
        assert res.exit_code in (3, 4)

    def test_report_without_traces(self, runner, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text(ExperimentConfig(out=str(tmp_path / "nothing")).to_ini())
        res = runner.invoke(main, ["report", str(path)])
        assert res.exit_code == 4 and "error [io]" in res.output


class TestRuns:
    def test_run_and_report(self, runner, panel_csv, tmp_path):
        out = tmp_path / "out"
        res = runner.invoke(main, ["run", *csv_args(panel_csv, out)])
        assert res.exit_code == 0, res.output
        results = out / "toy_run_results.csv"
        curves = out / "toy_run_curves.csv"
        first = results.read_bytes(), curves.read_bytes()
        assert len(read_csv(results)) == 4
        results.unlink()
        res = runner.invoke(main, ["report", str(out / "toy_run.ini")])
        assert res.exit_code == 0, res.output
        assert (results.read_bytes(), curves.read_bytes()) == first

    def test_sweep(self, runner, panel_csv, tmp_path):
        out = tmp_path / "sw"
        res = runner.invoke(main, ["sweep", "--axis", "gamma", "--gamma", "0.005,0.05",
                                   *csv_args(panel_csv, out)])
        assert res.exit_code == 0, res.output
        rows = read_csv(out / "toy_gamma_results.csv")
        assert len(rows) == 8 and {r["axis"] for r in rows} == {"gamma"}
        assert (out / "toy_gamma_tail_vs_gamma.svg").exists()

    def test_simulate(self, runner, tmp_path):
        res = runner.invoke(main, ["simulate", "--scenario", "medium", "--seed", "3",
                                   "--out", str(tmp_path)])
        assert res.exit_code == 0, res.output
        meta = json.loads((tmp_path / "medium_3.json").read_text())
        assert meta["rep_seed"] == 3 and len(meta["cluster_labels"]) == meta["n_units"]
        header = (tmp_path / "medium_3.csv").read_text().splitlines()[0]
        assert "cluster" in header
