import json

import numpy as np
import pytest

from wtqa.harness import (ConfigError, ExperimentConfig, ROW_FIELDS, config_with, curve_rows,
                          emit_outputs, read_csv, result_rows, rows_from_traces,
                          run_replication, run_sweep, stem, summary_table)
from wtqa.panel import write_panel_csv
from wtqa.synth import gaussian_panel


@pytest.fixture(scope="module")
def panel_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "toy.csv"
    write_panel_csv(gaussian_panel(40, 30, feature_dim=3, burn_in=10, seed=4), path)
    return path


@pytest.fixture
def csv_cfg(panel_csv, tmp_path):
    return ExperimentConfig(scenario=None, panel_path=str(panel_csv), burn_in_end=10,
                            methods=("split_cp", "tqa_only", "wtqa"), reps=2,
                            out=str(tmp_path / "out"))


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.alpha == 0.1 and cfg.h == (0.6,) and cfg.gamma == (0.01,)
        assert cfg.reps == 30 and cfg.sweep_axis is None and cfg.grid == (None,)

    def test_ini_round_trip(self, csv_cfg):
        cfg = config_with(csv_cfg, feedback="mcar", p=(0.0, 0.5, 1.0), threads=3)
        assert ExperimentConfig.from_ini(cfg.to_ini()) == cfg

    def test_grid_parsing(self):
        cfg = ExperimentConfig(h="0.3, 0.6,0.9")
        assert cfg.h == (0.3, 0.6, 0.9) and cfg.sweep_axis == "h"

    @pytest.mark.parametrize("kw", [
        dict(methods=()), dict(methods=("wtqa", "qr")), dict(methods=("wtqa", "wtqa")),
        dict(h=()), dict(h=(0.6, 0.6)), dict(gamma=(0.0,)), dict(p=(1.2,)),
        dict(p=(0.2, 0.4)), dict(feedback="mcar", p=(0.2, 0.4), h=(0.3, 0.6)),
        dict(scenario=None), dict(panel_path="x.csv"), dict(scenario="nope"),
        dict(alpha=0.0), dict(reps=0), dict(threads=0), dict(feedback="sometimes"),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            ExperimentConfig(**kw)

    def test_unknown_ini_entries(self):
        with pytest.raises(ConfigError, match="section"):
            ExperimentConfig.from_ini("[extras]\nx = 1\n")
        with pytest.raises(ConfigError, match="key"):
            ExperimentConfig.from_ini("[run]\nrepz = 3\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_ini("[run]\nreps = three\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(tmp_path / "none.ini")

    def test_points(self):
        full = ExperimentConfig(p=(0.3,))
        assert full.point(None)["p"] == 1.0
        inf = ExperimentConfig(feedback="hard_visible")
        assert np.isnan(inf.point(None)["p"])
        sweep = ExperimentConfig(feedback="mcar", p=(0.0, 0.5))
        assert sweep.point(0.5) == {"p": 0.5, "h": 0.6, "gamma": 0.01}


class TestReplication:
    def test_single_rep_equals_batch(self, csv_cfg):
        reps = run_sweep(csv_cfg)
        alone = run_replication(csv_cfg, 1)
        for m in csv_cfg.methods:
            np.testing.assert_array_equal(alone.traces[None][m].lo, reps[1].traces[None][m].lo)

    def test_threads_do_not_change_results(self, csv_cfg):
        a = result_rows(csv_cfg, run_sweep(csv_cfg))
        b = result_rows(csv_cfg, run_sweep(config_with(csv_cfg, threads=2)))
        assert a == b

    def test_p_zero_equivalence(self, csv_cfg):
        cfg = config_with(csv_cfg, methods=("wtqa", "w_only"), feedback="mcar", p=(0.0,))
        rows = result_rows(cfg, run_sweep(cfg))
        w = [r for r in rows if r["method"] == "wtqa"]
        o = [r for r in rows if r["method"] == "w_only"]
        for a, b in zip(w, o):
            assert {k: a[k] for k in ROW_FIELDS[4:]} == {k: b[k] for k in ROW_FIELDS[4:]}

    def test_coupled_p_sweep(self, csv_cfg):
        cfg = config_with(csv_cfg, feedback="mcar", p=(0.2, 0.6, 1.0), reps=1)
        rep = run_replication(cfg, 0)
        rates = [rep.schedule_rates[v] for v in cfg.grid]
        assert rates == sorted(rates) and rates[-1] == 1.0
        split_lo = [rep.traces[v]["split_cp"].lo for v in cfg.grid]
        assert all(np.array_equal(split_lo[0], x) for x in split_lo)

    def test_informative(self, csv_cfg):
        cfg = config_with(csv_cfg, feedback="easy_visible", reps=1)
        rep = run_replication(cfg, 0)
        assert np.corrcoef(rep.feedback_probs, rep.feedback_z)[0, 1] < -0.95

    def test_synthetic_smoke(self, tmp_path):
        cfg = ExperimentConfig(methods=("split_cp", "wtqa"), reps=1, out=str(tmp_path))
        rep = run_replication(cfg, 0)
        tr = rep.traces[None]["wtqa"]
        assert tr.lo.shape == (30, 60)


class TestOutputs:
    def test_files_and_reproducibility(self, csv_cfg):
        cfg = config_with(csv_cfg, feedback="mcar", p=(0.0, 1.0))
        reps = run_sweep(cfg)
        rows = result_rows(cfg, reps)
        paths = emit_outputs(cfg, rows, curve_rows(cfg, reps), reps)
        names = {p.name for p in paths}
        s = stem(cfg)
        assert s == "toy_p"
        for suffix in ("_results.csv", "_curves.csv", "_summary.json", ".ini",
                       "_cumulative_tail.svg", "_tail_vs_p.svg"):
            assert s + suffix in names
        assert {f"toy_p_{m}.csv" for m in cfg.methods} <= names
        assert {f"toy_p_{m}_traces.npz" for m in cfg.methods} <= names

        before = {p.name: p.read_bytes() for p in paths}
        rows2, curves2 = rows_from_traces(cfg, paths[0].parent)
        assert rows2 == rows
        again = emit_outputs(cfg, rows2, curves2)
        for p in again:
            assert p.read_bytes() == before[p.name], p.name

        svg = (paths[0].parent / f"{s}_tail_vs_p.svg").read_text()
        assert svg.count("<g id=\"line2d_") >= len(cfg.methods)

    def test_single_row(self, csv_cfg):
        cfg = config_with(csv_cfg, methods=("split_cp",), reps=1)
        reps = run_sweep(cfg)
        rows = result_rows(cfg, reps)
        emit_outputs(cfg, rows, curve_rows(cfg, reps), reps)
        assert len(read_csv(f"{cfg.out}/toy_run_results.csv")) == 1

    def test_summary(self, csv_cfg):
        reps = run_sweep(csv_cfg)
        rows = result_rows(csv_cfg, reps)
        table = summary_table(csv_cfg, rows)
        cell = table["wtqa"]["all"]["tail_coverage"]
        vals = [r["tail_coverage"] for r in rows if r["method"] == "wtqa"]
        assert cell["mean"] == pytest.approx(np.mean(vals))
        assert cell["sd"] == pytest.approx(np.std(vals, ddof=1))
        emit_outputs(csv_cfg, rows, curve_rows(csv_cfg, reps), reps)
        summary = json.loads(open(f"{csv_cfg.out}/toy_run_summary.json").read())
        assert ExperimentConfig.from_ini(summary["config"]) == csv_cfg

    def test_empty_rows(self, csv_cfg):
        with pytest.raises(ValueError):
            emit_outputs(csv_cfg, [], [])

    def test_unwritable(self, csv_cfg, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError):
            emit_outputs(config_with(csv_cfg, out=str(blocker / "sub")), [{"x": 1}], [])
