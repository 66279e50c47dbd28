"""Replications, one-axis sweeps, configuration files and output emission."""

from __future__ import annotations

import configparser
import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from wtqa.engine import Trace, burn_in_history, fit_burnin_predictor, predict_panel, run_methods
from wtqa.feedback import (DIRECTIONS, informative_schedule, reveal_uniforms,
                           round_difficulty)
from wtqa.methods import LABELS, METHODS, MethodConfig
from wtqa.metrics import SCALAR_FIELDS, coverage_stats, summarize
from wtqa.panel import Panel, load_panel_csv, random_unit_split
from wtqa.synth import SCENARIOS, ScenarioSpec, cached_structure, simulate_panel

FEEDBACK_MODES = ("full", "mcar") + DIRECTIONS
SWEEP_AXES = ("p", "h", "gamma")
H_GRID = (0.30, 0.45, 0.60, 0.90, 1.20)
GAMMA_GRID = (0.005, 0.010, 0.020, 0.040, 0.080)
P_GRID = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _floats(text) -> tuple:
    if isinstance(text, (int, float)):
        return (float(text),)
    if isinstance(text, str):
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            return tuple(float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"expected a number or comma-separated numbers, got {text!r}") from exc
    return tuple(float(v) for v in text)


def _names(text) -> tuple:
    if isinstance(text, str):
        return tuple(p.strip() for p in text.split(",") if p.strip())
    return tuple(text)


def _fmt_grid(values) -> str:
    return ", ".join(repr(float(v)) for v in values)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment's numbers.

    Exactly one of ``scenario`` and ``panel_path`` names the data. Grids
    ``p``, ``h`` and ``gamma`` hold one value each, except for at most one
    sweep axis.
    """

    scenario: Optional[str] = "easy"
    panel_path: Optional[str] = None
    burn_in_end: Optional[int] = None
    methods: tuple = METHODS
    alpha: float = 0.10
    h: tuple = (0.6,)
    gamma: tuple = (0.01,)
    feedback: str = "full"
    p: tuple = (1.0,)
    reps: int = 30
    n_calib: Optional[int] = None
    n_test: Optional[int] = None
    stratify_tag: Optional[str] = None
    ridge_lambda: float = 10.0
    structure_seed: int = 2024
    base_rep_seed: int = 1000
    out: str = "results"
    threads: int = 1
    save_traces: bool = True

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "methods", _names(self.methods))
        for name in ("h", "gamma", "p"):
            set_(self, name, _floats(getattr(self, name)))
        if (self.scenario is None) == (self.panel_path is None):
            raise ConfigError("give exactly one of scenario and panel_path")
        if self.scenario is not None and self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if not self.methods:
            raise ConfigError("method list is empty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; expected names from {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("duplicate methods")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        for name in ("h", "gamma", "p"):
            grid = getattr(self, name)
            if not grid:
                raise ConfigError(f"{name} grid is empty")
            if len(set(grid)) != len(grid):
                raise ConfigError(f"{name} grid has repeated values")
        if any(v <= 0 for v in self.h + self.gamma):
            raise ConfigError("h and gamma must be positive")
        if any(not 0 <= v <= 1 for v in self.p):
            raise ConfigError("p values must lie in [0, 1]")
        if self.feedback not in FEEDBACK_MODES:
            raise ConfigError(f"feedback must be one of {FEEDBACK_MODES}")
        if self.feedback != "mcar" and self.p != (1.0,) and len(self.p) > 1:
            raise ConfigError("a p grid needs feedback = mcar")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if sum(len(getattr(self, a)) > 1 for a in SWEEP_AXES) > 1:
            raise ConfigError("only one sweep axis (p, h or gamma) may have more than one value")

    # -- derived -------------------------------------------------------------

    @property
    def sweep_axis(self) -> Optional[str]:
        for a in SWEEP_AXES:
            if len(getattr(self, a)) > 1:
                return a
        return None

    @property
    def grid(self) -> tuple:
        axis = self.sweep_axis
        return getattr(self, axis) if axis else (None,)

    @property
    def dataset(self) -> str:
        return self.scenario if self.scenario else Path(self.panel_path).stem

    def point(self, value) -> dict:
        """``(p, h, gamma)`` at one grid point."""
        pt = {"p": self.p[0], "h": self.h[0], "gamma": self.gamma[0]}
        if self.sweep_axis:
            pt[self.sweep_axis] = float(value)
        if self.feedback == "full":
            pt["p"] = 1.0
        elif self.feedback in DIRECTIONS:
            pt["p"] = float("nan")
        return pt

    def method_configs(self, h: float, gamma: float) -> list:
        return [MethodConfig(kind=m, alpha=self.alpha, h=h, gamma=gamma) for m in self.methods]

    # -- file format ---------------------------------------------------------

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp["data"] = {
            "scenario": self.scenario or "",
            "panel_path": self.panel_path or "",
            "burn_in_end": "" if self.burn_in_end is None else str(self.burn_in_end),
            "n_calib": "" if self.n_calib is None else str(self.n_calib),
            "n_test": "" if self.n_test is None else str(self.n_test),
            "stratify_tag": self.stratify_tag or "",
            "ridge_lambda": repr(float(self.ridge_lambda)),
        }
        cp["methods"] = {
            "methods": ", ".join(self.methods),
            "alpha": repr(float(self.alpha)),
            "h": _fmt_grid(self.h),
            "gamma": _fmt_grid(self.gamma),
        }
        cp["feedback"] = {"mode": self.feedback, "p": _fmt_grid(self.p)}
        cp["run"] = {
            "reps": str(self.reps),
            "structure_seed": str(self.structure_seed),
            "base_rep_seed": str(self.base_rep_seed),
            "threads": str(self.threads),
        }
        cp["output"] = {"out": self.out, "save_traces": "yes" if self.save_traces else "no"}
        lines = []
        for section in cp.sections():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in cp[section].items())
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_ini(cls, text: str, **overrides) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        known = {
            "data": {"scenario", "panel_path", "burn_in_end", "n_calib", "n_test",
                     "stratify_tag", "ridge_lambda"},
            "methods": {"methods", "alpha", "h", "gamma"},
            "feedback": {"mode", "p"},
            "run": {"reps", "structure_seed", "base_rep_seed", "threads"},
            "output": {"out", "save_traces"},
        }
        kw = {}
        for section in cp.sections():
            if section not in known:
                raise ConfigError(f"unknown config section [{section}]")
            for key, value in cp[section].items():
                if key not in known[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                kw[("feedback" if key == "mode" else key)] = value.strip()
        try:
            parsed = {}
            for key, value in kw.items():
                if key in ("scenario", "panel_path", "stratify_tag"):
                    parsed[key] = value or None
                elif key in ("burn_in_end", "n_calib", "n_test"):
                    parsed[key] = int(value) if value else None
                elif key in ("reps", "structure_seed", "base_rep_seed", "threads"):
                    parsed[key] = int(value)
                elif key in ("alpha", "ridge_lambda"):
                    parsed[key] = float(value)
                elif key == "save_traces":
                    parsed[key] = value.lower() in ("1", "yes", "true", "on")
                else:
                    parsed[key] = value
        except ValueError as exc:
            raise ConfigError(f"bad config value: {exc}") from exc
        if parsed.get("panel_path") and "scenario" not in parsed:
            parsed["scenario"] = None
        parsed.update(overrides)
        return cls(**parsed)

    @classmethod
    def load(cls, path, **overrides) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_ini(text, **overrides)


# ---------------------------------------------------------------------------
# replications

@dataclass
class Replication:
    """One replication's traces, keyed by grid value then method."""

    rep_index: int
    rep_seed: int
    traces: dict = field(default_factory=dict)        # {grid value: {method: Trace}}
    schedule_rates: dict = field(default_factory=dict)
    feedback_probs: Optional[np.ndarray] = None
    feedback_z: Optional[np.ndarray] = None


def rep_seed(cfg: ExperimentConfig, rep_index: int) -> int:
    return cfg.base_rep_seed + rep_index


def _load_data(cfg: ExperimentConfig, seed: int) -> Panel:
    if cfg.scenario is not None:
        spec = ScenarioSpec.named(cfg.scenario)
        return simulate_panel(cached_structure(cfg.structure_seed, spec), spec, seed)
    return _cached_csv(cfg.panel_path, cfg.burn_in_end)


_CSV_CACHE: dict = {}


def _cached_csv(path, burn_in_end):
    key = (os.path.abspath(path), burn_in_end)
    if key not in _CSV_CACHE:
        _CSV_CACHE[key] = load_panel_csv(path, burn_in_end=burn_in_end)
    return _CSV_CACHE[key]


def split_sizes(cfg: ExperimentConfig, panel: Panel) -> tuple:
    """Calibration and test counts; synthetic panels default to 470 / 30."""
    n = panel.n_units
    if cfg.scenario is not None:
        n_test = 30 if cfg.n_test is None else cfg.n_test
        n_calib = n - n_test if cfg.n_calib is None else cfg.n_calib
    else:
        n_test = max(1, int(round(0.2 * n))) if cfg.n_test is None else cfg.n_test
        n_calib = n - n_test if cfg.n_calib is None else cfg.n_calib
    return n_calib, n_test


def run_replication(cfg: ExperimentConfig, rep_index: int) -> Replication:
    """Simulate (or reload), split, fit, and run every method at every grid point.

    Synthetic splits are stratified: every majority unit calibrates. The
    result depends only on ``(cfg, rep_index)``.
    """
    seed = rep_seed(cfg, rep_index)
    panel = _load_data(cfg, seed)
    n_calib, n_test = split_sizes(cfg, panel)
    tag = cfg.stratify_tag
    if tag is None and cfg.scenario is not None:
        tag = "A"
    split = random_unit_split(panel, n_calib, n_test, seed, always_calib_tag=tag)
    mode = "synthetic_factor" if cfg.scenario is not None else "realdata"
    predictor = fit_burnin_predictor(panel, split, cfg.ridge_lambda, mode)
    preds = predict_panel(panel, predictor)
    burn = burn_in_history(panel, split, preds)
    T = panel.n_rounds
    out = Replication(rep_index, seed)

    reveals_fixed = None
    if cfg.feedback == "full":
        reveals_fixed = np.ones(T, dtype=np.int8)
    elif cfg.feedback in DIRECTIONS:
        test = np.asarray(split.test_ids)
        b = panel.burn_in_end
        difficulty = round_difficulty(np.abs(panel.outcomes[test, b:] - preds[test, b:]))
        sched = informative_schedule(difficulty, cfg.feedback, seed)
        reveals_fixed = sched.reveals
        out.feedback_probs, out.feedback_z = sched.probs, sched.z
    uniforms = reveal_uniforms(T, seed) if cfg.feedback == "mcar" else None

    for value in cfg.grid:
        pt = cfg.point(value)
        reveals = reveals_fixed if uniforms is None else (uniforms < pt["p"]).astype(np.int8)
        traces = run_methods(panel, split, preds, reveals,
                             cfg.method_configs(pt["h"], pt["gamma"]), burn)
        out.traces[value] = traces
        out.schedule_rates[value] = float(np.mean(reveals))
    return out


def _run_one(args):
    cfg, i = args
    return run_replication(cfg, i)


def run_sweep(cfg: ExperimentConfig, progress=None) -> list:
    """All replications, in replication order regardless of ``cfg.threads``."""
    jobs = [(cfg, i) for i in range(cfg.reps)]
    if cfg.threads > 1 and cfg.reps > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            reps = []
            for r in pool.map(_run_one, jobs):
                reps.append(r)
                if progress:
                    progress(r)
            return reps
    reps = []
    for job in jobs:
        r = _run_one(job)
        reps.append(r)
        if progress:
            progress(r)
    return reps


# ---------------------------------------------------------------------------
# tables

ROW_FIELDS = ("rep", "method", "axis", "value", "p", "h", "gamma", "reveal_rate") + SCALAR_FIELDS


def result_rows(cfg: ExperimentConfig, reps) -> list:
    """One row per (replication, method, grid point)."""
    axis = cfg.sweep_axis or "none"
    rows = []
    for rep in reps:
        for value in cfg.grid:
            pt = cfg.point(value)
            for m in cfg.methods:
                report = rep.traces[value][m].metrics()
                row = {"rep": rep.rep_index, "method": m, "axis": axis,
                       "value": "" if value is None else float(value),
                       "p": pt["p"], "h": pt["h"], "gamma": pt["gamma"],
                       "reveal_rate": rep.schedule_rates[value]}
                row.update(report.scalars())
                rows.append(row)
    return rows


def curve_rows(cfg: ExperimentConfig, reps) -> list:
    """Cumulative tail coverage averaged over replications, per (grid point, method, round)."""
    rows = []
    for value in cfg.grid:
        for m in cfg.methods:
            curves = np.array([rep.traces[value][m].metrics().cumulative_tail_curve
                               for rep in reps])
            mean = curves.mean(axis=0)
            for k, v in enumerate(mean, start=1):
                rows.append({"value": "" if value is None else float(value), "round": k,
                             "method": m, "cumulative_tail": float(v)})
    return rows


def summary_table(cfg: ExperimentConfig, rows) -> dict:
    """Mean and sample sd per (method, grid point, metric)."""
    out = {}
    for m in cfg.methods:
        cells = {}
        for value in cfg.grid:
            key = "all" if value is None else repr(float(value))
            sel = [r for r in rows if r["method"] == m
                   and (value is None or r["value"] == float(value))]
            cells[key] = {f: dict(zip(("mean", "sd"), summarize([r[f] for r in sel])))
                          for f in SCALAR_FIELDS}
            cells[key]["n_reps"] = len(sel)
        out[m] = cells
    return out


# ---------------------------------------------------------------------------
# outputs

def stem(cfg: ExperimentConfig, method: Optional[str] = None) -> str:
    axis = cfg.sweep_axis or "run"
    base = f"{cfg.dataset}_{axis}"
    return base if method is None else f"{base}_{method}"


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path: Path, rows, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r[k]) for k in columns})


def read_csv(path: Path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _traces_payload(cfg, reps, method) -> dict:
    keys = ("covered", "widths", "alpha_t", "provenance", "reveals")
    arrays = {k: [] for k in keys}
    for rep in reps:
        per_grid = {k: [] for k in keys}
        for value in cfg.grid:
            tr: Trace = rep.traces[value][method]
            per_grid["covered"].append(tr.covered)
            per_grid["widths"].append(tr.widths)
            per_grid["alpha_t"].append(tr.alpha_t)
            per_grid["provenance"].append(tr.provenance)
            per_grid["reveals"].append(tr.reveals)
        for k in keys:
            arrays[k].append(np.stack(per_grid[k]))
    payload = {k: np.stack(v) for k, v in arrays.items()}
    first = reps[0].traces[cfg.grid[0]][method]
    payload["adaptive"] = np.array(first.adaptive)
    payload["rep"] = np.array([r.rep_index for r in reps])
    payload["reveal_rate"] = np.array([[r.schedule_rates[v] for v in cfg.grid] for r in reps])
    return payload


def save_traces(cfg: ExperimentConfig, reps, out: Path) -> list:
    paths = []
    for m in cfg.methods:
        path = out / f"{stem(cfg, m)}_traces.npz"
        np.savez_compressed(path, **_traces_payload(cfg, reps, m))
        paths.append(path)
    return paths


def rows_from_traces(cfg: ExperimentConfig, out: Path) -> tuple:
    """Rebuild result and curve rows from saved traces."""
    axis = cfg.sweep_axis or "none"
    rows, curves = [], []
    for m in cfg.methods:
        path = out / f"{stem(cfg, m)}_traces.npz"
        if not path.exists():
            raise FileNotFoundError(f"missing trace file {path}")
        z = np.load(path)
        adaptive = bool(z["adaptive"])
        n_rep = z["covered"].shape[0]
        for gi, value in enumerate(cfg.grid):
            pt = cfg.point(value)
            tails = []
            for ri in range(n_rep):
                rep = coverage_stats(z["covered"][ri, gi], z["widths"][ri, gi],
                                     z["alpha_t"][ri, gi] if adaptive else None,
                                     z["provenance"][ri, gi])
                row = {"rep": int(z["rep"][ri]), "method": m, "axis": axis,
                       "value": "" if value is None else float(value),
                       "p": pt["p"], "h": pt["h"], "gamma": pt["gamma"],
                       "reveal_rate": float(z["reveal_rate"][ri, gi])}
                row.update(rep.scalars())
                rows.append(row)
                tails.append(rep.cumulative_tail_curve)
            mean = np.mean(tails, axis=0)
            for k, v in enumerate(mean, start=1):
                curves.append({"value": "" if value is None else float(value), "round": k,
                               "method": m, "cumulative_tail": float(v)})
    order = {m: i for i, m in enumerate(cfg.methods)}
    rows.sort(key=lambda r: (r["rep"], cfg.grid.index(None if r["value"] == "" else r["value"]),
                             order[r["method"]]))
    curves.sort(key=lambda r: (cfg.grid.index(None if r["value"] == "" else r["value"]),
                               order[r["method"]], r["round"]))
    return rows, curves


def _figures(cfg: ExperimentConfig, results_csv: Path, curves_csv: Path, out: Path) -> list:
    """SVG figures drawn from the CSV files alone."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "wtqa"
    paths = []
    curves = read_csv(curves_csv)
    values = []
    for r in curves:
        if r["value"] not in values:
            values.append(r["value"])
    shown = values[-1]          # the last grid point (p = 1 for a p sweep)
    fig, ax = plt.subplots(figsize=(6, 4))
    for m in cfg.methods:
        sel = [r for r in curves if r["method"] == m and r["value"] == shown]
        ax.plot([int(r["round"]) for r in sel], [float(r["cumulative_tail"]) for r in sel],
                label=LABELS[m])
    ax.axhline(1 - cfg.alpha, color="grey", lw=0.8, ls="--")
    ax.set_xlabel("round")
    ax.set_ylabel("cumulative tail coverage")
    title = cfg.dataset if not shown else f"{cfg.dataset}, {cfg.sweep_axis} = {shown}"
    ax.set_title(title)
    ax.legend(fontsize=8)
    path = out / f"{stem(cfg)}_cumulative_tail.svg"
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    paths.append(path)

    if cfg.sweep_axis:
        rows = read_csv(results_csv)
        fig, ax = plt.subplots(figsize=(6, 4))
        for m in cfg.methods:
            xs, ys = [], []
            for v in cfg.grid:
                sel = [float(r["tail_coverage"]) for r in rows
                       if r["method"] == m and float(r["value"]) == float(v)]
                xs.append(float(v))
                ys.append(float(np.mean(sel)))
            ax.plot(xs, ys, marker="o", label=LABELS[m])
        ax.axhline(1 - cfg.alpha, color="grey", lw=0.8, ls="--")
        ax.set_xlabel(cfg.sweep_axis)
        ax.set_ylabel("tail coverage")
        ax.set_title(cfg.dataset)
        ax.legend(fontsize=8)
        path = out / f"{stem(cfg)}_tail_vs_{cfg.sweep_axis}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths


def emit_outputs(cfg: ExperimentConfig, rows, curves, reps=None, out=None) -> list:
    """Write CSV tables, the JSON summary, per-method tables and SVG figures."""
    if not rows:
        raise ValueError("no results to write")
    out = Path(out or cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    paths = []
    results_csv = out / f"{stem(cfg)}_results.csv"
    write_csv(results_csv, rows, ROW_FIELDS)
    curves_csv = out / f"{stem(cfg)}_curves.csv"
    write_csv(curves_csv, curves, ("value", "round", "method", "cumulative_tail"))
    paths += [results_csv, curves_csv]
    for m in cfg.methods:
        path = out / f"{stem(cfg, m)}.csv"
        write_csv(path, [r for r in rows if r["method"] == m], ROW_FIELDS)
        paths.append(path)
    summary = {
        "dataset": cfg.dataset,
        "sweep_axis": cfg.sweep_axis,
        "grid": [None if v is None else float(v) for v in cfg.grid],
        "reps": len({r["rep"] for r in rows}),
        "config": cfg.to_ini(),
        "metrics": summary_table(cfg, rows),
    }
    path = out / f"{stem(cfg)}_summary.json"
    path.write_text(json.dumps(summary, indent=2, sort_keys=False) + "\n")
    paths.append(path)
    (out / f"{stem(cfg)}.ini").write_text(cfg.to_ini())
    paths.append(out / f"{stem(cfg)}.ini")
    if reps is not None and cfg.save_traces:
        paths += save_traces(cfg, reps, out)
    paths += _figures(cfg, results_csv, curves_csv, out)
    return paths


def run_experiment(cfg: ExperimentConfig, progress=None) -> tuple:
    """Run, tabulate and write; returns ``(rows, written paths)``."""
    reps = run_sweep(cfg, progress)
    rows = result_rows(cfg, reps)
    curves = curve_rows(cfg, reps)
    return rows, emit_outputs(cfg, rows, curves, reps)


def format_summary(cfg: ExperimentConfig, rows, metrics=("avg_coverage", "tail_coverage",
                                                           "avg_width", "width_cov")) -> str:
    """Plain-text mean +- sd table for the terminal."""
    table = summary_table(cfg, rows)
    lines = []
    for value in cfg.grid:
        key = "all" if value is None else repr(float(value))
        if value is not None:
            lines.append(f"{cfg.sweep_axis} = {value:g}")
        head = f"{'method':<11}" + "".join(f"{m:>22}" for m in metrics)
        lines.append(head)
        for m in cfg.methods:
            cell = table[m][key]
            lines.append(f"{LABELS[m]:<11}" + "".join(
                f"{cell[f]['mean']:>13.3f} +- {cell[f]['sd']:.3f}" for f in metrics))
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def config_with(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    """``dataclasses.replace`` that drops ``None`` values (unset CLI flags)."""
    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})


def default_grid(axis: str) -> tuple:
    return {"p": P_GRID, "h": H_GRID, "gamma": GAMMA_GRID}[axis]


def config_fields() -> tuple:
    return tuple(f.name for f in fields(ExperimentConfig))


def as_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)
