"""Command-line entry point: ``wtqa {simulate,run,sweep,report,selftest}``."""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from wtqa.harness import (ConfigError, ExperimentConfig, config_with, curve_rows,
                          default_grid, emit_outputs, format_summary, result_rows,
                          rows_from_traces, run_sweep, stem)
from wtqa.panel import PanelError, write_panel_csv
from wtqa.synth import SCENARIOS, ScenarioSpec, cached_structure, simulate_panel

EXIT_CONFIG, EXIT_DATA, EXIT_IO, EXIT_INTERNAL = 2, 3, 4, 1


def _fail(category: str, message: str, code: int):
    click.echo(f"error [{category}]: {message}", err=True)
    sys.exit(code)


def guarded(fn):
    """Map exceptions to a categorized error line and exit code."""
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            _fail("config", str(exc), EXIT_CONFIG)
        except PanelError as exc:
            _fail("data", str(exc), EXIT_DATA)
        except (OSError, FileNotFoundError) as exc:
            _fail("io", str(exc), EXIT_IO)
        except ValueError as exc:
            _fail("config", str(exc), EXIT_CONFIG)
        except Exception as exc:  # noqa: BLE001
            _fail("internal", f"{type(exc).__name__}: {exc}", EXIT_INTERNAL)
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def experiment_options(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(), help="INI experiment file."),
        click.option("--scenario", type=click.Choice(SCENARIOS), help="Synthetic scenario."),
        click.option("--panel", "panel_path", type=click.Path(), help="Long-format panel CSV."),
        click.option("--burn-in", "burn_in_end", type=int, help="Burn-in length for CSV panels."),
        click.option("--methods", help="Comma-separated method names."),
        click.option("--feedback", type=click.Choice(("full", "mcar", "hard_visible",
                                                      "easy_visible"))),
        click.option("--p", "p", help="Reveal probability or comma-separated grid."),
        click.option("--h", "h", help="Bandwidth or comma-separated grid."),
        click.option("--gamma", help="Level stepsize or comma-separated grid."),
        click.option("--alpha", type=float, help="Nominal miscoverage."),
        click.option("--reps", type=int, help="Number of replications."),
        click.option("--seed", type=int, help="Base replication seed."),
        click.option("--structure-seed", type=int, help="Template seed for synthetic data."),
        click.option("--n-calib", type=int),
        click.option("--n-test", type=int),
        click.option("--out", type=click.Path(), help="Output directory."),
        click.option("--threads", type=int, help="Worker processes over replications."),
        click.option("--print-config", is_flag=True, help="Print the resolved config and exit."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def resolve_config(config_path=None, scenario=None, panel_path=None, seed=None,
                   **flags) -> ExperimentConfig:
    base = ExperimentConfig.load(config_path) if config_path else ExperimentConfig()
    changes = dict(flags)
    changes["base_rep_seed"] = seed
    try:
        # switching the data source has to clear the other one, which config_with cannot
        if panel_path is not None:
            base = replace(base, panel_path=panel_path, scenario=None)
        elif scenario is not None:
            base = replace(base, scenario=scenario, panel_path=None)
        return config_with(base, **changes)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _finish(cfg: ExperimentConfig, quiet: bool = False) -> None:
    def progress(rep):
        if not quiet:
            click.echo(f"replication {rep.rep_index + 1}/{cfg.reps} done", err=True)

    reps = run_sweep(cfg, progress)
    rows = result_rows(cfg, reps)
    paths = emit_outputs(cfg, rows, curve_rows(cfg, reps), reps)
    click.echo(format_summary(cfg, rows))
    click.echo(f"wrote {len(paths)} files to {cfg.out}")


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Online conformal intervals for panels with intermittent target feedback."""


@main.command()
@click.option("--scenario", type=click.Choice(SCENARIOS), default="easy", show_default=True)
@click.option("--seed", type=int, default=1000, show_default=True, help="Replication seed.")
@click.option("--structure-seed", type=int, default=2024, show_default=True)
@click.option("--out", type=click.Path(), default="panels", show_default=True)
@guarded
def simulate(scenario, seed, structure_seed, out):
    """Generate one synthetic panel and export it as CSV with a JSON sidecar."""
    spec = ScenarioSpec.named(scenario)
    panel = simulate_panel(cached_structure(structure_seed, spec), spec, seed)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{scenario}_{seed}.csv"
    write_panel_csv(panel, path, tag_col="cluster")
    meta = {
        "scenario": scenario,
        "rep_seed": seed,
        "structure_seed": structure_seed,
        "n_units": panel.n_units,
        "horizon": panel.horizon,
        "feature_dim": panel.feature_dim,
        "burn_in_end": panel.burn_in_end,
        "cluster_labels": [str(t) for t in panel.unit_tags],
        "factors": np.asarray(panel.factors).tolist(),
    }
    (out / f"{scenario}_{seed}.json").write_text(json.dumps(meta, indent=1) + "\n")
    click.echo(f"wrote {path}")


@main.command()
@experiment_options
@guarded
def run(print_config, **kw):
    """Run one experiment (every grid holds a single value)."""
    cfg = resolve_config(**kw)
    if cfg.sweep_axis:
        raise ConfigError(f"{cfg.sweep_axis} has several values; use `wtqa sweep`")
    if print_config:
        click.echo(cfg.to_ini(), nl=False)
        return
    _finish(cfg)


@main.command()
@click.option("--axis", type=click.Choice(("p", "h", "gamma")), required=True)
@experiment_options
@guarded
def sweep(axis, print_config, **kw):
    """Sweep one of p, h or gamma over its grid (defaults to the standard grid)."""
    if kw.get(axis) is None:
        kw[axis] = ", ".join(repr(v) for v in default_grid(axis))
    if axis == "p" and kw.get("feedback") is None:
        kw["feedback"] = "mcar"
    cfg = resolve_config(**kw)
    if cfg.sweep_axis not in (axis, None):
        raise ConfigError(f"asked to sweep {axis} but {cfg.sweep_axis} also has several values")
    if print_config:
        click.echo(cfg.to_ini(), nl=False)
        return
    _finish(cfg)


@main.command()
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(), help="Directory holding the traces (default: config's).")
@guarded
def report(config_file, out):
    """Recompute tables and figures from saved traces.

    CONFIG_FILE is the ``.ini`` written next to the results.
    """
    cfg = ExperimentConfig.load(config_file)
    if out is not None:
        cfg = config_with(cfg, out=out)
    rows, curves = rows_from_traces(cfg, Path(cfg.out))
    paths = emit_outputs(cfg, rows, curves)
    click.echo(format_summary(cfg, rows))
    click.echo(f"rewrote {len(paths)} files for {stem(cfg)} in {cfg.out}")


@main.command()
@guarded
def selftest():
    """Run the fast invariant suite; exit nonzero on any failure."""
    from wtqa import kernels
    from wtqa.selftest import run_all

    click.echo(f"kernel backend: {kernels.BACKEND}")
    failed = 0
    for name, ok, detail in run_all():
        click.echo(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
        failed += not ok
    if failed:
        _fail("selftest", f"{failed} check(s) failed", EXIT_INTERNAL)


if __name__ == "__main__":
    main()
