import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wtqa.engine import burn_in_history, fit_burnin_predictor, predict_panel  # noqa: E402
from wtqa.panel import random_unit_split  # noqa: E402
from wtqa.synth import ScenarioSpec, gaussian_panel, make_structure, simulate_panel  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def gaussian_setup():
    """Small exchangeable panel with a split and realdata-mode predictions."""
    panel = gaussian_panel(48, 40, feature_dim=4, burn_in=12, seed=7)
    split = random_unit_split(panel, 40, 8, seed=7)
    pred = fit_burnin_predictor(panel, split, 1.0, "realdata")
    preds = predict_panel(panel, pred)
    return panel, split, preds


@pytest.fixture(scope="session")
def tiny_spec():
    return ScenarioSpec.named("hard", n_units=60, feature_dim=12, horizon=34, burn_in=12)


@pytest.fixture(scope="session")
def tiny_synthetic(tiny_spec):
    """Two-cluster panel small enough for per-test use; minority units are the targets."""
    templates = make_structure(3, tiny_spec)
    panel = simulate_panel(templates, tiny_spec, 11)
    n_b = int((panel.unit_tags == "B").sum())
    split = random_unit_split(panel, panel.n_units - n_b // 2, n_b // 2, seed=11,
                              always_calib_tag="A")
    pred = fit_burnin_predictor(panel, split, 10.0, "synthetic_factor")
    preds = predict_panel(panel, pred)
    return panel, split, preds, burn_in_history(panel, split, preds)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
