"""Drive methods over a panel's conformal period and collect traces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from wtqa.metrics import MetricsReport, coverage_stats
from wtqa.methods import BurnIn, MethodConfig, make_method, raw_cover
from wtqa.panel import Panel, UnitSplit, iter_panel_rounds
from wtqa.predictor import Predictor, fit_ridge


@dataclass
class Trace:
    """Per-target, per-round record of one method's run; arrays are ``(n_targets, T)``."""

    method: str
    target_ids: np.ndarray
    reveals: np.ndarray
    y: np.ndarray
    pred: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    level: np.ndarray
    provenance: np.ndarray
    raw: np.ndarray
    alpha_t: np.ndarray
    alpha_final: np.ndarray
    online_loss: np.ndarray
    adaptive: bool = False

    @property
    def covered(self) -> np.ndarray:
        return (self.lo <= self.y) & (self.y <= self.hi)

    @property
    def covered_raw(self) -> np.ndarray:
        """Coverage under the unprojected sets (deployed interval where no raw threshold exists)."""
        rc = raw_cover(self.raw, self.pred, self.y)
        return np.where(np.isnan(self.raw), self.covered, rc)

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    def metrics(self, frac: float = 0.1) -> MetricsReport:
        return coverage_stats(self.covered, self.widths,
                              self.alpha_t if self.adaptive else None,
                              self.provenance, frac)


def fit_burnin_predictor(panel: Panel, split: UnitSplit, lam: float, mode: str) -> Predictor:
    """Ridge fit on calibration units' burn-in rows only."""
    calib = np.asarray(split.calib_ids)
    b = panel.burn_in_end
    X = panel.features[calib, :b].reshape(-1, panel.feature_dim)
    y = panel.outcomes[calib, :b].ravel()
    F = None
    if mode == "synthetic_factor":
        if panel.factors is None:
            raise ValueError("synthetic_factor predictor needs a panel with factors")
        F = np.broadcast_to(panel.factors[None, :b], (calib.size, b, panel.factors.shape[1]))
        F = F.reshape(-1, panel.factors.shape[1])
    return fit_ridge(X, y, lam, mode, F)


def predict_panel(panel: Panel, predictor: Predictor) -> np.ndarray:
    return predictor.predict_many(panel.features, panel.factors)


def burn_in_history(panel: Panel, split: UnitSplit, predictions: np.ndarray) -> BurnIn:
    calib = np.asarray(split.calib_ids)
    test = np.asarray(split.test_ids)
    b = panel.burn_in_end
    return BurnIn(
        calib_x=panel.features[calib, :b],
        calib_resid=panel.outcomes[calib, :b] - predictions[calib, :b],
        target_x=panel.features[test, :b] if test.size else None,
    )


def run_methods(panel: Panel, split: UnitSplit, predictions: np.ndarray, reveals,
                configs: Sequence[MethodConfig], burn: Optional[BurnIn] = None) -> dict:
    """Run every configured method over the conformal period in lockstep.

    Returns ``{kind: Trace}``. After the last round, the last round's
    feedback (if revealed) is delivered so ``alpha_final`` is the level the
    next round would use.
    """
    reveals = np.asarray(reveals, dtype=np.int8)
    T = panel.n_rounds
    if reveals.size != T:
        raise ValueError(f"schedule length {reveals.size} != conformal period {T}")
    test = np.asarray(split.test_ids)
    m, n, d = test.size, len(split.calib_ids), panel.feature_dim
    if m == 0:
        raise ValueError("split has no test units")
    if burn is None:
        burn = burn_in_history(panel, split, predictions)
    engines = []
    for cfg in configs:
        eng = make_method(cfg, n, m, d)
        eng.prime(burn)
        engines.append(eng)
    shape = (m, T)
    buf = {cfg.kind: {k: np.empty(shape) for k in ("lo", "hi", "level", "raw", "alpha_t")}
           for cfg in configs}
    for cfg in configs:
        buf[cfg.kind]["provenance"] = np.empty(shape, dtype=np.int8)
        buf[cfg.kind]["loss"] = np.full(shape, np.nan)

    for rnd in iter_panel_rounds(panel, split, reveals, predictions):
        k = rnd.t - 1
        for cfg, eng in zip(configs, engines):
            out = eng.step(rnd)
            b = buf[cfg.kind]
            if rnd.lagged_reveal:
                b["loss"][:, k - 1] = eng.last_loss
            b["lo"][:, k] = out.lo
            b["hi"][:, k] = out.hi
            b["level"][:, k] = out.level
            b["raw"][:, k] = out.raw
            b["alpha_t"][:, k] = out.alpha_t
            b["provenance"][:, k] = out.provenance

    last_col = panel.column(T)
    traces = {}
    for cfg, eng in zip(configs, engines):
        b = buf[cfg.kind]
        if reveals[-1]:
            b["loss"][:, T - 1] = eng.settle(panel.outcomes[test, last_col])
        traces[cfg.kind] = Trace(
            method=cfg.kind,
            target_ids=test,
            reveals=reveals,
            y=panel.outcomes[test, panel.burn_in_end:],
            pred=predictions[test, panel.burn_in_end:],
            lo=b["lo"], hi=b["hi"], level=b["level"], provenance=b["provenance"],
            raw=b["raw"], alpha_t=b["alpha_t"], alpha_final=eng.alpha.copy(),
            online_loss=b["loss"], adaptive=eng.adaptive,
        )
    return traces
