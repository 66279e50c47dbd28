"""The six online interval methods.

All methods process a :class:`~wtqa.panel.PanelRound` for every target at
once; each target still has its own state (its own rows in the state
arrays), and nothing a target does affects another target's intervals
except in LPCI-lite, whose residual quantile model is shared across the
panel by design.

Round order for the weighted-quantile family follows the online loop:

1. settle lagged feedback and take the level step (adaptive variants);
2. score the calibration slice;
3. weighted quantile at ``1 - alpha_t`` with the current weights;
4. deploy a finite interval;
5. absorb this round's features into the running means (kernel variants).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from wtqa import kernels
from wtqa.conformal import LEVEL_CEIL, LEVEL_FLOOR, PredictionRecord, Provenance
from wtqa.panel import PanelRound, RoundBatch
from wtqa.predictor import fit_pinball
from wtqa.spatial import kernel_weight_matrix, running_mean_step

METHODS = ("split_cp", "tqa_b", "lpci_lite", "tqa_only", "w_only", "wtqa")

LABELS = {
    "split_cp": "Split CP",
    "tqa_b": "TQA-B",
    "lpci_lite": "LPCI-lite",
    "tqa_only": "TQA-only",
    "w_only": "W-only",
    "wtqa": "W-TQA",
}


@dataclass(frozen=True)
class MethodConfig:
    kind: str
    alpha: float = 0.10
    h: float = 0.6
    gamma: float = 0.01
    standardizer: str = "current"
    tqa_b_decay: float = 0.8
    tqa_b_budget: Optional[float] = None
    tqa_b_clip: tuple = (0.01, 0.999)
    lpci_refit_every: int = 10
    lpci_window: int = 30
    lpci_ewm_alpha: float = 0.2
    lpci_lags: int = 6
    lpci_beta: Optional[float] = None
    lpci_iters: int = 300
    lpci_step: float = 0.05
    lpci_l2: float = 1e-4
    lpci_max_rows: int = 25_000

    def __post_init__(self):
        if self.kind not in METHODS:
            raise ValueError(f"unknown method {self.kind!r}; expected one of {METHODS}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.h <= 0 or self.gamma <= 0:
            raise ValueError("h and gamma must be positive")
        if self.standardizer not in ("current", "burnin"):
            raise ValueError("standardizer must be 'current' or 'burnin'")

    @property
    def budget(self) -> float:
        return self.alpha / 2 if self.tqa_b_budget is None else self.tqa_b_budget

    @property
    def beta(self) -> float:
        return self.alpha / 2 if self.lpci_beta is None else self.lpci_beta


@dataclass
class BurnIn:
    """Calibration-unit burn-in history: features ``(N, T_b, d)`` and signed residuals ``(N, T_b)``."""

    calib_x: np.ndarray
    calib_resid: np.ndarray
    target_x: Optional[np.ndarray] = None


@dataclass
class StepOutput:
    lo: np.ndarray
    hi: np.ndarray
    level: np.ndarray          # deployed miscoverage level
    provenance: np.ndarray     # int8 Provenance codes of the deployed threshold
    raw: np.ndarray            # raw threshold (may be +-inf); nan for non-threshold intervals
    alpha_t: np.ndarray        # level in force before projection


def _uniform(m: int, n: int) -> np.ndarray:
    return np.full((m, n + 1), 1.0 / (n + 1))


def deploy_batch(scores, weights, alpha_t, raw, codes):
    """Vectorized finite deployment: clamp levels, recompute there, sentinel -> max score."""
    level = np.clip(alpha_t, LEVEL_FLOOR, LEVEL_CEIL)
    half = raw.copy()
    prov = codes.copy()
    moved = level != alpha_t
    if moved.any():
        v, c = kernels.weighted_quantile_batch(scores, weights[moved], 1.0 - level[moved])
        half[moved] = v
        prov[moved] = c
    fallback = prov != Provenance.FINITE
    half[fallback] = scores.max()
    prov[fallback] = Provenance.SENTINEL_FALLBACK
    return level, half, prov


def raw_cover(raw, center, y):
    """Coverage under the unprojected sets; ``-inf`` is empty and ``+inf`` is the line."""
    with np.errstate(invalid="ignore"):
        inside = np.abs(y - center) <= raw
    return np.where(raw == np.inf, True, np.where(raw == -np.inf, False, inside))


class OnlineMethod:
    """Shared bookkeeping: lagged feedback settlement and per-round outputs."""

    adaptive = False

    def __init__(self, cfg: MethodConfig, n_calib: int, n_targets: int, feature_dim: int):
        self.cfg = cfg
        self.n_calib = n_calib
        self.n_targets = n_targets
        self.feature_dim = feature_dim
        self.alpha = np.full(n_targets, cfg.alpha)
        self.s_count = np.zeros(n_targets, dtype=int)
        self.loss_sum = np.zeros(n_targets)
        self.t = 0
        self._last: Optional[StepOutput] = None
        self._last_pred: Optional[np.ndarray] = None
        self._settled = True
        self.last_loss: Optional[np.ndarray] = None

    @property
    def name(self) -> str:
        return self.cfg.kind

    def prime(self, burn: BurnIn) -> None:
        pass

    def settle(self, labels) -> np.ndarray:
        """Absorb the revealed labels of the previous round; returns the raw losses."""
        if self._last is None or self._settled:
            raise RuntimeError("no unsettled round to receive feedback")
        y = np.asarray(labels, dtype=float)
        loss = self._losses(y)
        if self.adaptive:
            self.alpha = self.alpha + self.cfg.gamma * (self.cfg.alpha - loss)
        self.s_count += 1
        self.loss_sum += loss
        self._absorb_target(y)
        self._settled = True
        self.last_loss = loss
        return loss

    def _losses(self, y):
        last = self._last
        if np.isnan(last.raw).any():
            covered = (last.lo <= y) & (y <= last.hi)
        else:
            covered = raw_cover(last.raw, self._last_pred, y)
        return (~covered).astype(float)

    def _absorb_target(self, y) -> None:
        pass

    def step(self, rnd: PanelRound) -> StepOutput:
        if rnd.lagged_reveal and not self._settled:
            self.settle(rnd.lagged_labels)
        self.t += 1
        out = self._interval(rnd)
        self._last = out
        self._last_pred = np.asarray(rnd.target_pred, dtype=float)
        self._settled = False
        return out

    def _interval(self, rnd: PanelRound) -> StepOutput:
        raise NotImplementedError

    def _split_cp(self, scores, pred, alpha):
        """Uniform-weight split conformal at per-target levels ``alpha`` (finite deployment)."""
        m = pred.shape[0]
        w = _uniform(m, scores.size)
        raw, codes = kernels.weighted_quantile_batch(scores, w, 1.0 - alpha)
        level, half, prov = deploy_batch(scores, w, alpha, raw, codes)
        return StepOutput(pred - half, pred + half, level, prov, raw, alpha.copy())


class WeightedQuantileMethod(OnlineMethod):
    """W-TQA and its ablations: optional kernel weights, optional adaptive level."""

    def __init__(self, cfg, n_calib, n_targets, feature_dim):
        super().__init__(cfg, n_calib, n_targets, feature_dim)
        self.use_kernel = cfg.kind in ("wtqa", "w_only")
        self.adaptive = cfg.kind in ("wtqa", "tqa_only")
        self.calib_means = np.zeros((n_calib, feature_dim))
        self.target_means = np.zeros((n_targets, feature_dim))
        self.t_count = 0
        self.scale = None

    def prime(self, burn: BurnIn) -> None:
        if self.cfg.standardizer == "burnin" and self.use_kernel:
            means = burn.calib_x.mean(axis=1)
            if burn.target_x is not None:
                means = np.concatenate([means, burn.target_x.mean(axis=1)])
            self.scale = means.std(axis=0)

    def weights(self) -> np.ndarray:
        m, n = self.n_targets, self.n_calib
        if not self.use_kernel or self.t_count == 0:
            return _uniform(m, n)
        return kernel_weight_matrix(self.calib_means, self.target_means, self.cfg.h, self.scale)

    def _interval(self, rnd):
        scores = np.abs(rnd.calib_y - rnd.calib_pred)
        pred = np.asarray(rnd.target_pred, dtype=float)
        w = self.weights()
        alpha_t = self.alpha.copy()
        raw, codes = kernels.weighted_quantile_batch(scores, w, 1.0 - alpha_t)
        level, half, prov = deploy_batch(scores, w, alpha_t, raw, codes)
        if self.use_kernel:
            self.t_count += 1
            self.calib_means = running_mean_step(self.calib_means, rnd.calib_x, self.t_count)
            self.target_means = running_mean_step(self.target_means, rnd.target_x, self.t_count)
        self.last_weights = w
        return StepOutput(pred - half, pred + half, level, prov, raw, alpha_t)


class TQABudgeted(OnlineMethod):
    """Budgeted level from the target's predicted residual rank.

    Each unit keeps an exponentially decayed mean absolute residual. The
    target's rank among calibration units ``r`` maps to the queried level
    ``clip(alpha + b (1 - 2 r), 0.01, 0.999)``; split conformal follows.
    """

    def __init__(self, cfg, n_calib, n_targets, feature_dim):
        super().__init__(cfg, n_calib, n_targets, feature_dim)
        self.m_calib = np.full(n_calib, np.nan)
        self.m_target = np.full(n_targets, np.nan)
        self.target_seeded = np.zeros(n_targets, dtype=bool)

    def _decay(self, m, r):
        lam = self.cfg.tqa_b_decay
        return np.where(np.isnan(m), r, lam * m + (1.0 - lam) * r)

    def prime(self, burn: BurnIn) -> None:
        for col in np.abs(burn.calib_resid).T:
            self.m_calib = self._decay(self.m_calib, col)
        self._prior()

    def _prior(self):
        if not np.isnan(self.m_calib).all():
            self.m_target[~self.target_seeded] = np.nanmedian(self.m_calib)

    def _absorb_target(self, y):
        r = np.abs(y - self._last_pred)
        self.m_target = np.where(self.target_seeded, self._decay(self.m_target, r), r)
        self.target_seeded[:] = True

    def rank(self) -> np.ndarray:
        return (self.m_calib[None, :] <= self.m_target[:, None]).mean(axis=1)

    def _interval(self, rnd):
        scores = np.abs(rnd.calib_y - rnd.calib_pred)
        self.m_calib = self._decay(self.m_calib, scores)
        if np.isnan(self.m_target).any():
            self._prior()
        lo, hi = self.cfg.tqa_b_clip
        a_q = np.clip(self.cfg.alpha + self.cfg.budget * (1.0 - 2.0 * self.rank()), lo, hi)
        return self._split_cp(scores, np.asarray(rnd.target_pred, dtype=float), a_q)


def ewma_path(resid: np.ndarray, a: float) -> np.ndarray:
    """EWMA along axis 0 with ``E_0 = r_0`` and ``E_s = a r_s + (1 - a) E_{s-1}``."""
    out = np.empty_like(resid)
    if resid.shape[0] == 0:
        return out
    out[0] = resid[0]
    for s in range(1, resid.shape[0]):
        out[s] = a * resid[s] + (1.0 - a) * out[s - 1]
    return out


def lag_rows(resid: np.ndarray, ewm: np.ndarray, idx: np.ndarray, lags: int, window: int):
    """Training rows for history positions ``idx`` (rows = positions x units).

    Features are ``E_{s-1} .. E_{s-lags}``; both they and the response are
    centered by the unit's mean residual over ``[s - window, s)``.
    """
    csum = np.concatenate([np.zeros((1,) + resid.shape[1:]), np.cumsum(resid, axis=0)])
    feats, resp = [], []
    for s in idx:
        lo = max(0, s - window)
        rm = (csum[s] - csum[lo]) / (s - lo)
        f = np.stack([ewm[s - k] for k in range(1, lags + 1)], axis=-1) - rm[..., None]
        feats.append(f)
        resp.append(resid[s] - rm)
    if not feats:
        return np.empty((0, lags)), np.empty(0)
    return np.concatenate(feats).reshape(-1, lags), np.concatenate(resp).ravel()


class LPCILite(OnlineMethod):
    """Lagged-residual quantile regression with linear pinball fits.

    The residual model is shared across the panel and refit every
    ``lpci_refit_every`` rounds on a rolling window; targets use the Split
    CP interval until they have ``lpci_lags`` revealed residuals.
    """

    def __init__(self, cfg, n_calib, n_targets, feature_dim):
        super().__init__(cfg, n_calib, n_targets, feature_dim)
        self.cal_resid = np.empty((0, n_calib))
        self.cal_time = np.empty(0, dtype=int)
        self.tgt_resid = [[] for _ in range(n_targets)]
        self.tgt_time = [[] for _ in range(n_targets)]
        self.models = None
        self.n_fits = 0

    def prime(self, burn: BurnIn) -> None:
        r = np.asarray(burn.calib_resid, dtype=float).T      # (T_b, N)
        self.cal_resid = r.copy()
        self.cal_time = np.arange(-r.shape[0] + 1, 1)        # burn-in ends at round 0

    def _absorb_target(self, y):
        r = y - self._last_pred
        for j in range(self.n_targets):
            self.tgt_resid[j].append(float(r[j]))
            self.tgt_time[j].append(self.t)

    def _training_rows(self):
        cfg = self.cfg
        lags, window = cfg.lpci_lags, cfg.lpci_window
        ewm = ewma_path(self.cal_resid, cfg.lpci_ewm_alpha)
        cutoff = self.t - window
        idx = np.nonzero(self.cal_time > cutoff)[0]
        idx = idx[idx >= lags]
        Xc, yc = lag_rows(self.cal_resid, ewm, idx, lags, window)
        Xs, ys = [Xc], [yc]
        for j in range(self.n_targets):
            res = np.asarray(self.tgt_resid[j])
            if res.size <= lags:
                continue
            tt = np.asarray(self.tgt_time[j])
            tidx = np.nonzero(tt > cutoff)[0]
            tidx = tidx[tidx >= lags]
            Xt, yt = lag_rows(res[:, None], ewma_path(res[:, None], cfg.lpci_ewm_alpha),
                              tidx, lags, window)
            Xs.append(Xt)
            ys.append(yt)
        return np.concatenate(Xs), np.concatenate(ys)

    def _refit(self):
        cfg = self.cfg
        X, y = self._training_rows()
        if y.size == 0:
            self.models = None
            return
        kw = dict(iters=cfg.lpci_iters, step=cfg.lpci_step, l2=cfg.lpci_l2,
                  max_rows=cfg.lpci_max_rows)
        self.models = (fit_pinball(X, y, cfg.beta, **kw),
                       fit_pinball(X, y, 1.0 - cfg.alpha + cfg.beta, **kw))
        self.n_fits += 1

    def _target_features(self, j):
        cfg = self.cfg
        res = np.asarray(self.tgt_resid[j])
        ewm = ewma_path(res, cfg.lpci_ewm_alpha)
        s = res.size
        rm = res[max(0, s - cfg.lpci_window):].mean()
        f = np.array([ewm[s - k] for k in range(1, cfg.lpci_lags + 1)]) - rm
        return f, rm

    def _interval(self, rnd):
        cfg = self.cfg
        scores = np.abs(rnd.calib_y - rnd.calib_pred)
        self.cal_resid = np.vstack([self.cal_resid, rnd.calib_y - rnd.calib_pred])
        self.cal_time = np.append(self.cal_time, self.t)
        if (self.t - 1) % cfg.lpci_refit_every == 0:
            self._refit()
        pred = np.asarray(rnd.target_pred, dtype=float)
        out = self._split_cp(scores, pred, np.full(self.n_targets, cfg.alpha))
        if self.models is None:
            return out
        lo_m, hi_m = self.models
        for j in range(self.n_targets):
            if len(self.tgt_resid[j]) < cfg.lpci_lags:
                continue
            f, rm = self._target_features(j)
            a = pred[j] + float(lo_m.predict(f)) + rm
            b = pred[j] + float(hi_m.predict(f)) + rm
            out.lo[j], out.hi[j] = min(a, b), max(a, b)
            out.raw[j] = np.nan
            out.provenance[j] = Provenance.FINITE
        return out


_CLASSES = {
    "split_cp": WeightedQuantileMethod,
    "w_only": WeightedQuantileMethod,
    "tqa_only": WeightedQuantileMethod,
    "wtqa": WeightedQuantileMethod,
    "tqa_b": TQABudgeted,
    "lpci_lite": LPCILite,
}


def make_method(cfg: MethodConfig, n_calib: int, n_targets: int, feature_dim: int) -> OnlineMethod:
    return _CLASSES[cfg.kind](cfg, n_calib, n_targets, feature_dim)


# ---------------------------------------------------------------------------
# single-target interface

@dataclass
class MethodState:
    """One method's state for a single target, driven by :class:`RoundBatch` inputs."""

    cfg: MethodConfig
    engine: OnlineMethod
    last_record: Optional[PredictionRecord] = None
    history: list = field(default_factory=list)

    @classmethod
    def start(cls, cfg: MethodConfig, n_calib: int, feature_dim: int,
              burn: Optional[BurnIn] = None) -> "MethodState":
        engine = make_method(cfg, n_calib, 1, feature_dim)
        if burn is not None:
            engine.prime(burn)
        return cls(cfg, engine)

    @property
    def alpha_t(self) -> float:
        return float(self.engine.alpha[0])


def _record(out: StepOutput) -> PredictionRecord:
    return PredictionRecord(float(out.lo[0]), float(out.hi[0]), float(out.level[0]),
                            Provenance(int(out.provenance[0])))


def method_step(state: MethodState, cfg: MethodConfig, batch: RoundBatch, predictor):
    """Run one round for one target; returns ``(record, state)``."""
    if cfg != state.cfg:
        raise ValueError("config does not match the state's method")
    f = batch.factor
    calib_pred = predictor.predict_many(batch.calib_x, f)
    target_pred = predictor.predict_many(np.asarray(batch.target_x)[None, :], f)
    rnd = PanelRound(
        t=batch.t,
        calib_x=batch.calib_x,
        calib_y=batch.calib_y,
        calib_pred=calib_pred,
        target_x=np.asarray(batch.target_x)[None, :],
        target_pred=target_pred,
        lagged_reveal=batch.lagged_reveal,
        lagged_labels=None if batch.lagged_label is None else np.array([batch.lagged_label]),
        factor=f,
    )
    out = state.engine.step(rnd)
    rec = _record(out)
    state.last_record = rec
    state.history.append(rec)
    return rec, state


def settle_feedback(state: MethodState, cfg: MethodConfig, record: PredictionRecord,
                    revealed_label: Optional[float]) -> MethodState:
    """Deliver (or withhold) the label for ``record``, the last deployed round."""
    if record is not state.last_record:
        raise ValueError("feedback must settle the most recent record")
    if revealed_label is not None:
        state.engine.settle(np.array([revealed_label]))
    return state


def tqa_b_step(state, cfg, batch, predictor):
    if cfg.kind != "tqa_b":
        raise ValueError("tqa_b_step needs a tqa_b config")
    return method_step(state, cfg, batch, predictor)


def lpci_lite_step(state, cfg, batch, predictor):
    if cfg.kind != "lpci_lite":
        raise ValueError("lpci_lite_step needs an lpci_lite config")
    return method_step(state, cfg, batch, predictor)


def with_kind(cfg: MethodConfig, kind: str) -> MethodConfig:
    return replace(cfg, kind=kind)
