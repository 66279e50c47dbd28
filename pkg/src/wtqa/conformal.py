"""Scores, the sentinel-augmented weighted quantile, and interval deployment."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from wtqa import kernels

SIMPLEX_TOL = 1e-12
RENORM_TOL = 1e-9

LEVEL_FLOOR = 0.01
LEVEL_CEIL = 0.99


class Provenance(enum.IntEnum):
    """Where a threshold came from. Values match the kernel codes."""

    FINITE = kernels.FINITE
    SENTINEL_FALLBACK = kernels.SENTINEL
    EMPTY_SET = kernels.EMPTY
    FULL_LINE = kernels.FULL


@dataclass(frozen=True)
class AugmentedScores:
    """Calibration scores with the +inf sentinel standing in for the target."""

    calib_scores: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.calib_scores, dtype=float)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("need at least one calibration score")
        if np.isnan(s).any():
            raise ValueError("NaN in calibration scores")
        object.__setattr__(self, "calib_scores", s)

    @property
    def values(self) -> np.ndarray:
        return np.append(self.calib_scores, np.inf)

    def __len__(self):
        return self.calib_scores.size + 1


@dataclass(frozen=True)
class Threshold:
    value: float
    provenance: Provenance

    @property
    def is_finite(self) -> bool:
        return self.provenance == Provenance.FINITE


class Deployed(NamedTuple):
    deployed_level: float
    half_width: float
    provenance: Provenance


@dataclass
class PredictionRecord:
    """A deployed interval ``[lo, hi]``.

    Symmetric methods have ``lo = center - half_width``; LPCI-lite intervals
    are asymmetric around the point prediction, so ``center`` is the midpoint.
    ``covered`` is filled offline once the label is known.
    """

    lo: float
    hi: float
    deployed_level: float
    provenance: Provenance = Provenance.FINITE
    covered: Optional[bool] = None

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, y: float) -> bool:
        return self.lo <= y <= self.hi

    def resolve(self, y: float) -> bool:
        self.covered = self.contains(y)
        return self.covered


def abs_residual_score(x, y, predictor, f=None) -> float:
    """``|y - f_hat(x)|``; ``f`` is the factor vector for factor-form predictors."""
    return abs(float(y) - predictor.predict(x, f))


def check_simplex(weights) -> np.ndarray:
    """Validate a weight vector against the simplex, renormalizing tiny drift."""
    w = np.asarray(weights, dtype=float)
    if np.isnan(w).any():
        raise ValueError("NaN in weights")
    if (w < 0).any():
        raise ValueError("negative weight")
    total = w.sum(axis=-1)
    dev = np.abs(total - 1.0)
    if np.any(dev > RENORM_TOL):
        raise ValueError(f"weights sum to {total!r}, not 1")
    if np.any(dev > SIMPLEX_TOL):
        w = w / np.expand_dims(total, -1)
    return w


def weighted_quantile(scores, weights, level: float) -> Threshold:
    """``inf{q : sum_k w_k 1[s_k <= q] >= level}`` over scores plus sentinel.

    Parameters
    ----------
    scores : AugmentedScores or array-like of the N calibration scores
    weights : array-like of length N + 1, last entry is the sentinel's mass
    level : float
        Target cumulative mass, ``1 - alpha_t``. Non-positive levels give the
        empty set (``-inf``), levels above one the full line (``+inf``).
    """
    if not isinstance(scores, AugmentedScores):
        scores = AugmentedScores(scores)
    if math.isnan(level):
        raise ValueError("NaN level")
    w = check_simplex(weights)
    if w.shape != (len(scores),):
        raise ValueError(f"expected {len(scores)} weights, got {w.shape}")
    value, code = kernels.weighted_quantile(scores.calib_scores, w, level)
    return Threshold(float(value), Provenance(code))


def clamp_level(alpha_t):
    return np.clip(alpha_t, LEVEL_FLOOR, LEVEL_CEIL)


def deploy_finite(raw: Threshold, calib_scores, alpha_t: float, weights=None) -> Deployed:
    """Finite deployment of a raw threshold.

    The level is projected to ``[0.01, 0.99]`` and the quantile recomputed
    there; a sentinel selection deploys the largest calibration score. With
    ``weights`` omitted the uniform weights over N + 1 slots are used.
    """
    s = np.asarray(calib_scores, dtype=float)
    if s.size == 0:
        raise ValueError("need at least one calibration score")
    level = float(clamp_level(alpha_t))
    th = raw
    if level != alpha_t:
        if weights is None:
            weights = np.full(s.size + 1, 1.0 / (s.size + 1))
        th = weighted_quantile(s, weights, 1.0 - level)
    if th.is_finite:
        return Deployed(level, th.value, Provenance.FINITE)
    return Deployed(level, float(s.max()), Provenance.SENTINEL_FALLBACK)


def build_record(center: float, deployed: Deployed) -> PredictionRecord:
    hw = deployed.half_width
    return PredictionRecord(center - hw, center + hw, deployed.deployed_level,
                            deployed.provenance)


def raw_covers(raw_value: float, center: float, y: float) -> bool:
    """Membership under the unprojected set: ``-inf`` is empty, ``+inf`` is R."""
    if raw_value == -np.inf:
        return False
    if raw_value == np.inf:
        return True
    return abs(y - center) <= raw_value
