"""Similarity weights from running feature means.

Each calibration unit ``k`` gets unnormalized mass
``exp(-D_k / (2 h^2))`` where ``D_k`` is the squared distance between its
running feature mean and the target's, computed on coordinatewise
standardized means and divided by the feature dimension. The target slot
gets mass 1 and the vector is normalized onto the simplex.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

SCALE_FLOOR = 1e-8


def gibbs_map(sq_dists, h: float) -> np.ndarray:
    """Peer coordinates of the Gibbs weight map.

    ``out_k = exp(-a_k / 2h^2) / (1 + sum_j exp(-a_j / 2h^2))``; the
    residual ``1 - sum(out)`` is the target slot.
    """
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    a = np.asarray(sq_dists, dtype=float)
    e = np.exp(-a / (2.0 * h * h))
    return e / (1.0 + e.sum(axis=-1, keepdims=True))


def pooled_scale(calib_means: np.ndarray, target_means: np.ndarray) -> np.ndarray:
    """Cross-unit population sd of each coordinate over calibration units plus one target.

    Returns ``(m, d)``, one row per target, floored at ``SCALE_FLOOR``.
    """
    n = calib_means.shape[0]
    mu = calib_means.mean(axis=0)
    var = calib_means.var(axis=0)
    dev = target_means - mu
    pooled = (n * var + (n / (n + 1.0)) * dev * dev) / (n + 1.0)
    return np.maximum(np.sqrt(pooled), SCALE_FLOOR)


def standardized_sq_distances(calib_means, target_means, scale=None) -> np.ndarray:
    """``(m, N)`` matrix of standardized squared distances divided by ``d``.

    ``scale`` is a fixed ``(d,)`` standardizer; when omitted the current
    cross-unit spread (:func:`pooled_scale`) is used per target.
    """
    calib_means = np.asarray(calib_means, dtype=float)
    target_means = np.atleast_2d(np.asarray(target_means, dtype=float))
    d = calib_means.shape[1]
    if target_means.shape[1] != d:
        raise ValueError("feature dimension mismatch")
    if scale is None:
        scale = pooled_scale(calib_means, target_means)
    else:
        scale = np.broadcast_to(np.maximum(np.asarray(scale, dtype=float), SCALE_FLOOR),
                                target_means.shape)
    inv = 1.0 / scale
    diff = (calib_means[None, :, :] - target_means[:, None, :]) * inv[:, None, :]
    return np.einsum("mnd,mnd->mn", diff, diff) / d


def weights_from_sq_distances(sq_dists, h: float) -> np.ndarray:
    """Full simplex vectors ``(..., N + 1)`` with the target slot last."""
    peers = gibbs_map(sq_dists, h)
    target = 1.0 - peers.sum(axis=-1, keepdims=True)
    return np.concatenate([peers, target], axis=-1)


def kernel_weight_matrix(calib_means, target_means, h: float, scale=None) -> np.ndarray:
    return weights_from_sq_distances(
        standardized_sq_distances(calib_means, target_means, scale), h)


@dataclass
class SpatialState:
    """Running means of the N calibration units (rows ``0..N-1``) and the target (last row)."""

    running_means: np.ndarray
    bandwidth: float
    t_count: int = 0
    standardizer: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.t_count < 0:
            raise ValueError("t_count must be nonnegative")

    @classmethod
    def empty(cls, n_units: int, d: int, bandwidth: float, standardizer=None) -> "SpatialState":
        return cls(np.zeros((n_units, d)), bandwidth, 0, standardizer)

    @property
    def n_calib(self) -> int:
        return self.running_means.shape[0] - 1


def running_mean_step(means: np.ndarray, x: np.ndarray, t: int) -> np.ndarray:
    """``mu_t = (1 - 1/t) mu_{t-1} + x_t / t``."""
    return (1.0 - 1.0 / t) * means + x / t


def update_running_mean(state: SpatialState, x_all) -> SpatialState:
    x = np.asarray(x_all, dtype=float)
    if x.shape != state.running_means.shape:
        raise ValueError(f"expected features of shape {state.running_means.shape}, got {x.shape}")
    t = state.t_count + 1
    return replace(state, running_means=running_mean_step(state.running_means, x, t), t_count=t)


def kernel_weights(state: SpatialState, target: int = -1) -> np.ndarray:
    """Simplex weights over the other units plus the target slot (last).

    Before any round has been absorbed the weights are uniform.
    """
    n = state.running_means.shape[0]
    if state.t_count == 0:
        return np.full(n, 1.0 / n)
    idx = np.arange(n)
    tgt = idx[target]
    peers = np.delete(idx, tgt)
    w = kernel_weight_matrix(state.running_means[peers], state.running_means[tgt],
                             state.bandwidth, state.standardizer)
    return w[0]
