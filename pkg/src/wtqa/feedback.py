"""Target-feedback reveal schedules, shared by all test units at each round."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from wtqa.rng import make_rng

DIRECTIONS = ("hard_visible", "easy_visible")


@dataclass(frozen=True)
class FeedbackSchedule:
    """Reveal indicators ``R_1 .. R_T`` over the conformal period.

    ``probs`` holds the per-round reveal probabilities when the schedule was
    drawn from them (informative mechanism); ``z`` the difficulty ranks.
    """

    mode: str
    reveals: np.ndarray
    seed: Optional[int] = None
    p: Optional[float] = None
    probs: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None

    def __post_init__(self):
        r = np.asarray(self.reveals).astype(np.int8)
        if r.ndim != 1 or not np.isin(r, (0, 1)).all():
            raise ValueError("reveals must be a 0/1 sequence")
        object.__setattr__(self, "reveals", r)

    def __len__(self):
        return self.reveals.size

    @property
    def rate(self) -> float:
        return float(self.reveals.mean()) if self.reveals.size else 0.0


def full_schedule(horizon: int) -> FeedbackSchedule:
    return FeedbackSchedule("full", np.ones(horizon, dtype=np.int8), p=1.0)


def reveal_uniforms(horizon: int, seed: int) -> np.ndarray:
    """One uniform per round; thresholding at ``p`` couples schedules across ``p``."""
    return make_rng(seed, "feedback", "mcar").random(horizon)


def mcar_schedule(p: float, horizon: int, seed: int) -> FeedbackSchedule:
    """``R_t = 1[u_t < p]``; i.i.d. Bernoulli(p) and monotone in ``p`` for a fixed seed."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    u = reveal_uniforms(horizon, seed)
    return FeedbackSchedule("mcar", (u < p).astype(np.int8), seed=seed, p=float(p))


def rank_to_z(values) -> np.ndarray:
    """Centered ranks ``2 (rank - 1) / (n - 1) - 1`` with average ranks for ties."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n == 0:
        raise ValueError("empty sequence")
    if n == 1:
        return np.zeros(1)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(n)
    sv = v[order]
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return 2.0 * (ranks - 1.0) / (n - 1.0) - 1.0


def sigmoid(u):
    return 1.0 / (1.0 + np.exp(-np.asarray(u, dtype=float)))


def informative_schedule(difficulties, direction: str, seed: int) -> FeedbackSchedule:
    """Reveal with probability ``sigmoid(+-2 z_t)`` where ``z_t`` ranks round difficulty.

    ``hard_visible`` favours revealing difficult rounds, ``easy_visible``
    favours hiding them.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    d = np.asarray(difficulties, dtype=float)
    if d.size == 0:
        raise ValueError("empty difficulty sequence")
    z = rank_to_z(d)
    sign = 1.0 if direction == "hard_visible" else -1.0
    probs = sigmoid(sign * 2.0 * z)
    u = make_rng(seed, "feedback", "informative", direction).random(d.size)
    return FeedbackSchedule(direction, (u < probs).astype(np.int8), seed=seed,
                            probs=probs, z=z)


def round_difficulty(abs_resid: np.ndarray) -> np.ndarray:
    """Mean absolute test residual per round from a ``(n_test, T)`` matrix."""
    return np.asarray(abs_resid, dtype=float).mean(axis=0)
