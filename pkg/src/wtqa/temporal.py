"""Adaptive miscoverage level driven by lagged, intermittent feedback.

On a revealed round the level takes the step ``alpha_t = alpha_{t-1} +
gamma (alpha - loss_{t-1})``; otherwise it is carried forward. The audit
functions check the pathwise identities that this recursion satisfies.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np


@dataclass(frozen=True)
class TemporalState:
    alpha_t: float
    alpha_target: float
    gamma: float
    s_count: int = 0
    loss_sum: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha_target < 1:
            raise ValueError("alpha_target must lie in (0, 1)")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    @classmethod
    def start(cls, alpha: float, gamma: float) -> "TemporalState":
        return cls(alpha, alpha, gamma)


def update_level(state: TemporalState, lagged_reveal: bool,
                 lagged_loss: Optional[int] = None) -> TemporalState:
    if not lagged_reveal:
        if lagged_loss is not None:
            raise ValueError("loss supplied for an unrevealed round")
        return state
    if lagged_loss not in (0, 1):
        raise ValueError(f"loss must be 0 or 1, got {lagged_loss!r}")
    return replace(
        state,
        alpha_t=state.alpha_t + state.gamma * (state.alpha_target - lagged_loss),
        s_count=state.s_count + 1,
        loss_sum=state.loss_sum + lagged_loss,
    )


def audit_telescoping(reveals, losses, alpha_final: float, alpha_target: float,
                      gamma: float) -> float:
    """Residual of ``sum R_t (l_t - alpha) = (alpha - alpha_{T+1}) / gamma``."""
    r = np.asarray(reveals, dtype=float)
    loss = np.asarray(losses, dtype=float)
    if r.size == 0:
        return 0.0
    lhs = float(np.sum(r * (loss - alpha_target)))
    return lhs - (alpha_target - alpha_final) / gamma


class BoundCheck(NamedTuple):
    lhs: float
    bound: float
    holds: bool


class NotApplicable(ValueError):
    """The observed-feedback bound needs at least one revealed round."""


def observed_bound(alpha_target: float, gamma: float, s_count: int) -> float:
    return (max(alpha_target, 1.0 - alpha_target) + gamma) / (s_count * gamma)


def audit_observed_bound(reveals, losses, alpha_target: float, gamma: float) -> BoundCheck:
    """``|S_T^{-1} sum R_t l_t - alpha|`` against ``(max(alpha, 1-alpha) + gamma) / (S_T gamma)``."""
    r = np.asarray(reveals, dtype=float)
    loss = np.asarray(losses, dtype=float)
    s = int(r.sum())
    if s == 0:
        raise NotApplicable("no revealed rounds")
    lhs = abs(float(np.sum(r * loss)) / s - alpha_target)
    bound = observed_bound(alpha_target, gamma, s)
    return BoundCheck(lhs, bound, lhs <= bound)
