"""Coverage and width summaries of deployed intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from wtqa.conformal import LEVEL_CEIL, LEVEL_FLOOR, Provenance

SCALAR_FIELDS = ("avg_coverage", "tail_coverage", "avg_width", "width_cov",
                 "lower_boundary_rate", "upper_boundary_rate", "sentinel_fallback_rate")


def tail_coverage(per_unit_cov, frac: float = 0.1) -> float:
    """Mean of the worst ``ceil(frac * n)`` per-unit coverages."""
    c = np.asarray(per_unit_cov, dtype=float)
    if c.size == 0:
        raise ValueError("no units")
    if not 0 < frac <= 1:
        raise ValueError("frac must lie in (0, 1]")
    k = math.ceil(frac * c.size - 1e-9)
    return float(np.sort(c)[:k].mean())


def width_cov(widths) -> float:
    """Population sd over mean of the realized widths."""
    w = np.asarray(widths, dtype=float).ravel()
    mean = w.mean()
    if not mean > 0:
        raise ValueError("width CoV needs a positive mean width")
    return float(w.std() / mean)


@dataclass
class MetricsReport:
    avg_coverage: float
    tail_coverage: float
    avg_width: float
    width_cov: float
    lower_boundary_rate: float
    upper_boundary_rate: float
    sentinel_fallback_rate: float
    per_unit_coverage: np.ndarray = field(repr=False)
    cumulative_tail_curve: np.ndarray = field(repr=False)

    def scalars(self) -> dict:
        return {k: getattr(self, k) for k in SCALAR_FIELDS}


def cumulative_tail_curve(covered, frac: float = 0.1) -> np.ndarray:
    """Tail coverage over rounds ``1..tau`` for every prefix ``tau``."""
    c = np.asarray(covered, dtype=float)
    csum = np.cumsum(c, axis=1)
    rounds = np.arange(1, c.shape[1] + 1)
    return np.array([tail_coverage(csum[:, k] / rounds[k], frac) for k in range(c.shape[1])])


def coverage_stats(covered, widths, alpha_t=None, provenance=None,
                   frac: float = 0.1) -> MetricsReport:
    """Summarize a ``(n_units, T)`` trace of resolved coverage flags and widths.

    ``alpha_t`` (the level in force before projection) feeds the boundary
    rates; ``provenance`` the sentinel-fallback rate.
    """
    cov = np.asarray(covered)
    if cov.dtype == object or (cov.dtype.kind == "f" and np.isnan(cov).any()):
        raise ValueError("unresolved coverage flags")
    cov = cov.astype(float)
    if cov.ndim != 2 or cov.size == 0:
        raise ValueError("coverage trace must be a nonempty (n_units, T) array")
    w = np.asarray(widths, dtype=float)
    per_unit = cov.mean(axis=1)
    lower = upper = 0.0
    if alpha_t is not None:
        a = np.asarray(alpha_t, dtype=float)
        lower = float((a < LEVEL_FLOOR).mean())
        upper = float((a > LEVEL_CEIL).mean())
    sentinel = 0.0
    if provenance is not None:
        sentinel = float((np.asarray(provenance) == Provenance.SENTINEL_FALLBACK).mean())
    return MetricsReport(
        avg_coverage=float(cov.mean()),
        tail_coverage=tail_coverage(per_unit, frac),
        avg_width=float(w.mean()),
        width_cov=width_cov(w),
        lower_boundary_rate=lower,
        upper_boundary_rate=upper,
        sentinel_fallback_rate=sentinel,
        per_unit_coverage=per_unit,
        cumulative_tail_curve=cumulative_tail_curve(cov, frac),
    )


def summarize(values) -> tuple:
    """Mean and sample sd over replications (sd is 0 for a single value)."""
    v = np.asarray(values, dtype=float)
    sd = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return float(v.mean()), sd
