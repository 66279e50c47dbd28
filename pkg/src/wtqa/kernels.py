"""Kernel dispatch: compiled extension when available, numpy otherwise.

Set ``WTQA_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

import numpy as np

from wtqa import _fallback
from wtqa._fallback import EMPTY, FINITE, FULL, LEVEL_TOL, SENTINEL

__all__ = [
    "BACKEND",
    "EMPTY",
    "FINITE",
    "FULL",
    "LEVEL_TOL",
    "SENTINEL",
    "pinball_descent",
    "weighted_quantile",
    "weighted_quantile_batch",
]

_impl = _fallback
BACKEND = "python"
if os.environ.get("WTQA_PURE_PYTHON") != "1":
    try:
        from wtqa import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def weighted_quantile(scores, weights, level):
    return _impl.weighted_quantile(_f64(scores), _f64(weights), float(level))


def weighted_quantile_batch(scores, weights, levels):
    return _impl.weighted_quantile_batch(_f64(scores), _f64(weights), _f64(levels))


def pinball_descent(X, y, tau, iters, step, l2, w0):
    return _impl.pinball_descent(_f64(X), _f64(y), float(tau), int(iters),
                                 float(step), float(l2), _f64(w0))
