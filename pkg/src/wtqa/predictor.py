"""Fixed point predictors fitted on burn-in rows, and linear pinball regression.

Two ridge forms are supported:

``synthetic_factor``
    ``y_hat = x' w + x' W f`` on inputs scaled (not centered) by their
    training standard deviations; no intercept.
``realdata``
    features centered and scaled, unpenalized intercept.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from wtqa import kernels

MODES = ("synthetic_factor", "realdata")


class SingularSystemError(np.linalg.LinAlgError):
    pass


def ridge_solve(Z: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Solve ``(Z'Z + lam I) b = Z'y`` by Cholesky, falling back to LU."""
    if lam < 0:
        raise ValueError("ridge penalty must be nonnegative")
    A = Z.T @ Z
    A[np.diag_indices_from(A)] += lam
    rhs = Z.T @ y
    if lam == 0 and np.linalg.cond(A) > 1e12:
        raise SingularSystemError("normal equations are singular; use a positive ridge penalty")
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        try:
            return np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            raise SingularSystemError(
                "normal equations are singular; use a positive ridge penalty") from None
    return np.linalg.solve(L.T, np.linalg.solve(L, rhs))


def _std(a: np.ndarray) -> np.ndarray:
    s = a.std(axis=0)
    return np.where(s > 0, s, 1.0)


def factor_design(Xs: np.ndarray, Fs: np.ndarray) -> np.ndarray:
    """``[X, X*f_1, ..., X*f_k]`` for scaled inputs."""
    inter = (Xs[..., None, :] * Fs[..., :, None]).reshape(*Xs.shape[:-1], -1)
    return np.concatenate([Xs, inter], axis=-1)


@dataclass(frozen=True)
class Predictor:
    mode: str
    coef: np.ndarray
    x_scale: np.ndarray
    ridge_lambda: float
    factor_coef: Optional[np.ndarray] = None
    f_scale: Optional[np.ndarray] = None
    x_center: Optional[np.ndarray] = None
    intercept: float = 0.0

    @property
    def feature_dim(self) -> int:
        return self.x_scale.size

    def predict_many(self, X, F=None) -> np.ndarray:
        """Vectorized prediction; ``F`` broadcasts against the leading axes of ``X``."""
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.feature_dim:
            raise ValueError(f"expected {self.feature_dim} features, got {X.shape[-1]}")
        if self.mode == "synthetic_factor":
            if F is None:
                raise ValueError("factor vector required for the factor-form predictor")
            Xs = X / self.x_scale
            Fs = np.asarray(F, dtype=float) / self.f_scale
            base = Xs @ self.coef
            inter = np.einsum("...d,dk,...k->...", Xs, self.factor_coef, Fs)
            return base + inter
        Xs = (X - self.x_center) / self.x_scale
        return Xs @ self.coef + self.intercept

    def predict(self, x, f=None) -> float:
        return float(self.predict_many(np.asarray(x, dtype=float)[None, :],
                                       None if f is None else np.asarray(f)[None, :])[0])


def fit_ridge(X, y, lam: float, mode: str = "realdata", F=None) -> Predictor:
    """Fit the burn-in ridge predictor.

    Parameters
    ----------
    X : (n, d) training features
    y : (n,) training outcomes
    lam : ridge penalty on the (standardized) slope coefficients
    mode : ``"synthetic_factor"`` or ``"realdata"``
    F : (n, k) factor values per row, required in ``synthetic_factor`` mode
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a nonempty (n, d) design")
    if y.shape != (X.shape[0],):
        raise ValueError("y must have one entry per row")
    if mode == "synthetic_factor":
        if F is None:
            raise ValueError("synthetic_factor mode needs factor values")
        F = np.asarray(F, dtype=float)
        sx, sf = _std(X), _std(F)
        Z = factor_design(X / sx, F / sf)
        beta = ridge_solve(Z, y, lam)
        d, k = X.shape[1], F.shape[1]
        return Predictor(mode, beta[:d], sx, lam,
                         factor_coef=beta[d:].reshape(k, d).T.copy(), f_scale=sf)
    mu = X.mean(axis=0)
    sx = _std(X)
    Xs = (X - mu) / sx
    ybar = y.mean()
    beta = ridge_solve(Xs, y - ybar, lam)
    return Predictor(mode, beta, sx, lam, x_center=mu, intercept=float(ybar))


def coefficients_original_scale(p: Predictor):
    """Slope coefficients (and factor-interaction matrix) on unscaled inputs."""
    w = p.coef / p.x_scale
    if p.mode == "synthetic_factor":
        return w, p.factor_coef / (p.x_scale[:, None] * p.f_scale[None, :])
    return w, p.intercept - float(p.x_center @ w)


# ---------------------------------------------------------------------------
# linear pinball regression

@dataclass(frozen=True)
class PinballModel:
    tau: float
    weights: np.ndarray
    intercept: float
    iters: int
    step: float
    l2: float
    n_rows: int
    initial_loss: float
    final_loss: float

    def predict(self, features) -> np.ndarray:
        f = np.asarray(features, dtype=float)
        if self.weights.size == 0:
            return np.full(f.shape[:-1] if f.ndim > 1 else (), self.intercept)
        return f @ self.weights + self.intercept


def pinball_loss(u, tau: float) -> float:
    u = np.asarray(u, dtype=float)
    return float(np.mean(np.where(u > 0, tau * u, (tau - 1.0) * u)))


def fit_pinball(features, target, tau: float, iters: int = 300, step: float = 0.05,
                l2: float = 1e-4, max_rows: int = 25_000) -> PinballModel:
    """Linear quantile regression by fixed-step subgradient descent.

    The intercept starts at the empirical ``tau``-quantile of the target and
    slopes at zero; the iterate with the lowest penalized loss is returned.
    Only the last ``max_rows`` rows are used.
    """
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    y = np.asarray(target, dtype=float)
    if y.size == 0:
        raise ValueError("no rows to fit")
    f = np.asarray(features, dtype=float).reshape(y.size, -1)
    if y.size > max_rows:
        f, y = f[-max_rows:], y[-max_rows:]
    X = np.concatenate([np.ones((y.size, 1)), f], axis=1)
    w0 = np.zeros(X.shape[1])
    w0[0] = np.quantile(y, tau, method="inverted_cdf")
    w, init_loss, best_loss = kernels.pinball_descent(X, y, tau, iters, step, l2, w0)
    return PinballModel(tau, np.asarray(w[1:]), float(w[0]), iters, step, l2, y.size,
                        float(init_loss), float(best_loss))
