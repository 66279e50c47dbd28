"""Pure numpy implementations of the hot kernels.

These define the reference semantics; ``_kernels.pyx`` mirrors them and is
preferred when it has been compiled.
"""

import numpy as np

# Threshold provenance codes shared with the compiled kernels.
FINITE = 0
SENTINEL = 1
EMPTY = 2
FULL = 3

# Slack on the cumulative-weight comparison so that level sums which are
# exact in real arithmetic (e.g. nine weights of 0.1 against 0.9) resolve
# the same way they would with exact rationals.
LEVEL_TOL = 1e-12


def weighted_quantile(scores, weights, level):
    """Weighted quantile of ``scores`` augmented with a +inf sentinel.

    ``weights`` has one more entry than ``scores``; the last entry is the
    sentinel's mass. Returns ``(value, code)``.
    """
    if level <= 0.0:
        return -np.inf, EMPTY
    if level > 1.0:
        return np.inf, FULL
    order = np.argsort(scores, kind="stable")
    cum = np.cumsum(weights[:-1][order])
    hit = cum >= level - LEVEL_TOL
    if not hit[-1]:
        return np.inf, SENTINEL
    return float(scores[order[np.argmax(hit)]]), FINITE


def weighted_quantile_batch(scores, weights, levels):
    """Row-wise weighted quantiles sharing one score vector.

    ``weights`` is ``(m, N + 1)`` and ``levels`` is ``(m,)``.
    """
    m = weights.shape[0]
    values = np.empty(m)
    codes = np.empty(m, dtype=np.int8)
    order = np.argsort(scores, kind="stable")
    cum = np.cumsum(weights[:, :-1][:, order], axis=1)
    hit = cum >= (levels - LEVEL_TOL)[:, None]
    reached = hit[:, -1]
    first = np.argmax(hit, axis=1)
    values[:] = np.where(reached, scores[order[first]], np.inf)
    codes[:] = np.where(reached, FINITE, SENTINEL)
    empty = levels <= 0.0
    full = levels > 1.0
    values[empty] = -np.inf
    codes[empty] = EMPTY
    values[full] = np.inf
    codes[full] = FULL
    return values, codes


def _pinball_objective(u, tau, w, l2):
    loss = np.mean(np.where(u > 0, tau * u, (tau - 1.0) * u))
    return loss + 0.5 * l2 * np.dot(w[1:], w[1:])


def pinball_descent(X, y, tau, iters, step, l2, w0):
    """Fixed-step subgradient descent on the penalized mean pinball loss.

    Column 0 of ``X`` is the unpenalized intercept. A zero residual takes the
    left subgradient. Returns ``(best_w, initial_loss, best_loss)``.
    """
    n = X.shape[0]
    w = np.array(w0, dtype=float)
    u = y - X @ w
    loss = _pinball_objective(u, tau, w, l2)
    init_loss = best_loss = loss
    best_w = w.copy()
    for _ in range(iters):
        g = np.where(u > 0, tau, tau - 1.0)
        grad = -(X.T @ g) / n
        grad[1:] += l2 * w[1:]
        w -= step * grad
        u = y - X @ w
        loss = _pinball_objective(u, tau, w, l2)
        if loss < best_loss:
            best_loss = loss
            best_w = w.copy()
    return best_w, init_loss, best_loss
