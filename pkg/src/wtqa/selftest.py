"""Fast invariant checks behind ``wtqa selftest``.

Each check returns ``(name, ok, detail)``; the suite is small enough to run
in a few seconds and exercises the compiled kernels when they are present.
"""

from __future__ import annotations

import math
from typing import Callable, List, Tuple

import numpy as np

from wtqa import _fallback, kernels
from wtqa.conformal import weighted_quantile
from wtqa.engine import fit_burnin_predictor, predict_panel, run_methods
from wtqa.feedback import mcar_schedule
from wtqa.methods import MethodConfig
from wtqa.panel import random_unit_split
from wtqa.rng import make_rng
from wtqa.spatial import gibbs_map
from wtqa.synth import gaussian_panel
from wtqa.temporal import audit_observed_bound, audit_telescoping

Check = Tuple[str, bool, str]


def scan_quantile(scores, weights, level) -> float:
    """Reference scan over sorted finite scores; the sentinel sits last."""
    order = sorted(range(len(scores)), key=lambda i: scores[i])
    acc = []
    for i in order:
        acc.append(weights[i])
        if math.fsum(acc) >= level - 1e-12:
            return scores[i]
    return math.inf


def check_quantile(n: int = 300, seed: int = 0) -> Check:
    rng = make_rng(seed, "selftest", "quantile")
    worst = 0
    for _ in range(n):
        N = int(rng.integers(1, 30))
        s = np.round(rng.normal(size=N), 1)        # rounding forces ties
        w = rng.dirichlet(np.ones(N + 1))
        level = float(rng.uniform(0.01, 1.0))
        got = weighted_quantile(s, w, level).value
        want = scan_quantile(list(s), list(w), level)
        if got != want:
            worst += 1
    return "weighted quantile vs scan", worst == 0, f"{worst} mismatches in {n}"


def check_uniform(n: int = 300, seed: int = 0) -> Check:
    rng = make_rng(seed, "selftest", "uniform")
    bad = 0
    for _ in range(n):
        N = int(rng.integers(1, 60))
        alpha = float(rng.uniform(0.01, 0.99))
        s = rng.normal(size=N)
        k = math.ceil((N + 1) * (1 - alpha))
        want = np.sort(s)[k - 1] if k <= N else math.inf
        got = weighted_quantile(s, np.full(N + 1, 1 / (N + 1)), 1 - alpha).value
        bad += got != want
    return "uniform weights give the order statistic", bool(bad == 0), f"{bad} mismatches in {n}"


def check_backends(n: int = 200, seed: int = 0) -> Check:
    if kernels.BACKEND != "cython":
        return "compiled kernels match numpy", True, "compiled kernels not built; skipped"
    rng = make_rng(seed, "selftest", "backend")
    bad = 0
    for _ in range(n):
        N = int(rng.integers(1, 50))
        s = np.round(rng.normal(size=N), 1)
        W = rng.dirichlet(np.ones(N + 1), size=4)
        lv = rng.uniform(-0.1, 1.1, size=4)
        a = kernels.weighted_quantile_batch(s, W, lv)
        b = _fallback.weighted_quantile_batch(s, W, lv)
        bad += not (np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]))
    return "compiled kernels match numpy", bool(bad == 0), f"{bad} mismatches in {n}"


def check_gibbs(n: int = 300, seed: int = 0) -> Check:
    rng = make_rng(seed, "selftest", "gibbs")
    worst = -math.inf
    for _ in range(n):
        N = int(rng.integers(1, 40))
        h = float(rng.uniform(0.1, 3.0))
        a, b = rng.exponential(2.0, size=(2, N))
        gap = np.abs(gibbs_map(a, h) - gibbs_map(b, h)).sum() - np.abs(a - b).sum() / h ** 2
        worst = max(worst, gap)
    return "Gibbs map Lipschitz in l1", bool(worst <= 1e-12), f"max excess {worst:.3g}"


def check_online(n: int = 10, seed: int = 0) -> Check:
    """Telescoping identity, level range and the observed-feedback bound on small runs."""
    worst_res, range_ok, bound_ok = 0.0, True, True
    gamma, alpha = 0.05, 0.1
    for i in range(n):
        panel = gaussian_panel(40, 60, feature_dim=3, burn_in=10, seed=seed + i)
        split = random_unit_split(panel, 35, 5, seed + i)
        preds = predict_panel(panel, fit_burnin_predictor(panel, split, 1.0, "realdata"))
        sched = mcar_schedule(0.3 + 0.6 * (i / max(n - 1, 1)), panel.n_rounds, seed + i)
        tr = run_methods(panel, split, preds, sched.reveals,
                         [MethodConfig("wtqa", alpha=alpha, gamma=gamma)])["wtqa"]
        for j in range(tr.alpha_t.shape[0]):
            loss = np.nan_to_num(tr.online_loss[j])
            worst_res = max(worst_res, abs(audit_telescoping(
                sched.reveals, loss, tr.alpha_final[j], alpha, gamma)))
            range_ok &= bool(np.all((tr.alpha_t[j] >= -gamma) & (tr.alpha_t[j] <= 1 + gamma)))
            if sched.reveals.sum():
                bound_ok &= audit_observed_bound(sched.reveals, loss, alpha, gamma).holds
    ok = worst_res <= 1e-9 and range_ok and bound_ok
    return ("level recursion identities", ok,
            f"telescoping residual {worst_res:.2g}, range {range_ok}, bound {bound_ok}")


def check_p0(seed: int = 0) -> Check:
    panel = gaussian_panel(40, 50, feature_dim=3, burn_in=10, seed=seed)
    split = random_unit_split(panel, 35, 5, seed)
    preds = predict_panel(panel, fit_burnin_predictor(panel, split, 1.0, "realdata"))
    kinds = ("wtqa", "w_only", "tqa_only", "split_cp")
    tr = run_methods(panel, split, preds, np.zeros(panel.n_rounds),
                     [MethodConfig(k) for k in kinds])
    same = all(np.array_equal(tr[a].lo, tr[b].lo) and np.array_equal(tr[a].hi, tr[b].hi)
               for a, b in (("wtqa", "w_only"), ("tqa_only", "split_cp")))
    return "no feedback reduces to the fixed-level methods", same, "interval-for-interval"


CHECKS: List[Callable[[], Check]] = [check_quantile, check_uniform, check_backends,
                                     check_gibbs, check_online, check_p0]


def run_all() -> List[Check]:
    return [c() for c in CHECKS]
