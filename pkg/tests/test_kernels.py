import importlib
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import quantile_scan
from wtqa import _fallback, kernels

compiled = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")


def _instance(rng, n, m):
    s = np.round(rng.exponential(size=n), 1)
    W = rng.dirichlet(np.ones(n + 1), size=m)
    levels = rng.uniform(-0.2, 1.2, size=m)
    return s, W, levels


class TestFallback:
    def test_batch_matches_single(self, rng):
        for _ in range(100):
            s, W, lv = _instance(rng, int(rng.integers(1, 25)), 6)
            vals, codes = _fallback.weighted_quantile_batch(s, W, lv)
            for j in range(6):
                v, c = _fallback.weighted_quantile(s, W[j], lv[j])
                assert (vals[j], codes[j]) == (v, c)

    def test_matches_scan(self, rng):
        for _ in range(300):
            s, W, lv = _instance(rng, int(rng.integers(1, 21)), 1)
            v, _ = _fallback.weighted_quantile(s, W[0], lv[0])
            assert v == quantile_scan(list(s) + [math.inf], list(W[0]), lv[0])

    def test_codes(self):
        s = np.array([1.0, 2.0])
        w = np.full(3, 1 / 3)
        assert _fallback.weighted_quantile(s, w, -0.1)[1] == _fallback.EMPTY
        assert _fallback.weighted_quantile(s, w, 1.1)[1] == _fallback.FULL
        assert _fallback.weighted_quantile(s, w, 0.9)[1] == _fallback.SENTINEL
        assert _fallback.weighted_quantile(s, w, 0.5)[1] == _fallback.FINITE

    def test_pinball_never_worse_than_start(self, rng):
        X = np.column_stack([np.ones(200), rng.normal(size=(200, 3))])
        y = X @ np.array([0.5, 1.0, -1.0, 0.0]) + rng.standard_t(3, size=200)
        w, init, best = _fallback.pinball_descent(X, y, 0.9, 300, 0.05, 1e-4, np.zeros(4))
        assert best <= init
        assert w.shape == (4,)


@compiled
class TestCompiledAgreement:
    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 40), st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_weighted_quantile_batch(self, n, m, seed):
        s, W, lv = _instance(np.random.default_rng(seed), n, m)
        a = kernels.weighted_quantile_batch(s, W, lv)
        b = _fallback.weighted_quantile_batch(s, W, lv)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    @settings(max_examples=100, deadline=None)
    @given(hnp.arrays(np.float64, st.integers(1, 30), elements=st.floats(0, 100)),
           st.floats(-0.5, 1.5))
    def test_weighted_quantile_uniform(self, s, level):
        w = np.full(s.size + 1, 1.0 / (s.size + 1))
        assert kernels.weighted_quantile(s, w, level) == _fallback.weighted_quantile(s, w, level)

    def test_pinball_descent(self, rng):
        X = np.column_stack([np.ones(500), rng.normal(size=(500, 6))])
        y = rng.normal(size=500)
        w0 = np.zeros(7)
        a = kernels.pinball_descent(X, y, 0.05, 300, 0.05, 1e-4, w0)
        b = _fallback.pinball_descent(X, y, 0.05, 300, 0.05, 1e-4, w0)
        np.testing.assert_allclose(a[0], b[0], rtol=1e-9, atol=1e-12)
        assert a[2] == pytest.approx(b[2], rel=1e-10)


def test_env_var_forces_fallback():
    code = "from wtqa import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, WTQA_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


def test_dispatch_reload_is_stable():
    mod = importlib.reload(kernels)
    assert mod.BACKEND in ("python", "cython")
