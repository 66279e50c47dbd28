import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import batch_means, kernel_weights_direct
from wtqa.spatial import (SpatialState, gibbs_map, kernel_weight_matrix, kernel_weights,
                          pooled_scale, standardized_sq_distances, update_running_mean,
                          weights_from_sq_distances)


class TestRunningMean:
    def test_first_round_is_the_observation(self, rng):
        st0 = SpatialState.empty(4, 3, 0.6)
        x = rng.normal(size=(4, 3))
        np.testing.assert_array_equal(update_running_mean(st0, x).running_means, x)

    def test_constant_stream_is_fixed_point(self):
        state = SpatialState.empty(3, 2, 0.6)
        x = np.array([[1.0, -2.0], [0.5, 0.5], [3.0, 0.0]])
        for _ in range(25):
            state = update_running_mean(state, x)
        np.testing.assert_allclose(state.running_means, x, atol=1e-14)
        assert state.t_count == 25

    def test_matches_batch_average(self, rng):
        hist = rng.normal(size=(50, 5, 4))
        state = SpatialState.empty(5, 4, 0.6)
        for x in hist:
            state = update_running_mean(state, x)
        np.testing.assert_allclose(state.running_means, batch_means(hist)[-1], atol=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            update_running_mean(SpatialState.empty(3, 2, 0.6), np.zeros((3, 3)))

    def test_invalid_state(self):
        with pytest.raises(ValueError):
            SpatialState.empty(3, 2, 0.0)
        with pytest.raises(ValueError):
            SpatialState(np.zeros((3, 2)), 0.6, -1)


class TestKernelWeights:
    def test_uniform_before_first_round(self):
        np.testing.assert_array_equal(kernel_weights(SpatialState.empty(5, 2, 0.6)),
                                      np.full(5, 0.2))

    def test_equidistant_peers_share_weight(self):
        means = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]])
        w = kernel_weights(SpatialState(means, 0.6, 1))
        assert w[0] == pytest.approx(w[1], abs=1e-15)

    def test_identical_peer_gets_half(self):
        means = np.array([[2.0, -1.0], [2.0, -1.0]])
        w = kernel_weights(SpatialState(means, 0.6, 3))
        np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-15)

    def test_direct_formula(self):
        w = weights_from_sq_distances(np.array([0.36, 1.44]), 0.6)
        mass = np.array([math.exp(-0.5), math.exp(-2.0), 1.0])
        np.testing.assert_allclose(w, mass / mass.sum(), rtol=1e-14)

    def test_matches_loop_oracle(self, rng):
        for _ in range(30):
            n, d = int(rng.integers(2, 30)), int(rng.integers(1, 8))
            calib = rng.normal(size=(n, d)) * rng.uniform(0.1, 3, size=d)
            target = rng.normal(size=d)
            h = float(rng.uniform(0.2, 2.0))
            got = kernel_weight_matrix(calib, target, h)[0]
            np.testing.assert_allclose(got, kernel_weights_direct(calib, target, h),
                                       rtol=1e-11, atol=1e-14)

    def test_constant_feature_contributes_nothing(self, rng):
        calib = rng.normal(size=(6, 2))
        target = rng.normal(size=2)
        with_const = kernel_weight_matrix(np.column_stack([calib, np.full(6, 4.0)]),
                                          np.append(target, 4.0), 0.6)
        # dividing by d changes with the extra column, so compare distances directly
        a = standardized_sq_distances(np.column_stack([calib, np.full(6, 4.0)]),
                                      np.append(target, 4.0)) * 3
        b = standardized_sq_distances(calib, target) * 2
        np.testing.assert_allclose(a, b, rtol=1e-12)
        assert np.all(np.isfinite(with_const))

    def test_pooled_scale_is_population_sd(self, rng):
        calib, target = rng.normal(size=(9, 3)), rng.normal(size=3)
        np.testing.assert_allclose(pooled_scale(calib, target[None])[0],
                                   np.vstack([calib, target]).std(axis=0), rtol=1e-12)

    def test_fixed_standardizer(self, rng):
        calib, target = rng.normal(size=(5, 2)), rng.normal(size=2)
        scale = np.array([2.0, 0.5])
        d = standardized_sq_distances(calib, target, scale)[0]
        want = (((calib - target) / scale) ** 2).sum(axis=1) / 2
        np.testing.assert_allclose(d, want, rtol=1e-12)

    def test_bandwidth_limits(self, rng):
        calib, target = rng.normal(size=(7, 3)), rng.normal(size=3)
        wide = kernel_weight_matrix(calib, target, 1e6)[0]
        np.testing.assert_allclose(wide, np.full(8, 1 / 8), atol=1e-9)
        narrow = kernel_weight_matrix(calib, target, 1e-2)[0]
        nearest = np.argmin(standardized_sq_distances(calib, target)[0])
        assert narrow[-1] > 0.999 or narrow[nearest] + narrow[-1] > 0.999

    def test_simplex(self, rng):
        for _ in range(100):
            w = kernel_weight_matrix(rng.normal(size=(12, 4)), rng.normal(size=(3, 4)),
                                     float(rng.uniform(0.05, 3)))
            assert np.all(w >= 0)
            np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)


class TestGibbsMap:
    def test_equal_inputs(self, rng):
        a = rng.exponential(size=10)
        np.testing.assert_array_equal(gibbs_map(a, 0.6), gibbs_map(a.copy(), 0.6))

    def test_far_peers_vanish(self):
        peers = gibbs_map(np.full(5, 1e6), 0.6)
        assert peers.sum() < 1e-300 + 1e-12

    def test_rejects_bad_bandwidth(self):
        with pytest.raises(ValueError):
            gibbs_map([1.0], 0.0)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(1, 40), st.floats(0.05, 5.0), st.integers(0, 2**32 - 1))
    def test_lipschitz(self, n, h, seed):
        rng = np.random.default_rng(seed)
        a, b = rng.exponential(3.0, size=(2, n))
        lhs = np.abs(gibbs_map(a, h) - gibbs_map(b, h)).sum()
        assert lhs <= np.abs(a - b).sum() / h ** 2 + 1e-15
