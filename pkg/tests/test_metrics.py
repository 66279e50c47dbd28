import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import two_pass_std
from wtqa.conformal import Provenance
from wtqa.metrics import (coverage_stats, cumulative_tail_curve, summarize, tail_coverage,
                          width_cov)


class TestTailCoverage:
    def test_ten_units_is_min(self, rng):
        c = rng.uniform(size=10)
        assert tail_coverage(c) == c.min()

    def test_constant(self):
        assert tail_coverage(np.full(7, 0.8)) == pytest.approx(0.8)

    def test_thirty_units(self, rng):
        c = rng.uniform(size=30)
        assert tail_coverage(c) == pytest.approx(np.sort(c)[:3].mean())

    def test_frac_one_is_mean(self, rng):
        c = rng.uniform(size=13)
        assert tail_coverage(c, 1.0) == pytest.approx(c.mean())

    def test_errors(self):
        with pytest.raises(ValueError):
            tail_coverage([])
        with pytest.raises(ValueError):
            tail_coverage([0.5], 0.0)


class TestWidthCov:
    def test_constant(self):
        assert width_cov(np.full(9, 2.0)) == 0.0

    def test_two_point(self):
        assert width_cov([1.0, 3.0]) == pytest.approx(0.5)

    @settings(max_examples=100, deadline=None)
    @given(hnp.arrays(np.float64, st.integers(1, 60), elements=st.floats(0.1, 50)))
    def test_two_pass(self, w):
        assert width_cov(w) == pytest.approx(two_pass_std(w) / np.mean(w), rel=1e-10, abs=1e-12)

    def test_zero_mean(self):
        with pytest.raises(ValueError):
            width_cov([0.0, 0.0])


class TestCoverageStats:
    def test_all_covered(self):
        r = coverage_stats(np.ones((10, 5), bool), np.ones((10, 5)))
        assert (r.avg_coverage, r.tail_coverage) == (1.0, 1.0)
        assert r.lower_boundary_rate == r.upper_boundary_rate == r.sentinel_fallback_rate == 0.0

    def test_one_unit_never_covered(self):
        cov = np.ones((10, 4), bool)
        cov[3] = False
        assert coverage_stats(cov, np.ones((10, 4))).tail_coverage == 0.0

    def test_counting(self, rng):
        cov = rng.random((17, 23)) < 0.85
        r = coverage_stats(cov, rng.uniform(1, 2, (17, 23)))
        assert r.avg_coverage == pytest.approx(cov.sum() / cov.size, abs=1e-12)
        assert r.tail_coverage <= r.avg_coverage

    def test_diagnostic_rates(self):
        alpha = np.array([[0.005, 0.1, 0.995, 0.2]])
        prov = np.array([[0, 1, 0, 1]], dtype=np.int8)
        r = coverage_stats(np.ones((1, 4), bool), np.ones((1, 4)), alpha, prov)
        assert (r.lower_boundary_rate, r.upper_boundary_rate) == (0.25, 0.25)
        assert r.sentinel_fallback_rate == 0.5 and Provenance(1) == Provenance.SENTINEL_FALLBACK

    def test_unresolved(self):
        cov = np.ones((2, 3))
        cov[0, 1] = np.nan
        with pytest.raises(ValueError):
            coverage_stats(cov, np.ones((2, 3)))

    def test_relabeling_invariance(self, rng):
        cov = rng.random((12, 9)) < 0.7
        w = rng.uniform(1, 3, (12, 9))
        a = coverage_stats(cov, w).scalars()
        pu, pt = rng.permutation(12), rng.permutation(9)
        b = coverage_stats(cov[pu][:, pt], w[pu][:, pt]).scalars()
        assert a == pytest.approx(b)

    def test_cumulative_curve(self, rng):
        cov = rng.random((10, 6)) < 0.8
        curve = cumulative_tail_curve(cov)
        assert curve[-1] == coverage_stats(cov, np.ones((10, 6))).tail_coverage
        assert curve[0] == cov[:, 0].min()


def test_summarize():
    assert summarize([1.0]) == (1.0, 0.0)
    mean, sd = summarize([1.0, 2.0, 3.0])
    assert (mean, sd) == (2.0, 1.0)
