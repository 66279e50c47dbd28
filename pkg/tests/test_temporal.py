import numpy as np
import pytest

from wtqa.temporal import (NotApplicable, TemporalState, audit_observed_bound,
                           audit_telescoping, observed_bound, update_level)


class TestUpdateLevel:
    def test_miss_lowers_level(self):
        s = update_level(TemporalState.start(0.1, 0.01), True, 1)
        assert s.alpha_t == pytest.approx(0.091, abs=1e-15)
        assert (s.s_count, s.loss_sum) == (1, 1)

    def test_hit_raises_level(self):
        s = update_level(TemporalState.start(0.1, 0.01), True, 0)
        assert s.alpha_t == pytest.approx(0.101, abs=1e-15)

    def test_carry_forward(self):
        s0 = TemporalState.start(0.1, 0.01)
        assert update_level(s0, False) == s0

    @pytest.mark.parametrize("loss", [2, -1, 0.5, None])
    def test_bad_loss(self, loss):
        with pytest.raises(ValueError):
            update_level(TemporalState.start(0.1, 0.01), True, loss)

    def test_loss_without_reveal(self):
        with pytest.raises(ValueError):
            update_level(TemporalState.start(0.1, 0.01), False, 0)

    def test_invalid_state(self):
        with pytest.raises(ValueError):
            TemporalState.start(1.2, 0.01)
        with pytest.raises(ValueError):
            TemporalState.start(0.1, 0.0)


def _run(rng, T, alpha=0.1, gamma=0.05):
    state = TemporalState.start(alpha, gamma)
    reveals = rng.random(T) < rng.uniform(0.1, 1.0)
    losses = np.zeros(T)
    for t in range(T):
        # losses follow the raw set semantics at the current level
        a = state.alpha_t
        loss = 1 if a > 1 else 0 if a < 0 else int(rng.random() < a)
        losses[t] = loss
        state = update_level(state, bool(reveals[t]), loss if reveals[t] else None)
    return reveals, losses, state


class TestAudits:
    def test_empty_trace(self):
        assert audit_telescoping([], [], 0.1, 0.1, 0.01) == 0.0

    def test_single_round(self):
        s = update_level(TemporalState.start(0.1, 0.01), True, 1)
        assert abs(audit_telescoping([1], [1], s.alpha_t, 0.1, 0.01)) < 1e-12

    def test_long_random_trace(self, rng):
        reveals, losses, state = _run(rng, 10_000)
        assert abs(audit_telescoping(reveals, losses, state.alpha_t, 0.1, 0.05)) <= 1e-9

    def test_bound_value(self):
        assert observed_bound(0.1, 0.01, 100) == pytest.approx(0.91)

    def test_all_covered_trace(self):
        chk = audit_observed_bound(np.ones(50), np.zeros(50), 0.1, 0.01)
        assert chk.lhs == pytest.approx(0.1) and chk.holds

    def test_no_reveals(self):
        with pytest.raises(NotApplicable):
            audit_observed_bound(np.zeros(5), np.zeros(5), 0.1, 0.01)

    def test_bound_and_range_on_random_runs(self, rng):
        for _ in range(50):
            gamma = float(rng.uniform(0.005, 0.2))
            reveals, losses, state = _run(rng, int(rng.integers(10, 400)), gamma=gamma)
            assert -gamma <= state.alpha_t <= 1 + gamma
            if reveals.sum():
                assert audit_observed_bound(reveals, losses, 0.1, gamma).holds
