"""
Unit tests for the bid-ask spread estimator.
"""

import numpy as np
import pytest

from portfolio_rl.data import synth_bid_ask_bounce
from portfolio_rl.env import estimate_spread
from portfolio_rl.errors import DataValidationError


def test_close_at_mid_gives_zero_spread(rng):
    mid = np.cumsum(rng.normal(scale=0.01, size=60))
    assert np.array_equal(estimate_spread(mid, mid), np.zeros(60))


def test_constant_prices_give_zero_spread():
    c = np.full(40, np.log(100.0))
    assert np.array_equal(estimate_spread(c, c.copy(), window=None), np.zeros(40))


def test_first_day_has_no_estimate(rng):
    series = synth_bid_ask_bounce(50, spread=0.02, seed=1)
    log = np.log(series.frame.to_numpy())
    d = estimate_spread(log[:, 3], 0.5 * (log[:, 1] + log[:, 2]))
    assert d[0] == 0.0
    assert np.all(d >= 0)


def test_estimate_is_causal(rng):
    c, e = rng.normal(size=30), rng.normal(size=30)
    full = estimate_spread(c, e, window=5)
    c2 = c.copy()
    c2[20:] = rng.normal(size=10)
    changed = estimate_spread(c2, e, window=5)
    assert np.array_equal(full[:20], changed[:20])


def test_recovers_planted_bounce_spread():
    series = synth_bid_ask_bounce(1000, spread=0.01, volatility=0.01, seed=3)
    log = np.log(series.frame.to_numpy())
    d = estimate_spread(log[:, 3], 0.5 * (log[:, 1] + log[:, 2]), window=None)
    assert d[-1] == pytest.approx(0.01, rel=0.2)


def test_too_short_series():
    with pytest.raises(DataValidationError):
        estimate_spread(np.array([1.0]), np.array([1.0]))


def test_trailing_window_tracks_planted_bounce_spread():
    series = synth_bid_ask_bounce(1000, spread=0.01, volatility=0.01, seed=3)
    log = np.log(series.frame.to_numpy())
    d = estimate_spread(log[:, 3], 0.5 * (log[:, 1] + log[:, 2]))
    assert d[31:].mean() == pytest.approx(0.01, rel=0.2)
    assert np.median(d[31:]) == pytest.approx(0.01, rel=0.2)


def test_day_t_estimate_ignores_day_t_close(rng):
    c, e = rng.normal(size=20), rng.normal(size=20)
    c2 = c.copy()
    c2[10] += 5.0
    assert np.array_equal(estimate_spread(c, e)[:11], estimate_spread(c2, e)[:11])
