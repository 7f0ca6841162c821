"""
Unit tests for alignment, the log-difference transform and synthetic data.
"""

import numpy as np
import pytest

from portfolio_rl.data import AlignedDataset, align_and_transform, synth_gbm
from portfolio_rl.data.dataset import CLOSE
from portfolio_rl.errors import CheckpointError, DataValidationError, DatasetTooShortError


def test_constant_prices_give_zero_price_features(flat_dataset):
    assert flat_dataset.num_assets == 3
    assert np.array_equal(flat_dataset.features[:, :4], np.zeros_like(flat_dataset.features[:, :4]))


def test_cash_column_is_constant(small_dataset):
    assert np.array_equal(small_dataset.raw[:, :, 0], np.ones((small_dataset.num_days, 5)))
    assert np.array_equal(small_dataset.features[:, :, 0], np.zeros((small_dataset.num_days, 5)))
    assert np.array_equal(small_dataset.spreads[:, 0], np.zeros(small_dataset.num_days))


def test_doubling_close_gives_log_two():
    series = synth_gbm(1, 12, drift=np.log(2.0), volatility=0.0, seed=0)
    ds = align_and_transform(series)
    assert np.allclose(ds.features[:, CLOSE, 1], np.log(2.0), atol=1e-12)


def test_offset_calendars_use_the_intersection():
    a = synth_gbm(1, 10, seed=1, symbols=["A"])
    b = synth_gbm(1, 10, seed=2, symbols=["B"], start="2000-01-05")
    ds = align_and_transform(a + b)
    common = sorted(set(a[0].dates) & set(b[0].dates))
    assert ds.num_days == len(common) - 1 == 7
    assert ds.dates == common[1:]
    assert ds.symbols == ["A", "B"]


def test_first_difference_uses_previous_common_day():
    [s] = synth_gbm(1, 6, volatility=0.05, seed=3)
    ds = align_and_transform([s])
    closes = s.frame["close"].to_numpy()
    assert ds.features[0, CLOSE, 1] == pytest.approx(np.log(closes[1] / closes[0]), abs=1e-12)


def test_disjoint_calendars_are_too_short():
    a = synth_gbm(1, 5, symbols=["A"])
    b = synth_gbm(1, 5, symbols=["B"], start="2001-01-01")
    with pytest.raises(DatasetTooShortError):
        align_and_transform(a + b)


def test_duplicate_symbols_rejected():
    a = synth_gbm(1, 5, symbols=["A"])
    with pytest.raises(DataValidationError):
        align_and_transform(a + a)


def test_zero_volume_is_floored():
    [s] = synth_gbm(1, 5, seed=0)
    s.frame["volume"] = 0.0
    ds = align_and_transform([s])
    assert np.all(np.isfinite(ds.features))


def test_synth_is_deterministic():
    a = synth_gbm(2, 30, drift=0.001, volatility=0.02, seed=9)
    b = synth_gbm(2, 30, drift=0.001, volatility=0.02, seed=9)
    for x, y in zip(a, b):
        assert np.array_equal(x.frame.to_numpy(), y.frame.to_numpy())
        assert x.dates == y.dates


def test_zero_volatility_follows_exponential_drift():
    [s] = synth_gbm(1, 20, drift=0.01, volatility=0.0, seed=0)
    closes = s.frame["close"].to_numpy()
    assert np.allclose(closes, 100.0 * np.exp(0.01 * np.arange(20)), rtol=1e-12)


def test_cache_round_trip(tmp_path, small_dataset):
    small_dataset.save(tmp_path / "cache")
    loaded = AlignedDataset.load(tmp_path / "cache")
    assert loaded.symbols == small_dataset.symbols
    assert loaded.dates == small_dataset.dates
    assert np.array_equal(loaded.raw, small_dataset.raw)
    assert np.array_equal(loaded.features, small_dataset.features)
    assert np.array_equal(loaded.spreads, small_dataset.spreads)


def test_missing_cache(tmp_path):
    with pytest.raises(CheckpointError):
        AlignedDataset.load(tmp_path)


def test_input_order_only_permutes_columns():
    series = synth_gbm(3, 40, volatility=[0.01, 0.02, 0.03], seed=5)
    forward = align_and_transform(series)
    backward = align_and_transform(series[::-1])
    assert backward.symbols == forward.symbols[::-1]
    assert backward.dates == forward.dates

    columns = [0] + [backward.symbols.index(s) + 1 for s in forward.symbols]
    assert np.array_equal(backward.raw[:, :, columns], forward.raw)
    assert np.array_equal(backward.features[:, :, columns], forward.features)
    assert np.array_equal(backward.spreads[:, columns], forward.spreads)
