"""Synthetic OHLCV generators for tests and smoke runs."""

from __future__ import annotations

from typing import Sequence

import numpy as np
import pandas as pd

from .series import COLUMNS, AssetSeries

START_DATE = "2000-01-03"


def _broadcast(name: str, value: float | Sequence[float], n: int) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=np.float64), (n,)).copy()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def _calendar(num_days: int, start: str) -> list[str]:
    return [d.date().isoformat() for d in pd.bdate_range(start, periods=num_days)]


def synth_gbm(
    num_assets: int,
    num_days: int,
    drift: float | Sequence[float] = 0.0,
    volatility: float | Sequence[float] = 0.01,
    seed: int = 0,
    *,
    intraday: float = 0.002,
    initial_price: float = 100.0,
    volume: float = 1e6,
    volume_noise: float = 0.5,
    start: str = START_DATE,
    symbols: Sequence[str] | None = None,
) -> list[AssetSeries]:
    """
    Daily bars whose log closes follow a random walk with per-day drift and
    volatility, so close[t] = close[0] * exp(drift * t) when volatility is 0.

    Open is the previous close; high and low widen max/min(open, close) by
    `intraday`. Volume is lognormal around `volume`.
    """
    if num_assets < 1 or num_days < 1:
        raise ValueError("num_assets and num_days must be >= 1")
    mu = _broadcast("drift", drift, num_assets)
    sigma = _broadcast("volatility", volatility, num_assets)
    if np.any(sigma < 0):
        raise ValueError("volatility must be >= 0")
    names = list(symbols) if symbols is not None else [f"SYN{i}" for i in range(num_assets)]
    if len(names) != num_assets:
        raise ValueError(f"expected {num_assets} symbols, got {len(names)}")

    rng = np.random.default_rng(seed)
    dates = pd.Index(_calendar(num_days, start), name="date")
    out: list[AssetSeries] = []
    for i in range(num_assets):
        steps = mu[i] + sigma[i] * rng.standard_normal(num_days - 1)
        close = initial_price * np.exp(np.concatenate(([0.0], np.cumsum(steps))))
        open_ = np.concatenate(([close[0]], close[:-1]))
        high = np.maximum(open_, close) * (1.0 + intraday)
        low = np.minimum(open_, close) / (1.0 + intraday)
        vol = volume * np.exp(volume_noise * rng.standard_normal(num_days))
        frame = pd.DataFrame(
            np.column_stack([open_, high, low, close, vol]), index=dates, columns=list(COLUMNS)
        )
        out.append(AssetSeries(names[i], frame))
    return out


def synth_bid_ask_bounce(
    num_days: int,
    spread: float,
    volatility: float = 0.01,
    seed: int = 0,
    *,
    symbol: str = "BOUNCE",
    start: str = START_DATE,
) -> AssetSeries:
    """
    Closes that bounce between bid and ask around a random-walk mid price.

    The proportional spread is `spread`; the daily high/low straddle the mid
    symmetrically, so the high-low midpoint tracks the efficient price.
    """
    if num_days < 2 or spread < 0:
        raise ValueError("need num_days >= 2 and spread >= 0")
    rng = np.random.default_rng(seed)
    steps = volatility * rng.standard_normal(num_days - 1)
    log_mid = np.log(100.0) + np.concatenate(([0.0], np.cumsum(steps)))
    side = rng.choice([-1.0, 1.0], size=num_days)
    log_close = log_mid + side * spread / 2.0
    reach = spread / 2.0 + volatility
    frame = pd.DataFrame(
        np.column_stack(
            [
                np.exp(log_mid),
                np.exp(log_mid + reach),
                np.exp(log_mid - reach),
                np.exp(log_close),
                np.full(num_days, 1e6),
            ]
        ),
        index=pd.Index(_calendar(num_days, start), name="date"),
        columns=list(COLUMNS),
    )
    return AssetSeries(symbol, frame)
