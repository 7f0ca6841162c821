"""
Transaction cost model: proportional fee plus half the estimated
proportional bid-ask spread.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..errors import DataValidationError, ShapeError


def estimate_spread(
    close_log_prices: np.ndarray,
    eta: np.ndarray,
    window: int | None = 30,
) -> np.ndarray:
    """
    Proportional spread from closes and daily mid log-prices.

    d_t = 2 * sqrt(max(0, mean of (log c_k - eta_k)(log c_k - eta_{k+1})))
    over the products completed by day t (k <= t - 1): a trailing window of
    `window` products, or all of them when `window` is None. d_0 is 0.

    Product k needs eta_{k+1}, so the last product known at day t's close is
    k = t - 1. The one-day lag keeps d_t free of day t's own close, which is
    the price the day-t rebalance trades at.
    """
    c = np.asarray(close_log_prices, dtype=np.float64)
    e = np.asarray(eta, dtype=np.float64)
    if c.ndim != 1 or c.shape != e.shape:
        raise ShapeError("estimate_spread", c.shape, e.shape)
    if c.size < 2:
        raise DataValidationError(f"spread estimate needs at least 2 days, got {c.size}")
    if window is not None and window < 1:
        raise ValueError("window must be >= 1 or None")

    products = pd.Series((c[:-1] - e[:-1]) * (c[:-1] - e[1:]))
    rolling = products.expanding() if window is None else products.rolling(window, min_periods=1)
    expectation = rolling.mean().to_numpy()
    d = np.zeros(c.size)
    d[1:] = 2.0 * np.sqrt(np.clip(expectation, 0.0, None))
    return d


@dataclass
class CostModel:
    """Per-trade cost rate c_i * |ds_i| * (fee_rate + slippage_coefficient * d_t^i)."""

    spreads: np.ndarray
    fee_rate: float = 0.002
    slippage_coefficient: float = 0.5
    _spreads: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        s = np.asarray(self.spreads, dtype=np.float64)
        if s.ndim != 2:
            raise ShapeError("cost_model", s.shape, detail="spreads must be (days, assets)")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise DataValidationError("spread estimates must be finite and nonnegative")
        if self.fee_rate < 0 or self.slippage_coefficient < 0:
            raise ValueError("fee_rate and slippage_coefficient must be >= 0")
        self._spreads = s

    @classmethod
    def zero(cls, num_days: int, num_assets: int) -> "CostModel":
        return cls(np.zeros((num_days, num_assets)), fee_rate=0.0, slippage_coefficient=0.0)

    def rates(self, day: int) -> np.ndarray:
        """Cost per unit of traded notional for each column on `day` (column 0 unused)."""
        return self.fee_rate + self.slippage_coefficient * self._spreads[day]
