"""
Performance metrics on daily log returns. Risk-free rate is 0 and years
have 252 trading days.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

TRADING_DAYS = 252
FLAT_TOLERANCE = 1e-12


def _returns(daily_returns: Sequence[float]) -> np.ndarray:
    r = np.asarray(daily_returns, dtype=np.float64)
    if r.ndim != 1 or r.size < 2:
        raise ValueError(f"need at least 2 daily returns, got {r.size}")
    return r


def _flat(spread: float, r: np.ndarray) -> bool:
    """A spread at rounding-noise level relative to the mean counts as zero."""
    return spread <= FLAT_TOLERANCE * max(1.0, abs(float(r.mean())))


def annualized_sharpe(daily_returns: Sequence[float]) -> float:
    r = _returns(daily_returns)
    std = float(r.std(ddof=1))
    if _flat(std, r):
        return 0.0
    return float(r.mean()) / std * math.sqrt(TRADING_DAYS)


def annualized_sortino(daily_returns: Sequence[float]) -> float:
    r = _returns(daily_returns)
    downside = math.sqrt(float(np.mean(np.minimum(r, 0.0) ** 2)))
    if _flat(downside, r):
        return 0.0
    return float(r.mean()) / downside * math.sqrt(TRADING_DAYS)


def max_drawdown(values: Sequence[float]) -> float:
    """Largest peak-to-trough loss as a fraction of the peak."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return 0.0
    peaks = np.maximum.accumulate(v)
    return float(np.max(1.0 - v / peaks))


class MetricReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    cumulative_return_pct: float
    annualized_sharpe: float
    annualized_sortino: float
    max_drawdown: float

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "MetricReport":
        v = np.asarray(values, dtype=np.float64)
        r = np.diff(np.log(v))
        return cls(
            cumulative_return_pct=(float(v[-1]) / float(v[0]) - 1.0) * 100.0,
            annualized_sharpe=annualized_sharpe(r),
            annualized_sortino=annualized_sortino(r),
            max_drawdown=max_drawdown(v),
        )
