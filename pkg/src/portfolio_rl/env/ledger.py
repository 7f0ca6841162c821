"""Integer-share portfolio accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from loguru import logger

from ..errors import DataValidationError, RebalanceInfeasibleError
from ..metrics import REBALANCE_SHRINKS
from .costs import CostModel

FLOOR_TOLERANCE = 1e-9
SHRINK_FACTOR = 0.999
SIMPLEX_TOLERANCE = 1e-6


@dataclass
class PortfolioLedger:
    """shares[0] is cash in currency units; shares[1:] are whole share counts."""

    shares: np.ndarray
    value: float
    last_return: float = 0.0
    last_cost: float = 0.0
    episode_returns: list[float] = field(default_factory=list)

    @classmethod
    def all_cash(cls, cash: float, num_assets: int) -> "PortfolioLedger":
        if cash <= 0:
            raise ValueError("initial cash must be > 0")
        shares = np.zeros(num_assets)
        shares[0] = cash
        return cls(shares=shares, value=float(cash))

    def valuation(self, prices: np.ndarray) -> float:
        return float(np.dot(prices, self.shares))

    def weights(self, prices: np.ndarray) -> np.ndarray:
        return prices * self.shares / self.valuation(prices)


def _check_inputs(action: np.ndarray, prices: np.ndarray, size: int) -> None:
    if action.shape != (size,) or prices.shape != (size,):
        raise ValueError(f"action {action.shape} and prices {prices.shape} must both be ({size},)")
    if np.any(action < -SIMPLEX_TOLERANCE) or abs(action.sum() - 1.0) > SIMPLEX_TOLERANCE:
        raise ValueError(f"action is not on the simplex (sum={action.sum():.8f})")
    if prices[0] != 1.0 or np.any(prices[1:] <= 0) or not np.all(np.isfinite(prices)):
        raise DataValidationError(f"invalid close-price vector {prices}")


def rebalance(
    ledger: PortfolioLedger,
    action: np.ndarray,
    prices: np.ndarray,
    costs: CostModel,
    day: int,
) -> PortfolioLedger:
    """
    Move to the integer holdings closest below `action` at today's closes.

    Cash absorbs the floor remainder and pays the costs. If that leaves cash
    negative, target values are scaled by 0.999 and re-floored until it does
    not.
    """
    action = np.asarray(action, dtype=np.float64)
    prices = np.asarray(prices, dtype=np.float64)
    _check_inputs(action, prices, ledger.shares.size)

    p_prev = ledger.valuation(prices)
    rates = costs.rates(day)[1:]
    held = ledger.shares[1:]
    targets = p_prev * np.clip(action[1:], 0.0, None)
    scale = 1.0
    shrinks = 0
    while True:
        shares = np.floor(scale * targets / prices[1:] + FLOOR_TOLERANCE)
        cost = float(np.sum(prices[1:] * np.abs(shares - held) * rates))
        cash = p_prev - float(np.dot(prices[1:], shares)) - cost
        if cash >= 0.0:
            break
        if not shares.any():
            raise RebalanceInfeasibleError(
                f"day {day}: liquidation costs {cost:.6f} exceed portfolio value {p_prev:.6f}"
            )
        scale *= SHRINK_FACTOR
        shrinks += 1

    if shrinks:
        REBALANCE_SHRINKS.inc()
        logger.warning(
            f"[env] day {day}: rebalance targets shrunk {shrinks} times to stay cash-feasible"
        )

    new_shares = np.concatenate(([cash], shares))
    value = float(np.dot(prices, new_shares))
    if not math.isfinite(value):
        raise DataValidationError(f"day {day}: non-finite portfolio value")
    return PortfolioLedger(
        shares=new_shares,
        value=value,
        last_return=ledger.last_return,
        last_cost=cost,
        episode_returns=list(ledger.episode_returns),
    )
