"""Portfolio simulator: integer-share rebalancing with fees and spread slippage."""

from .costs import CostModel, estimate_spread
from .ledger import PortfolioLedger, rebalance
from .market import MarketEnv, StepResult, sortino_reward
from .trace import StepRecord, StepTraceWriter

__all__ = [
    "CostModel",
    "MarketEnv",
    "PortfolioLedger",
    "StepRecord",
    "StepResult",
    "StepTraceWriter",
    "estimate_spread",
    "rebalance",
    "sortino_reward",
]
