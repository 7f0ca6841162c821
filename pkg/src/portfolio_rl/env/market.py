"""
Episodic portfolio simulator over an aligned dataset.

Each step rebalances at today's closes, advances one day and revalues at
the new closes. The reward is the Sortino ratio of the episode's log
returns so far.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, NamedTuple, Sequence

import numpy as np
from loguru import logger

from ..errors import DatasetTooShortError, EpisodeStateError
from .costs import CostModel
from .ledger import PortfolioLedger, rebalance
from .trace import StepRecord, StepTraceWriter

if TYPE_CHECKING:
    from ..data.dataset import AlignedDataset

DOWNSIDE_FLOOR = 1e-8
REWARD_CAP = 10.0


def sortino_reward(
    returns: Sequence[float], floor: float = DOWNSIDE_FLOOR, cap: float = REWARD_CAP
) -> float:
    """
    mean(r) / sqrt(mean(min(r, 0)^2)). When the downside is below `floor` the
    result is mean/floor clipped to +-cap.
    """
    r = np.asarray(returns, dtype=np.float64)
    if r.size == 0:
        return 0.0
    mean = float(r.mean())
    downside = math.sqrt(float(np.mean(np.minimum(r, 0.0) ** 2)))
    if downside < floor:
        return float(np.clip(mean / floor, -cap, cap))
    return mean / downside


class StepResult(NamedTuple):
    observation: np.ndarray
    reward: float
    terminal: bool


class MarketEnv:
    def __init__(
        self,
        dataset: "AlignedDataset",
        window_len: int = 50,
        max_episode_len: int = 50,
        cost_model: CostModel | None = None,
        initial_cash: float = 100_000.0,
        trace_path: str | None = None,
    ):
        if window_len < 1 or max_episode_len < 1:
            raise ValueError("window_len and max_episode_len must be >= 1")
        if dataset.num_days < window_len + 1:
            raise DatasetTooShortError(
                f"dataset has {dataset.num_days} days, need at least {window_len + 1}"
            )
        self.dataset = dataset
        self.window_len = window_len
        self.max_episode_len = max_episode_len
        self.cost_model = cost_model or CostModel(dataset.spreads)
        self.initial_cash = initial_cash
        self._trace = StepTraceWriter(trace_path, dataset.num_assets) if trace_path else None

        self.ledger: PortfolioLedger | None = None
        self.day = -1
        self.start_day = -1
        self.steps = 0
        self.terminal = True

    @property
    def num_assets(self) -> int:
        return self.dataset.num_assets

    def admissible_start_days(self, limit: int | None = None) -> range:
        """
        Start days with a full window behind and at least one day ahead. With
        `limit`, whole episodes must also end before day `limit`.
        """
        first = self.window_len - 1
        stop = self.dataset.num_days - 1
        if limit is not None:
            stop = min(stop, limit - self.max_episode_len)
        if stop <= first:
            raise DatasetTooShortError(
                f"no admissible start day (window {self.window_len}, "
                f"episode {self.max_episode_len}, days {self.dataset.num_days}, limit {limit})"
            )
        return range(first, stop)

    def observation(self, day: int) -> np.ndarray:
        """(5, L, m+1) window ending at `day`; row 0 is `day` itself."""
        rows = self.dataset.features[day - self.window_len + 1 : day + 1]
        return np.ascontiguousarray(rows[::-1].transpose(1, 0, 2))

    def reset(self, start_day: int, initial_cash: float | None = None) -> np.ndarray:
        if start_day - self.window_len + 1 < 0:
            raise EpisodeStateError(
                f"start day {start_day} leaves less than {self.window_len} days of history"
            )
        if start_day + 1 > self.dataset.num_days - 1:
            raise EpisodeStateError(f"start day {start_day} has no following day")
        cash = self.initial_cash if initial_cash is None else initial_cash
        self.ledger = PortfolioLedger.all_cash(cash, self.num_assets)
        self.day = self.start_day = start_day
        self.steps = 0
        self.terminal = False
        logger.debug(f"[env] reset day={start_day} cash={cash}")
        return self.observation(start_day)

    def step(self, action: np.ndarray) -> StepResult:
        if self.ledger is None:
            raise EpisodeStateError("step called before reset")
        if self.terminal:
            raise EpisodeStateError("step called after the episode terminated")

        today = self.dataset.closes(self.day)
        p_prev = self.ledger.valuation(today)
        ledger = rebalance(self.ledger, action, today, self.cost_model, self.day)

        self.day += 1
        p_new = ledger.valuation(self.dataset.closes(self.day))
        r = math.log(p_new) - math.log(p_prev)
        ledger.value = p_new
        ledger.last_return = r
        ledger.episode_returns.append(r)
        reward = sortino_reward(ledger.episode_returns)
        self.ledger = ledger
        self.steps += 1
        self.terminal = self.steps >= self.max_episode_len or self.day >= self.dataset.num_days - 1

        if self._trace is not None:
            self._trace.append(
                StepRecord(
                    day=self.day,
                    date=self.dataset.dates[self.day],
                    action=np.asarray(action, dtype=np.float64).tolist(),
                    shares=ledger.shares.tolist(),
                    cost=ledger.last_cost,
                    value=p_new,
                    reward=reward,
                )
            )
        return StepResult(self.observation(self.day), reward, self.terminal)
