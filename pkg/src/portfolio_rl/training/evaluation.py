"""
Greedy backtests of agents and baselines through the same simulator.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel

from ..agent import Actor, DDPGAgent, act
from ..baselines import MetricReport, Policy
from ..data import AlignedDataset
from ..env import CostModel, MarketEnv
from ..errors import CheckpointError, DatasetTooShortError
from .config import TrainConfig, load_config
from .trainer import CONFIG_SNAPSHOT, build_cost_model

VALUES_FILE = "values.csv"
METRICS_FILE = "metrics.json"


class EvaluationReport(BaseModel):
    """
    Row k holds the value at the close of `dates[k]` and the weights that were
    in force over the period ending there; row 0 is the all-cash start.
    """

    policy: str
    symbols: list[str]
    dates: list[str]
    values: list[float]
    weights: list[list[float]]
    metrics: MetricReport

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            np.asarray(self.weights), columns=["cash"] + [f"w_{s}" for s in self.symbols]
        )
        frame.insert(0, "portfolio_value", self.values)
        frame.insert(0, "date", self.dates)
        return frame

    def write(self, out_dir: str | os.PathLike) -> Path:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(d / VALUES_FILE, index=False, float_format="%.10g")
        payload = {"policy": self.policy, "symbols": self.symbols, **self.metrics.model_dump()}
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        (d / METRICS_FILE).write_text(text, encoding="utf-8")
        return d


class AgentPolicy:
    def __init__(self, actor: Actor):
        self.actor = actor

    def __call__(self, observation: np.ndarray, day: int, env: MarketEnv) -> np.ndarray:
        return act(self.actor, observation)


def run_policy(
    policy: Policy,
    dataset: AlignedDataset,
    *,
    start_day: int,
    num_days: int | None = None,
    window_len: int = 50,
    cost_model: CostModel | None = None,
    initial_cash: float = 100_000.0,
    name: str = "policy",
) -> EvaluationReport:
    """Rebalance daily from `start_day` for `num_days` days (default: to the end of data)."""
    horizon = dataset.num_days - 1 - start_day if num_days is None else num_days
    if start_day + horizon > dataset.num_days - 1:
        raise DatasetTooShortError(
            f"span of {horizon} days from day {start_day} runs past "
            f"the last day {dataset.num_days - 1}"
        )
    if horizon < 2 or start_day + 2 > dataset.num_days - 1:
        raise DatasetTooShortError(f"backtest needs at least 2 days after day {start_day}")
    env = MarketEnv(dataset, window_len, horizon, cost_model, initial_cash)
    obs = env.reset(start_day)
    dates = [dataset.dates[start_day]]
    values = [float(initial_cash)]
    weights = [[1.0] + [0.0] * (dataset.num_assets - 1)]
    terminal = False
    while not terminal:
        action = np.asarray(policy(obs, env.day, env), dtype=np.float64)
        obs, _, terminal = env.step(action)
        dates.append(dataset.dates[env.day])
        values.append(env.ledger.value)
        weights.append(action.tolist())
    report = EvaluationReport(
        policy=name,
        symbols=list(dataset.symbols),
        dates=dates,
        values=values,
        weights=weights,
        metrics=MetricReport.from_values(values),
    )
    logger.info(
        f"[backtest] {name}: {len(values) - 1} days, "
        f"return={report.metrics.cumulative_return_pct:.2f}% "
        f"sharpe={report.metrics.annualized_sharpe:.3f}"
    )
    return report


def load_agent(
    checkpoint_dir: str | os.PathLike, dataset: AlignedDataset
) -> tuple[DDPGAgent, TrainConfig]:
    """Rebuild an agent from a checkpoint directory and its config snapshot."""
    d = Path(checkpoint_dir)
    if not (d / CONFIG_SNAPSHOT).exists():
        raise CheckpointError(f"{d}: no {CONFIG_SNAPSHOT} next to the parameters")
    config = load_config(d / CONFIG_SNAPSHOT)
    agent = DDPGAgent.load(d, config.encoder_config(dataset.num_assets), config.agent_params())
    return agent, config


def evaluate(
    checkpoint_dir: str | os.PathLike,
    dataset: AlignedDataset,
    *,
    start_day: int | None = None,
    num_days: int | None = None,
    end_day: int | None = None,
    zero_cost: bool = False,
) -> EvaluationReport:
    """
    Greedy rollout of a trained actor. The span defaults to the days after
    `train_days`; `end_day` is an alternative to `num_days`.
    """
    agent, config = load_agent(checkpoint_dir, dataset)
    if start_day is None:
        start_day = max(config.window_len - 1, config.train_days or 0)
    if num_days is None and end_day is not None:
        num_days = end_day - start_day
    costs = (
        CostModel.zero(dataset.num_days, dataset.num_assets)
        if zero_cost
        else build_cost_model(config, dataset)
    )
    return run_policy(
        AgentPolicy(agent.actor),
        dataset,
        start_day=start_day,
        num_days=num_days,
        window_len=config.window_len,
        cost_model=costs,
        initial_cash=config.initial_cash,
        name="agent",
    )
