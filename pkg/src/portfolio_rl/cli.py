"""
`prl` command line: train, backtest, synth, report.

Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.
"""

from __future__ import annotations

import contextlib
import json
import sys
from pathlib import Path
from typing import Iterator, List, Optional

import pandas as pd
import typer
from loguru import logger
from prometheus_client import start_http_server

from .baselines import policy_for
from .data import AlignedDataset, align_and_transform, load_directory, synth_gbm, write_csv
from .data.dataset import META_NAME
from .env import CostModel
from .errors import ConfigError, PortfolioRLError
from .manifest import RunManifest, utc_now
from .settings import get_settings
from .training import TrainConfig, evaluate, load_config, run_policy, train as run_training
from .training.evaluation import METRICS_FILE
from .training.trainer import build_cost_model

app = typer.Typer(
    help="Portfolio optimisation with a relative-attention actor-critic", no_args_is_help=True
)

USAGE_ERROR = 2
RUNTIME_ERROR = 1


@app.callback()
def main() -> None:
    settings = get_settings()
    logger.remove()
    logger.add(sys.stderr, level=settings.log_level)
    if settings.log_file:
        logger.add(settings.log_file, level=settings.log_level, rotation="10 MB")


@contextlib.contextmanager
def _exit_codes() -> Iterator[None]:
    try:
        yield
    except ConfigError as exc:
        logger.error(str(exc))
        raise typer.Exit(code=USAGE_ERROR)
    except (PortfolioRLError, OSError, ValueError) as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        raise typer.Exit(code=RUNTIME_ERROR)


def _load_dataset(data_dir: Path, spread_window: int | None = 30) -> AlignedDataset:
    if (data_dir / META_NAME).exists():
        return AlignedDataset.load(data_dir)
    return align_and_transform(load_directory(data_dir), spread_window=spread_window)


def _day_index(dataset: AlignedDataset, when: Optional[str], *, first: bool) -> Optional[int]:
    """First day on/after `when` (first=True) or last day on/before it."""
    if when is None:
        return None
    dates = pd.Index(dataset.dates)
    if first:
        pos = int(dates.searchsorted(when, side="left"))
        if pos >= len(dates):
            raise ValueError(f"start date {when} is after the last day {dates[-1]}")
    else:
        pos = int(dates.searchsorted(when, side="right")) - 1
        if pos < 0:
            raise ValueError(f"end date {when} is before the first day {dates[0]}")
    return pos


@app.command("train")
def train_cmd(
    config_path: Path = typer.Argument(..., help="key = value training config"),
    data_dir: Path = typer.Argument(
        ..., help="Directory of per-asset OHLCV CSVs or a dataset cache"
    ),
    out_dir: Path = typer.Argument(..., help="Output directory for checkpoints and logs"),
):
    """Train an agent; writes checkpoints, run_log.csv and run_manifest.json."""
    settings = get_settings()
    with _exit_codes():
        config = load_config(config_path)
        started = utc_now()
        dataset = _load_dataset(data_dir, config.spread_window)
        if settings.metrics_port:
            start_http_server(settings.metrics_port)
            logger.info(f"[cli] metrics exported on :{settings.metrics_port}")
        report = run_training(config, dataset, out_dir, trace_steps=settings.trace_steps)
        manifest = RunManifest(
            config_text=config.to_text(),
            config_fingerprint=config.fingerprint(),
            seed=config.seed,
            dataset_files=RunManifest.hash_inputs(p for p in data_dir.iterdir() if p.is_file()),
            started_at=started,
            finished_at=utc_now(),
        )
        manifest.collect_artifacts(out_dir)
        manifest.write(out_dir)
    typer.echo(report.model_dump_json(indent=2))


@app.command("backtest")
def backtest_cmd(
    policy: str = typer.Argument(..., help="Checkpoint directory, 'ucrp' or 'mpt'"),
    data_dir: Path = typer.Argument(...),
    out_dir: Path = typer.Argument(...),
    start: Optional[str] = typer.Option(None, "--start", help="First date (ISO)"),
    end: Optional[str] = typer.Option(None, "--end", help="Last date (ISO)"),
    zero_cost: bool = typer.Option(False, "--zero-cost", help="Disable fees and slippage"),
    config_path: Optional[Path] = typer.Option(None, "--config", help="Config for baseline runs"),
):
    """Greedy daily-rebalanced backtest; writes values.csv and metrics.json."""
    checkpoint = Path(policy)
    is_checkpoint = checkpoint.is_dir()
    if not is_checkpoint and policy.lower() not in ("ucrp", "mpt"):
        logger.error(
            f"unknown policy '{policy}' (expected a checkpoint directory, 'ucrp' or 'mpt')"
        )
        raise typer.Exit(code=USAGE_ERROR)

    with _exit_codes():
        config = load_config(config_path) if config_path else TrainConfig()
        dataset = _load_dataset(data_dir, config.spread_window)
        start_day = _day_index(dataset, start, first=True)
        end_day = _day_index(dataset, end, first=False)
        if is_checkpoint:
            report = evaluate(
                checkpoint, dataset, start_day=start_day, end_day=end_day, zero_cost=zero_cost
            )
        else:
            first = config.window_len - 1 if start_day is None else start_day
            num_days = None if end_day is None else end_day - first
            costs = (
                CostModel.zero(dataset.num_days, dataset.num_assets)
                if zero_cost
                else build_cost_model(config, dataset)
            )
            report = run_policy(
                policy_for(policy),
                dataset,
                start_day=first,
                num_days=num_days,
                window_len=config.window_len,
                cost_model=costs,
                initial_cash=config.initial_cash,
                name=policy.lower(),
            )
        report.write(out_dir)
    typer.echo(report.metrics.model_dump_json(indent=2))


@app.command("synth")
def synth_cmd(
    out_dir: Path = typer.Argument(...),
    assets: int = typer.Option(2, "--assets", min=1),
    days: int = typer.Option(500, "--days", min=2),
    drift: Optional[List[float]] = typer.Option(
        None, "--drift", help="Per-day log drift; repeat per asset"
    ),
    volatility: Optional[List[float]] = typer.Option(
        None, "--volatility", help="Per-day log volatility"
    ),
    seed: int = typer.Option(0, "--seed"),
    intraday: float = typer.Option(0.002, "--intraday", help="High/low widening factor"),
):
    """Write geometric-random-walk OHLCV CSVs, one per asset."""
    with _exit_codes():
        series = synth_gbm(
            assets,
            days,
            drift=drift if drift else 0.0,
            volatility=volatility if volatility else 0.01,
            seed=seed,
            intraday=intraday,
        )
        for s in series:
            write_csv(s, out_dir / f"{s.symbol}.csv")
    logger.info(f"[cli] wrote {len(series)} synthetic assets x {days} days to {out_dir}")


@app.command("report")
def report_cmd(
    run_dirs: Optional[List[Path]] = typer.Argument(None, help="Backtest output directories"),
    out: Path = typer.Option(..., "--out", help="Comparison CSV to write"),
):
    """Merge backtest metrics into one comparison table."""
    if not run_dirs:
        logger.error("report needs at least one backtest directory")
        raise typer.Exit(code=USAGE_ERROR)
    with _exit_codes():
        rows = []
        for d in run_dirs:
            metrics_path = d / METRICS_FILE
            if not metrics_path.exists():
                raise FileNotFoundError(f"{metrics_path} not found")
            payload = json.loads(metrics_path.read_text(encoding="utf-8"))
            rows.append(
                {
                    "model": f"{payload.get('policy', 'policy')}:{d.name}",
                    "cumulative_return_pct": payload["cumulative_return_pct"],
                    "annualized_sharpe": payload["annualized_sharpe"],
                    "annualized_sortino": payload["annualized_sortino"],
                    "max_drawdown": payload["max_drawdown"],
                }
            )
        out.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(rows).to_csv(out, index=False, float_format="%.10g")
    typer.echo(str(out))


if __name__ == "__main__":  # pragma: no cover
    app()
