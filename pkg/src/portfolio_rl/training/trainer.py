"""
Asynchronous actor-critic training.

Exploration workers and the learner are asyncio tasks; episode rollouts and
learner iterations run in threads via `asyncio.to_thread`. Workers act with
the most recently published actor snapshot, which the learner replaces
(never mutates) after every iteration. In serialized mode one task
alternates an episode with its learner iterations, which makes a run
reproducible from its seed.
"""

from __future__ import annotations

import asyncio
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel

from ..agent import DDPGAgent, OUNoise
from ..data import AlignedDataset
from ..env import CostModel, MarketEnv
from ..errors import DatasetTooShortError
from ..memory import HMemory, ReplayBuffer, sample
from ..metrics import (
    LEARNER_ACTOR_OBJECTIVE,
    LEARNER_CRITIC_LOSS,
    LEARNER_UPDATE_LATENCY,
    LEARNER_UPDATES,
)
from .config import TrainConfig
from .worker import EpisodeResult, EpisodeWorker

RUN_LOG_COLUMNS = [
    "episode",
    "worker_id",
    "start_day",
    "total_reward",
    "critic_loss",
    "actor_J",
    "updates",
]
CONFIG_SNAPSHOT = "config.txt"
FINAL_CHECKPOINT = "final"


class TrainingReport(BaseModel):
    episodes: int
    updates: int
    best_reward: float | None
    run_log: str
    checkpoints: list[str]
    final_checkpoint: str | None
    config_fingerprint: str


@dataclass
class _LearnerStats:
    critic_loss: float = float("nan")
    actor_objective: float = float("nan")
    updates: int = 0


def build_cost_model(config: TrainConfig, dataset: AlignedDataset) -> CostModel:
    if config.zero_cost:
        return CostModel.zero(dataset.num_days, dataset.num_assets)
    return CostModel(dataset.spreads, config.fee_rate, config.slippage_coefficient)


class Trainer:
    def __init__(
        self,
        config: TrainConfig,
        dataset: AlignedDataset,
        out_dir: str | os.PathLike,
        *,
        trace_steps: bool = False,
    ):
        self.config = config
        self.dataset = dataset
        if dataset.num_days < config.window_len + config.max_episode_len:
            raise DatasetTooShortError(
                f"dataset has {dataset.num_days} days, training needs at least "
                f"{config.window_len + config.max_episode_len}"
            )
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

        root = np.random.SeedSequence(config.seed)
        agent_seed, sampler_seed, *worker_seeds = root.spawn(2 + config.num_workers)
        self.agent = DDPGAgent(
            config.encoder_config(dataset.num_assets), config.agent_params(), seed=agent_seed
        )
        self.buffer = ReplayBuffer(config.buffer_capacity)
        self.hmemory = HMemory(config.hmemory_capacity)
        self._sampler = np.random.default_rng(sampler_seed)

        cost_model = build_cost_model(config, dataset)
        self.workers: list[EpisodeWorker] = []
        for i, seed in enumerate(worker_seeds):
            env_rng, noise_rng = (np.random.default_rng(s) for s in seed.spawn(2))
            env = MarketEnv(
                dataset,
                window_len=config.window_len,
                max_episode_len=config.max_episode_len,
                cost_model=cost_model,
                initial_cash=config.initial_cash,
                trace_path=(
                    str(self.out_dir / "traces" / f"worker_{i}.csv") if trace_steps else None
                ),
            )
            noise = OUNoise(
                dataset.num_assets,
                theta=config.ou_theta,
                mu=config.ou_mu,
                sigma=config.ou_sigma,
                dt=config.ou_dt,
                rng=noise_rng,
            )
            self.workers.append(
                EpisodeWorker(
                    worker_id=i,
                    env=env,
                    noise=noise,
                    rng=env_rng,
                    start_days=env.admissible_start_days(config.train_days),
                )
            )

        self._snapshot = self.agent.snapshot()
        self._agent_lock = threading.Lock()
        self._stats = _LearnerStats()
        self._rows: list[dict] = []
        self._checkpoints: list[str] = []
        self._claimed = 0
        self._completed = 0

    # -- learner ---------------------------------------------------------

    def _learner_ready(self) -> bool:
        return len(self.buffer) >= self.config.learner_threshold

    def _learn_once(self) -> None:
        """Blocking; sample, update both networks, soft-update targets, republish."""
        started = time.perf_counter()
        cfg = self.config
        batch = sample(self.buffer, self.hmemory, cfg.batch_size, cfg.rho, self._sampler)
        with self._agent_lock:
            loss, objective = self.agent.update(batch)
            self._snapshot = self.agent.snapshot()
        self._stats.critic_loss = loss
        self._stats.actor_objective = objective
        self._stats.updates += 1
        LEARNER_UPDATES.inc()
        LEARNER_CRITIC_LOSS.set(loss)
        LEARNER_ACTOR_OBJECTIVE.set(objective)
        LEARNER_UPDATE_LATENCY.observe(time.perf_counter() - started)
        logger.debug(
            f"[learner] update {self._stats.updates} critic_loss={loss:.6g} actor_J={objective:.6g}"
        )

    def _update_budget(self) -> int:
        return self._completed * self.config.updates_per_episode

    # -- bookkeeping -----------------------------------------------------

    def _record(self, result: EpisodeResult) -> None:
        self.buffer.extend(result.transitions)
        self.hmemory.offer_episode(result.transitions, result.total_reward)
        self._completed += 1
        self._rows.append(
            {
                "episode": result.episode,
                "worker_id": result.worker_id,
                "start_day": result.start_day,
                "total_reward": result.total_reward,
                "critic_loss": self._stats.critic_loss,
                "actor_J": self._stats.actor_objective,
                "updates": self._stats.updates,
            }
        )
        logger.info(
            f"[worker {result.worker_id}] episode {result.episode} "
            f"reward={result.total_reward:.4f} replay={len(self.buffer)}"
        )

    def _stamp(self, row: dict) -> None:
        row["critic_loss"] = self._stats.critic_loss
        row["actor_J"] = self._stats.actor_objective
        row["updates"] = self._stats.updates

    def _finish_row(self) -> None:
        """Attach the learner stats reached after an episode's updates to its row."""
        if self._rows:
            self._stamp(self._rows[-1])

    def _charge_update(self) -> None:
        """Update u is charged to row (u - 1) // updates_per_episode in completion order."""
        k = (self._stats.updates - 1) // self.config.updates_per_episode
        if 0 <= k < len(self._rows):
            self._stamp(self._rows[k])

    @property
    def run_log_path(self) -> Path:
        return self.out_dir / "run_log.csv"

    def _write_run_log(self) -> None:
        frame = pd.DataFrame(list(self._rows), columns=RUN_LOG_COLUMNS)
        frame.to_csv(self.run_log_path, index=False)

    def _checkpoint(self, name: str) -> Path:
        path = self.out_dir / "checkpoints" / name
        with self._agent_lock:
            self.agent.save(path)
        (path / CONFIG_SNAPSHOT).write_text(self.config.to_text(), encoding="utf-8")
        self._write_run_log()
        self._checkpoints.append(str(path))
        logger.info(f"[trainer] checkpoint {name} written ({self._completed} episodes)")
        return path

    async def _maybe_checkpoint(self) -> None:
        if self._completed % self.config.checkpoint_every == 0:
            await asyncio.to_thread(self._checkpoint, f"episode_{self._completed:06d}")

    # -- modes -------------------------------------------------------------

    async def _run_serialized(self) -> None:
        worker = self.workers[0]
        for episode in range(self.config.total_episodes):
            result = await asyncio.to_thread(worker.run_episode, self._snapshot, episode)
            self._record(result)
            if self._learner_ready():
                for _ in range(self.config.updates_per_episode):
                    await asyncio.to_thread(self._learn_once)
            else:
                logger.debug(
                    f"[learner] warm-up: replay {len(self.buffer)} "
                    f"< {self.config.learner_threshold}"
                )
            self._finish_row()
            await self._maybe_checkpoint()

    async def _worker_loop(self, worker: EpisodeWorker) -> None:
        logger.info(f"[worker {worker.worker_id}] started")
        try:
            while self._claimed < self.config.total_episodes:
                episode = self._claimed
                self._claimed += 1
                result = await asyncio.to_thread(worker.run_episode, self._snapshot, episode)
                self._record(result)
                await self._maybe_checkpoint()
        except asyncio.CancelledError:
            logger.warning(f"[worker {worker.worker_id}] cancelled")
            raise
        except Exception as exc:
            logger.exception(f"[worker {worker.worker_id}] crashed: {exc}")
            raise
        finally:
            logger.info(f"[worker {worker.worker_id}] stopped")

    async def _learner_loop(self, workers_done: asyncio.Event) -> None:
        logger.info("[learner] started")
        try:
            while True:
                pending = self._stats.updates < self._update_budget()
                if pending and self._learner_ready():
                    await asyncio.to_thread(self._learn_once)
                    self._charge_update()
                    continue
                if workers_done.is_set():
                    break
                await asyncio.sleep(0.01)
        finally:
            logger.info(f"[learner] stopped after {self._stats.updates} updates")

    async def _run_concurrent(self) -> None:
        done = asyncio.Event()
        learner = asyncio.create_task(self._learner_loop(done), name="learner")
        try:
            await asyncio.gather(
                *(
                    asyncio.create_task(self._worker_loop(w), name=f"episode-worker-{w.worker_id}")
                    for w in self.workers
                )
            )
        finally:
            done.set()
            await learner
            self._finish_row()

    async def run(self) -> TrainingReport:
        cfg = self.config
        mode = "serialized" if cfg.serialized else f"{cfg.num_workers} workers"
        logger.info(
            f"[trainer] starting {cfg.total_episodes} episodes ({mode}), "
            f"config {cfg.fingerprint()}"
        )
        if cfg.serialized:
            await self._run_serialized()
        else:
            await self._run_concurrent()

        final: str | None = None
        if cfg.total_episodes > 0:
            final = str(await asyncio.to_thread(self._checkpoint, FINAL_CHECKPOINT))
        self._write_run_log()
        best = self.hmemory.best_reward
        logger.info(
            f"[trainer] finished: {self._completed} episodes, {self._stats.updates} updates"
        )
        return TrainingReport(
            episodes=self._completed,
            updates=self._stats.updates,
            best_reward=best if np.isfinite(best) else None,
            run_log=str(self.run_log_path),
            checkpoints=list(self._checkpoints),
            final_checkpoint=final,
            config_fingerprint=cfg.fingerprint(),
        )


def train(
    config: TrainConfig,
    dataset: AlignedDataset,
    out_dir: str | os.PathLike,
    *,
    trace_steps: bool = False,
) -> TrainingReport:
    """Synchronous entry point around `Trainer.run`."""
    return asyncio.run(Trainer(config, dataset, out_dir, trace_steps=trace_steps).run())
