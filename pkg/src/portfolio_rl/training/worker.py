"""
Exploration worker: runs whole episodes with a published actor snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from loguru import logger

from ..agent import Actor, OUNoise, act_explore
from ..env import MarketEnv
from ..memory import Transition
from ..metrics import EPISODE_REWARD, EPISODES_COMPLETED


@dataclass
class EpisodeResult:
    worker_id: int
    episode: int
    start_day: int
    total_reward: float
    transitions: list[Transition] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.transitions)


class EpisodeWorker:
    """Owns one simulator, one noise process and one random stream."""

    def __init__(
        self,
        *,
        worker_id: int,
        env: MarketEnv,
        noise: OUNoise,
        rng: np.random.Generator,
        start_days: range,
    ):
        if len(start_days) == 0:
            raise ValueError("start_days must not be empty")
        self.worker_id = worker_id
        self.env = env
        self.noise = noise
        self.rng = rng
        self.start_days = start_days

    def run_episode(self, actor: Actor, episode: int) -> EpisodeResult:
        """Blocking; callers off-load it to a thread."""
        start = int(self.start_days[int(self.rng.integers(len(self.start_days)))])
        state = self.env.reset(start)
        self.noise.reset()
        result = EpisodeResult(self.worker_id, episode, start, 0.0)
        terminal = False
        while not terminal:
            action = act_explore(actor, state, self.noise)
            next_state, reward, terminal = self.env.step(action)
            result.transitions.append(
                Transition(state, action, reward, next_state, terminal, self.worker_id, episode)
            )
            result.total_reward += reward
            state = next_state

        EPISODES_COMPLETED.labels(str(self.worker_id)).inc()
        EPISODE_REWARD.labels(str(self.worker_id)).set(result.total_reward)
        logger.debug(
            f"[worker {self.worker_id}] episode {episode} start={start} "
            f"steps={result.steps} reward={result.total_reward:.4f}"
        )
        return result
