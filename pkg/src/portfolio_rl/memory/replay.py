"""
Uniform replay buffer and HMemory, the record-episode store.

Both are shared between episode workers (producers) and the learner
(consumer) running on different threads, so every public method holds the
instance lock for its whole body.
"""

from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from loguru import logger

from ..errors import ReplayEmptyError
from ..metrics import HMEMORY_EPISODES, REPLAY_SIZE


@dataclass(frozen=True, eq=False)
class Transition:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    terminal: bool
    worker_id: int = 0
    episode: int = 0

    def __post_init__(self) -> None:
        if not math.isfinite(self.reward):
            raise ValueError(f"transition reward must be finite, got {self.reward}")
        if self.state.shape != self.next_state.shape:
            raise ValueError(
                f"state {self.state.shape} and next_state {self.next_state.shape} differ"
            )


class ReplayBuffer:
    """Ring buffer of transitions; the oldest entry is evicted once full."""

    def __init__(self, capacity: int = 100_000):
        if capacity <= 0:
            raise ValueError("capacity must be > 0")
        self._capacity = capacity
        self._items: deque[Transition] = deque(maxlen=capacity)
        self._lock = threading.Lock()

    @property
    def capacity(self) -> int:
        return self._capacity

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)

    def push(self, transition: Transition) -> None:
        with self._lock:
            self._items.append(transition)
            REPLAY_SIZE.set(len(self._items))

    def extend(self, transitions: Sequence[Transition]) -> None:
        with self._lock:
            self._items.extend(transitions)
            REPLAY_SIZE.set(len(self._items))

    def __getitem__(self, index: int) -> Transition:
        with self._lock:
            return self._items[index]

    def _draw(self, rng: np.random.Generator, count: int) -> list[Transition]:
        idx = rng.integers(0, len(self._items), size=count)
        return [self._items[i] for i in idx]


class HMemory:
    """Keeps an episode only when its total reward beats every earlier offer."""

    def __init__(self, capacity: int = 50):
        if capacity <= 0:
            raise ValueError("capacity must be > 0")
        self._episodes: deque[list[Transition]] = deque(maxlen=capacity)
        self._flat: list[Transition] = []
        self.best_reward = -math.inf
        self._lock = threading.Lock()

    @property
    def num_episodes(self) -> int:
        with self._lock:
            return len(self._episodes)

    def __len__(self) -> int:
        with self._lock:
            return len(self._flat)

    def episodes(self) -> list[list[Transition]]:
        with self._lock:
            return [list(ep) for ep in self._episodes]

    def offer_episode(self, episode: Sequence[Transition], episodic_reward: float) -> bool:
        if not episode:
            raise ValueError("offer_episode needs a nonempty episode")
        with self._lock:
            if not episodic_reward > self.best_reward:
                return False
            previous = self.best_reward
            self.best_reward = float(episodic_reward)
            self._episodes.append(list(episode))
            self._flat = [t for ep in self._episodes for t in ep]
            HMEMORY_EPISODES.set(len(self._episodes))
        logger.info(f"[hmemory] new record {episodic_reward:.4f} (previous {previous:.4f})")
        return True

    def _draw(self, rng: np.random.Generator, count: int) -> list[Transition]:
        idx = rng.integers(0, len(self._flat), size=count)
        return [self._flat[i] for i in idx]


def sample(
    buffer: ReplayBuffer,
    hmemory: HMemory | None,
    batch_size: int,
    rho: float,
    rng: np.random.Generator,
) -> list[Transition]:
    """
    Draw `batch_size` transitions; each draw comes from HMemory with
    probability `rho` and from the main buffer otherwise. An empty HMemory
    sends every draw to the main buffer.
    """
    if batch_size <= 0:
        raise ValueError("batch_size must be > 0")
    with buffer._lock:
        if not buffer._items:
            raise ReplayEmptyError("cannot sample from an empty replay buffer")
        if hmemory is None:
            return buffer._draw(rng, batch_size)
        with hmemory._lock:
            from_h = rng.random(batch_size) < rho if hmemory._flat else np.zeros(batch_size, bool)
            n_h = int(from_h.sum())
            drawn_h = iter(hmemory._draw(rng, n_h)) if n_h else iter(())
            drawn_b = iter(buffer._draw(rng, batch_size - n_h))
            return [next(drawn_h) if flag else next(drawn_b) for flag in from_h]
