"""Ornstein-Uhlenbeck exploration noise."""

from __future__ import annotations

import numpy as np


class OUNoise:
    """
    Temporally correlated noise, one component per asset:

        x <- x + theta * (mu - x) * dt + sigma * sqrt(dt) * N(0, I)

    The state persists across steps; call `reset` at episode start.
    """

    def __init__(
        self,
        size: int,
        theta: float = 0.13,
        mu: float = 0.0,
        sigma: float = 0.2,
        dt: float = 1.0,
        rng: np.random.Generator | None = None,
    ):
        if size <= 0:
            raise ValueError("size must be > 0")
        self.size = size
        self.theta = theta
        self.mu = mu
        self.sigma = sigma
        self.dt = dt
        self.rng = rng if rng is not None else np.random.default_rng()
        self.state = np.full(size, mu, dtype=np.float64)

    def reset(self) -> None:
        self.state = np.full(self.size, self.mu, dtype=np.float64)

    def sample(self) -> np.ndarray:
        drift = self.theta * (self.mu - self.state) * self.dt
        shock = self.sigma * np.sqrt(self.dt) * self.rng.standard_normal(self.size)
        self.state = self.state + drift + shock
        return self.state.copy()
