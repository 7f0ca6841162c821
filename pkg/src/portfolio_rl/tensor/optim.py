"""
Adam with bias correction over a named parameter set.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..errors import CheckpointError, GradientError
from .core import Tensor


class Adam:
    """Standard Adam; moment state persists across `step` calls."""

    def __init__(
        self,
        params: Mapping[str, Tensor],
        learning_rate: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ) -> None:
        if learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        self.params = dict(params)
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        self.m = {name: np.zeros_like(p.data) for name, p in self.params.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in self.params.items()}

    def step(self) -> None:
        missing = [name for name, p in self.params.items() if p.grad is None]
        if missing:
            raise GradientError(f"adam_step: parameter '{missing[0]}' has no gradient")

        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for name, p in self.params.items():
            g = p.grad
            m = self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            v = self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            p.data -= self.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + self.epsilon)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def state_dict(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {"t": np.array([float(self.t)])}
        for name in self.params:
            out[f"m/{name}"] = self.m[name].copy()
            out[f"v/{name}"] = self.v[name].copy()
        return out

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        try:
            self.t = int(state["t"].reshape(-1)[0])
            for name, p in self.params.items():
                m, v = state[f"m/{name}"], state[f"v/{name}"]
                if m.shape != p.shape or v.shape != p.shape:
                    raise CheckpointError(f"optimizer moment shape mismatch for '{name}'")
                self.m[name] = np.array(m, dtype=np.float64)
                self.v[name] = np.array(v, dtype=np.float64)
        except KeyError as exc:
            raise CheckpointError(f"optimizer state missing entry {exc}") from None


def adam_step(
    params: Mapping[str, Tensor],
    learning_rate: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon: float = 1e-8,
    *,
    state: Adam | None = None,
) -> Adam:
    """One Adam step; pass the returned optimizer back in as `state` to keep moments."""
    opt = state or Adam(params, learning_rate, beta1, beta2, epsilon)
    opt.step()
    return opt
