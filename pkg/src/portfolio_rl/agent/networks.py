"""Actor and critic heads on top of independent encoder trunks."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from ..nn import EncoderConfig, EncoderStack, Linear, Module
from ..tensor import Tensor, as_tensor, concat, relu, reshape, slice_, softmax


def _batched(states) -> tuple[Tensor, bool]:
    s = as_tensor(states)
    if s.ndim == 3:
        return reshape(s, (1,) + s.shape), False
    return s, True


class Actor(Module):
    """Per-asset linear readout of the most recent time row, softmaxed over assets."""

    def __init__(self, cfg: EncoderConfig, rng: np.random.Generator):
        self.trunk = EncoderStack(cfg, rng)
        self.head = Linear(cfg.model_dim, 1, rng)
        self.num_assets = cfg.num_assets

    def __call__(self, states) -> Tensor:
        s, batched = _batched(states)
        z = self.trunk(s)
        latest = slice_(z, (slice(None), 0))
        logits = reshape(self.head(latest), (s.shape[0], self.num_assets))
        weights = softmax(logits)
        return weights if batched else reshape(weights, (self.num_assets,))


class Critic(Module):
    """Q(s, a): mean-pooled latest row concatenated with a projected action."""

    def __init__(self, cfg: EncoderConfig, rng: np.random.Generator):
        D = cfg.model_dim
        self.trunk = EncoderStack(cfg, rng)
        self.action_proj = Linear(cfg.num_assets, D, rng)
        self.hidden = Linear(2 * D, D, rng)
        self.value = Linear(D, 1, rng)
        self.num_assets = cfg.num_assets

    def __call__(self, states, actions) -> Tensor:
        s, batched = _batched(states)
        a = as_tensor(actions)
        if a.ndim == 1:
            a = reshape(a, (1, a.shape[0]))
        if a.shape != (s.shape[0], self.num_assets):
            raise ShapeError("critic", s.shape, a.shape, detail="one action per state")
        pooled = slice_(self.trunk(s), (slice(None), 0)).mean(axis=1)
        joint = concat([pooled, self.action_proj(a)], axis=-1)
        q = reshape(self.value(relu(self.hidden(joint))), (s.shape[0],))
        return q if batched else reshape(q, ())
