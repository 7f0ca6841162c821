"""
Stack of pre-norm encoder layers over the (time, asset) grid.

Each layer runs layer-norm -> 2D attention -> gate, then layer-norm ->
position-wise feed-forward -> gate. With gating disabled both gates are
plain residual additions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ConfigError, ShapeError
from ..tensor import Tensor, as_tensor, permute, relu
from .attention import RelAttentionConfig, RelativeAttention2D
from .gating import GatingUnit
from .layers import LayerNorm, Linear, Module

LayerHook = Callable[[int, Tensor, Tensor], None]


@dataclass(frozen=True)
class EncoderConfig:
    window_len: int
    num_assets: int
    model_dim: int = 128
    heads: int = 8
    ffn_dim: int = 256
    layers: int = 2
    num_features: int = 5
    gate_bias: float = 2.0
    relative: bool = True
    gated: bool = True
    time_encoding: bool = True

    def __post_init__(self) -> None:
        if self.layers < 1:
            raise ConfigError("encoder needs at least one layer", key="layers")
        if self.ffn_dim < 1 or self.num_features < 1:
            raise ConfigError("ffn_dim and num_features must be positive", key="ffn_dim")
        self.attention_config()

    def attention_config(self) -> RelAttentionConfig:
        return RelAttentionConfig(self.window_len, self.num_assets, self.model_dim, self.heads)


def sinusoidal_encoding(length: int, dim: int) -> np.ndarray:
    """Fixed sin/cos table of shape (length, dim)."""
    pos = np.arange(length)[:, None]
    rates = 1.0 / np.power(10000.0, (2 * (np.arange(dim) // 2)) / dim)
    angles = pos * rates[None, :]
    table = np.zeros((length, dim))
    table[:, 0::2] = np.sin(angles[:, 0::2])
    table[:, 1::2] = np.cos(angles[:, 1::2])
    return table


class EncoderLayer(Module):
    def __init__(self, cfg: EncoderConfig, rng: np.random.Generator):
        D = cfg.model_dim
        self.norm_attn = LayerNorm(D)
        self.attn = RelativeAttention2D(cfg.attention_config(), rng, relative=cfg.relative)
        self.gate_attn = GatingUnit(D, rng, cfg.gate_bias) if cfg.gated else None
        self.norm_ffn = LayerNorm(D)
        self.ffn_in = Linear(D, cfg.ffn_dim, rng)
        self.ffn_out = Linear(cfg.ffn_dim, D, rng)
        self.gate_ffn = GatingUnit(D, rng, cfg.gate_bias) if cfg.gated else None

    def __call__(self, x: Tensor) -> Tensor:
        y = self.attn(self.norm_attn(x))
        x = self.gate_attn(x, y) if self.gate_attn is not None else x + y
        y = self.ffn_out(relu(self.ffn_in(self.norm_ffn(x))))
        return self.gate_ffn(x, y) if self.gate_ffn is not None else x + y


class EncoderStack(Module):
    def __init__(self, cfg: EncoderConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.input_proj = Linear(cfg.num_features, cfg.model_dim, rng)
        self.layers = [EncoderLayer(cfg, rng) for _ in range(cfg.layers)]
        self._time_table = (
            sinusoidal_encoding(cfg.window_len, cfg.model_dim)[:, None, :]
            if cfg.time_encoding
            else None
        )

    def __call__(self, features, hook: LayerHook | None = None) -> Tensor:
        return encode(self, features, hook=hook)


def encode(stack: EncoderStack, features, hook: LayerHook | None = None) -> Tensor:
    """
    Encode a (F, L, H) feature window, or a (B, F, L, H) batch, into
    (L, H, D) / (B, L, H, D) representations.

    `hook(i, layer_input, layer_output)` is called after every layer.
    """
    cfg = stack.cfg
    f = as_tensor(features)
    expected = (cfg.num_features, cfg.window_len, cfg.num_assets)
    if f.ndim not in (3, 4) or f.shape[-3:] != expected:
        raise ShapeError("encode", f.shape, expected, detail="feature window")
    axes = (1, 2, 0) if f.ndim == 3 else (0, 2, 3, 1)
    x = stack.input_proj(permute(f, axes))
    if stack._time_table is not None:
        x = x + stack._time_table
    for i, layer in enumerate(stack.layers):
        out = layer(x)
        if hook is not None:
            hook(i, x, out)
        x = out
    return x
