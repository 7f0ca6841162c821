"""
Two-dimensional self-attention over a (time, asset) grid.

Positions of an L x H grid are flattened row-major into L*H tokens. With
`relative=True` each logit gets two extra terms: one from a learned
embedding indexed by the distance between the two time rows, one from a
second embedding indexed by the distance between the two asset columns.
Distances are symmetric; both are produced with the pad-reshape-drop skew
so no (N, N, d) tensor is ever materialised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ShapeError
from ..tensor import (
    Parameter,
    Tensor,
    as_tensor,
    gather,
    matmul,
    pad,
    permute,
    reshape,
    scale,
    slice_,
    softmax,
)
from .layers import Module, glorot


@dataclass(frozen=True)
class RelAttentionConfig:
    window_len: int
    num_assets: int
    model_dim: int
    heads: int

    def __post_init__(self) -> None:
        for key in ("window_len", "num_assets", "model_dim", "heads"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be positive", key=key)
        if self.model_dim % self.heads:
            raise ConfigError(
                f"model_dim {self.model_dim} is not divisible by heads {self.heads}", key="heads"
            )

    @property
    def head_dim(self) -> int:
        return self.model_dim // self.heads


def skew(t: Tensor) -> Tensor:
    """
    Left-pad one zero column, view as (N+1, N), drop the first row.

    For a square trailing block T, entry (i, j) of the result with j <= i
    equals T[i, N-1-i+j]. Entries above the diagonal are unspecified.
    """
    t = as_tensor(t)
    if t.ndim < 2 or t.shape[-1] != t.shape[-2]:
        raise ShapeError("skew", t.shape, detail="trailing block must be square")
    n = t.shape[-1]
    lead = t.shape[:-2]
    batch = int(np.prod(lead)) if lead else 1
    x = reshape(t, (batch, n, n))
    x = pad(x, ((0, 0), (0, 0), (1, 0)))
    x = reshape(x, (batch, n + 1, n))
    x = slice_(x, (slice(None), slice(1, None), slice(None)))
    return reshape(x, lead + (n, n))


def _masks(n: int) -> tuple[np.ndarray, np.ndarray]:
    lower = np.tril(np.ones((n, n)))
    return lower, 1.0 - lower


def relative_scores(raw: Tensor) -> Tensor:
    """
    Map raw query/embedding products to symmetric relative scores.

    raw[..., i, k] is q_i . E[k] where E is ordered from distance N-1 down to
    distance 0. The result P[..., i, j] equals q_i . E[N-1-|i-j|].
    """
    raw = as_tensor(raw)
    if raw.ndim < 2 or raw.shape[-1] != raw.shape[-2]:
        raise ShapeError("relative_scores", raw.shape, detail="trailing block must be square")
    n = raw.shape[-1]
    rev = np.arange(n)[::-1]
    lower_mask, upper_mask = _masks(n)
    below = skew(raw)
    above = gather(gather(skew(gather(raw, rev, axis=-2)), rev, axis=-2), rev, axis=-1)
    return below * lower_mask + above * upper_mask


def relative_logits(q: Tensor, e: Tensor) -> Tensor:
    """Relative-position logits for queries q (h, N, d) against embeddings e (h, N, d)."""
    q, e = as_tensor(q), as_tensor(e)
    if q.ndim != 3 or e.ndim != 3 or q.shape != e.shape:
        raise ShapeError("relative_logits", q.shape, e.shape, detail="expected (h, N, d) pairs")
    return relative_scores(matmul(q, permute(e, (0, 2, 1))))


def _check_inputs(
    x: Tensor, w_q: Tensor, w_k: Tensor, w_v: Tensor, cfg: RelAttentionConfig
) -> None:
    L, H, D = cfg.window_len, cfg.num_assets, cfg.model_dim
    if x.shape[-3:] != (L, H, D) or x.ndim not in (3, 4):
        raise ShapeError("attention_2d", x.shape, (L, H, D), detail="input grid")
    for w in (w_q, w_k, w_v):
        if w.shape != (D, D):
            raise ShapeError("attention_2d", w.shape, (D, D), detail="projection weight")


def attention_2d(
    x: Tensor,
    w_q: Tensor,
    w_k: Tensor,
    w_v: Tensor,
    e_time: Tensor | None,
    e_asset: Tensor | None,
    cfg: RelAttentionConfig,
    *,
    relative: bool = True,
    return_attention: bool = False,
) -> Tensor | tuple[Tensor, Tensor]:
    """
    Multi-head attention over every (time, asset) position of x.

    x is (L, H, D) or (B, L, H, D); the output has the same shape. With
    `return_attention` the softmax weights, (h, L*H, L*H) or (B, h, L*H, L*H),
    are returned alongside.
    """
    x = as_tensor(x)
    _check_inputs(x, w_q, w_k, w_v, cfg)
    L, H, D = cfg.window_len, cfg.num_assets, cfg.model_dim
    h, dh = cfg.heads, cfg.head_dim
    batched = x.ndim == 4
    if not batched:
        x = reshape(x, (1, L, H, D))
    B = x.shape[0]

    def heads_of(w: Tensor) -> Tensor:
        return permute(reshape(matmul(x, w), (B, L, H, h, dh)), (0, 3, 1, 2, 4))

    q, k, v = heads_of(w_q), heads_of(w_k), heads_of(w_v)
    qf = reshape(q, (B, h, L * H, dh))
    kf = reshape(k, (B, h, L * H, dh))
    vf = reshape(v, (B, h, L * H, dh))

    logits = matmul(qf, permute(kf, (0, 1, 3, 2)))
    if relative:
        if e_time is None or e_asset is None:
            raise ShapeError("attention_2d", detail="relative attention needs both embeddings")
        if e_time.shape != (h, L, dh) or e_asset.shape != (h, H, dh):
            raise ShapeError("attention_2d", e_time.shape, e_asset.shape, detail="embeddings")
        grid = reshape(logits, (B, h, L, H, L, H))

        e_h = reshape(permute(e_asset, (0, 2, 1)), (1, h, 1, dh, H))
        p_asset = relative_scores(matmul(q, e_h))
        p_asset = reshape(p_asset, (B, h, L, H, 1, H))

        e_l = reshape(permute(e_time, (0, 2, 1)), (1, h, 1, dh, L))
        p_time = relative_scores(matmul(permute(q, (0, 1, 3, 2, 4)), e_l))
        p_time = reshape(permute(p_time, (0, 1, 3, 2, 4)), (B, h, L, H, L, 1))

        logits = reshape(grid + p_asset + p_time, (B, h, L * H, L * H))

    weights = softmax(scale(logits, 1.0 / np.sqrt(dh)))
    out = reshape(matmul(weights, vf), (B, h, L, H, dh))
    out = reshape(permute(out, (0, 2, 3, 1, 4)), (B, L, H, D))
    if not batched:
        out = reshape(out, (L, H, D))
        weights = reshape(weights, (h, L * H, L * H))
    return (out, weights) if return_attention else out


class RelativeAttention2D(Module):
    def __init__(self, cfg: RelAttentionConfig, rng: np.random.Generator, relative: bool = True):
        D, h, dh = cfg.model_dim, cfg.heads, cfg.head_dim
        self.cfg = cfg
        self.relative = relative
        self.w_q = Parameter(glorot(rng, D, D, (D, D)))
        self.w_k = Parameter(glorot(rng, D, D, (D, D)))
        self.w_v = Parameter(glorot(rng, D, D, (D, D)))
        self.e_time = (
            Parameter(rng.normal(0.0, 0.02, (h, cfg.window_len, dh))) if relative else None
        )
        self.e_asset = (
            Parameter(rng.normal(0.0, 0.02, (h, cfg.num_assets, dh))) if relative else None
        )

    def __call__(self, x: Tensor, return_attention: bool = False):
        return attention_2d(
            x,
            self.w_q,
            self.w_k,
            self.w_v,
            self.e_time,
            self.e_asset,
            self.cfg,
            relative=self.relative,
            return_attention=return_attention,
        )
