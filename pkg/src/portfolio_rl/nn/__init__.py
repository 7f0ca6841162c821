"""Network building blocks: 2D relative attention, gating and the encoder stack."""

from .attention import (
    RelAttentionConfig,
    RelativeAttention2D,
    attention_2d,
    relative_logits,
    relative_scores,
    skew,
)
from .encoder import EncoderConfig, EncoderLayer, EncoderStack, encode, sinusoidal_encoding
from .gating import GatingUnit, gate
from .layers import LayerNorm, Linear, Module

__all__ = [
    "EncoderConfig",
    "EncoderLayer",
    "EncoderStack",
    "GatingUnit",
    "LayerNorm",
    "Linear",
    "Module",
    "RelAttentionConfig",
    "RelativeAttention2D",
    "attention_2d",
    "encode",
    "gate",
    "relative_logits",
    "relative_scores",
    "sinusoidal_encoding",
    "skew",
]
