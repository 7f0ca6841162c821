"""
Parameter containers and the small dense layers shared by every network.
"""

from __future__ import annotations

import contextlib
import copy
from typing import Iterator, Mapping

import numpy as np

from ..errors import CheckpointError
from ..tensor import Parameter, Tensor, layer_norm, matmul, reshape


class Module:
    """Walks attributes in assignment order to name parameters deterministically."""

    def named_parameters(self, prefix: str = "") -> dict[str, Parameter]:
        out: dict[str, Parameter] = {}
        for attr, value in vars(self).items():
            name = f"{prefix}{attr}"
            if isinstance(value, Parameter):
                out[name] = value
            elif isinstance(value, Module):
                out.update(value.named_parameters(f"{name}."))
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        out.update(item.named_parameters(f"{name}.{i}."))
        return out

    def parameters(self) -> list[Parameter]:
        return list(self.named_parameters().values())

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters().items()}

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        params = self.named_parameters()
        missing = sorted(set(params) - set(state))
        if missing:
            raise CheckpointError(f"state is missing parameter '{missing[0]}'")
        for name, p in params.items():
            arr = np.asarray(state[name], dtype=np.float64)
            if arr.shape != p.shape:
                raise CheckpointError(
                    f"parameter '{name}' has shape {arr.shape}, expected {p.shape}"
                )
            p.data[...] = arr

    def clone(self) -> "Module":
        """Deep copy with gradients dropped."""
        dup = copy.deepcopy(self)
        dup.zero_grad()
        return dup

    @contextlib.contextmanager
    def frozen(self) -> Iterator[None]:
        """Stop parameters from recording or receiving gradients inside the block."""
        params = self.parameters()
        for p in params:
            p.requires_grad = False
        try:
            yield
        finally:
            for p in params:
                p.requires_grad = True


def glorot(
    rng: np.random.Generator, fan_in: int, fan_out: int, shape: tuple[int, ...]
) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def dense(x: Tensor, weight: Tensor) -> Tensor:
    """x @ weight for any leading shape of x, including a bare vector."""
    if x.ndim == 1:
        return reshape(matmul(reshape(x, (1, x.shape[0])), weight), (weight.shape[-1],))
    return matmul(x, weight)


class Linear(Module):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, bias: bool = True):
        self.weight = Parameter(glorot(rng, in_dim, out_dim, (in_dim, out_dim)))
        self.bias = Parameter(np.zeros(out_dim)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        y = dense(x, self.weight)
        return y + self.bias if self.bias is not None else y


class LayerNorm(Module):
    def __init__(self, dim: int, eps: float = 1e-5):
        self.gain = Parameter(np.ones(dim))
        self.bias = Parameter(np.zeros(dim))
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.gain, self.bias, self.eps)
