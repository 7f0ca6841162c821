"""GRU-style gate that replaces the residual connection around each sublayer."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from ..tensor import Parameter, Tensor, as_tensor, sigmoid, tanh
from .layers import Module, dense, glorot


class GatingUnit(Module):
    """Weights for one gate; `bias` starts positive so the gate opens near identity."""

    def __init__(self, dim: int, rng: np.random.Generator, bias_init: float = 2.0):
        def square() -> Parameter:
            return Parameter(glorot(rng, dim, dim, (dim, dim)))

        self.w_r, self.u_r = square(), square()
        self.w_z, self.u_z = square(), square()
        self.w_g, self.u_g = square(), square()
        self.bias = Parameter(np.full(dim, float(bias_init)))
        self.dim = dim

    def __call__(self, x: Tensor, y: Tensor) -> Tensor:
        return gate(self, x, y)


def gate(unit: GatingUnit, x: Tensor, y: Tensor) -> Tensor:
    """
    Combine stream x with sublayer output y:

        r = sigmoid(y W_r + x U_r)
        z = sigmoid(y W_z + x U_z - b)
        g = tanh(y W_g + (r * x) U_g)
        out = (1 - z) * x + z * g
    """
    x, y = as_tensor(x), as_tensor(y)
    if x.shape != y.shape or x.shape[-1] != unit.dim:
        raise ShapeError("gate", x.shape, y.shape, detail=f"model dim {unit.dim}")
    r = sigmoid(dense(y, unit.w_r) + dense(x, unit.u_r))
    z = sigmoid(dense(y, unit.w_z) + dense(x, unit.u_z) - unit.bias)
    g = tanh(dense(y, unit.w_g) + dense(r * x, unit.u_g))
    return (1.0 - z) * x + z * g
