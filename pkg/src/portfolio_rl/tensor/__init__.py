"""Minimal float64 tensor library with reverse-mode differentiation."""

from .core import (
    DTYPE,
    Function,
    Parameter,
    Tensor,
    as_tensor,
    backward,
    checked,
    is_grad_enabled,
    no_grad,
    zero_grad,
)
from .ops import (
    add,
    concat,
    gather,
    layer_norm,
    matmul,
    mul,
    pad,
    permute,
    reduce_mean,
    reduce_sum,
    relu,
    reshape,
    scale,
    sigmoid,
    slice_,
    softmax,
    sub,
    tanh,
)
from .optim import Adam, adam_step
from .checkpoint import load_arrays, save_arrays

__all__ = [
    "DTYPE",
    "Function",
    "Parameter",
    "Tensor",
    "as_tensor",
    "backward",
    "checked",
    "is_grad_enabled",
    "no_grad",
    "zero_grad",
    # primitives
    "add",
    "concat",
    "gather",
    "layer_norm",
    "matmul",
    "mul",
    "pad",
    "permute",
    "reduce_mean",
    "reduce_sum",
    "relu",
    "reshape",
    "scale",
    "sigmoid",
    "slice_",
    "softmax",
    "sub",
    "tanh",
    # optimizer / persistence
    "Adam",
    "adam_step",
    "load_arrays",
    "save_arrays",
]
