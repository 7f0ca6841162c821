"""
Differentiable primitives.

Each primitive validates operand shapes up front and raises `ShapeError`
naming both shapes, so a bad wiring fails at the call site rather than
inside numpy.
"""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from ..errors import ShapeError
from .core import DTYPE, Function, Tensor, as_tensor, unbroadcast


def _broadcast_shape(op: str, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a, b)
    except ValueError:
        raise ShapeError(op, a, b) from None


def _norm_axes(axis: int | tuple[int, ...] | None, ndim: int) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(a % ndim for a in axis)


# ---------------------------------------------------------------------------
# Elementwise arithmetic
# ---------------------------------------------------------------------------


class Add(Function):
    name = "add"

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        self.shapes = (a.shape, b.shape)
        return a + b

    def backward(self, grad: np.ndarray):
        return unbroadcast(grad, self.shapes[0]), unbroadcast(grad, self.shapes[1])


class Sub(Function):
    name = "subtract"

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        self.shapes = (a.shape, b.shape)
        return a - b

    def backward(self, grad: np.ndarray):
        return unbroadcast(grad, self.shapes[0]), unbroadcast(-grad, self.shapes[1])


class Mul(Function):
    name = "multiply"

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        self.a, self.b = a, b
        return a * b

    def backward(self, grad: np.ndarray):
        return unbroadcast(grad * self.b, self.a.shape), unbroadcast(grad * self.a, self.b.shape)


class Scale(Function):
    name = "scalar-multiply"

    def forward(self, a: np.ndarray, factor: float) -> np.ndarray:
        self.factor = float(factor)
        return a * self.factor

    def backward(self, grad: np.ndarray):
        return (grad * self.factor,)


def add(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a.shape, b.shape)
    return Add.apply(a, b)


def sub(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("subtract", a.shape, b.shape)
    return Sub.apply(a, b)


def mul(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("multiply", a.shape, b.shape)
    return Mul.apply(a, b)


def scale(a: Tensor, factor: float) -> Tensor:
    return Scale.apply(as_tensor(a), factor=factor)


# ---------------------------------------------------------------------------
# Contraction
# ---------------------------------------------------------------------------


class MatMul(Function):
    name = "matmul"

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        self.a, self.b = a, b
        return np.matmul(a, b)

    def backward(self, grad: np.ndarray):
        ga = np.matmul(grad, np.swapaxes(self.b, -1, -2))
        gb = np.matmul(np.swapaxes(self.a, -1, -2), grad)
        return unbroadcast(ga, self.a.shape), unbroadcast(gb, self.b.shape)


def matmul(a: Any, b: Any) -> Tensor:
    """Matrix product batched over leading axes (both operands need >= 2 axes)."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError("matmul", a.shape, b.shape)
    _broadcast_shape("matmul", a.shape[:-2], b.shape[:-2])
    return MatMul.apply(a, b)


# ---------------------------------------------------------------------------
# Movement
# ---------------------------------------------------------------------------


class Reshape(Function):
    name = "reshape"

    def forward(self, a: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
        self.in_shape = a.shape
        return a.reshape(shape)

    def backward(self, grad: np.ndarray):
        return (grad.reshape(self.in_shape),)


class Permute(Function):
    name = "permute-axes"

    def forward(self, a: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
        self.axes = axes
        return np.transpose(a, axes)

    def backward(self, grad: np.ndarray):
        return (np.transpose(grad, np.argsort(self.axes)),)


class Concat(Function):
    name = "concat"

    def forward(self, *arrays: np.ndarray, axis: int) -> np.ndarray:
        self.axis = axis
        self.splits = np.cumsum([arr.shape[axis] for arr in arrays])[:-1]
        return np.concatenate(arrays, axis=axis)

    def backward(self, grad: np.ndarray):
        return tuple(np.split(grad, self.splits, axis=self.axis))


class Slice(Function):
    name = "slice"

    def forward(self, a: np.ndarray, index: Any) -> np.ndarray:
        self.in_shape = a.shape
        self.index = index
        return a[index]

    def backward(self, grad: np.ndarray):
        out = np.zeros(self.in_shape, dtype=DTYPE)
        out[self.index] = grad
        return (out,)


class Pad(Function):
    name = "pad"

    def forward(self, a: np.ndarray, widths: tuple[tuple[int, int], ...]) -> np.ndarray:
        self.widths = widths
        return np.pad(a, widths, mode="constant", constant_values=0.0)

    def backward(self, grad: np.ndarray):
        index = tuple(slice(lo, grad.shape[i] - hi) for i, (lo, hi) in enumerate(self.widths))
        return (grad[index],)


class Gather(Function):
    name = "gather"

    def forward(self, a: np.ndarray, indices: np.ndarray, axis: int) -> np.ndarray:
        self.in_shape = a.shape
        self.indices = indices
        self.axis = axis
        return np.take(a, indices, axis=axis)

    def backward(self, grad: np.ndarray):
        out = np.zeros(self.in_shape, dtype=DTYPE)
        np.add.at(np.moveaxis(out, self.axis, 0), self.indices, np.moveaxis(grad, self.axis, 0))
        return (out,)


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(int(s) for s in shape)
    try:
        resolved = np.reshape(np.empty(a.shape, dtype=np.bool_), shape).shape
    except ValueError:
        raise ShapeError("reshape", a.shape, shape) from None
    return Reshape.apply(a, shape=resolved)


def permute(a: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(int(x) % max(a.ndim, 1) for x in axes)
    if sorted(axes) != list(range(a.ndim)):
        raise ShapeError("permute-axes", a.shape, axes, detail="axes must be a permutation")
    return Permute.apply(a, axes=axes)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat", (), detail="no operands")
    ref = tensors[0]
    ax = axis % ref.ndim
    for t in tensors[1:]:
        if t.ndim != ref.ndim or any(
            t.shape[i] != ref.shape[i] for i in range(ref.ndim) if i != ax
        ):
            raise ShapeError("concat", ref.shape, t.shape)
    return Concat.apply(*tensors, axis=ax)


def slice_(a: Tensor, index: Any) -> Tensor:
    if not isinstance(index, tuple):
        index = (index,)
    for item in index:
        if not isinstance(item, (slice, int, type(Ellipsis))):
            raise ShapeError("slice", a.shape, detail="only ints, slices and ... are supported")
    try:
        np.empty(a.shape, dtype=np.bool_)[index]
    except IndexError:
        raise ShapeError("slice", a.shape, detail=f"index {index!r} out of range") from None
    return Slice.apply(a, index=index)


def pad(a: Tensor, widths: Sequence[tuple[int, int]]) -> Tensor:
    """Zero-pad; `widths` gives (before, after) per axis."""
    widths = tuple((int(lo), int(hi)) for lo, hi in widths)
    if len(widths) != a.ndim or any(lo < 0 or hi < 0 for lo, hi in widths):
        raise ShapeError("pad", a.shape, detail=f"invalid widths {widths}")
    return Pad.apply(a, widths=widths)


def gather(a: Tensor, indices: Sequence[int] | np.ndarray, axis: int = 0) -> Tensor:
    """Select entries along one axis by a 1-D integer index (repeats allowed)."""
    idx = np.asarray(indices, dtype=np.intp)
    ax = axis % a.ndim
    if idx.ndim != 1 or (idx.size and (idx.min() < -a.shape[ax] or idx.max() >= a.shape[ax])):
        raise ShapeError("gather", a.shape, idx.shape, detail=f"bad index along axis {ax}")
    return Gather.apply(a, indices=idx, axis=ax)


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------


class ReduceSum(Function):
    name = "reduce-sum"

    def forward(self, a: np.ndarray, axis: tuple[int, ...], keepdims: bool) -> np.ndarray:
        self.in_shape = a.shape
        self.axis = axis
        self.keepdims = keepdims
        return a.sum(axis=axis, keepdims=keepdims)

    def _expand(self, grad: np.ndarray) -> np.ndarray:
        if not self.keepdims:
            grad = np.expand_dims(grad, self.axis)
        return np.broadcast_to(grad, self.in_shape)

    def backward(self, grad: np.ndarray):
        return (np.array(self._expand(grad)),)


class ReduceMean(ReduceSum):
    name = "reduce-mean"

    def forward(self, a: np.ndarray, axis: tuple[int, ...], keepdims: bool) -> np.ndarray:
        self.count = int(np.prod([a.shape[i] for i in axis])) if axis else 1
        super().forward(a, axis, keepdims)
        return a.mean(axis=axis, keepdims=keepdims)

    def backward(self, grad: np.ndarray):
        return (self._expand(grad) / self.count,)


def reduce_sum(
    a: Tensor, axis: int | tuple[int, ...] | None = None, keepdims: bool = False
) -> Tensor:
    return ReduceSum.apply(a, axis=_norm_axes(axis, a.ndim), keepdims=keepdims)


def reduce_mean(
    a: Tensor, axis: int | tuple[int, ...] | None = None, keepdims: bool = False
) -> Tensor:
    return ReduceMean.apply(a, axis=_norm_axes(axis, a.ndim), keepdims=keepdims)


# ---------------------------------------------------------------------------
# Nonlinearities
# ---------------------------------------------------------------------------


class Softmax(Function):
    name = "softmax"

    def forward(self, a: np.ndarray) -> np.ndarray:
        shifted = a - a.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        self.out = e / e.sum(axis=-1, keepdims=True)
        return self.out

    def backward(self, grad: np.ndarray):
        y = self.out
        return (y * (grad - (grad * y).sum(axis=-1, keepdims=True)),)


class Relu(Function):
    name = "relu"

    def forward(self, a: np.ndarray) -> np.ndarray:
        self.mask = a > 0
        return np.where(self.mask, a, 0.0)

    def backward(self, grad: np.ndarray):
        return (grad * self.mask,)


class Tanh(Function):
    name = "tanh"

    def forward(self, a: np.ndarray) -> np.ndarray:
        self.out = np.tanh(a)
        return self.out

    def backward(self, grad: np.ndarray):
        return (grad * (1.0 - self.out**2),)


class Sigmoid(Function):
    name = "sigmoid"

    def forward(self, a: np.ndarray) -> np.ndarray:
        # exp(-|a|) never overflows
        e = np.exp(-np.abs(a))
        self.out = np.where(a >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
        return self.out

    def backward(self, grad: np.ndarray):
        return (grad * self.out * (1.0 - self.out),)


class LayerNorm(Function):
    name = "layer-norm"

    def forward(self, x: np.ndarray, gain: np.ndarray, bias: np.ndarray, eps: float) -> np.ndarray:
        mu = x.mean(axis=-1, keepdims=True)
        var = x.var(axis=-1, keepdims=True)
        self.inv_std = 1.0 / np.sqrt(var + eps)
        self.xhat = (x - mu) * self.inv_std
        self.gain = gain
        self.shapes = (x.shape, gain.shape, bias.shape)
        return self.xhat * gain + bias

    def backward(self, grad: np.ndarray):
        n = self.xhat.shape[-1]
        dxhat = grad * self.gain
        dx = (
            self.inv_std
            / n
            * (
                n * dxhat
                - dxhat.sum(axis=-1, keepdims=True)
                - self.xhat * (dxhat * self.xhat).sum(axis=-1, keepdims=True)
            )
        )
        dgain = unbroadcast(grad * self.xhat, self.shapes[1])
        dbias = unbroadcast(grad, self.shapes[2])
        return dx, dgain, dbias


def softmax(a: Tensor) -> Tensor:
    """Softmax over the last axis."""
    return Softmax.apply(a)


def relu(a: Tensor) -> Tensor:
    return Relu.apply(a)


def tanh(a: Tensor) -> Tensor:
    return Tanh.apply(a)


def sigmoid(a: Tensor) -> Tensor:
    return Sigmoid.apply(a)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then apply learnable gain and bias."""
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError("layer-norm", x.shape, gain.shape, bias.shape)
    return LayerNorm.apply(x, gain, bias, eps=eps)
