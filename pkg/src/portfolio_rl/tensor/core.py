"""
Dense float64 tensors with reverse-mode differentiation.

Every primitive is a `Function` subclass with a numpy `forward` and a
`backward` that maps the output gradient to one gradient per operand.
Results of recorded primitives carry a node with a global sequence number;
`backward` replays reachable nodes in strictly decreasing sequence order.
"""

from __future__ import annotations

import contextlib
import itertools
from contextvars import ContextVar
from typing import Any, Iterator, Sequence

import numpy as np

from ..errors import GradientError, NonFiniteError

DTYPE = np.float64

_grad_enabled: ContextVar[bool] = ContextVar("grad_enabled", default=True)
_checked: ContextVar[bool] = ContextVar("checked", default=False)
_sequence = itertools.count()


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording inside the block."""
    token = _grad_enabled.set(False)
    try:
        yield
    finally:
        _grad_enabled.reset(token)


@contextlib.contextmanager
def checked() -> Iterator[None]:
    """Reject non-finite operands for every primitive inside the block."""
    token = _checked.set(True)
    try:
        yield
    finally:
        _checked.reset(token)


def is_grad_enabled() -> bool:
    return _grad_enabled.get()


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum out axes that broadcasting expanded so grad matches `shape`."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Function:
    """Base class for differentiable primitives."""

    name = "function"

    def __init__(self, *inputs: "Tensor") -> None:
        self.inputs = inputs

    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *inputs: "Tensor", **kwargs: Any) -> "Tensor":
        fn = cls(*inputs)
        arrays = [t.data for t in inputs]
        if _checked.get():
            for arr in arrays:
                if not np.all(np.isfinite(arr)):
                    raise NonFiniteError(f"{cls.name}: non-finite operand of shape {arr.shape}")
        out = np.asarray(fn.forward(*arrays, **kwargs), dtype=DTYPE)
        requires_grad = _grad_enabled.get() and any(t.requires_grad for t in inputs)
        result = Tensor(out, requires_grad=requires_grad)
        if requires_grad:
            result._node = fn
            result._seq = next(_sequence)
        return result


class Tensor:
    """n-dimensional float64 array that may participate in a recorded graph."""

    __array_priority__ = 100.0

    def __init__(self, data: Any, requires_grad: bool = False) -> None:
        self.data = np.array(data, dtype=DTYPE)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._node: Function | None = None
        self._seq: int = -1

    # -- introspection -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy(), requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    # -- operators -----------------------------------------------------

    def __add__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.sub(other, self)

    def __mul__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        from . import ops

        return ops.scale(self, -1.0)

    def __matmul__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.matmul(self, other)

    def __getitem__(self, index: Any) -> "Tensor":
        from . import ops

        return ops.slice_(self, index)

    def reshape(self, *shape: int) -> "Tensor":
        from . import ops

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def permute(self, *axes: int) -> "Tensor":
        from . import ops

        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return ops.permute(self, axes)

    def sum(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> "Tensor":
        from . import ops

        return ops.reduce_sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> "Tensor":
        from . import ops

        return ops.reduce_mean(self, axis=axis, keepdims=keepdims)

    # -- differentiation -----------------------------------------------

    def backward(self) -> None:
        backward(self)


class Parameter(Tensor):
    """Trainable leaf tensor."""

    def __init__(self, data: Any) -> None:
        super().__init__(data, requires_grad=True)

    def __repr__(self) -> str:
        return f"Parameter(shape={self.shape})"


def as_tensor(value: Any) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _reachable(root: Tensor) -> list[Tensor]:
    seen: set[int] = set()
    nodes: list[Tensor] = []
    stack = [root]
    while stack:
        t = stack.pop()
        if id(t) in seen or t._node is None:
            continue
        seen.add(id(t))
        nodes.append(t)
        stack.extend(inp for inp in t._node.inputs if inp.requires_grad)
    nodes.sort(key=lambda t: t._seq, reverse=True)
    return nodes


def backward(root: Tensor) -> None:
    """Accumulate d(root)/d(leaf) into `grad` of every reachable trainable leaf."""
    if root.data.size != 1 or root.ndim > 1:
        raise GradientError(f"backward requires a scalar root, got shape {root.shape}")
    if not root.requires_grad:
        raise GradientError("backward root is not connected to any trainable tensor")

    if root._node is None:
        _accumulate(root, np.ones_like(root.data))
        return

    pending: dict[int, np.ndarray] = {id(root): np.ones_like(root.data)}
    for node in _reachable(root):
        grad = pending.pop(id(node), None)
        if grad is None:
            continue
        fn = node._node
        assert fn is not None
        for inp, g in zip(fn.inputs, fn.backward(grad)):
            if g is None or not inp.requires_grad:
                continue
            if inp._node is None:
                _accumulate(inp, g)
            elif id(inp) in pending:
                pending[id(inp)] = pending[id(inp)] + g
            else:
                pending[id(inp)] = g


def _accumulate(leaf: Tensor, g: np.ndarray) -> None:
    g = np.asarray(g, dtype=DTYPE).reshape(leaf.shape)
    leaf.grad = g.copy() if leaf.grad is None else leaf.grad + g


def zero_grad(params: Sequence[Tensor] | dict[str, Tensor]) -> None:
    values = params.values() if isinstance(params, dict) else params
    for p in values:
        p.grad = None
