"""Reverse-mode autodiff over dense numpy buffers.

Results are computed eagerly while a tape of backward closures is recorded
on the output tensors; ``Tensor.backward()`` replays the tape in reverse
topological order. Training runs in float32; switch to float64 (see
``default_dtype``) when comparing analytic gradients against central finite
differences.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractError, GeometryError, ShapeError

_DTYPES = {"f32": np.float32, "f64": np.float64}
_state = {"dtype": np.float32}


def set_default_dtype(name: str) -> None:
    """Select the element type ("f32" or "f64") for newly created tensors."""
    if name not in _DTYPES:
        raise ContractError(f"unknown dtype {name!r}; expected one of {sorted(_DTYPES)}")
    _state["dtype"] = _DTYPES[name]


def get_default_dtype():
    return _state["dtype"]


@contextlib.contextmanager
def default_dtype(name: str):
    """Temporarily switch the default element type."""
    previous = _state["dtype"]
    set_default_dtype(name)
    try:
        yield
    finally:
        _state["dtype"] = previous


class Tensor:
    """Dense array plus optional gradient and the tape edge that produced it."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        self.data = np.asarray(data, dtype=dtype or _state["dtype"])
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        out = Tensor.__new__(Tensor)
        out.data = self.data
        out.grad = None
        out.requires_grad = False
        out._parents = ()
        out._backward = None
        return out

    def backward(self) -> None:
        """Populate ``grad`` on every reachable tensor that requires it."""
        if self.data.size != 1:
            raise ContractError("backward() expects a scalar loss")
        if not self.requires_grad:
            return
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)

    # operator sugar -----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self, axis=None, keepdims: bool = False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False):
        return tmean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{flag})"


def as_tensor(value, like: Tensor | None = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    dtype = like.data.dtype if like is not None else _state["dtype"]
    return Tensor(value, requires_grad=False, dtype=dtype)


def _pair(a, b) -> tuple[Tensor, Tensor]:
    if isinstance(a, Tensor):
        return a, as_tensor(b, like=a)
    if isinstance(b, Tensor):
        return as_tensor(a, like=b), b
    return as_tensor(a), as_tensor(b)


def _make(data: np.ndarray, parents: Sequence[Tensor], backward_fn) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
    else:
        out.requires_grad = False
        out._parents = ()
        out._backward = None
    return out


def _accumulate(t: Tensor, grad: np.ndarray) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.array(grad, dtype=t.data.dtype)
    else:
        t.grad += grad


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to the operand's shape."""
    extra = grad.ndim - len(shape)
    if extra:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# elementwise arithmetic ---------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _pair(a, b)
    data = a.data + b.data

    def backward_fn(g):
        _accumulate(a, _unbroadcast(g, a.data.shape))
        _accumulate(b, _unbroadcast(g, b.data.shape))

    return _make(data, (a, b), backward_fn)


def sub(a, b) -> Tensor:
    a, b = _pair(a, b)
    data = a.data - b.data

    def backward_fn(g):
        _accumulate(a, _unbroadcast(g, a.data.shape))
        _accumulate(b, _unbroadcast(-g, b.data.shape))

    return _make(data, (a, b), backward_fn)


def mul(a, b) -> Tensor:
    a, b = _pair(a, b)
    data = a.data * b.data

    def backward_fn(g):
        _accumulate(a, _unbroadcast(g * b.data, a.data.shape))
        _accumulate(b, _unbroadcast(g * a.data, b.data.shape))

    return _make(data, (a, b), backward_fn)


def div(a, b) -> Tensor:
    a, b = _pair(a, b)
    data = a.data / b.data

    def backward_fn(g):
        _accumulate(a, _unbroadcast(g / b.data, a.data.shape))
        _accumulate(b, _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

    return _make(data, (a, b), backward_fn)


def neg(a) -> Tensor:
    a = as_tensor(a)

    def backward_fn(g):
        _accumulate(a, -g)

    return _make(-a.data, (a,), backward_fn)


def exp(a) -> Tensor:
    a = as_tensor(a)
    data = np.exp(a.data)

    def backward_fn(g):
        _accumulate(a, g * data)

    return _make(data, (a,), backward_fn)


def log(a) -> Tensor:
    a = as_tensor(a)
    data = np.log(a.data)

    def backward_fn(g):
        _accumulate(a, g / a.data)

    return _make(data, (a,), backward_fn)


def sqrt(a) -> Tensor:
    a = as_tensor(a)
    data = np.sqrt(a.data)

    def backward_fn(g):
        _accumulate(a, g * 0.5 / data)

    return _make(data, (a,), backward_fn)


def square(a) -> Tensor:
    a = as_tensor(a)

    def backward_fn(g):
        _accumulate(a, g * 2.0 * a.data)

    return _make(a.data * a.data, (a,), backward_fn)


def clip(a, lo: float, hi: float) -> Tensor:
    """Clamp values to [lo, hi]; gradient is zero outside the window."""
    a = as_tensor(a)
    data = np.clip(a.data, lo, hi)

    def backward_fn(g):
        _accumulate(a, g * ((a.data >= lo) & (a.data <= hi)))

    return _make(data, (a,), backward_fn)


# shape manipulation --------------------------------------------------------


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    data = a.data.reshape(shape)

    def backward_fn(g):
        _accumulate(a, g.reshape(a.data.shape))

    return _make(data, (a,), backward_fn)


def flatten_rows(a) -> Tensor:
    """Collapse everything after the leading axis into one dimension."""
    a = as_tensor(a)
    return reshape(a, (a.data.shape[0], -1))


def transpose_last2(a) -> Tensor:
    a = as_tensor(a)
    data = np.swapaxes(a.data, -1, -2)

    def backward_fn(g):
        _accumulate(a, np.swapaxes(g, -1, -2))

    return _make(data, (a,), backward_fn)


def concat(parts: Iterable, axis: int = -1) -> Tensor:
    ts = [as_tensor(p) for p in parts]
    data = np.concatenate([t.data for t in ts], axis=axis)
    splits = np.cumsum([t.data.shape[axis] for t in ts])[:-1]

    def backward_fn(g):
        for t, piece in zip(ts, np.split(g, splits, axis=axis)):
            _accumulate(t, piece)

    return _make(data, tuple(ts), backward_fn)


# reductions ----------------------------------------------------------------


def tsum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    data = np.asarray(a.data.sum(axis=axis, keepdims=keepdims))

    def backward_fn(g):
        gg = g
        if axis is not None and not keepdims:
            gg = np.expand_dims(g, axis)
        _accumulate(a, np.broadcast_to(gg, a.data.shape))

    return _make(data, (a,), backward_fn)


def tmean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    data = np.asarray(a.data.mean(axis=axis, keepdims=keepdims))
    if axis is None:
        count = a.data.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([a.data.shape[ax] for ax in axes]))

    def backward_fn(g):
        gg = g
        if axis is not None and not keepdims:
            gg = np.expand_dims(g, axis)
        _accumulate(a, np.broadcast_to(gg, a.data.shape) / count)

    return _make(data, (a,), backward_fn)


# linear algebra ------------------------------------------------------------


def matmul(a, b) -> Tensor:
    a, b = _pair(a, b)
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeError("matmul expects operands with at least two dimensions")
    if a.data.shape[-1] != b.data.shape[-2]:
        raise ShapeError(f"matmul inner dimensions disagree: {a.data.shape} @ {b.data.shape}")
    data = a.data @ b.data

    def backward_fn(g):
        if a.requires_grad:
            _accumulate(a, _unbroadcast(g @ np.swapaxes(b.data, -1, -2), a.data.shape))
        if b.requires_grad:
            _accumulate(b, _unbroadcast(np.swapaxes(a.data, -1, -2) @ g, b.data.shape))

    return _make(data, (a, b), backward_fn)


# activations ---------------------------------------------------------------


def relu(a) -> Tensor:
    a = as_tensor(a)
    data = np.maximum(a.data, 0)

    def backward_fn(g):
        _accumulate(a, g * (a.data > 0))

    return _make(data, (a,), backward_fn)


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    x = a.data
    data = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    data = data.astype(x.dtype, copy=False)

    def backward_fn(g):
        _accumulate(a, g * data * (1.0 - data))

    return _make(data, (a,), backward_fn)


def softmax_rows(a) -> Tensor:
    """Softmax over the last axis; every row of the output sums to one."""
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    data = e / e.sum(axis=-1, keepdims=True)

    def backward_fn(g):
        inner = (g * data).sum(axis=-1, keepdims=True)
        _accumulate(a, data * (g - inner))

    return _make(data, (a,), backward_fn)


def dropout(a, rate: float, rng: np.random.Generator | None = None, train: bool = False) -> Tensor:
    """Inverted-scaling dropout; identity when ``train`` is off or rate is 0."""
    a = as_tensor(a)
    if not 0.0 <= rate < 1.0:
        raise ContractError(f"dropout rate must lie in [0, 1); got {rate}")
    if not train or rate == 0.0:
        return a
    if rng is None:
        raise ContractError("dropout in train mode needs a random generator")
    keep = (rng.random(a.data.shape) >= rate).astype(a.data.dtype)
    keep /= np.asarray(1.0 - rate, dtype=a.data.dtype)

    def backward_fn(g):
        _accumulate(a, g * keep)

    return _make(a.data * keep, (a,), backward_fn)


# structured layers ---------------------------------------------------------


def conv_output_length(length: int, kernel: int, stride: int, pad_total: int, dilation: int) -> int:
    return (length + pad_total - dilation * (kernel - 1) - 1) // stride + 1


def conv1d(x, weight, bias=None, stride: int = 1, padding=0, dilation: int = 1,
           causal: bool = False) -> Tensor:
    """1D convolution over (batch, channels, length) input.

    ``padding`` is symmetric when an int, or an explicit (left, right) pair.
    ``causal=True`` overrides it with a left-only pad of (kernel-1)*dilation,
    so output position t never sees inputs mapped after t.
    """
    x = as_tensor(x)
    weight = as_tensor(weight, like=x)
    if x.data.ndim != 3 or weight.data.ndim != 3:
        raise ShapeError("conv1d expects input (B, C_in, L) and weight (C_out, C_in, K)")
    _, c_in, length = x.data.shape
    c_out, c_in_w, kernel = weight.data.shape
    if c_in_w != c_in:
        raise ShapeError(f"conv1d channel mismatch: input has {c_in}, weight expects {c_in_w}")
    if kernel < 1 or stride < 1 or dilation < 1:
        raise ContractError("kernel, stride and dilation must all be >= 1")
    if causal:
        pad_left, pad_right = (kernel - 1) * dilation, 0
    elif isinstance(padding, tuple):
        pad_left, pad_right = padding
    else:
        pad_left = pad_right = int(padding)
    l_out = conv_output_length(length, kernel, stride, pad_left + pad_right, dilation)
    if l_out <= 0:
        raise GeometryError(f"conv1d output length {l_out} for L={length}, K={kernel}, "
                            f"stride={stride}, pad=({pad_left},{pad_right}), dilation={dilation}")
    span = (kernel - 1) * dilation + 1
    xp = np.pad(x.data, ((0, 0), (0, 0), (pad_left, pad_right)))
    windows = np.lib.stride_tricks.sliding_window_view(xp, span, axis=2)[:, :, ::stride, ::dilation]
    out = np.einsum("bcls,ocs->bol", windows, weight.data, optimize=True)

    b_t = None
    if bias is not None:
        b_t = as_tensor(bias, like=x)
        if b_t.data.shape != (c_out,):
            raise ShapeError(f"conv1d bias must have shape ({c_out},)")
        out = out + b_t.data[None, :, None]

    parents = (x, weight) if b_t is None else (x, weight, b_t)

    def backward_fn(g):
        if weight.requires_grad:
            _accumulate(weight, np.einsum("bol,bcls->ocs", g, windows, optimize=True))
        if b_t is not None and b_t.requires_grad:
            _accumulate(b_t, g.sum(axis=(0, 2)))
        if x.requires_grad:
            grad_pad = np.zeros_like(xp)
            spread = np.einsum("bol,ocs->bcls", g, weight.data, optimize=True)
            for k in range(kernel):
                start = k * dilation
                stop = start + stride * (l_out - 1) + 1
                grad_pad[:, :, start:stop:stride] += spread[:, :, :, k]
            end = xp.shape[2] - pad_right
            _accumulate(x, grad_pad[:, :, pad_left:end])

    return _make(out, parents, backward_fn)


def batchnorm1d(x, gamma, beta, running_mean: np.ndarray, running_var: np.ndarray,
                train: bool, eps: float = 1e-5, momentum: float = 0.1) -> Tensor:
    """Per-channel normalization over batch (and time, for 3D input).

    Train mode uses batch statistics and updates the running buffers in
    place; eval mode normalizes with the running statistics.
    """
    x = as_tensor(x)
    gamma = as_tensor(gamma, like=x)
    beta = as_tensor(beta, like=x)
    if x.data.ndim == 2:
        axes: tuple[int, ...] = (0,)
    elif x.data.ndim == 3:
        axes = (0, 2)
    else:
        raise ShapeError("batchnorm1d expects (B, C) or (B, C, L) input")
    channels = x.data.shape[1]
    if gamma.data.shape != (channels,) or beta.data.shape != (channels,):
        raise ShapeError(f"gamma/beta must have shape ({channels},)")

    def chan(v: np.ndarray) -> np.ndarray:
        return v.reshape((1, channels) + (1,) * (x.data.ndim - 2))

    count = int(np.prod([x.data.shape[ax] for ax in axes]))
    if train:
        if count < 2:
            raise ContractError("batch statistics need at least two values per channel")
        mu = x.data.mean(axis=axes)
        var = x.data.var(axis=axes)
        running_mean *= 1.0 - momentum
        running_mean += momentum * mu
        running_var *= 1.0 - momentum
        running_var += momentum * var * (count / (count - 1))
    else:
        mu = running_mean
        var = running_var
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - chan(mu)) * chan(inv)
    out = chan(gamma.data) * xhat + chan(beta.data)

    def backward_fn(g):
        if gamma.requires_grad:
            _accumulate(gamma, (g * xhat).sum(axis=axes))
        if beta.requires_grad:
            _accumulate(beta, g.sum(axis=axes))
        if x.requires_grad:
            gx_hat = g * chan(gamma.data)
            if train:
                centered = gx_hat - gx_hat.mean(axis=axes, keepdims=True) \
                    - xhat * (gx_hat * xhat).mean(axis=axes, keepdims=True)
                _accumulate(x, centered * chan(inv))
            else:
                _accumulate(x, gx_hat * chan(inv))

    return _make(out, (x, gamma, beta), backward_fn)


def weight_norm(direction, gain, eps: float = 1e-12) -> Tensor:
    """Reparameterize a weight as gain * direction / ||direction|| per output channel.

    The norm is taken over all axes but the first; ``eps`` guards a
    zero-norm direction row.
    """
    direction = as_tensor(direction)
    gain = as_tensor(gain, like=direction)
    if direction.data.ndim < 2:
        raise ShapeError("weight_norm expects a direction with at least two dimensions")
    if gain.data.shape != (direction.data.shape[0],):
        raise ShapeError("gain must hold one scalar per output channel")
    axes = tuple(range(1, direction.data.ndim))
    norm = add(sqrt(tsum(square(direction), axis=axes, keepdims=True)), eps)
    gain_col = reshape(gain, (direction.data.shape[0],) + (1,) * (direction.data.ndim - 1))
    return mul(direction, div(gain_col, norm))
