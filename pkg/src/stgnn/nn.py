"""Parameter containers, layers and the Adam optimiser."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ShapeError


class Module:
    """Minimal parameter container; members are discovered by attribute scan.

    Attribute insertion order fixes the parameter order, so two modules built
    the same way enumerate identically. Non-trainable state (running
    statistics) is declared per class via ``_buffers``.
    """

    _buffers: tuple[str, ...] = ()

    def named_parameters(self):
        for kind, name, value in _iter_members(self, ""):
            if kind == "param":
                yield name, value

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def named_buffers(self):
        for kind, name, value in _iter_members(self, ""):
            if kind == "buffer":
                yield name, value

    def parameter_count(self) -> int:
        return sum(p.data.size for _, p in self.named_parameters())

    def state_dict(self) -> dict[str, np.ndarray]:
        state = {name: p.data.copy() for name, p in self.named_parameters()}
        state.update({name: b.copy() for name, b in self.named_buffers()})
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        own = dict(self.named_parameters())
        buffers = dict(self.named_buffers())
        expected = set(own) | set(buffers)
        if expected != set(state):
            missing = expected - set(state)
            extra = set(state) - expected
            raise ShapeError(f"state mismatch: missing={sorted(missing)}, unexpected={sorted(extra)}")
        for name, value in state.items():
            target = own[name].data if name in own else buffers[name]
            if target.shape != value.shape:
                raise ShapeError(f"shape mismatch for {name}: {target.shape} vs {value.shape}")
            np.copyto(target, value)

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None


def _iter_members(module: Module, prefix: str):
    for key, value in vars(module).items():
        path = f"{prefix}.{key}" if prefix else key
        if isinstance(value, Tensor) and value.requires_grad:
            yield "param", path, value
        elif isinstance(value, Module):
            yield from _iter_members(value, path)
        elif isinstance(value, (list, tuple)):
            for idx, item in enumerate(value):
                if isinstance(item, Module):
                    yield from _iter_members(item, f"{path}.{idx}")
                elif isinstance(item, Tensor) and item.requires_grad:
                    yield "param", f"{path}.{idx}", item
    for key in module._buffers:
        path = f"{prefix}.{key}" if prefix else key
        yield "buffer", path, getattr(module, key)


def uniform_fan_in(rng: np.random.Generator, fan_in: int, shape: tuple[int, ...]) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Linear(Module):
    """Affine map x @ W + b with uniform fan-in weight init and zero bias."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        self.weight = Tensor(uniform_fan_in(rng, in_features, (in_features, out_features)),
                             requires_grad=True)
        self.bias = Tensor(np.zeros(out_features), requires_grad=True)

    def __call__(self, x) -> Tensor:
        return ad.add(ad.matmul(x, self.weight), self.bias)


class Conv1d(Module):
    """1D convolution layer; weights drawn from N(0, 0.01^2), zero bias."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int,
                 rng: np.random.Generator, stride: int = 1, padding=0,
                 dilation: int = 1, causal: bool = False, weight_std: float = 0.01):
        self.weight = Tensor(rng.normal(0.0, weight_std, size=(out_channels, in_channels, kernel_size)),
                             requires_grad=True)
        self.bias = Tensor(np.zeros(out_channels), requires_grad=True)
        self.stride = stride
        self.padding = padding
        self.dilation = dilation
        self.causal = causal

    def __call__(self, x) -> Tensor:
        return ad.conv1d(x, self.weight, self.bias, stride=self.stride,
                         padding=self.padding, dilation=self.dilation, causal=self.causal)


class WeightNormConv1d(Module):
    """Convolution whose weight is gain * direction / ||direction|| per filter.

    The gain starts at the direction's norm so the initial effective weight
    equals the raw N(0, 0.01^2) draw.
    """

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int,
                 rng: np.random.Generator, stride: int = 1, dilation: int = 1,
                 causal: bool = True, weight_std: float = 0.01):
        v = rng.normal(0.0, weight_std, size=(out_channels, in_channels, kernel_size))
        self.direction = Tensor(v, requires_grad=True)
        self.gain = Tensor(np.sqrt((v * v).sum(axis=(1, 2))), requires_grad=True)
        self.bias = Tensor(np.zeros(out_channels), requires_grad=True)
        self.stride = stride
        self.dilation = dilation
        self.causal = causal

    def __call__(self, x) -> Tensor:
        w = ad.weight_norm(self.direction, self.gain)
        return ad.conv1d(x, w, self.bias, stride=self.stride,
                         dilation=self.dilation, causal=self.causal)


class BatchNorm1d(Module):
    _buffers = ("running_mean", "running_var")

    def __init__(self, channels: int, eps: float = 1e-5, momentum: float = 0.1):
        self.gamma = Tensor(np.ones(channels), requires_grad=True)
        self.beta = Tensor(np.zeros(channels), requires_grad=True)
        self.running_mean = np.zeros(channels, dtype=ad.get_default_dtype())
        self.running_var = np.ones(channels, dtype=ad.get_default_dtype())
        self.eps = eps
        self.momentum = momentum

    def __call__(self, x, train: bool) -> Tensor:
        return ad.batchnorm1d(x, self.gamma, self.beta, self.running_mean,
                              self.running_var, train=train, eps=self.eps,
                              momentum=self.momentum)


class Dropout(Module):
    def __init__(self, rate: float, rng: np.random.Generator):
        self.rate = rate
        self.rng = rng

    def __call__(self, x, train: bool) -> Tensor:
        return ad.dropout(x, self.rate, rng=self.rng, train=train)


# optimiser -------------------------------------------------------------------


@dataclass
class AdamState:
    """Moment buffers and step counter for one ordered parameter list."""

    first_moment: list[np.ndarray]
    second_moment: list[np.ndarray]
    step: int
    lr: float
    beta1: float
    beta2: float
    eps: float
    weight_decay: float

    @classmethod
    def for_params(cls, params, lr: float = 1e-4, beta1: float = 0.9, beta2: float = 0.999,
                   eps: float = 1e-8, weight_decay: float = 0.0) -> "AdamState":
        return cls(first_moment=[np.zeros_like(p.data) for p in params],
                   second_moment=[np.zeros_like(p.data) for p in params],
                   step=0, lr=lr, beta1=beta1, beta2=beta2, eps=eps,
                   weight_decay=weight_decay)


def adam_step(params, grads, state: AdamState) -> None:
    """One bias-corrected Adam update, in place.

    Weight decay is decoupled: lr * wd * theta is added to the update rather
    than folded into the gradient.
    """
    if not (len(params) == len(grads) == len(state.first_moment) == len(state.second_moment)):
        raise ShapeError("optimizer state does not match the parameter list")
    state.step += 1
    c1 = 1.0 - state.beta1 ** state.step
    c2 = 1.0 - state.beta2 ** state.step
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        if g is None:
            g = np.zeros_like(p.data)
        if g.shape != p.data.shape or m.shape != p.data.shape:
            raise ShapeError("gradient/state shape does not match parameter")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        update = (m / c1) / (np.sqrt(v / c2) + state.eps)
        if state.weight_decay:
            update = update + state.weight_decay * p.data
        p.data -= state.lr * update


class Adam:
    def __init__(self, params, lr: float = 1e-4, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8, weight_decay: float = 0.0):
        self.params = list(params)
        self.state = AdamState.for_params(self.params, lr=lr, beta1=beta1, beta2=beta2,
                                          eps=eps, weight_decay=weight_decay)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def step(self) -> None:
        adam_step(self.params, [p.grad for p in self.params], self.state)
