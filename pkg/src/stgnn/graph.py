"""Spatial layers: degree-normalized graph convolution, mean pooling,
GraphSAGE message passing and the two-level differentiable pooling stack.

All layers operate on batched dense inputs: node features (B, N, F) and
adjacency (B, N, N). Graphs never exchange information across the batch
axis because every matrix product is per-sample.
"""

from __future__ import annotations

import math

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigError, ContractError
from .nn import BatchNorm1d, Linear, Module, uniform_fan_in


def normalized_adjacency(adjacency: np.ndarray) -> np.ndarray:
    """Symmetric degree normalization of adjacency-with-self-loops.

    Accepts (N, N) or (B, N, N); validates symmetry and a zero diagonal.
    """
    a = np.asarray(adjacency, dtype=np.float64)
    if not np.array_equal(a, np.swapaxes(a, -1, -2)):
        raise ContractError("adjacency must be symmetric")
    diag = np.diagonal(a, axis1=-2, axis2=-1)
    if np.any(diag != 0):
        raise ContractError("adjacency must have a zero diagonal")
    with_loops = a + np.eye(a.shape[-1])
    inv_sqrt_deg = 1.0 / np.sqrt(with_loops.sum(axis=-1))
    out = with_loops * inv_sqrt_deg[..., :, None] * inv_sqrt_deg[..., None, :]
    return out


class GCNLayer(Module):
    """H' = relu(D^{-1/2} (A+I) D^{-1/2} H W + b)."""

    def __init__(self, features: int, rng: np.random.Generator):
        self.weight = Tensor(uniform_fan_in(rng, features, (features, features)),
                             requires_grad=True)
        self.bias = Tensor(np.zeros(features), requires_grad=True)

    def __call__(self, h, operator) -> Tensor:
        return ad.relu(ad.add(ad.matmul(ad.matmul(operator, h), self.weight), self.bias))


def gcn_forward(h, adjacency: np.ndarray, weight, bias) -> Tensor:
    """Functional graph convolution from a raw binary adjacency."""
    operator = Tensor(normalized_adjacency(adjacency), dtype=as_dtype(h))
    return ad.relu(ad.add(ad.matmul(ad.matmul(operator, h), weight), bias))


def as_dtype(value) -> np.dtype:
    return value.data.dtype if isinstance(value, Tensor) else np.asarray(value).dtype


def global_mean_pool(h) -> Tensor:
    """Average node features: (..., N, F) -> (..., F)."""
    return ad.tmean(h, axis=-2)


class GraphSAGELayer(Module):
    """h'_v = relu(W_self h_v + W_neigh mean_{u in N(v)} h_u + b).

    The neighbor mean generalizes to weighted adjacency as a row-normalized
    product; rows with zero degree contribute a zero neighbor term.
    """

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        self.w_self = Tensor(uniform_fan_in(rng, in_features, (in_features, out_features)),
                             requires_grad=True)
        self.w_neigh = Tensor(uniform_fan_in(rng, in_features, (in_features, out_features)),
                              requires_grad=True)
        self.bias = Tensor(np.zeros(out_features), requires_grad=True)

    def __call__(self, h, adjacency) -> Tensor:
        adjacency = ad.as_tensor(adjacency, like=h if isinstance(h, Tensor) else None)
        degree = ad.tsum(adjacency, axis=-1, keepdims=True)
        zero_rows = (degree.data == 0).astype(degree.data.dtype)
        neigh = ad.div(ad.matmul(adjacency, h), ad.add(degree, Tensor(zero_rows, dtype=degree.data.dtype)))
        combined = ad.add(ad.matmul(h, self.w_self), ad.matmul(neigh, self.w_neigh))
        return ad.relu(ad.add(combined, self.bias))


class SageTower(Module):
    """Three GraphSAGE layers with batchnorm, concatenated and projected.

    The skip connection concatenates all three layer outputs and maps them
    to ``out_features`` with a single linear layer.
    """

    def __init__(self, in_features: int, hidden: int, out_features: int,
                 rng: np.random.Generator):
        self.layers = [GraphSAGELayer(in_features, hidden, rng),
                       GraphSAGELayer(hidden, hidden, rng),
                       GraphSAGELayer(hidden, hidden, rng)]
        self.norms = [BatchNorm1d(hidden) for _ in range(3)]
        self.project = Linear(3 * hidden, out_features, rng)

    def __call__(self, h, adjacency, train: bool) -> Tensor:
        outputs = []
        current = h
        for layer, norm in zip(self.layers, self.norms):
            current = layer(current, adjacency)
            current = _norm_nodes(norm, current, train)
            outputs.append(current)
        return self.project(ad.concat(outputs, axis=-1))


def _norm_nodes(norm: BatchNorm1d, h: Tensor, train: bool) -> Tensor:
    """Batch-normalize (B, N, F) node features per feature channel."""
    if h.data.ndim == 2:
        return norm(h, train=train)
    b, n, f = h.data.shape
    flat = ad.reshape(h, (b * n, f))
    return ad.reshape(norm(flat, train=train), (b, n, f))


class DiffPoolLevel(Module):
    """One differentiable pooling step: embed, assign, coarsen.

    Z comes from the embedding tower; S is the row-softmax of the assignment
    tower. X' = S^T Z and A' = S^T A S, plus a link-reconstruction loss
    ||A - S S^T||_F / n^2 and the mean row entropy of S.
    """

    def __init__(self, in_features: int, n_clusters: int, rng: np.random.Generator,
                 hidden: int = 256, out_features: int = 256):
        if n_clusters < 1:
            raise ConfigError("pooling needs at least one cluster")
        self.n_clusters = n_clusters
        self.embed = SageTower(in_features, hidden, out_features, rng)
        self.assign = SageTower(in_features, hidden, n_clusters, rng)

    def __call__(self, x, adjacency, train: bool):
        z = self.embed(x, adjacency, train=train)
        s = ad.softmax_rows(self.assign(x, adjacency, train=train))
        s_t = ad.transpose_last2(s)
        pooled_x = ad.matmul(s_t, z)
        adjacency = ad.as_tensor(adjacency, like=z)
        pooled_a = ad.matmul(ad.matmul(s_t, adjacency), s)
        n = adjacency.data.shape[-1]
        residual = ad.sub(adjacency, ad.matmul(s, s_t))
        link = ad.div(ad.sqrt(ad.tsum(ad.square(residual))), float(n * n))
        entropy = ad.neg(ad.tmean(ad.tsum(
            ad.mul(s, ad.log(ad.clip(s, 1e-12, 1.0))), axis=-1)))
        return pooled_x, pooled_a, link, entropy


def cluster_schedule(n_nodes: int, levels: int = 2, ratio: float = 0.25) -> list[int]:
    """Cluster counts per level: ceil(ratio * previous), strictly decreasing."""
    counts = []
    previous = n_nodes
    for _ in range(levels):
        current = math.ceil(ratio * previous)
        if not 1 <= current < previous:
            raise ConfigError(f"cluster schedule cannot shrink {previous} nodes "
                              f"(needs more nodes for {levels} pooling levels)")
        counts.append(current)
        previous = current
    return counts


class DiffPoolStack(Module):
    """Two pooling levels followed by a mean readout over surviving clusters."""

    def __init__(self, n_nodes: int, features: int, rng: np.random.Generator,
                 ratio: float = 0.25):
        schedule = cluster_schedule(n_nodes, levels=2, ratio=ratio)
        self.schedule = schedule
        self.levels = [DiffPoolLevel(features, schedule[0], rng,
                                     hidden=features, out_features=features),
                       DiffPoolLevel(features, schedule[1], rng,
                                     hidden=features, out_features=features)]

    def __call__(self, x, adjacency, train: bool):
        link_total = None
        entropy_total = None
        for level in self.levels:
            x, adjacency, link, entropy = level(x, adjacency, train=train)
            link_total = link if link_total is None else ad.add(link_total, link)
            entropy_total = entropy if entropy_total is None else ad.add(entropy_total, entropy)
        return x, adjacency, link_total, entropy_total
