"""Central finite-difference gradient oracle.

Kept independent of the autodiff engine: expected gradients come from
re-evaluating the loss at perturbed inputs, never from the tape.
"""

import numpy as np

H = 1e-5
TOLERANCE = 1e-4


def numeric_gradient(loss_fn, tensor, h=H, indices=None):
    """Central differences of loss_fn w.r.t. tensor.data, elementwise."""
    grad = np.zeros_like(tensor.data)
    flat = tensor.data.reshape(-1)
    gflat = grad.reshape(-1)
    todo = range(flat.size) if indices is None else indices
    for i in todo:
        original = flat[i]
        flat[i] = original + h
        plus = loss_fn().item()
        flat[i] = original - h
        minus = loss_fn().item()
        flat[i] = original
        gflat[i] = (plus - minus) / (2.0 * h)
    return grad


def max_relative_error(analytic, numeric):
    scale = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric) / scale))


def gradcheck(loss_fn, wrt, h=H, sample=None, rng=None):
    """Max relative error between tape gradients and finite differences.

    ``sample`` limits the check to that many randomly chosen elements per
    tensor (for end-to-end compositions with many parameters).
    """
    for t in wrt:
        t.grad = None
    loss_fn().backward()
    worst = 0.0
    for t in wrt:
        analytic = np.zeros_like(t.data) if t.grad is None else t.grad.copy()
        indices = None
        if sample is not None and t.data.size > sample:
            rng = rng or np.random.default_rng(0)
            indices = rng.choice(t.data.size, size=sample, replace=False)
        numeric = numeric_gradient(loss_fn, t, h=h, indices=indices)
        if indices is not None:
            mask = np.zeros(t.data.size, dtype=bool)
            mask[indices] = True
            analytic = analytic.reshape(-1)[mask]
            numeric = numeric.reshape(-1)[mask]
        worst = max(worst, max_relative_error(analytic, numeric))
    return worst


def random_projection_loss(out_fn, rng):
    """Wrap an op into a scalar loss via a fixed random linear functional."""
    probe = {}

    def loss_fn():
        out = out_fn()
        if "w" not in probe:
            probe["w"] = rng.normal(size=out.data.shape)
        from stgnn import autodiff as ad
        return ad.tsum(ad.mul(out, ad.as_tensor(probe["w"], like=out)))

    return loss_fn
