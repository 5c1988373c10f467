"""Shared fixtures and independent numerical oracles for the test suite.

The oracles here deliberately avoid the package's own differentiation
machinery: forward losses are recomputed in plain numpy/scipy, and
derivatives come from finite differences, so each layer of the package
is checked against something it does not share code with.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy.special import logsumexp

from hessianscope import ModelSpec, init_params, make_blobs, make_loss_operator


def numpy_forward_loss(spec: ModelSpec, theta, inputs, labels,
                       l2: float = 0.0) -> float:
    """Independent recomputation of the mean cross-entropy loss."""
    acts = {"softplus": lambda z: np.logaddexp(0.0, z),
            "tanh": np.tanh,
            "relu": lambda z: np.maximum(z, 0.0)}
    act = acts[spec.activation]
    a = np.asarray(inputs, dtype=np.float64)
    ofs = 0
    n_layers = len(spec.layers) - 1
    reg = 0.0
    for li in range(n_layers):
        fi, fo = spec.layers[li], spec.layers[li + 1]
        w = theta[ofs:ofs + fi * fo].reshape(fi, fo)
        ofs += fi * fo
        b = theta[ofs:ofs + fo]
        ofs += fo
        reg += np.sum(w * w) + np.sum(b * b)
        a = a @ w + b
        if li < n_layers - 1:
            a = act(a)
    lse = logsumexp(a, axis=1)
    picked = a[np.arange(a.shape[0]), np.asarray(labels)]
    return float(np.mean(lse - picked) + 0.5 * l2 * reg)


def fd_gradient(loss_fn, theta, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar function, per coordinate."""
    theta = np.asarray(theta, dtype=np.float64)
    g = np.empty_like(theta)
    for i in range(theta.shape[0]):
        e = np.zeros_like(theta)
        e[i] = eps
        g[i] = (loss_fn(theta + e) - loss_fn(theta - e)) / (2.0 * eps)
    return g


def fd_hvp(grad_fn, theta, v, eps: float = 1e-4) -> np.ndarray:
    """Central finite differences of a gradient along direction v."""
    theta = np.asarray(theta, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return (grad_fn(theta + eps * v) - grad_fn(theta - eps * v)) / (2.0 * eps)


def small_problem(layers=(2, 3, 2), activation="softplus", classes=None,
                  per_class=10, spread=0.3, l2=0.0, seed=0):
    """A tiny dataset + loss operator + a generic evaluation point."""
    spec = ModelSpec(layers, activation=activation, seed=seed)
    ds = make_blobs(classes or spec.classes, per_class, spec.in_dim, spread,
                    seed=seed + 10)
    op = make_loss_operator(spec, ds.inputs, ds.labels, l2=l2)
    rng = np.random.default_rng(seed + 20)
    theta = init_params(spec) + 0.05 * rng.standard_normal(spec.param_count)
    return spec, ds, op, theta


@pytest.fixture
def tiny():
    """d=17 softplus network over a 2-class blob set."""
    return small_problem()
