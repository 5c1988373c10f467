"""Dual-number array arithmetic.

A :class:`Dual` pairs a float64 array with its tangent along one direction.
Every kernel function below accepts plain ndarrays, python scalars, or
Duals, and propagates the tangent with the exact forward-mode rule. The
reverse sweep in :mod:`hessianscope.ndcore.tape` is written against these
kernels, so running forward *and* reverse in dual arithmetic (parameter
tangent seeded to a direction v) makes the gradient's tangent an exact
Hessian-vector product.
"""

from __future__ import annotations

import numpy as np


class Dual:
    """Array plus its directional derivative; shapes always match."""

    __slots__ = ("val", "dot")

    def __init__(self, val, dot):
        self.val = val
        self.dot = dot

    def __repr__(self):
        return f"Dual(val={self.val!r}, dot={self.dot!r})"


def value(x):
    return x.val if isinstance(x, Dual) else x


def add(a, b):
    if isinstance(a, Dual):
        if isinstance(b, Dual):
            return Dual(a.val + b.val, a.dot + b.dot)
        out = a.val + b
        return Dual(out, np.broadcast_to(a.dot, np.shape(out)))
    if isinstance(b, Dual):
        out = a + b.val
        return Dual(out, np.broadcast_to(b.dot, np.shape(out)))
    return a + b


def sub(a, b):
    return add(a, neg(b))


def neg(a):
    if isinstance(a, Dual):
        return Dual(-a.val, -a.dot)
    return -a


def mul(a, b):
    if isinstance(a, Dual):
        if isinstance(b, Dual):
            return Dual(a.val * b.val, a.dot * b.val + a.val * b.dot)
        return Dual(a.val * b, a.dot * b)
    if isinstance(b, Dual):
        return Dual(a * b.val, a * b.dot)
    return a * b


def div(a, b):
    if isinstance(b, Dual):
        inv = 1.0 / b.val
        if isinstance(a, Dual):
            out = a.val * inv
            return Dual(out, (a.dot - out * b.dot) * inv)
        out = a * inv
        return Dual(out, -out * b.dot * inv)
    if isinstance(a, Dual):
        return Dual(a.val / b, a.dot / b)
    return a / b


def matmul(a, b):
    if isinstance(a, Dual):
        if isinstance(b, Dual):
            return Dual(a.val @ b.val, a.dot @ b.val + a.val @ b.dot)
        return Dual(a.val @ b, a.dot @ b)
    if isinstance(b, Dual):
        return Dual(a @ b.val, a @ b.dot)
    return a @ b


def transpose(a):
    if isinstance(a, Dual):
        return Dual(a.val.T, a.dot.T)
    return a.T


def reshape(a, shape):
    if isinstance(a, Dual):
        return Dual(np.reshape(a.val, shape), np.reshape(a.dot, shape))
    return np.reshape(a, shape)


def broadcast_to(a, shape):
    if isinstance(a, Dual):
        return Dual(np.broadcast_to(a.val, shape), np.broadcast_to(a.dot, shape))
    return np.broadcast_to(a, shape)


def ssum(a, axis=None, keepdims=False):
    if isinstance(a, Dual):
        return Dual(
            np.sum(a.val, axis=axis, keepdims=keepdims),
            np.sum(a.dot, axis=axis, keepdims=keepdims),
        )
    return np.sum(a, axis=axis, keepdims=keepdims)


def sum_to_shape(g, shape):
    """Reduce ``g`` back to ``shape`` by summing broadcast axes."""
    gshape = np.shape(value(g))
    if gshape == tuple(shape):
        return g
    # leading axes added by broadcasting
    while len(gshape) > len(shape):
        g = ssum(g, axis=0)
        gshape = gshape[1:]
    for ax, (have, want) in enumerate(zip(gshape, shape)):
        if want == 1 and have != 1:
            g = ssum(g, axis=ax, keepdims=True)
    return g


def exp(a):
    if isinstance(a, Dual):
        e = np.exp(a.val)
        return Dual(e, e * a.dot)
    return np.exp(a)


def log(a):
    if isinstance(a, Dual):
        return Dual(np.log(a.val), a.dot / a.val)
    return np.log(a)


def tanh(a):
    if isinstance(a, Dual):
        t = np.tanh(a.val)
        return Dual(t, (1.0 - t * t) * a.dot)
    return np.tanh(a)


def _sigmoid_val(x):
    # evaluate on the stable side of the exponential
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a):
    if isinstance(a, Dual):
        s = _sigmoid_val(a.val)
        return Dual(s, s * (1.0 - s) * a.dot)
    return _sigmoid_val(np.asarray(a, dtype=np.float64))


def _softplus_val(x):
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def softplus(a):
    if isinstance(a, Dual):
        return Dual(_softplus_val(a.val), _sigmoid_val(a.val) * a.dot)
    return _softplus_val(np.asarray(a, dtype=np.float64))


def relu(a):
    # second derivative defined as 0 everywhere; subgradient 0 at the kink
    if isinstance(a, Dual):
        mask = a.val > 0.0
        return Dual(np.where(mask, a.val, 0.0), np.where(mask, a.dot, 0.0))
    return np.maximum(a, 0.0)
