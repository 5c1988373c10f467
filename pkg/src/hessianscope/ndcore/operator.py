"""Deterministic loss operators: loss, gradient, and exact HVP at a point.

A :class:`LossOperator` binds a loss graph builder to a fixed, immutable
sample set (and an optional L2 penalty), so that repeated evaluation at
equal parameters is bit-identical. The Hessian-vector product runs the
whole tape, forward pass and reverse sweep, in dual arithmetic with the
parameter tangent seeded to the probe direction; one pass, no second tape.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from . import dual as du
from . import tape as tp
from .dual import Dual


class DimensionMismatchError(ValueError):
    pass


class NonFiniteError(ArithmeticError):
    """A non-finite value appeared; the message names the offending op."""


def as_param_vector(x, d: int | None = None) -> np.ndarray:
    """Validate and return a flat float64 parameter vector."""
    v = np.ascontiguousarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatchError(f"parameter vector must be 1-D, got shape {v.shape}")
    if d is not None and v.shape[0] != d:
        raise DimensionMismatchError(f"expected dimension {d}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("parameter vector contains non-finite entries")
    return v


class LossOperator:
    """Loss over a fixed sample set plus ``l2/2 * ||theta||^2``.

    ``builder(leaves, inputs, labels)`` must append the mean data loss to
    the tape, with ``leaves`` the per-slot parameter Recs laid out as in
    ``layout`` (a sequence of array shapes whose sizes sum to ``dim``).
    Instances are read-only and safe to share across workers.
    """

    def __init__(self, layout: Sequence[tuple[int, ...]], builder: Callable,
                 inputs: np.ndarray, labels: np.ndarray, l2: float = 0.0,
                 tag: str = ""):
        self.layout = tuple(tuple(s) for s in layout)
        self.builder = builder
        self.inputs = np.ascontiguousarray(inputs, dtype=np.float64)
        self.labels = np.ascontiguousarray(labels, dtype=np.int64)
        self.inputs.flags.writeable = False
        self.labels.flags.writeable = False
        if self.inputs.shape[0] != self.labels.shape[0]:
            raise DimensionMismatchError(
                f"{self.inputs.shape[0]} inputs vs {self.labels.shape[0]} labels")
        if l2 < 0:
            raise ValueError("l2 weight must be >= 0")
        self.l2 = float(l2)
        self.tag = tag
        self._sizes = [int(np.prod(s)) for s in self.layout]
        self.dim = int(sum(self._sizes))

    def _leaves(self, tape: tp.Tape, theta: np.ndarray, v: np.ndarray | None):
        leaves = []
        ofs = 0
        for size, shape in zip(self._sizes, self.layout):
            val = theta[ofs:ofs + size].reshape(shape)
            if v is not None:
                val = Dual(val, v[ofs:ofs + size].reshape(shape))
            leaves.append(tape.leaf(val, name="param"))
            ofs += size
        return leaves

    def _build(self, theta: np.ndarray, v: np.ndarray | None):
        tape = tp.Tape()
        leaves = self._leaves(tape, theta, v)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            loss = self.builder(leaves, tape, self.inputs, self.labels)
            if self.l2 > 0.0:
                reg = None
                for leaf in leaves:
                    ss = tp.ssum(tp.mul(leaf, leaf))
                    reg = ss if reg is None else tp.add(reg, ss)
                loss = tp.add(loss, tp.mul(reg, 0.5 * self.l2))
        if not np.all(np.isfinite(du.value(loss.value))):
            where = tape.first_nonfinite()
            raise NonFiniteError(
                f"non-finite value at tape node {where[0]} (op '{where[1]}')"
                if where else "non-finite loss")
        return tape, leaves, loss

    def _collect(self, tape, leaves, adjoints, pick):
        parts = []
        for leaf, size, shape in zip(leaves, self._sizes, self.layout):
            g = adjoints[leaf.idx]
            parts.append(np.zeros(size) if g is None else pick(g).reshape(size))
        return np.concatenate(parts)

    def loss(self, theta) -> float:
        theta = as_param_vector(theta, self.dim)
        _, _, loss = self._build(theta, None)
        return float(loss.value)

    def gradient(self, theta) -> np.ndarray:
        return self.loss_and_gradient(theta)[1]

    def loss_and_gradient(self, theta) -> tuple[float, np.ndarray]:
        theta = as_param_vector(theta, self.dim)
        tape, leaves, loss = self._build(theta, None)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            adj = tp.backward(tape, loss)
        g = self._collect(tape, leaves, adj, lambda a: a)
        if not np.all(np.isfinite(g)):
            raise NonFiniteError("non-finite gradient")
        return float(loss.value), g

    def hvp(self, theta, v) -> np.ndarray:
        theta = as_param_vector(theta, self.dim)
        v = as_param_vector(v, self.dim)
        tape, leaves, loss = self._build(theta, v)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            adj = tp.backward(tape, loss, seed=tp.grad_seed_for(loss.value))
        hv = self._collect(tape, leaves, adj, lambda a: a.dot)
        if not np.all(np.isfinite(hv)):
            raise NonFiniteError("non-finite Hessian-vector product")
        return hv
