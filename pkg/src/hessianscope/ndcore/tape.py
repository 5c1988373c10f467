"""Replayable operation tape with a reverse-mode sweep.

The tape is a topologically ordered list of primitive array ops; every
node stores its parents' indices and a closure computing the
vector-Jacobian product. Node values are float64 arrays, or
:class:`~hessianscope.ndcore.dual.Dual` arrays when a directional
derivative is being carried through: since both the forward value rules
and the adjoint rules are written against the dual-aware kernel, a
single tape serves gradient and Hessian-vector-product evaluation.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import dual as du
from .dual import Dual


class Node:
    __slots__ = ("op", "parents", "value", "vjp")

    def __init__(self, op, parents, value, vjp):
        self.op = op
        self.parents = parents
        self.value = value
        self.vjp = vjp


class Tape:
    """Single-writer list of recorded ops; replayable and deterministic."""

    def __init__(self):
        self.nodes: list[Node] = []

    def record(self, op: str, parents: tuple[int, ...], value, vjp) -> "Rec":
        self.nodes.append(Node(op, parents, value, vjp))
        return Rec(self, len(self.nodes) - 1)

    def leaf(self, value, name: str = "leaf") -> "Rec":
        return self.record(name, (), value, None)

    def first_nonfinite(self):
        """(index, op name) of the earliest node holding a non-finite value."""
        for i, node in enumerate(self.nodes):
            if not np.all(np.isfinite(du.value(node.value))):
                return i, node.op
        return None


class Rec:
    """Handle to a tape node; supports arithmetic against arrays/constants."""

    __slots__ = ("tape", "idx")
    __array_ufunc__ = None  # make ndarray defer to our reflected ops

    def __init__(self, tape: Tape, idx: int):
        self.tape = tape
        self.idx = idx

    @property
    def value(self):
        return self.tape.nodes[self.idx].value

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)


def _tape_of(*args) -> Tape:
    for a in args:
        if isinstance(a, Rec):
            return a.tape
    raise TypeError("no tape operand")


def _val(x):
    return x.value if isinstance(x, Rec) else x


def _shape(x):
    return np.shape(du.value(_val(x)))


def add(a, b):
    tape = _tape_of(a, b)
    av, bv = _val(a), _val(b)
    out = du.add(av, bv)
    ash, bsh = _shape(a), _shape(b)
    parents = tuple(x.idx for x in (a, b) if isinstance(x, Rec))

    def vjp(g):
        res = []
        if isinstance(a, Rec):
            res.append((a.idx, du.sum_to_shape(g, ash)))
        if isinstance(b, Rec):
            res.append((b.idx, du.sum_to_shape(g, bsh)))
        return res

    return tape.record("add", parents, out, vjp)


def sub(a, b):
    tape = _tape_of(a, b)
    av, bv = _val(a), _val(b)
    out = du.sub(av, bv)
    ash, bsh = _shape(a), _shape(b)
    parents = tuple(x.idx for x in (a, b) if isinstance(x, Rec))

    def vjp(g):
        res = []
        if isinstance(a, Rec):
            res.append((a.idx, du.sum_to_shape(g, ash)))
        if isinstance(b, Rec):
            res.append((b.idx, du.sum_to_shape(du.neg(g), bsh)))
        return res

    return tape.record("sub", parents, out, vjp)


def mul(a, b):
    tape = _tape_of(a, b)
    av, bv = _val(a), _val(b)
    out = du.mul(av, bv)
    ash, bsh = _shape(a), _shape(b)
    parents = tuple(x.idx for x in (a, b) if isinstance(x, Rec))

    def vjp(g):
        res = []
        if isinstance(a, Rec):
            res.append((a.idx, du.sum_to_shape(du.mul(g, bv), ash)))
        if isinstance(b, Rec):
            res.append((b.idx, du.sum_to_shape(du.mul(g, av), bsh)))
        return res

    return tape.record("mul", parents, out, vjp)


def matmul(a, b):
    tape = _tape_of(a, b)
    av, bv = _val(a), _val(b)
    out = du.matmul(av, bv)
    parents = tuple(x.idx for x in (a, b) if isinstance(x, Rec))

    def vjp(g):
        res = []
        if isinstance(a, Rec):
            res.append((a.idx, du.matmul(g, du.transpose(bv))))
        if isinstance(b, Rec):
            res.append((b.idx, du.matmul(du.transpose(av), g)))
        return res

    return tape.record("matmul", parents, out, vjp)


def ssum(a, axis=None, keepdims=False):
    tape = _tape_of(a)
    av = _val(a)
    out = du.ssum(av, axis=axis, keepdims=keepdims)
    ash = _shape(a)

    def vjp(g):
        if axis is not None and not keepdims:
            kshape = list(ash)
            for ax in np.atleast_1d(axis):
                kshape[ax] = 1
            g = du.reshape(g, tuple(kshape))
        return [(a.idx, du.broadcast_to(g, ash))]

    return tape.record("sum", (a.idx,), out, vjp)


def reshape(a, shape):
    tape = _tape_of(a)
    av = _val(a)
    ash = _shape(a)
    out = du.reshape(av, shape)

    def vjp(g):
        return [(a.idx, du.reshape(g, ash))]

    return tape.record("reshape", (a.idx,), out, vjp)


def exp(a):
    tape = _tape_of(a)
    out = du.exp(_val(a))

    def vjp(g):
        return [(a.idx, du.mul(g, out))]

    return tape.record("exp", (a.idx,), out, vjp)


def log(a):
    tape = _tape_of(a)
    av = _val(a)
    out = du.log(av)

    def vjp(g):
        return [(a.idx, du.div(g, av))]

    return tape.record("log", (a.idx,), out, vjp)


def tanh(a):
    tape = _tape_of(a)
    out = du.tanh(_val(a))

    def vjp(g):
        return [(a.idx, du.mul(g, du.sub(1.0, du.mul(out, out))))]

    return tape.record("tanh", (a.idx,), out, vjp)


def softplus(a):
    tape = _tape_of(a)
    av = _val(a)
    out = du.softplus(av)

    def vjp(g):
        return [(a.idx, du.mul(g, du.sigmoid(av)))]

    return tape.record("softplus", (a.idx,), out, vjp)


def relu(a):
    tape = _tape_of(a)
    av = _val(a)
    # mask detached from the tangent: relu'' = 0 everywhere
    mask = (du.value(av) > 0.0).astype(np.float64)
    out = du.mul(av, mask)

    def vjp(g):
        return [(a.idx, du.mul(g, mask))]

    return tape.record("relu", (a.idx,), out, vjp)


def logsumexp_rows(a):
    """Row-wise log-sum-exp, shape (n, k) -> (n, 1), overflow-safe.

    The row max is detached, which leaves gradients exact because
    logsumexp(z) = m + logsumexp(z - m) holds for any constant m.
    """
    m = np.max(du.value(_val(a)), axis=1, keepdims=True)
    z = exp(sub(a, m))
    s = ssum(z, axis=1, keepdims=True)
    return add(log(s), m)


ACTIVATIONS: dict[str, Callable[[Rec], Rec]] = {
    "relu": relu,
    "softplus": softplus,
    "tanh": tanh,
}


def backward(tape: Tape, out: Rec, seed=None):
    """Reverse sweep from ``out``; returns the per-node adjoint list.

    Nodes are visited in strictly decreasing index order and contributions
    are accumulated in recording order, so repeated sweeps are
    bit-identical.
    """
    if seed is None:
        seed = np.float64(1.0)
    adjoints: list = [None] * (out.idx + 1)
    adjoints[out.idx] = seed
    for i in range(out.idx, -1, -1):
        g = adjoints[i]
        if g is None:
            continue
        node = tape.nodes[i]
        if node.vjp is None:
            continue
        for pidx, pg in node.vjp(g):
            if adjoints[pidx] is None:
                adjoints[pidx] = pg
            else:
                adjoints[pidx] = du.add(adjoints[pidx], pg)
    return adjoints


def grad_seed_for(value):
    """Adjoint seed matching the arithmetic of ``value`` (dual or plain)."""
    if isinstance(value, Dual):
        return Dual(np.float64(1.0), np.float64(0.0))
    return np.float64(1.0)
