"""Autodiff core: forward values, gradients, and exact HVPs vs oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fd_gradient, fd_hvp, numpy_forward_loss, small_problem
from hessianscope.ndcore import (DimensionMismatchError, LossOperator,
                                 NonFiniteError, Tape, as_param_vector)
from hessianscope.ndcore import tape as tp


@pytest.mark.parametrize("activation", ["softplus", "tanh", "relu"])
@pytest.mark.parametrize("l2", [0.0, 0.013])
def test_forward_matches_independent_numpy(activation, l2):
    spec, ds, op, theta = small_problem(layers=(3, 5, 4, 3),
                                        activation=activation, l2=l2, seed=2)
    ours = op.loss(theta)
    ref = numpy_forward_loss(spec, theta, ds.inputs, ds.labels, l2=l2)
    assert ours == pytest.approx(ref, rel=1e-13, abs=1e-14)


@pytest.mark.parametrize("activation", ["softplus", "tanh", "relu"])
def test_gradient_matches_fd_of_loss(activation):
    _, _, op, theta = small_problem(layers=(2, 4, 2), activation=activation,
                                    seed=3)
    _, g = op.loss_and_gradient(theta)
    fd = fd_gradient(op.loss, theta, eps=1e-6)
    scale = max(np.abs(fd).max(), 1.0)
    assert np.abs(g - fd).max() < 1e-8 * scale


@pytest.mark.parametrize("activation", ["softplus", "tanh"])
def test_hvp_matches_fd_of_gradient(activation):
    _, _, op, theta = small_problem(layers=(3, 6, 3), activation=activation,
                                    l2=0.01, seed=4)
    rng = np.random.default_rng(5)
    for trial in range(3):
        v = rng.standard_normal(theta.shape[0])
        hv = op.hvp(theta, v)
        fd = fd_hvp(op.gradient, theta, v, eps=1e-4)
        denom = np.maximum(np.abs(fd), 1e-3 * max(np.abs(fd).max(), 1e-30))
        assert (np.abs(hv - fd) / denom).max() < 1e-5, f"trial {trial}"


def test_hvp_linearity(tiny):
    _, _, op, theta = tiny
    rng = np.random.default_rng(6)
    v = rng.standard_normal(op.dim)
    w = rng.standard_normal(op.dim)
    a, b = 0.37, -1.51
    lhs = op.hvp(theta, a * v + b * w)
    rhs = a * op.hvp(theta, v) + b * op.hvp(theta, w)
    scale = max(np.abs(rhs).max(), 1.0)
    assert np.abs(lhs - rhs).max() < 1e-10 * scale


def test_hvp_symmetry(tiny):
    _, _, op, theta = tiny
    rng = np.random.default_rng(7)
    for _ in range(5):
        u = rng.standard_normal(op.dim)
        v = rng.standard_normal(op.dim)
        uhv = u @ op.hvp(theta, v)
        vhu = v @ op.hvp(theta, u)
        assert uhv == pytest.approx(vhu, rel=1e-10, abs=1e-12)


def test_repeated_evaluation_is_bit_identical(tiny):
    _, _, op, theta = tiny
    v = np.linspace(-1.0, 1.0, op.dim)
    assert op.loss(theta) == op.loss(theta)
    g1, g2 = op.gradient(theta), op.gradient(theta)
    assert np.array_equal(g1, g2)
    h1, h2 = op.hvp(theta, v), op.hvp(theta, v)
    assert np.array_equal(h1, h2)


def _quadratic_operator(a_matrix):
    """0.5 theta' A theta built through the tape, for exact-derivative checks."""
    d = a_matrix.shape[0]

    def build(leaves, tape, inputs, labels):
        th = leaves[0]
        z = tp.matmul(th, a_matrix)
        return tp.mul(tp.ssum(tp.mul(th, z)), 0.5)

    return LossOperator([(d,)], build, np.zeros((1, 1)), np.zeros(1), l2=0.0)


def test_hand_quadratic_gradient_and_hvp_are_exact():
    rng = np.random.default_rng(8)
    m = rng.standard_normal((6, 6))
    a = (m + m.T) / 2.0
    op = _quadratic_operator(a)
    theta = rng.standard_normal(6)
    v = rng.standard_normal(6)
    assert op.loss(theta) == pytest.approx(0.5 * theta @ a @ theta, rel=1e-14)
    assert np.abs(op.gradient(theta) - a @ theta).max() < 1e-13
    assert np.abs(op.hvp(theta, v) - a @ v).max() < 1e-13
    # the Hessian of a quadratic is theta-independent
    other = rng.standard_normal(6)
    assert np.abs(op.hvp(other, v) - a @ v).max() < 1e-13


def test_elementwise_second_derivatives():
    # sum(softplus(theta)): H = diag(sigmoid'(theta)); relu: H = 0 a.e.
    def softplus_build(leaves, tape, inputs, labels):
        return tp.ssum(tp.softplus(leaves[0]))

    def relu_build(leaves, tape, inputs, labels):
        return tp.ssum(tp.relu(leaves[0]))

    theta = np.array([-2.0, -0.5, 0.3, 1.7])
    v = np.array([1.0, -2.0, 0.5, 3.0])
    op_sp = LossOperator([(4,)], softplus_build, np.zeros((1, 1)), np.zeros(1))
    sig = 1.0 / (1.0 + np.exp(-theta))
    assert np.abs(op_sp.hvp(theta, v) - sig * (1 - sig) * v).max() < 1e-14

    op_relu = LossOperator([(4,)], relu_build, np.zeros((1, 1)), np.zeros(1))
    assert np.abs(op_relu.gradient(theta) - (theta > 0)).max() == 0.0
    assert np.abs(op_relu.hvp(theta, v)).max() == 0.0


def test_logsumexp_is_shift_invariant_and_overflow_safe():
    def build(leaves, tape, inputs, labels):
        return tp.ssum(tp.logsumexp_rows(leaves[0]))

    op = LossOperator([(2, 3)], build, np.zeros((1, 1)), np.zeros(1))
    base = np.array([[1.0, -2.0, 0.5], [1000.0, 999.0, -1000.0]]).ravel()
    val = op.loss(base)
    assert np.isfinite(val)
    # shifting a row shifts its logsumexp by exactly the constant
    shifted = base.copy()
    shifted[:3] += 7.25
    assert op.loss(shifted) == pytest.approx(val + 7.25, rel=1e-14)
    g = op.gradient(base)
    # rows of the gradient are softmax distributions
    assert g[:3].sum() == pytest.approx(1.0, abs=1e-12)
    assert g[3:].sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(g >= 0.0)
    hv = op.hvp(base, np.ones(6))
    assert np.all(np.isfinite(hv))


def test_longdouble_softmax_oracle(tiny):
    # cross-entropy against an extended-precision softmax computation
    spec, ds, op, theta = tiny
    a = np.asarray(ds.inputs, dtype=np.longdouble)
    ofs = 0
    for li in range(len(spec.layers) - 1):
        fi, fo = spec.layers[li], spec.layers[li + 1]
        w = theta[ofs:ofs + fi * fo].reshape(fi, fo).astype(np.longdouble)
        ofs += fi * fo
        b = theta[ofs:ofs + fo].astype(np.longdouble)
        ofs += fo
        a = a @ w + b
        if li < len(spec.layers) - 2:
            a = np.log1p(np.exp(a))
    z = a - a.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1)) + a.max(axis=1)
    picked = a[np.arange(a.shape[0]), ds.labels]
    ref = float(np.mean(lse - picked))
    assert op.loss(theta) == pytest.approx(ref, rel=1e-13)


def test_nonfinite_loss_names_the_offending_op():
    def build(leaves, tape, inputs, labels):
        return tp.ssum(tp.exp(leaves[0]))

    op = LossOperator([(2,)], build, np.zeros((1, 1)), np.zeros(1))
    with pytest.raises(NonFiniteError, match="exp"):
        op.loss(np.array([1.0, 1e4]))


def test_parameter_validation():
    _, _, op, theta = small_problem()
    with pytest.raises(DimensionMismatchError):
        op.loss(theta[:-1])
    with pytest.raises(DimensionMismatchError):
        op.hvp(theta, theta[:-2])
    with pytest.raises(DimensionMismatchError):
        op.loss(theta.reshape(1, -1))
    with pytest.raises(NonFiniteError):
        op.loss(np.full_like(theta, np.nan))
    v = as_param_vector([1, 2, 3])
    assert v.dtype == np.float64 and v.shape == (3,)


def test_tape_records_and_replays_deterministically():
    tape = Tape()
    x = tape.leaf(np.array([1.0, 2.0]))
    y = tp.mul(tp.add(x, 3.0), x)
    adj = tp.backward(tape, tp.ssum(y))
    # d/dx sum((x+3)x) = 2x + 3
    assert np.array_equal(adj[x.idx], np.array([5.0, 7.0]))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_hvp_linearity_property(rng_seed):
    _, _, op, theta = small_problem(seed=1)
    rng = np.random.default_rng(rng_seed)
    v = rng.standard_normal(op.dim)
    w = rng.standard_normal(op.dim)
    lhs = op.hvp(theta, v + w)
    rhs = op.hvp(theta, v) + op.hvp(theta, w)
    scale = max(np.abs(rhs).max(), 1.0)
    assert np.abs(lhs - rhs).max() < 1e-9 * scale
