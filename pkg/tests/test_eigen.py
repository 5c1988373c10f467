"""Lanczos extreme eigenpairs against dense decompositions."""

import numpy as np
import pytest

from conftest import small_problem
from hessianscope import (LinearMap, NonConvergedError, dense_eig_oracle,
                          dense_hessian_oracle, dense_map, hessian_map,
                          hessian_spectrum, lanczos_extreme, rayleigh)
from hessianscope.eigen import DENSE_ORACLE_CAP


def _structured_symmetric(d, values_fn, seed):
    """Q diag(values) Q' with a seeded random orthogonal Q."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    values = values_fn(d)
    return (q * values) @ q.T, np.sort(values)


def test_explicit_diagonal():
    a = np.diag([3.0, 1.0, -2.0])
    la = lanczos_extreme(dense_map(a), 2, "LA", seed=0)
    assert la.lambdas() == pytest.approx([3.0, 1.0], abs=1e-12)
    assert abs(la.pairs[0].vec @ np.array([1.0, 0, 0])) > 1 - 1e-12
    sa = lanczos_extreme(dense_map(a), 1, "SA", seed=0)
    assert sa.lambdas() == pytest.approx([-2.0], abs=1e-12)
    assert abs(sa.pairs[0].vec @ np.array([0, 0, 1.0])) > 1 - 1e-12


def test_canonical_sign_convention():
    a = np.diag([5.0, 1.0])
    rep = lanczos_extreme(dense_map(a), 1, "LA", seed=3)
    v = rep.pairs[0].vec
    nz = v[np.abs(v) > 0]
    assert nz[0] > 0


def test_la_sa_ordering_and_consistency():
    a, values = _structured_symmetric(60, lambda d: np.linspace(-4, 9, d),
                                      seed=1)
    la = lanczos_extreme(dense_map(a), 4, "LA", seed=1)
    sa = lanczos_extreme(dense_map(a), 4, "SA", seed=1)
    assert np.all(np.diff(la.lambdas()) <= 0)    # descending
    assert np.all(np.diff(sa.lambdas()) >= 0)    # ascending
    assert la.lambdas()[0] >= sa.lambdas()[0]
    assert la.lambdas() == pytest.approx(values[::-1][:4], rel=1e-10)
    assert sa.lambdas() == pytest.approx(values[:4], rel=1e-10)


def test_random_symmetric_matches_eigh():
    rng = np.random.default_rng(7)
    m = rng.standard_normal((200, 200))
    a = (m + m.T) / 2.0
    evals, evecs = np.linalg.eigh(a)
    la = lanczos_extreme(dense_map(a), 5, "LA", seed=0)
    sa = lanczos_extreme(dense_map(a), 5, "SA", seed=0)
    scale = max(1.0, np.abs(evals).max())
    assert np.abs(la.lambdas() - evals[::-1][:5]).max() < 1e-8 * scale
    assert np.abs(sa.lambdas() - evals[:5]).max() < 1e-8 * scale
    for i, pair in enumerate(la.pairs):
        cos = abs(pair.vec @ evecs[:, -1 - i])
        assert cos > 1 - 1e-8, f"LA rank {i}: cos={cos}"
    for i, pair in enumerate(sa.pairs):
        cos = abs(pair.vec @ evecs[:, i])
        assert cos > 1 - 1e-8, f"SA rank {i}: cos={cos}"


def test_residuals_meet_contract():
    a, _ = _structured_symmetric(120, lambda d: np.geomspace(0.01, 50, d),
                                 seed=2)
    rep = lanczos_extreme(dense_map(a), 3, "LA", tol=1e-8, seed=2)
    for pair in rep.pairs:
        true_res = np.linalg.norm(a @ pair.vec - pair.lam * pair.vec)
        assert true_res <= 1e-8 * max(1.0, abs(pair.lam))
        assert pair.residual == pytest.approx(true_res, rel=1e-6, abs=1e-14)
        assert np.linalg.norm(pair.vec) == pytest.approx(1.0, abs=1e-12)


def test_near_degenerate_top_pair():
    values_fn = lambda d: np.concatenate([[5.0, 5.0 - 1e-6],
                                          np.linspace(-1, 3, d - 2)])
    a, values = _structured_symmetric(80, values_fn, seed=3)
    rep = lanczos_extreme(dense_map(a), 2, "LA", seed=3)
    assert rep.lambdas() == pytest.approx([5.0, 5.0 - 1e-6], abs=1e-8)
    # the two vectors span the top eigenspace even if individually rotated
    top = np.linalg.eigh(a)[1][:, -2:]
    basis = np.column_stack([p.vec for p in rep.pairs])
    overlap = np.linalg.svd(top.T @ basis, compute_uv=False)
    assert overlap.min() > 1 - 1e-6


def test_deterministic_given_seed():
    a, _ = _structured_symmetric(90, lambda d: np.linspace(-2, 2, d), seed=4)
    r1 = lanczos_extreme(dense_map(a), 3, "LA", seed=9)
    r2 = lanczos_extreme(dense_map(a), 3, "LA", seed=9)
    assert np.array_equal(r1.lambdas(), r2.lambdas())
    for p1, p2 in zip(r1.pairs, r2.pairs):
        assert np.array_equal(p1.vec, p2.vec)


def test_nonconverged_raises_with_partial_report():
    a, _ = _structured_symmetric(150, lambda d: np.linspace(-1, 1, d), seed=5)
    with pytest.raises(NonConvergedError) as exc:
        lanczos_extreme(dense_map(a), 5, "LA", max_iter=4, seed=5)
    assert exc.value.report is not None


def test_invalid_requests():
    a = np.diag([1.0, 2.0])
    with pytest.raises(ValueError):
        lanczos_extreme(dense_map(a), 0, "LA")
    with pytest.raises(ValueError):
        lanczos_extreme(dense_map(a), 1, "XX")
    with pytest.raises(ValueError):
        lanczos_extreme(dense_map(a), 3, "LA")    # k > dim


def test_trained_model_hessian_vs_dense_oracle():
    _, _, op, theta = small_problem(layers=(4, 6, 3), per_class=12, seed=6)
    oracle = dense_hessian_oracle(op, theta)
    assert oracle.asymmetry < 1e-8
    evals = np.array([p.lam for p in oracle.pairs])    # descending
    la = hessian_spectrum(op, theta, 3, "LA", seed=0)
    sa = hessian_spectrum(op, theta, 3, "SA", seed=0)
    scale = max(1.0, np.abs(evals).max())
    assert np.abs(la.lambdas() - evals[:3]).max() < 1e-8 * scale
    assert np.abs(sa.lambdas() - evals[::-1][:3]).max() < 1e-8 * scale
    assert la.step == 0 and la.side == "LA" and la.k == 3


def test_dense_oracle_cap():
    big = LinearMap(lambda v: v, DENSE_ORACLE_CAP + 1)
    with pytest.raises(ValueError, match="cap"):
        dense_eig_oracle(big)


def test_rayleigh_identities(tiny):
    _, _, op, theta = tiny
    rep = hessian_spectrum(op, theta, 1, "LA", seed=1)
    pair = rep.pairs[0]
    assert rayleigh(op, theta, pair.vec) == pytest.approx(pair.lam, abs=1e-9)
    # scale invariance
    assert rayleigh(op, theta, 2.5 * pair.vec) == pytest.approx(
        rayleigh(op, theta, pair.vec), rel=1e-12)
    with pytest.raises(ValueError):
        rayleigh(op, theta, np.zeros(op.dim))


def test_operator_application_counter():
    a = np.diag([4.0, 2.0, 1.0, -1.0])
    linmap = dense_map(a)
    rep = lanczos_extreme(linmap, 1, "LA", seed=0)
    assert rep.operator_applications > 0
    assert linmap.applications >= rep.operator_applications


def test_hessian_map_matches_hvp(tiny):
    _, _, op, theta = tiny
    linmap = hessian_map(op, theta)
    v = np.linspace(-1, 1, op.dim)
    assert np.array_equal(linmap.matvec(v), op.hvp(theta, v))
    neg = linmap.negated()
    assert np.array_equal(neg.matvec(v), -op.hvp(theta, v))
