"""Matrix-free extreme eigenpairs of the loss Hessian.

Lanczos with full reorthogonalization over an HVP operator, returning the
k algebraically largest (LA) or smallest (SA) eigenpairs, plus a dense
eigendecomposition oracle for validation at small dimension. SA runs the
same code path on the negated operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ndcore.operator import DimensionMismatchError

DENSE_ORACLE_CAP = 600


class NonConvergedError(RuntimeError):
    """Eigensolver ran out of budget; carries the partial report."""

    def __init__(self, report, residuals):
        self.report = report
        self.residuals = residuals
        super().__init__(
            f"{report.side}({report.k}) not converged within budget; "
            f"achieved residuals {residuals}")


class LinearMap:
    """Symmetric operator exposed only through matvec; counts applications."""

    def __init__(self, matvec, dim: int):
        self._matvec = matvec
        self.dim = dim
        self.applications = 0

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if v.shape != (self.dim,):
            raise DimensionMismatchError(f"vector shape {v.shape} vs dim {self.dim}")
        self.applications += 1
        return self._matvec(v)

    def negated(self) -> "LinearMap":
        return LinearMap(lambda v: -self.matvec(v), self.dim)


def dense_map(a: np.ndarray) -> LinearMap:
    a = np.asarray(a, dtype=np.float64)
    return LinearMap(lambda v: a @ v, a.shape[0])


def hessian_map(op, theta) -> LinearMap:
    """The map v -> H(theta) v of a loss operator at fixed parameters."""
    theta = np.asarray(theta, dtype=np.float64)
    return LinearMap(lambda v: op.hvp(theta, v), op.dim)


@dataclass(frozen=True)
class EigenPair:
    lam: float
    vec: np.ndarray      # unit norm, first nonzero coordinate positive
    residual: float      # ||H v - lam v||_2
    converged: bool = True


@dataclass(frozen=True)
class SpectrumReport:
    step: int
    side: str            # "LA" | "SA"
    k: int
    pairs: tuple[EigenPair, ...]   # LA: descending lam; SA: ascending lam
    provenance: str
    operator_applications: int

    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs])


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(v)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def _lanczos_sweep(linmap, start, m, locked_vecs):
    """One full-reorthogonalization sweep deflated against locked vectors.

    Returns the orthonormal basis Q (columns) and the tridiagonal entries.
    """
    dim = linmap.dim
    q = start.copy()
    for lv in locked_vecs:
        q -= (lv @ q) * lv
    nrm = np.linalg.norm(q)
    if nrm < 1e-12:
        return None
    q /= nrm
    basis = [q]
    alphas, betas = [], []
    for _ in range(m):
        w = linmap.matvec(basis[-1])
        alphas.append(float(basis[-1] @ w))
        # deflate and fully reorthogonalize (two classical GS passes)
        for lv in locked_vecs:
            w -= (lv @ w) * lv
        qmat = np.column_stack(basis)
        for _ in range(2):
            w -= qmat @ (qmat.T @ w)
        beta = np.linalg.norm(w)
        if beta < 1e-12 or len(basis) == m or len(basis) == dim:
            break
        betas.append(beta)
        basis.append(w / beta)
    return np.column_stack(basis), np.array(alphas), np.array(betas)


def lanczos_extreme(linmap: LinearMap, k: int, side: str = "LA", *,
                    max_iter: int = 10000, tol: float = 1e-8, seed: int = 0,
                    step: int = 0, provenance: str = "",
                    krylov_dim: int | None = None) -> SpectrumReport:
    """k most extreme eigenpairs on one side of a symmetric operator.

    Krylov dimension per sweep is min(d, max(4k, 64)) unless overridden.
    Ritz pairs count as converged when the exact residual satisfies
    ||A v - lam v|| <= tol * max(1, |lam|). Pairs are locked strictly from
    the extreme end inward, and each sweep restarts from the first
    unconverged Ritz vector (deflated against the locked set), so accuracy
    accumulates across restarts. At most ``max_iter`` operator
    applications are spent.

    Raises :class:`NonConvergedError` when the budget runs out first.
    """
    if side not in ("LA", "SA"):
        raise ValueError(f"side must be 'LA' or 'SA', got {side!r}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > linmap.dim:
        raise ValueError(f"k={k} exceeds operator dimension {linmap.dim}")
    work = linmap if side == "LA" else linmap.negated()
    dim = work.dim
    m = krylov_dim if krylov_dim is not None else min(dim, max(4 * k, 64))
    rng = np.random.default_rng(seed)

    locked: list[tuple[float, np.ndarray, float]] = []   # (lam, vec, residual)
    start = rng.standard_normal(dim)
    dead_starts = 0
    while work.applications < max_iter and len(locked) < k and dead_starts < 8:
        m_now = min(m, max_iter - work.applications)
        if m_now < 1:
            break
        sweep = _lanczos_sweep(work, start, m_now, [v for _, v, _ in locked])
        if sweep is None:
            start = rng.standard_normal(dim)
            dead_starts += 1
            continue
        dead_starts = 0
        qmat, alphas, betas = sweep
        tmat = np.diag(alphas)
        if betas.size:
            tmat += np.diag(betas, 1) + np.diag(betas, -1)
        evals, evecs = np.linalg.eigh(tmat)
        # walk Ritz pairs from the top: lock consecutive converged ones,
        # restart from the first that is not yet converged
        start = rng.standard_normal(dim)
        for j in range(1, evals.shape[0] + 1):
            if len(locked) == k or work.applications >= max_iter:
                break
            lam = float(evals[-j])
            v = qmat @ evecs[:, -j]
            v /= np.linalg.norm(v)
            res = float(np.linalg.norm(work.matvec(v) - lam * v))
            if res <= tol * max(1.0, abs(lam)):
                locked.append((lam, v, res))
            else:
                start = v
                break
        locked.sort(key=lambda p: -p[0])

    pairs = [EigenPair(lam if side == "LA" else -lam, _canonical_sign(v), res)
             for lam, v, res in locked]
    if side == "LA":
        pairs.sort(key=lambda p: -p.lam)
    else:
        pairs.sort(key=lambda p: p.lam)
    report = SpectrumReport(step=step, side=side, k=k, pairs=tuple(pairs),
                            provenance=provenance,
                            operator_applications=work.applications)
    if len(pairs) < k:
        raise NonConvergedError(report, [p.residual for p in pairs])
    return report


def hessian_spectrum(op, theta, k: int, side: str = "LA", *,
                     max_iter: int = 10000, tol: float = 1e-8, seed: int = 0,
                     step: int = 0) -> SpectrumReport:
    """Lanczos extreme eigenpairs of the loss Hessian at ``theta``."""
    linmap = hessian_map(op, theta)
    prov = f"{getattr(op, 'tag', '')};l2={getattr(op, 'l2', 0.0):g}"
    return lanczos_extreme(linmap, k, side, max_iter=max_iter, tol=tol,
                           seed=seed, step=step, provenance=prov)


@dataclass(frozen=True)
class DenseOracleResult:
    pairs: tuple[EigenPair, ...]   # all d pairs, descending lam
    asymmetry: float               # ||H - H^T||_F / ||H||_F before symmetrizing
    matrix: np.ndarray             # the symmetrized Hessian


def dense_eig_oracle(linmap: LinearMap, cap: int = DENSE_ORACLE_CAP) -> DenseOracleResult:
    """Materialize H column-by-column and eigendecompose it.

    Only usable at desk scale: refuses dimensions above ``cap``.
    """
    d = linmap.dim
    if d > cap:
        raise ValueError(f"dense oracle capped at d={cap}, operator has d={d}")
    h = np.empty((d, d))
    eye = np.eye(d)
    for i in range(d):
        h[:, i] = linmap.matvec(eye[i])
    hnorm = np.linalg.norm(h)
    asym = float(np.linalg.norm(h - h.T) / hnorm) if hnorm > 0 else 0.0
    hs = 0.5 * (h + h.T)
    evals, evecs = np.linalg.eigh(hs)
    pairs = []
    for i in range(d - 1, -1, -1):
        v = _canonical_sign(evecs[:, i])
        res = float(np.linalg.norm(hs @ v - evals[i] * v))
        pairs.append(EigenPair(float(evals[i]), v, res))
    return DenseOracleResult(tuple(pairs), asym, hs)


def dense_hessian_oracle(op, theta, cap: int = DENSE_ORACLE_CAP) -> DenseOracleResult:
    return dense_eig_oracle(hessian_map(op, theta), cap=cap)


def rayleigh(op, theta, v) -> float:
    """Curvature v^T H(theta) v / v^T v via a single HVP."""
    v = np.asarray(v, dtype=np.float64)
    vv = float(v @ v)
    if vv == 0.0:
        raise ValueError("rayleigh quotient of the zero vector")
    return float(v @ op.hvp(theta, v)) / vv
