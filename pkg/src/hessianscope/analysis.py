"""Curvature analyses along eigendirections of the loss Hessian.

Four experiment families: tracking the curvature of a frozen probe
direction across a trajectory, true-loss profiles against the local
quadratic model, quadratic refits of the profile over finite ranges
(local vs global curvature), and greedy per-direction line searches for
the empirically optimal step.

Displacements follow theta - alpha * (g . v) * v: the gradient projection
s = g(theta)^T v scales the step so that alpha = 1/lambda is optimal on a
quadratic with curvature lambda along v.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigen import EigenPair, SpectrumReport, rayleigh
from .ndcore.operator import NonFiniteError
from .train import Trajectory

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CurvatureSeries:
    t0: int
    probe: EigenPair
    steps: tuple[int, ...]
    curvatures: tuple[float, ...]   # v^T H(t) v per checkpoint


@dataclass(frozen=True)
class LossProfile:
    pair: EigenPair
    projection: float               # s = g(theta)^T v
    alphas: np.ndarray
    true_losses: np.ndarray         # NaN where evaluation overflowed
    model_losses: np.ndarray        # L - alpha s^2 + 0.5 alpha^2 s^2 lam
    base_loss: float
    alpha_max: float


@dataclass(frozen=True)
class QuadraticFit:
    index: int
    lam: float
    alpha_max: float
    range_tag: str
    curvature: float                # second-order term, comparable to lam
    residual: float                 # rms misfit of the quadratic
    degenerate: bool = False


@dataclass(frozen=True)
class LineSearchResult:
    index: int
    lam: float
    projection: float
    alpha_star: float
    best_loss: float
    improvement: float              # L(theta) - best loss, >= 0
    boundary: bool                  # best alpha sits at a grid endpoint
    degenerate: bool = False        # zero gradient projection


@dataclass(frozen=True)
class SearchGrid:
    """0 plus +/- log-spaced alphas; refined by golden-section afterwards."""

    alpha_min: float = 1e-4
    alpha_max: float = 10.0
    points_per_side: int = 64
    golden_iters: int = 30

    def __post_init__(self):
        if not 0 < self.alpha_min < self.alpha_max:
            raise ValueError("need 0 < alpha_min < alpha_max")
        if self.points_per_side < 2:
            raise ValueError("points_per_side must be >= 2")

    def alphas(self) -> np.ndarray:
        pos = np.geomspace(self.alpha_min, self.alpha_max, self.points_per_side)
        return np.concatenate([-pos[::-1], [0.0], pos])


def curvature_over_time(trajectory: Trajectory, t0: int, probe: EigenPair,
                        op) -> CurvatureSeries:
    """Rayleigh quotient of a frozen direction at every checkpoint.

    The operator must be the same fixed-subset loss operator throughout,
    so series entries are comparable across time.
    """
    if probe.vec.shape[0] != trajectory.dim:
        raise ValueError(
            f"probe dimension {probe.vec.shape[0]} vs trajectory {trajectory.dim}")
    trajectory.at(t0)   # raises with available steps when missing
    steps, curvatures = [], []
    for ckpt in trajectory.checkpoints:
        steps.append(ckpt.step)
        curvatures.append(rayleigh(op, ckpt.theta, probe.vec))
    return CurvatureSeries(t0, probe, tuple(steps), tuple(curvatures))


def directional_loss_profile(op, theta, pair: EigenPair, alpha_max: float,
                             n_points: int) -> LossProfile:
    """True loss vs quadratic model along one eigendirection.

    The grid is symmetric with 0 exactly in the middle; overflowing
    evaluations are recorded as NaN rather than aborting the profile.
    """
    if n_points < 3 or n_points % 2 == 0:
        raise ValueError("n_points must be an odd number >= 3")
    theta = np.asarray(theta, dtype=np.float64)
    half = (n_points - 1) // 2
    pos = np.linspace(alpha_max / half, alpha_max, half)
    alphas = np.concatenate([-pos[::-1], [0.0], pos])

    base_loss, grad = op.loss_and_gradient(theta)
    s = float(grad @ pair.vec)
    true_losses = np.empty(n_points)
    for i, alpha in enumerate(alphas):
        try:
            true_losses[i] = op.loss(theta - (alpha * s) * pair.vec)
        except NonFiniteError:
            true_losses[i] = np.nan
    model = base_loss - alphas * s ** 2 + 0.5 * alphas ** 2 * s ** 2 * pair.lam
    return LossProfile(pair, s, alphas, true_losses, model, base_loss,
                       float(alpha_max))


def quadratic_fit(profile: LossProfile, index: int = 0) -> QuadraticFit:
    """Least-squares quadratic in arc length u = alpha * s.

    Fitting against u makes the second-order coefficient directly
    comparable to the eigenvalue: curvature = 2 c2.
    """
    finite = np.isfinite(profile.true_losses)
    if finite.sum() < 3 or profile.projection == 0.0:
        return QuadraticFit(index, profile.pair.lam, profile.alpha_max,
                            _range_tag(profile.alpha_max), math.nan, math.nan,
                            degenerate=True)
    u = profile.alphas[finite] * profile.projection
    y = profile.true_losses[finite]
    design = np.column_stack([np.ones_like(u), u, u * u])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - y) ** 2)))
    return QuadraticFit(index, profile.pair.lam, profile.alpha_max,
                        _range_tag(profile.alpha_max), 2.0 * float(coef[2]),
                        resid)


def _range_tag(alpha_max: float) -> str:
    return f"+-{alpha_max:g}"


def _golden_section(f, lo, hi, iters):
    """Golden-section minimization; returns the best point evaluated."""
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    best_x, best_f = (x1, f1) if f1 <= f2 else (x2, f2)
    for _ in range(iters):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        if f1 < best_f:
            best_x, best_f = x1, f1
        if f2 < best_f:
            best_x, best_f = x2, f2
    return best_x, best_f


def optimal_step_search(op, theta, pair: EigenPair, grid: SearchGrid,
                        index: int = 0) -> LineSearchResult:
    """Greedy line search for argmin_alpha L(theta - alpha (g.v) v).

    Coarse scan over the signed log grid, then golden-section refinement
    between the neighbors of the coarse argmin. A minimizer at a grid
    endpoint is flagged, not treated as an error.
    """
    theta = np.asarray(theta, dtype=np.float64)
    base_loss, grad = op.loss_and_gradient(theta)
    s = float(grad @ pair.vec)
    if s == 0.0:
        return LineSearchResult(index, pair.lam, s, 0.0, base_loss, 0.0,
                                boundary=False, degenerate=True)

    def phi(alpha: float) -> float:
        try:
            return op.loss(theta - (alpha * s) * pair.vec)
        except NonFiniteError:
            return math.inf

    alphas = grid.alphas()
    losses = np.array([phi(a) for a in alphas])
    if not np.any(np.isfinite(losses)):
        raise NonFiniteError("line search: loss non-finite on the whole grid")
    i = int(np.argmin(losses))
    boundary = i == 0 or i == len(alphas) - 1
    best_alpha, best_loss = float(alphas[i]), float(losses[i])
    lo = alphas[max(i - 1, 0)]
    hi = alphas[min(i + 1, len(alphas) - 1)]
    if hi > lo:
        gx, gf = _golden_section(phi, lo, hi, grid.golden_iters)
        if gf < best_loss:
            best_alpha, best_loss = float(gx), float(gf)
    return LineSearchResult(index, pair.lam, s, best_alpha, best_loss,
                            base_loss - best_loss, boundary=boundary)


def improvement_report(op, theta, spectrum: SpectrumReport | list[EigenPair],
                       grid: SearchGrid) -> list[LineSearchResult]:
    """Optimal-step search along every eigenpair of a spectrum report."""
    pairs = spectrum.pairs if isinstance(spectrum, SpectrumReport) else spectrum
    if not pairs:
        raise ValueError("empty spectrum")
    return [optimal_step_search(op, theta, pair, grid, index=i)
            for i, pair in enumerate(pairs)]


def step_vs_curvature_correlation(results: list[LineSearchResult],
                                  sign: int) -> tuple[float, int]:
    """Pearson correlation of (1/alpha*, lambda) over one curvature sign.

    Returns (correlation, count); NaN correlation when fewer than two
    usable directions exist.
    """
    xs, ys = [], []
    for r in results:
        if r.degenerate or r.alpha_star == 0.0:
            continue
        if (sign > 0 and r.lam > 0) or (sign < 0 and r.lam < 0):
            xs.append(1.0 / r.alpha_star)
            ys.append(r.lam)
    if len(xs) < 2:
        return math.nan, len(xs)
    x = np.asarray(xs) - np.mean(xs)
    y = np.asarray(ys) - np.mean(ys)
    denom = math.sqrt(float(x @ x) * float(y @ y))
    # constant inputs (every direction hit the same grid boundary) have
    # no defined correlation
    if denom == 0.0:
        return math.nan, len(xs)
    return float(x @ y) / denom, len(xs)
