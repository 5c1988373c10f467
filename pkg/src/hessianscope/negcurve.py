"""Online tracking of the most-negative Hessian direction during training.

The tracker maintains a unit vector v~ updated by power iteration on
I - 2 eta H, which amplifies the most negative eigenvalue of H once eta
is small enough (eta < 1/lambda_max). Derivation: minimizing the
Rayleigh-style objective m(v) = v^T H v by gradient descent with step eta
gives v <- v - 2 eta H v up to normalization.

The alternating optimizer interleaves a standard preconditioned step
with an extra descent step along v~ whenever the tracked curvature is
convincingly negative.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .eigen import rayleigh
from .train import RmsPropConfig, TrainerState, init_state, rmsprop_step


@dataclass(frozen=True)
class NegCurveConfig:
    beta: float = 0.00036           # step size along the tracked direction
    eta: float | None = None        # tracker step; None -> 0.4 / lambda_max
    warmup: int = 50                # steps before the extra step may fire
    threshold: float = 1e-3        # fire only when lambda~ < -threshold
    tracker_steps: int = 1          # tracker updates per optimizer step
    seed: int = 0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.eta is not None and self.eta <= 0:
            raise ValueError("eta must be positive when given")
        if self.warmup < 0 or self.tracker_steps < 1 or self.threshold < 0:
            raise ValueError("bad tracker configuration")

    def to_dict(self) -> dict:
        return {"beta": self.beta, "eta": self.eta, "warmup": self.warmup,
                "threshold": self.threshold,
                "tracker_steps": self.tracker_steps, "seed": self.seed}


@dataclass(frozen=True)
class TrackerState:
    vec: np.ndarray                 # unit-norm tracked direction
    lam: float                      # current Rayleigh estimate v~^T H v~
    eta: float
    steps: int = 0


@dataclass(frozen=True)
class LogRow:
    step: int
    loss: float
    lam: float                      # tracked curvature estimate
    projection: float               # g^T v~
    fired: bool                     # extra step taken this iteration


def estimate_lambda_max(op, theta, iters: int = 10, seed: int = 0) -> float:
    """Crude power-iteration bound on |lambda|_max of the Hessian."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(theta.shape[0])
    v /= np.linalg.norm(v)
    est = 1.0
    for _ in range(iters):
        w = op.hvp(theta, v)
        nrm = float(np.linalg.norm(w))
        if nrm < 1e-30:
            break
        est = nrm
        v = w / nrm
    return est


def init_tracker(op, theta, config: NegCurveConfig) -> TrackerState:
    rng = np.random.default_rng(config.seed)
    v = rng.standard_normal(theta.shape[0])
    v /= np.linalg.norm(v)
    if config.eta is not None:
        eta = config.eta
    else:
        lam_max = estimate_lambda_max(op, theta, seed=config.seed)
        eta = 0.4 / max(lam_max, 1e-12)
    return TrackerState(v, rayleigh(op, theta, v), eta)


def tracker_step(op, theta, state: TrackerState,
                 rng: np.random.Generator | None = None) -> TrackerState:
    """One power-iteration update of the tracked direction.

    w = v - 2 eta H v, renormalized. A collapsed w (H v ~ v / (2 eta))
    is reseeded randomly rather than treated as an error.
    """
    w = state.vec - 2.0 * state.eta * op.hvp(theta, state.vec)
    nrm = float(np.linalg.norm(w))
    if nrm < 1e-12:
        if rng is None:
            rng = np.random.default_rng(state.steps + 1)
        w = rng.standard_normal(state.vec.shape[0])
        nrm = float(np.linalg.norm(w))
    v = w / nrm
    return TrackerState(v, rayleigh(op, theta, v), state.eta,
                        state.steps + 1)


def alternating_update(op, state: TrainerState, tracker: TrackerState,
                       opt_config: RmsPropConfig, nc_config: NegCurveConfig,
                       rng: np.random.Generator | None = None,
                       ) -> tuple[TrainerState, TrackerState, LogRow]:
    """One combined step: preconditioned descent, then curvature escape.

    The extra step moves along the tracked direction scaled by the local
    gradient projection, theta <- theta - beta (g^T v~) v~, and fires only
    after warmup and when lambda~ is convincingly negative.
    """
    loss, grad = op.loss_and_gradient(state.theta)
    state = rmsprop_step(state, grad, opt_config)

    fired = False
    projection = 0.0
    warm = tracker.steps >= nc_config.warmup
    if warm and tracker.lam < -nc_config.threshold and nc_config.beta > 0:
        g_new = op.gradient(state.theta)
        projection = float(g_new @ tracker.vec)
        theta = state.theta - nc_config.beta * projection * tracker.vec
        state = replace(state, theta=theta)
        fired = True

    for _ in range(nc_config.tracker_steps):
        tracker = tracker_step(op, state.theta, tracker, rng)
    row = LogRow(state.step, loss, tracker.lam, projection, fired)
    return state, tracker, row


def run_alternating(op, theta0, opt_config: RmsPropConfig,
                    nc_config: NegCurveConfig, steps: int,
                    steps_per_epoch: int = 1,
                    ) -> tuple[TrainerState, TrackerState, list[LogRow]]:
    """Full alternating run on a fixed operator (deterministic batches)."""
    state = init_state(np.asarray(theta0, dtype=np.float64), opt_config,
                       steps_per_epoch)
    tracker = init_tracker(op, state.theta, nc_config)
    rng = np.random.default_rng(nc_config.seed + 1)
    rows = []
    for _ in range(steps):
        state, tracker, row = alternating_update(
            op, state, tracker, opt_config, nc_config, rng)
        rows.append(row)
    return state, tracker, rows


def run_baseline(op, theta0, opt_config: RmsPropConfig, steps: int,
                 steps_per_epoch: int = 1,
                 ) -> tuple[TrainerState, list[float]]:
    """Plain preconditioned run for paired comparisons."""
    state = init_state(np.asarray(theta0, dtype=np.float64), opt_config,
                       steps_per_epoch)
    losses = []
    for _ in range(steps):
        loss, grad = op.loss_and_gradient(state.theta)
        losses.append(loss)
        state = rmsprop_step(state, grad, opt_config)
    return state, losses
