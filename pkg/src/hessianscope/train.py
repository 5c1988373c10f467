"""RMSProp-with-momentum training producing a checkpointed trajectory.

Update rule (momentum applied to the preconditioned step, noted in the
trajectory manifest):

    acc <- rho * acc + (1 - rho) * g^2
    mom <- mu * mom + lr * g / sqrt(acc + eps)
    theta <- theta - mom
    lr <- lr * per_step_decay        (after the parameter update)

with per_step_decay = per_epoch_decay ** (1 / steps_per_epoch), so the
learning rate shrinks by the configured per-epoch factor once per epoch.
"""

from __future__ import annotations

import json
import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from . import fileio
from .data import Dataset
from .model import ModelSpec, init_params, make_loss_operator
from .ndcore.operator import NonFiniteError

CHECKPOINT_MAGIC = b"HSCP"
EIGVEC_MAGIC = b"HSEV"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQQdd")


@dataclass(frozen=True)
class RmsPropConfig:
    base_lr: float = 0.00036
    per_epoch_decay: float = 0.75
    rms_decay: float = 0.95
    momentum: float = 0.22
    batch_size: int = 32
    epsilon: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.rms_decay < 1.0:
            raise ValueError("rms_decay must be in (0, 1)")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if self.base_lr <= 0.0:
            raise ValueError("base_lr must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def to_dict(self) -> dict:
        return {"base_lr": self.base_lr, "per_epoch_decay": self.per_epoch_decay,
                "rms_decay": self.rms_decay, "momentum": self.momentum,
                "batch_size": self.batch_size, "epsilon": self.epsilon}

    @staticmethod
    def from_dict(d: dict) -> "RmsPropConfig":
        return RmsPropConfig(**d)


@dataclass(frozen=True)
class TrainerState:
    theta: np.ndarray
    acc: np.ndarray
    mom: np.ndarray
    step: int
    lr: float
    lr_decay_per_step: float


def init_state(theta0: np.ndarray, config: RmsPropConfig,
               steps_per_epoch: int) -> TrainerState:
    d = theta0.shape[0]
    decay = config.per_epoch_decay ** (1.0 / steps_per_epoch)
    return TrainerState(theta=theta0.copy(), acc=np.zeros(d), mom=np.zeros(d),
                        step=0, lr=config.base_lr, lr_decay_per_step=decay)


def rmsprop_step(state: TrainerState, grad: np.ndarray,
                 config: RmsPropConfig) -> TrainerState:
    if grad.shape != state.theta.shape:
        raise ValueError(f"gradient shape {grad.shape} vs {state.theta.shape}")
    if not np.all(np.isfinite(grad)):
        bad = int(np.flatnonzero(~np.isfinite(grad))[0])
        raise NonFiniteError(
            f"non-finite gradient at step {state.step} (coordinate {bad})")
    acc = config.rms_decay * state.acc + (1.0 - config.rms_decay) * grad * grad
    mom = config.momentum * state.mom + state.lr * grad / np.sqrt(acc + config.epsilon)
    theta = state.theta - mom
    return TrainerState(theta=theta, acc=acc, mom=mom, step=state.step + 1,
                        lr=state.lr * state.lr_decay_per_step,
                        lr_decay_per_step=state.lr_decay_per_step)


@dataclass(frozen=True)
class Checkpoint:
    step: int
    theta: np.ndarray
    loss: float
    lr: float


@dataclass(frozen=True)
class Trajectory:
    checkpoints: tuple[Checkpoint, ...]
    spec: ModelSpec
    provenance: str
    run_config: dict
    config_hash: str
    steps_per_epoch: int

    def steps(self) -> list[int]:
        return [c.step for c in self.checkpoints]

    def at(self, step: int) -> Checkpoint:
        for c in self.checkpoints:
            if c.step == step:
                return c
        raise KeyError(
            f"no checkpoint at step {step}; available: {self.steps()}")

    @property
    def dim(self) -> int:
        return self.checkpoints[0].theta.shape[0]


def train(spec: ModelSpec, dataset: Dataset, config: RmsPropConfig,
          checkpoint_every: int, total_steps: int, seed: int,
          l2: float = 0.0) -> Trajectory:
    """Deterministic training run; reshuffles once per epoch.

    ``seed`` drives only the batch shuffling stream (initialization
    comes from ``spec.seed``). Checkpoints are taken at t = 0, at every
    multiple of ``checkpoint_every``, and at t = total_steps; the
    recorded loss is the full-dataset objective at the snapshot.
    """
    if checkpoint_every < 1:
        raise ValueError("checkpoint_every must be >= 1")
    if total_steps < 0:
        raise ValueError("total_steps must be >= 0")
    n = dataset.n
    steps_per_epoch = math.ceil(n / config.batch_size)
    full_op = make_loss_operator(spec, dataset.inputs, dataset.labels, l2=l2,
                                 tag="train-full")
    state = init_state(init_params(spec), config, steps_per_epoch)
    rng = np.random.default_rng(seed)

    run_config = {
        "model": spec.to_dict(),
        "dataset": dataset.provenance,
        "trainer": config.to_dict(),
        "l2": l2,
        "checkpoint_every": checkpoint_every,
        "total_steps": total_steps,
        "seed": seed,
        "update_rule": "rmsprop momentum-on-preconditioned-step",
    }

    checkpoints = [Checkpoint(0, state.theta.copy(), full_op.loss(state.theta),
                              state.lr)]
    order = None
    for t in range(total_steps):
        pos = t % steps_per_epoch
        if pos == 0:
            order = rng.permutation(n)
        idx = order[pos * config.batch_size:(pos + 1) * config.batch_size]
        batch_op = make_loss_operator(spec, dataset.inputs[idx],
                                      dataset.labels[idx], l2=l2)
        try:
            _, grad = batch_op.loss_and_gradient(state.theta)
        except NonFiniteError as e:
            raise NonFiniteError(f"step {t}: {e}") from e
        state = rmsprop_step(state, grad, config)
        if state.step % checkpoint_every == 0 or state.step == total_steps:
            checkpoints.append(Checkpoint(state.step, state.theta.copy(),
                                          full_op.loss(state.theta), state.lr))
    return Trajectory(tuple(checkpoints), spec, dataset.provenance, run_config,
                      fileio.config_hash(run_config), steps_per_epoch)


# ---------------------------------------------------------------------------
# on-disk formats


def _write_vector_file(path, magic: bytes, step: int, a: float, b: float,
                       values: np.ndarray):
    head = _HEADER.pack(magic, FORMAT_VERSION, values.shape[0], step, a, b)
    body = np.ascontiguousarray(values, dtype="<f8").tobytes()
    fileio.atomic_write_bytes(path, head + body)


def _read_vector_file(path, magic: bytes):
    with open(path, "rb") as f:
        buf = f.read()
    if len(buf) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    got, version, d, step, a, b = _HEADER.unpack_from(buf)
    if got != magic:
        raise ValueError(f"{path}: bad magic {got!r}, expected {magic!r}")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    body = buf[_HEADER.size:]
    if len(body) != 8 * d:
        raise ValueError(f"{path}: expected {8 * d} value bytes, got {len(body)}")
    values = np.frombuffer(body, dtype="<f8").astype(np.float64)
    return step, a, b, values


def save_checkpoint(path, ckpt: Checkpoint):
    _write_vector_file(path, CHECKPOINT_MAGIC, ckpt.step, ckpt.loss, ckpt.lr,
                       ckpt.theta)


def load_checkpoint(path) -> Checkpoint:
    step, loss, lr, theta = _read_vector_file(path, CHECKPOINT_MAGIC)
    return Checkpoint(step, theta, loss, lr)


def save_eigvec(path, step: int, lam: float, residual: float, v: np.ndarray):
    _write_vector_file(path, EIGVEC_MAGIC, step, lam, residual, v)


def load_eigvec(path):
    """Returns (step, lambda, residual, vector)."""
    return _read_vector_file(path, EIGVEC_MAGIC)


def save_trajectory(out_dir, traj: Trajectory):
    ckpt_dir = os.path.join(out_dir, "checkpoints")
    os.makedirs(ckpt_dir, exist_ok=True)
    files = []
    for ckpt in traj.checkpoints:
        name = f"ckpt_{ckpt.step:08d}.hscp"
        save_checkpoint(os.path.join(ckpt_dir, name), ckpt)
        files.append({"step": ckpt.step, "loss": ckpt.loss, "lr": ckpt.lr,
                      "file": f"checkpoints/{name}"})
    manifest = {
        "format_version": FORMAT_VERSION,
        "model": traj.spec.to_dict(),
        "dataset_provenance": traj.provenance,
        "run_config": traj.run_config,
        "config_hash": traj.config_hash,
        "steps_per_epoch": traj.steps_per_epoch,
        "checkpoints": files,
    }
    fileio.atomic_write_text(os.path.join(out_dir, "trajectory.json"),
                             json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def load_trajectory(out_dir) -> Trajectory:
    with open(os.path.join(out_dir, "trajectory.json")) as f:
        manifest = json.load(f)
    checkpoints = []
    for entry in manifest["checkpoints"]:
        ckpt = load_checkpoint(os.path.join(out_dir, entry["file"]))
        if ckpt.step != entry["step"]:
            raise ValueError(f"{entry['file']}: step mismatch with manifest")
        checkpoints.append(ckpt)
    return Trajectory(tuple(checkpoints),
                      ModelSpec.from_dict(manifest["model"]),
                      manifest["dataset_provenance"],
                      manifest["run_config"],
                      manifest["config_hash"],
                      manifest["steps_per_epoch"])
