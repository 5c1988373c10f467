"""Experiment configuration: strict JSON schema plus seed derivation.

One master seed drives every stochastic component through fixed
offsets, so a single integer pins the whole pipeline:

    data generation    seed + 0
    parameter init     seed + 1
    batch shuffling    seed + 2
    eigensolver seeds  seed + 3
    subset selection   seed + 4
    curvature tracker  seed + 5

The environment variable HESSIANSCOPE_SEED overrides the master seed.
Unknown keys anywhere in the file are rejected rather than ignored;
"timestamp" at top level is the one tolerated metadata key, so a
resolved copy written by the runner can be fed back in unchanged.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .model import ModelSpec
from .negcurve import NegCurveConfig
from .train import RmsPropConfig

ENV_SEED = "HESSIANSCOPE_SEED"


class ConfigError(ValueError):
    """Schema violation in a run configuration."""


def _section(raw, name: str, allowed: set[str]) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be a JSON object")
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {sorted(unknown)}; "
                          f"allowed: {sorted(allowed)}")
    return dict(raw)


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


@dataclass(frozen=True)
class DataConfig:
    kind: str = "blobs"             # "blobs" or "idx"
    classes: int = 5
    per_class: int = 200
    dim: int = 10
    spread: float = 0.05
    images: str | None = None       # idx file paths
    labels: str | None = None
    subset_fraction: float = 0.05   # fixed subset for curvature work

    def __post_init__(self):
        _require(self.kind in ("blobs", "idx"),
                 f"data.kind must be 'blobs' or 'idx', got {self.kind!r}")
        if self.kind == "idx":
            _require(bool(self.images) and bool(self.labels),
                     "data.kind 'idx' needs both images and labels paths")
        else:
            _require(self.classes >= 2 and self.per_class >= 1 and self.dim >= 1,
                     "blobs need classes >= 2, per_class >= 1, dim >= 1")
            _require(self.spread >= 0, "data.spread must be >= 0")
        _require(0.0 < self.subset_fraction <= 1.0,
                 "data.subset_fraction must be in (0, 1]")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "classes": self.classes,
                "per_class": self.per_class, "dim": self.dim,
                "spread": self.spread, "images": self.images,
                "labels": self.labels,
                "subset_fraction": self.subset_fraction}


@dataclass(frozen=True)
class TrainConfig:
    optimizer: RmsPropConfig = RmsPropConfig()
    total_steps: int = 500
    checkpoint_every: int = 100
    l2: float = 0.0

    def __post_init__(self):
        _require(self.total_steps >= 0, "train.total_steps must be >= 0")
        _require(self.checkpoint_every >= 1,
                 "train.checkpoint_every must be >= 1")
        _require(self.l2 >= 0, "train.l2 must be >= 0")

    def to_dict(self) -> dict:
        d = self.optimizer.to_dict()
        d.update({"total_steps": self.total_steps,
                  "checkpoint_every": self.checkpoint_every, "l2": self.l2})
        return d


@dataclass(frozen=True)
class EigenConfig:
    k: int = 5
    sides: tuple[str, ...] = ("LA", "SA")
    tol: float = 1e-8
    max_iter: int = 10000
    steps: tuple[int, ...] | None = None    # None: last checkpoint only

    def __post_init__(self):
        _require(self.k >= 1, "eigen.k must be >= 1")
        _require(len(self.sides) > 0 and all(s in ("LA", "SA")
                                             for s in self.sides),
                 "eigen.sides entries must be 'LA' or 'SA'")
        _require(self.tol > 0 and self.max_iter >= 1,
                 "eigen.tol must be > 0 and eigen.max_iter >= 1")

    def to_dict(self) -> dict:
        return {"k": self.k, "sides": list(self.sides), "tol": self.tol,
                "max_iter": self.max_iter,
                "steps": None if self.steps is None else list(self.steps)}


@dataclass(frozen=True)
class AnalysisConfig:
    t0: int | None = None           # None: earliest step in the spectrum file
    step: int | None = None         # None: latest step in the spectrum file
    rank: int = 0                   # probe direction for the time series
    alpha_max: float = 1.0
    n_points: int = 41
    ranges: tuple[float, ...] = (1.0,)
    search_alpha_min: float = 1e-4
    search_alpha_max: float = 10.0
    search_points_per_side: int = 64
    golden_iters: int = 30

    def __post_init__(self):
        _require(self.rank >= 0, "analysis.rank must be >= 0")
        _require(self.alpha_max > 0, "analysis.alpha_max must be > 0")
        _require(self.n_points >= 3 and self.n_points % 2 == 1,
                 "analysis.n_points must be odd and >= 3")
        _require(len(self.ranges) > 0 and all(r > 0 for r in self.ranges),
                 "analysis.ranges must be positive and non-empty")
        _require(0 < self.search_alpha_min < self.search_alpha_max,
                 "need 0 < search_alpha_min < search_alpha_max")
        _require(self.search_points_per_side >= 2 and self.golden_iters >= 0,
                 "bad line-search grid settings")

    def to_dict(self) -> dict:
        return {"t0": self.t0, "step": self.step, "rank": self.rank,
                "alpha_max": self.alpha_max, "n_points": self.n_points,
                "ranges": list(self.ranges),
                "search_alpha_min": self.search_alpha_min,
                "search_alpha_max": self.search_alpha_max,
                "search_points_per_side": self.search_points_per_side,
                "golden_iters": self.golden_iters}


@dataclass(frozen=True)
class NegCurveSection:
    beta: float = 0.00036
    eta: float | None = None
    warmup: int = 50
    threshold: float = 1e-3
    tracker_steps: int = 1
    steps: int = 300                # length of the paired runs

    def __post_init__(self):
        _require(self.steps >= 1, "negcurve.steps must be >= 1")

    def tracker_config(self, seed: int) -> NegCurveConfig:
        return NegCurveConfig(beta=self.beta, eta=self.eta,
                              warmup=self.warmup, threshold=self.threshold,
                              tracker_steps=self.tracker_steps, seed=seed)

    def to_dict(self) -> dict:
        return {"beta": self.beta, "eta": self.eta, "warmup": self.warmup,
                "threshold": self.threshold,
                "tracker_steps": self.tracker_steps, "steps": self.steps}


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    output: str = "runs/out"
    data: DataConfig = DataConfig()
    model_layers: tuple[int, ...] = (10, 16, 5)
    model_activation: str = "softplus"
    train: TrainConfig = TrainConfig()
    eigen: EigenConfig = EigenConfig()
    analysis: AnalysisConfig = AnalysisConfig()
    negcurve: NegCurveSection = NegCurveSection()

    # sub-seed offsets, see module docstring
    @property
    def data_seed(self) -> int:
        return self.seed

    @property
    def init_seed(self) -> int:
        return self.seed + 1

    @property
    def shuffle_seed(self) -> int:
        return self.seed + 2

    @property
    def eigen_seed(self) -> int:
        return self.seed + 3

    @property
    def subset_seed(self) -> int:
        return self.seed + 4

    @property
    def tracker_seed(self) -> int:
        return self.seed + 5

    def model_spec(self) -> ModelSpec:
        return ModelSpec(self.model_layers, self.model_activation,
                         seed=self.init_seed)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "output": self.output,
                "data": self.data.to_dict(),
                "model": {"layers": list(self.model_layers),
                          "activation": self.model_activation},
                "train": self.train.to_dict(),
                "eigen": self.eigen.to_dict(),
                "analysis": self.analysis.to_dict(),
                "negcurve": self.negcurve.to_dict()}


_TOP_KEYS = {"seed", "output", "data", "model", "train", "eigen", "analysis",
             "negcurve", "timestamp"}
_MODEL_KEYS = {"layers", "activation"}
_DATA_KEYS = {"kind", "classes", "per_class", "dim", "spread", "images",
              "labels", "subset_fraction"}
_TRAIN_KEYS = {"base_lr", "per_epoch_decay", "rms_decay", "momentum",
               "batch_size", "epsilon", "total_steps", "checkpoint_every",
               "l2"}
_EIGEN_KEYS = {"k", "sides", "tol", "max_iter", "steps"}
_ANALYSIS_KEYS = {"t0", "step", "rank", "alpha_max", "n_points", "ranges",
                  "search_alpha_min", "search_alpha_max",
                  "search_points_per_side", "golden_iters"}
_NEGCURVE_KEYS = {"beta", "eta", "warmup", "threshold", "tracker_steps",
                  "steps"}


def config_from_dict(raw: dict) -> RunConfig:
    top = _section(raw, "config", _TOP_KEYS)
    top.pop("timestamp", None)
    try:
        kwargs = {}
        if "seed" in top:
            kwargs["seed"] = int(top["seed"])
        if "output" in top:
            kwargs["output"] = str(top["output"])
        if "data" in top:
            kwargs["data"] = DataConfig(**_section(top["data"], "data",
                                                   _DATA_KEYS))
        if "model" in top:
            m = _section(top["model"], "model", _MODEL_KEYS)
            if "layers" in m:
                kwargs["model_layers"] = tuple(int(n) for n in m["layers"])
            if "activation" in m:
                kwargs["model_activation"] = str(m["activation"])
        if "train" in top:
            t = _section(top["train"], "train", _TRAIN_KEYS)
            opt_keys = {k: t.pop(k) for k in list(t)
                        if k in RmsPropConfig().to_dict()}
            kwargs["train"] = TrainConfig(optimizer=RmsPropConfig(**opt_keys),
                                          **t)
        if "eigen" in top:
            e = _section(top["eigen"], "eigen", _EIGEN_KEYS)
            if "sides" in e:
                e["sides"] = tuple(e["sides"])
            if e.get("steps") is not None:
                e["steps"] = tuple(int(s) for s in e["steps"])
            kwargs["eigen"] = EigenConfig(**e)
        if "analysis" in top:
            a = _section(top["analysis"], "analysis", _ANALYSIS_KEYS)
            if "ranges" in a:
                a["ranges"] = tuple(float(r) for r in a["ranges"])
            kwargs["analysis"] = AnalysisConfig(**a)
        if "negcurve" in top:
            n = _section(top["negcurve"], "negcurve", _NEGCURVE_KEYS)
            kwargs["negcurve"] = NegCurveSection(**n)
        config = RunConfig(**kwargs)
        config.model_spec()     # validates layers and activation
        return config
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def apply_overrides(raw: dict, overrides: dict) -> dict:
    """Apply dotted-path CLI overrides, e.g. {"eigen.k": 8}."""
    out = json.loads(json.dumps(raw))    # deep copy of plain JSON
    for path, value in overrides.items():
        parts = path.split(".")
        node = out
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot override {path!r}: "
                                  f"{part!r} is not a section")
        node[parts[-1]] = value
    return out


def load_config(path, overrides: dict | None = None,
                env: dict | None = None) -> RunConfig:
    """Read, override, and validate a JSON run configuration."""
    env = os.environ if env is None else env
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be a JSON object")
    if overrides:
        raw = apply_overrides(raw, overrides)
    if ENV_SEED in env:
        try:
            raw["seed"] = int(env[ENV_SEED])
        except ValueError as exc:
            raise ConfigError(f"{ENV_SEED} must be an integer, "
                              f"got {env[ENV_SEED]!r}") from exc
    return config_from_dict(raw)
