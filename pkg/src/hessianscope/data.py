"""Dataset ingestion: IDX files, synthetic blobs, fixed evaluation subsets.

All Hessian work downstream runs on a :class:`FixedSubset`, an immutable
sorted index list into a parent dataset, so the implicit loss operator
always sees the same samples in the same order.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    inputs: np.ndarray   # (N, in_dim) float64
    labels: np.ndarray   # (N,) int64
    provenance: str

    def __post_init__(self):
        if self.inputs.ndim != 2 or self.inputs.shape[0] < 1:
            raise ValueError(f"bad inputs shape {self.inputs.shape}")
        if self.labels.shape != (self.inputs.shape[0],):
            raise ValueError("labels must be one integer per input row")
        if not np.all(np.isfinite(self.inputs)):
            raise ValueError("dataset inputs contain non-finite values")
        self.inputs.flags.writeable = False
        self.labels.flags.writeable = False

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def in_dim(self) -> int:
        return self.inputs.shape[1]


@dataclass(frozen=True)
class FixedSubset:
    dataset: Dataset
    indices: np.ndarray  # strictly increasing, unique, in [0, N)
    fraction: float
    seed: int

    def __post_init__(self):
        self.indices.flags.writeable = False

    @property
    def n(self) -> int:
        return self.indices.shape[0]

    def rows(self) -> tuple[np.ndarray, np.ndarray]:
        return self.dataset.inputs[self.indices], self.dataset.labels[self.indices]

    @property
    def tag(self) -> str:
        return (f"subset(fraction={self.fraction:g},seed={self.seed},"
                f"n={self.n}/{self.dataset.n})")


def _read_header(buf: bytes, path, n_dims: int, expect_magic: int):
    head = 4 * (1 + n_dims)
    if len(buf) < head:
        raise IdxFormatError(f"{path}: truncated header")
    magic = struct.unpack(">I", buf[:4])[0]
    if magic != expect_magic:
        raise IdxFormatError(
            f"{path}: bad magic 0x{magic:08x}, expected 0x{expect_magic:08x}")
    dims = struct.unpack(f">{n_dims}I", buf[4:head])
    return dims, buf[head:]


def load_idx(images_path, labels_path) -> Dataset:
    """Parse an IDX image/label file pair (big-endian, unsigned bytes).

    Pixel values are scaled by 1/255; no mean subtraction.
    """
    with open(images_path, "rb") as f:
        ibuf = f.read()
    with open(labels_path, "rb") as f:
        lbuf = f.read()
    (n_img, rows, cols), ibody = _read_header(ibuf, images_path, 3, IDX_IMAGE_MAGIC)
    (n_lab,), lbody = _read_header(lbuf, labels_path, 1, IDX_LABEL_MAGIC)
    if len(ibody) != n_img * rows * cols:
        raise IdxFormatError(
            f"{images_path}: expected {n_img * rows * cols} pixel bytes, "
            f"got {len(ibody)}")
    if len(lbody) != n_lab:
        raise IdxFormatError(
            f"{labels_path}: expected {n_lab} label bytes, got {len(lbody)}")
    if n_img != n_lab:
        raise IdxFormatError(
            f"count mismatch: {n_img} images vs {n_lab} labels")
    pixels = np.frombuffer(ibody, dtype=np.uint8).reshape(n_img, rows * cols)
    inputs = pixels.astype(np.float64) / 255.0
    labels = np.frombuffer(lbody, dtype=np.uint8).astype(np.int64)
    return Dataset(inputs, labels, provenance=f"idx:{images_path}")


def make_blobs(classes: int, per_class: int, dim: int, spread: float,
               seed: int) -> Dataset:
    """Balanced Gaussian clusters with centers drawn uniformly in [0, 1]^dim."""
    if classes < 1 or per_class < 1 or dim < 1:
        raise ValueError("classes, per_class and dim must be positive")
    if spread < 0:
        raise ValueError("spread must be >= 0")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.0, 1.0, size=(classes, dim))
    inputs = np.empty((classes * per_class, dim))
    labels = np.empty(classes * per_class, dtype=np.int64)
    for c in range(classes):
        noise = rng.standard_normal((per_class, dim))
        inputs[c * per_class:(c + 1) * per_class] = centers[c] + spread * noise
        labels[c * per_class:(c + 1) * per_class] = c
    tag = (f"synthetic:blobs(classes={classes},per_class={per_class},"
           f"dim={dim},spread={spread:g},seed={seed})")
    return Dataset(inputs, labels, provenance=tag)


def fixed_subset(ds: Dataset, fraction: float, seed: int) -> FixedSubset:
    """Deterministic subset: seeded shuffle, first ceil(fraction*N), sorted.

    The shuffle is a Fisher-Yates permutation from numpy's PCG64 stream,
    so identical (seed, fraction, N) always give the identical index list.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    count = math.ceil(fraction * ds.n)
    perm = np.random.default_rng(seed).permutation(ds.n)
    indices = np.sort(perm[:count])
    return FixedSubset(ds, indices, float(fraction), int(seed))
