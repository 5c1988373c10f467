"""Closed-form test objectives exposing the loss/gradient/HVP interface.

Used by the validation suites and by the CLI's quadratic self-check mode;
every quantity is exact, so these serve as ground truth for the analysis
pipeline.
"""

from __future__ import annotations

import numpy as np

from .ndcore.operator import DimensionMismatchError, as_param_vector


class QuadraticOperator:
    """f(theta) = 0.5 theta^T A theta + b^T theta + c with constant Hessian A."""

    def __init__(self, a, b=None, c: float = 0.0, tag: str = "quadratic"):
        self.a = np.asarray(a, dtype=np.float64)
        if self.a.ndim != 2 or self.a.shape[0] != self.a.shape[1]:
            raise DimensionMismatchError("A must be square")
        if not np.allclose(self.a, self.a.T):
            raise ValueError("A must be symmetric")
        self.dim = self.a.shape[0]
        self.b = np.zeros(self.dim) if b is None else np.asarray(b, dtype=np.float64)
        self.c = float(c)
        self.l2 = 0.0
        self.tag = tag

    def loss(self, theta) -> float:
        theta = as_param_vector(theta, self.dim)
        return float(0.5 * theta @ self.a @ theta + self.b @ theta + self.c)

    def gradient(self, theta) -> np.ndarray:
        theta = as_param_vector(theta, self.dim)
        return self.a @ theta + self.b

    def loss_and_gradient(self, theta):
        return self.loss(theta), self.gradient(theta)

    def hvp(self, theta, v) -> np.ndarray:
        as_param_vector(theta, self.dim)
        v = as_param_vector(v, self.dim)
        return self.a @ v


def diag_quadratic(diag_values) -> QuadraticOperator:
    return QuadraticOperator(np.diag(np.asarray(diag_values, dtype=np.float64)))


class DoubleWellOperator:
    """Separable f(theta) = sum(-theta_i^2 / 2 + theta_i^4 / 4).

    Concave at the origin, globally bounded below; exercises line searches
    past the region where the quadratic model is trustworthy.
    """

    def __init__(self, dim: int = 1):
        self.dim = dim
        self.l2 = 0.0
        self.tag = "double-well"

    def loss(self, theta) -> float:
        theta = as_param_vector(theta, self.dim)
        return float(np.sum(-0.5 * theta ** 2 + 0.25 * theta ** 4))

    def gradient(self, theta) -> np.ndarray:
        theta = as_param_vector(theta, self.dim)
        return -theta + theta ** 3

    def loss_and_gradient(self, theta):
        return self.loss(theta), self.gradient(theta)

    def hvp(self, theta, v) -> np.ndarray:
        theta = as_param_vector(theta, self.dim)
        v = as_param_vector(v, self.dim)
        return (-1.0 + 3.0 * theta ** 2) * v
