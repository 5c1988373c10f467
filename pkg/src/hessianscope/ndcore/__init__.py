"""Reverse-mode tape autodiff with exact forward-over-reverse HVPs."""

from .dual import Dual
from .operator import (
    DimensionMismatchError,
    LossOperator,
    NonFiniteError,
    as_param_vector,
)
from .tape import ACTIVATIONS, Rec, Tape, backward

__all__ = [
    "ACTIVATIONS",
    "Dual",
    "DimensionMismatchError",
    "LossOperator",
    "NonFiniteError",
    "Rec",
    "Tape",
    "as_param_vector",
    "backward",
]
