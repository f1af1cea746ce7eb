"""Input validation and coercion helpers shared by the estimators and CLI."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import PreconditionError
from .gabor import CONVENTIONS, WINDOWS
from .signals import PiecewisePolynomial, SparseSignal


def as_sparse_signal(obj) -> SparseSignal:
    """Coerce a SparseSignal, a mapping, or a (locations, amplitudes) pair."""
    if isinstance(obj, SparseSignal):
        return obj
    if isinstance(obj, dict):
        return SparseSignal.from_dict(obj)
    if isinstance(obj, (tuple, list)) and len(obj) in (2, 3):
        return SparseSignal(*obj)
    raise PreconditionError(f"cannot interpret {type(obj).__name__} as a sparse signal")


def as_piecewise_polynomial(obj) -> PiecewisePolynomial:
    if isinstance(obj, PiecewisePolynomial):
        return obj
    if isinstance(obj, dict):
        return PiecewisePolynomial.from_dict(obj)
    raise PreconditionError(f"cannot interpret {type(obj).__name__} as a piecewise polynomial")


def check_positive_floats(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(list(values), dtype=float)
    if arr.ndim != 1 or len(arr) == 0:
        raise PreconditionError(f"{name} must be a non-empty 1-D sequence")
    if np.any(arr <= 0):
        raise PreconditionError(f"{name} must be strictly positive")
    return arr


def check_floats(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(list(values), dtype=float)
    if arr.ndim != 1 or len(arr) == 0:
        raise PreconditionError(f"{name} must be a non-empty 1-D sequence")
    return arr


def check_choice(value: str, choices, name: str) -> str:
    if value not in choices:
        raise PreconditionError(f"{name} must be one of {tuple(choices)}, got {value!r}")
    return value


def check_window(window: str) -> str:
    return check_choice(window, WINDOWS, "window")


def check_convention(convention: str) -> str:
    return check_choice(convention, CONVENTIONS, "convention")


def check_sweep(sweep) -> np.ndarray:
    arr = np.asarray(sweep, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise PreconditionError("a sweep is a 2-column (scale, value) array")
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise PreconditionError("sweep scales must be strictly increasing")
    return arr
