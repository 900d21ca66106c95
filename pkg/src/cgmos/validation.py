"""Input validation helpers used by estimators and module-level operations."""

from __future__ import annotations

import zlib

import numpy as np

from .errors import ParameterError

__all__ = [
    "check_feature_matrix",
    "check_feature_vector",
    "check_positive_int",
    "check_positive_real",
    "check_seed",
    "derive_seed",
]


def check_feature_matrix(X, name: str = "features") -> np.ndarray:
    """Coerce to a finite, C-contiguous float64 matrix of shape (n, m)."""
    arr = np.ascontiguousarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ParameterError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParameterError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ParameterError(f"{name} contains NaN or infinite values")
    return arr


def check_feature_vector(x, m: int, name: str = "x") -> np.ndarray:
    """Coerce to a finite float64 vector of length m."""
    arr = np.asarray(x, dtype=np.float64).reshape(-1)
    if arr.shape[0] != m:
        raise ParameterError(f"{name} has dimension {arr.shape[0]}, expected {m}")
    if not np.isfinite(arr).all():
        raise ParameterError(f"{name} contains NaN or infinite values")
    return arr


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    try:
        ivalue = int(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be an integer, got {value!r}") from None
    if ivalue != value or ivalue < minimum:
        raise ParameterError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return ivalue


def check_positive_real(value, name: str) -> float:
    fvalue = float(value)
    if not np.isfinite(fvalue) or fvalue <= 0:
        raise ParameterError(f"{name} must be a positive finite real, got {value!r}")
    return fvalue


def check_seed(value, name: str = "rng_seed") -> int:
    try:
        ivalue = int(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be an integer, got {value!r}") from None
    if ivalue < 0:
        raise ParameterError(f"{name} must be nonnegative, got {value!r}")
    return ivalue


def derive_seed(master: int, *path: int | str) -> int:
    """Derive a child seed from a master seed and a structural path.

    Distinct paths give statistically independent streams; the same
    (master, path) always gives the same child, across platforms, which is
    what makes full pipelines replayable from one seed.
    """
    entropy = [check_seed(master, "master seed")]
    for part in path:
        if isinstance(part, str):
            entropy.append(zlib.crc32(part.encode("utf-8")))
        else:
            entropy.append(int(part))
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])
