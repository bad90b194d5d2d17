"""Input validation helpers used by the estimators and composition code."""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError


def as_float_array(values, name: str = "values") -> np.ndarray:
    """Coerce to a 1-D float64 array, rejecting non-finite entries."""
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: not convertible to a float array ({exc})") from exc
    if arr.ndim != 1:
        raise ValidationError(f"{name}: expected a 1-D sequence, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValidationError(f"{name}: entry {bad} is not finite ({arr[bad]})")
    return arr


def check_failure_times(times, end_of_test: float | None = None,
                        name: str = "times") -> np.ndarray:
    """Validate failure times: positive, strictly increasing, within the test window."""
    arr = as_float_array(times, name)
    if arr.size and arr[0] <= 0.0:
        raise ValidationError(f"{name}: entry 0 must be > 0, got {arr[0]}")
    if arr.size > 1:
        diffs = np.diff(arr)
        if np.any(diffs <= 0.0):
            bad = int(np.flatnonzero(diffs <= 0.0)[0]) + 1
            raise ValidationError(
                f"{name}: entry {bad} ({arr[bad]}) does not increase past entry "
                f"{bad - 1} ({arr[bad - 1]}); times must be strictly increasing")
    if end_of_test is not None and arr.size and arr[-1] > end_of_test:
        raise ValidationError(
            f"{name}: last entry {arr[-1]} exceeds end_of_test {end_of_test}")
    return arr


def check_positive_scalar(value, name: str) -> float:
    value = check_finite_scalar(value, name)
    if value <= 0.0:
        raise ValidationError(f"{name}: must be > 0, got {value}")
    return value


def check_nonnegative_scalar(value, name: str) -> float:
    value = check_finite_scalar(value, name)
    if value < 0.0:
        raise ValidationError(f"{name}: must be >= 0, got {value}")
    return value


def check_finite_scalar(value, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: not a number ({value!r})") from exc
    if not math.isfinite(value):
        raise ValidationError(f"{name}: must be finite, got {value}")
    return value


def check_probability(value, name: str) -> float:
    value = check_finite_scalar(value, name)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name}: must lie in [0, 1], got {value}")
    return value
