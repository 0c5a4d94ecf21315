"""Input validation helpers.

Small checkers shared by the functional operations and the estimator
classes. Each returns a validated (and, where needed, converted) numpy
array so callers can rely on dtype and shape afterwards.
"""

from __future__ import annotations

import numpy as np


def check_complex_signal(x, name: str = "signal", allow_empty: bool = True) -> np.ndarray:
    """Validate a one-dimensional complex baseband signal.

    Accepts any array-like convertible to complex128. Real input is
    promoted. Non-finite samples are rejected.
    """
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not allow_empty and arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if arr.size and not np.all(np.isfinite(arr.real) & np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite samples")
    return arr


def check_amplitudes(u, name: str = "u") -> np.ndarray:
    """Validate nonnegative, finite amplitudes. Scalars become 0-d arrays."""
    arr = np.asarray(u, dtype=np.float64)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if arr.size and np.any(arr < 0):
        raise ValueError(f"{name} must be nonnegative")
    return arr


def check_bits(bits, name: str = "bits") -> np.ndarray:
    """Validate a flat bit sequence of 0s and 1s, returned as int64."""
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr = arr.astype(np.int64, copy=False)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr


def check_positive(value, name: str) -> float:
    """Validate a strictly positive finite scalar."""
    val = float(value)
    if not np.isfinite(val) or val <= 0:
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return val
