"""Input checks shared by the estimators, the harness and the CLI."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array

__all__ = ["check_field", "check_m", "check_bounds"]


def check_field(X, *, min_size: int = 2, positive: bool = True) -> np.ndarray:
    """Return ``X`` (or ``X.values``) as a finite, square float array."""
    arr = check_array(getattr(X, "values", X), dtype=np.float64, ensure_2d=True,
                      ensure_min_samples=min_size, ensure_min_features=min_size)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"field must be square, got shape {arr.shape}")
    if positive and np.any(arr <= 0):
        raise ValueError("field values must be strictly positive")
    return arr


def check_m(m, n: int | None = None) -> int:
    integral = isinstance(m, numbers.Integral) or (isinstance(m, numbers.Real) and float(m).is_integer())
    if isinstance(m, bool) or not integral:
        raise TypeError(f"m must be an integer, got {m!r}")
    m = int(m)
    if m < 2:
        raise ValueError("degenerate threshold: m must be >= 2")
    if n is not None and m > n * n:
        raise ValueError(f"m={m} leaves no exceedances in an {n}x{n} field")
    return m


def check_bounds(bounds, default) -> tuple:
    if bounds is None:
        return tuple(default)
    lo, hi = (float(b) for b in bounds)
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValueError(f"bounds must satisfy lo < hi, got {bounds!r}")
    return lo, hi
