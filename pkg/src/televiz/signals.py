"""Trace utilities: cross-correlation time-lag estimation."""

from __future__ import annotations

import numpy as np

__all__ = ["DegenerateSignal", "estimate_lag"]


class DegenerateSignal(Exception):
    """Raised when a trace has no variance to correlate against."""


def estimate_lag(reference, delayed, dt: float, max_lag_s: float,
                 min_lag_s: float = 0.0) -> float:
    """Time shift by which `delayed` trails `reference`, in seconds.

    Scans integer-sample lags in [min_lag_s, max_lag_s] and returns the one
    maximizing the normalized cross-correlation over the overlapping
    window. Both traces must share the sample interval dt.
    """
    a = np.asarray(reference, dtype=float)
    b = np.asarray(delayed, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("traces must be 1-d and equally long")
    a = a - a.mean()
    b = b - b.mean()
    if a.std() < 1e-12 or b.std() < 1e-12:
        raise DegenerateSignal("constant trace")
    hi = min(a.size - 2, int(round(max_lag_s / dt)))
    lo = max(0, int(round(min_lag_s / dt)))
    if hi < lo:
        raise ValueError("lag window is empty")
    best_k, best_c = lo, -np.inf
    for k in range(lo, hi + 1):
        n = a.size - k
        ref = a[:n]
        win = b[k:k + n]
        norm = np.sqrt(float(ref @ ref) * float(win @ win))
        if norm == 0.0:
            continue
        c = float(ref @ win) / norm
        if c > best_c:
            best_c, best_k = c, k
    return best_k * dt
