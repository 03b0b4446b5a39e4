from __future__ import annotations

import math

import numpy as np


def autocorrelation(bits, max_lag: int) -> np.ndarray:
    """Normalized sample autocorrelation of a bit sequence mapped to +/-1.

    rho(k) = sum_i (x_i - xbar)(x_{i+k} - xbar) / sum_i (x_i - xbar)^2 for
    k = 0..max_lag. The denominator is the total variation of the whole
    sequence (biased form), so rho(0) == 1 exactly.
    """
    b = np.asarray(bits)
    n = len(b)
    if not 1 <= max_lag < n:
        raise ValueError(f"need 1 <= max_lag < len(bits), got max_lag={max_lag}, n={n}")
    x = 2.0 * b.astype(np.float64) - 1.0
    x -= x.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        raise ValueError("constant sequence has zero variance")
    rho = np.empty(max_lag + 1)
    rho[0] = 1.0
    for k in range(1, max_lag + 1):
        rho[k] = np.dot(x[:-k], x[k:]) / denom
    return rho


def null_band(n: int, width: float = 4.0) -> float:
    """Half-width of the i.i.d. band +/- width/sqrt(n)."""
    return width / math.sqrt(n)
