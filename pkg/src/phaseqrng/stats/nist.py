"""Seven tests from the NIST SP 800-22 battery, vectorized with numpy.

Each test takes a 0/1 vector and returns the P-value(s) defined by the
reference suite. Default block parameters follow the reference
implementation (block frequency M=128, approximate entropy m=10, serial m=16).
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc, gammaincc, ndtr

__all__ = [
    "InsufficientDataError",
    "monobit_frequency",
    "block_frequency",
    "runs_test",
    "longest_run",
    "cumulative_sums",
    "approximate_entropy",
    "serial",
    "pattern_counts",
]


class InsufficientDataError(ValueError):
    pass


def _bits(bits, min_length: int, name: str) -> np.ndarray:
    b = np.asarray(bits, dtype=np.uint8)
    if b.ndim != 1:
        raise ValueError("expected a 1-D bit vector")
    if len(b) < min_length:
        raise InsufficientDataError(f"{name}: need at least {min_length} bits, got {len(b)}")
    return b


def monobit_frequency(bits, min_length: int = 100) -> float:
    b = _bits(bits, min_length, "frequency")
    n = len(b)
    s = 2 * int(np.count_nonzero(b)) - n
    return float(erfc(abs(s) / math.sqrt(2.0 * n)))


def block_frequency(bits, M: int = 128, min_length: int = 100) -> float:
    b = _bits(bits, min_length, "block frequency")
    N = len(b) // M
    if N < 1:
        raise InsufficientDataError(f"block frequency: fewer than one block of {M} bits")
    pi = b[:N * M].reshape(N, M).sum(axis=1, dtype=np.int64) / M
    chi2 = 4.0 * M * float(np.sum((pi - 0.5) ** 2))
    return float(gammaincc(N / 2.0, chi2 / 2.0))


def runs_test(bits, min_length: int = 100) -> float:
    b = _bits(bits, min_length, "runs")
    n = len(b)
    pi = np.count_nonzero(b) / n
    # frequency prerequisite: a grossly biased sequence fails outright
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return 0.0
    v_obs = 1 + int(np.count_nonzero(b[1:] != b[:-1]))
    num = abs(v_obs - 2.0 * n * pi * (1 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1 - pi)
    return float(erfc(num / den))


# (min n, block length M, class lower bound, class upper bound, class probabilities)
_LONGEST_RUN_TABLE = (
    (750_000, 10_000, 10, 16, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
    (6_272, 128, 4, 9, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (128, 8, 1, 4, (0.2148, 0.3672, 0.2305, 0.1875)),
)


def _longest_runs_per_row(blocks: np.ndarray) -> np.ndarray:
    N, M = blocks.shape
    padded = np.zeros((N, M + 1), dtype=np.int8)
    padded[:, :M] = blocks
    flat = np.concatenate(([0], padded.ravel(), [0]))
    d = np.diff(flat)
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    longest = np.zeros(N, dtype=np.int64)
    np.maximum.at(longest, starts // (M + 1), ends - starts)
    return longest


def longest_run(bits) -> float:
    """Longest run of ones in a block."""
    b = _bits(bits, 128, "longest run")
    n = len(b)
    for min_n, M, lo, hi, pi in _LONGEST_RUN_TABLE:
        if n >= min_n:
            break
    N = n // M
    runs = _longest_runs_per_row(b[:N * M].reshape(N, M))
    nu = np.bincount(np.clip(runs, lo, hi) - lo, minlength=hi - lo + 1)
    expected = N * np.asarray(pi)
    chi2 = float(np.sum((nu - expected) ** 2 / expected))
    K = len(pi) - 1
    return float(gammaincc(K / 2.0, chi2 / 2.0))


def cumulative_sums(bits, reverse: bool = False, min_length: int = 100) -> float:
    """Cumulative sums test; ``reverse`` selects the backward mode."""
    b = _bits(bits, min_length, "cumulative sums")
    n = len(b)
    x = 2 * b.astype(np.int64) - 1
    if reverse:
        x = x[::-1]
    z = int(np.max(np.abs(np.cumsum(x))))
    sq = math.sqrt(n)
    # summation limits as in the reference implementation: the start index is
    # truncated toward zero, the end compared as a real number
    k1 = np.arange(int((-n / z + 1) / 4), math.floor((n / z - 1) / 4) + 1)
    k2 = np.arange(int((-n / z - 3) / 4), math.floor((n / z - 1) / 4) + 1)
    s1 = np.sum(ndtr((4 * k1 + 1) * z / sq) - ndtr((4 * k1 - 1) * z / sq))
    s2 = np.sum(ndtr((4 * k2 + 3) * z / sq) - ndtr((4 * k2 + 1) * z / sq))
    return float(min(max(1.0 - s1 + s2, 0.0), 1.0))


def pattern_counts(bits, k: int) -> np.ndarray:
    """Counts of all overlapping k-bit patterns, wrapping around the end."""
    b = np.asarray(bits, dtype=np.uint32)
    n = len(b)
    if k == 0:
        return np.array([n], dtype=np.int64)
    ext = np.concatenate((b, b[:k - 1]))
    codes = np.zeros(n, dtype=np.uint32)
    for j in range(k):
        codes <<= np.uint32(1)
        codes |= ext[j:j + n]
    return np.bincount(codes, minlength=1 << k)


def _fold(counts: np.ndarray) -> np.ndarray:
    # the (k-1)-prefix of each circular k-window is the circular (k-1)-window
    return counts.reshape(-1, 2).sum(axis=1)


def approximate_entropy(bits, m: int = 10, min_length: int = 100) -> float:
    b = _bits(bits, min_length, "approximate entropy")
    n = len(b)
    if m < 1:
        raise ValueError("m must be >= 1")
    c_hi = pattern_counts(b, m + 1)
    c_lo = _fold(c_hi)

    def phi(c):
        c = c[c > 0] / n
        return float(np.sum(c * np.log(c)))

    apen = phi(c_lo) - phi(c_hi)
    chi2 = 2.0 * n * (math.log(2) - apen)
    return float(gammaincc(2 ** (m - 1), chi2 / 2.0))


def serial(bits, m: int = 16, min_length: int = 100) -> tuple[float, float]:
    """Serial test; returns (P-value 1, P-value 2)."""
    b = _bits(bits, min_length, "serial")
    n = len(b)
    if m < 2:
        raise ValueError("m must be >= 2")
    counts = pattern_counts(b, m)
    psi = []
    for k in (m, m - 1, m - 2):
        psi.append((2.0 ** k / n) * float(np.sum(counts.astype(np.float64) ** 2)) - n
                   if k > 0 else 0.0)
        if k > 1:
            counts = _fold(counts)
    d1 = psi[0] - psi[1]
    d2 = psi[0] - 2 * psi[1] + psi[2]
    return float(gammaincc(2 ** (m - 2), d1 / 2.0)), float(gammaincc(2 ** (m - 3), d2 / 2.0))
