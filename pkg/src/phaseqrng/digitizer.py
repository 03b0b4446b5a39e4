"""ADC quantization, empirical PMFs and min-entropy (empirical and analytic)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import ndtr

from .optics import NoiseModel, PulseSample, arcsine_cdf

# Widened ADC span, in noise standard deviations, used when noise is enabled.
NOISE_MARGIN_SIGMAS = 4.0

ESTIMATOR_NOTE = ("plug-in estimator, no confidence correction; "
                  "biased low for small sample counts")


class ConvolutionError(RuntimeError):
    """Numerical convolution could not reach the requested per-bin accuracy."""


@dataclass(frozen=True)
class AdcConfig:
    n_bits: int = 12
    range_lo: float = -1.0
    range_hi: float = 1.0

    def __post_init__(self):
        if not 1 <= self.n_bits <= 16:
            raise ValueError(f"n_bits must be in 1..16, got {self.n_bits}")
        if not self.range_lo < self.range_hi:
            raise ValueError("range_lo must be < range_hi")

    @classmethod
    def for_noise(cls, n_bits: int, noise: NoiseModel | None = None) -> "AdcConfig":
        """Noiseless span [-1, 1], widened by 4 sigma per side when noisy."""
        pad = NOISE_MARGIN_SIGMAS * noise.sigma if noise is not None else 0.0
        return cls(n_bits, -1.0 - pad, 1.0 + pad)

    @property
    def n_bins(self) -> int:
        return 1 << self.n_bits

    @property
    def bin_width(self) -> float:
        return (self.range_hi - self.range_lo) / self.n_bins

    def edges(self) -> np.ndarray:
        return self.range_lo + self.bin_width * np.arange(self.n_bins + 1)


@dataclass(frozen=True)
class AdcWord:
    """One quantized pulse; ``bits`` is (b_1, ..., b_n) with b_1 the MSB."""

    bin: int
    bits: tuple

    @classmethod
    def from_bin(cls, b: int, n_bits: int) -> "AdcWord":
        return cls(int(b), int_to_bits(b, n_bits))


def int_to_bits(value: int, n_bits: int) -> tuple:
    return tuple((int(value) >> (n_bits - 1 - i)) & 1 for i in range(n_bits))


def bits_to_int(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def quantize_values(values, cfg: AdcConfig) -> tuple[np.ndarray, int, int]:
    """Vectorized quantizer.

    Returns (bins as uint16, count below range_lo, count above range_hi).
    Out-of-range values saturate into the edge bins.
    """
    v = np.asarray(values, dtype=float)
    k = np.floor((v - cfg.range_lo) / cfg.bin_width)
    np.clip(k, 0, cfg.n_bins - 1, out=k)
    below = int(np.count_nonzero(v < cfg.range_lo))
    above = int(np.count_nonzero(v > cfg.range_hi))
    return k.astype(np.uint16), below, above


def quantize(sample: PulseSample | float, cfg: AdcConfig) -> AdcWord:
    value = sample.value if isinstance(sample, PulseSample) else float(sample)
    bins, _, _ = quantize_values([value], cfg)
    return AdcWord.from_bin(int(bins[0]), cfg.n_bits)


@dataclass
class Pmf:
    probs: np.ndarray
    p_max: float = field(init=False)
    h_min: float = field(init=False)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.size == 0 or np.any(self.probs < 0):
            raise ValueError("probabilities must be a nonempty nonnegative vector")
        if abs(self.probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {self.probs.sum()!r}, not 1")
        self.p_max = float(self.probs.max())
        self.h_min = -math.log2(self.p_max)

    @property
    def n_bits(self) -> int:
        return int(round(math.log2(self.probs.size)))


def bin_counts(bins, n_bits: int) -> np.ndarray:
    return np.bincount(np.asarray(bins, dtype=np.int64), minlength=1 << n_bits)


def empirical_pmf(words, n_bits: int) -> Pmf:
    """Histogram of ADC words (AdcWord objects or raw bin indices)."""
    if len(words) == 0:
        raise ValueError("cannot build a PMF from an empty word sequence")
    if isinstance(words[0], AdcWord):
        words = [w.bin for w in words]
    counts = bin_counts(words, n_bits)
    return Pmf(counts / counts.sum())


def pmf_from_counts(counts) -> Pmf:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise ValueError("no counts")
    return Pmf(counts / total)


def min_entropy(pmf) -> float:
    """-log2 of the largest probability."""
    probs = pmf.probs if isinstance(pmf, Pmf) else np.asarray(pmf, dtype=float)
    return -math.log2(float(np.max(probs)))


def arcsine_bin_probs(cfg: AdcConfig) -> np.ndarray:
    """Exact per-bin probabilities of the noiseless arcsine law (edge bins
    absorb nothing since the law has no mass outside [-1, 1])."""
    cdf = arcsine_cdf(cfg.edges())
    cdf[0], cdf[-1] = 0.0, 1.0
    return np.diff(cdf)


def arcsine_bin_pmax(n_bits: int) -> float:
    """Largest bin probability of the arcsine law over 2**n bins on [-1, 1].

    The density is convex and symmetric, so the maximum sits in the two edge
    bins: 1/2 - arcsin(1 - 2**(1-n))/pi.
    """
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    return 0.5 - math.asin(1.0 - 2.0 ** (1 - n_bits)) / math.pi


def quantum_min_entropy(cfg: AdcConfig) -> float:
    """Min-entropy of the noiseless (phase-only) channel at the given binning.

    Classical noise is treated as independent of the phase and discarded, so
    the quantum share is what the ideal arcsine signal alone provides.
    """
    if cfg.range_lo != -1.0 or cfg.range_hi != 1.0:
        raise ValueError("quantum min-entropy is defined for bins spanning [-1, 1]")
    return -math.log2(arcsine_bin_pmax(cfg.n_bits))


def _normal_mass(a, b):
    """Phi(b) - Phi(a) for a <= b without cancellation in the upper tail."""
    upper = a > 0
    return np.where(upper, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))


def _gauss_cell_kernel(offsets: np.ndarray, h: float, sigma: float) -> np.ndarray:
    """P(X + G in cell [d, d+h)) for X uniform on [0, h), G ~ N(0, sigma^2)."""
    s = sigma
    d = offsets
    if s > h:
        # integrand is smooth on the scale of a cell: Gauss-Legendre over x
        x, w = np.polynomial.legendre.leggauss(16)
        x = 0.5 * h * (x + 1.0)
        w = 0.5 * w
        lo = (d[:, None] - x[None, :]) / s
        return _normal_mass(lo, lo + h / s) @ w
    # closed form via I(u) = u*Phi(u) + phi(u), the antiderivative of Phi;
    # cancellation is harmless while s/h <= 1

    def I(u):
        return u * ndtr(u) + np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)
    return (s / h) * (I((d + h) / s) - 2 * I(d / s) + I((d - h) / s))


def _convolved_bins(noise: NoiseModel, cfg: AdcConfig, oversample: int) -> np.ndarray:
    sigma = noise.sigma
    h = cfg.bin_width / oversample
    # fine cells cover the ADC span plus enough margin to hold the signal and tails
    reach = 1.0 + 10.0 * sigma
    pad_lo = max(0, math.ceil((cfg.range_lo + reach) / h))
    pad_hi = max(0, math.ceil((reach - cfg.range_hi) / h))
    n_inner = cfg.n_bins * oversample
    k = np.arange(-pad_lo, n_inner + pad_hi + 1)
    edges = cfg.range_lo + k * h
    cell_mass = np.diff(arcsine_cdf(edges))

    kmax = math.ceil(10.0 * sigma / h) + 1
    offsets = np.arange(-kmax, kmax + 1) * h
    kern = _gauss_cell_kernel(offsets, h, sigma)
    fine = fftconvolve(cell_mass, kern)[kmax:kmax + len(cell_mass)]
    fine = np.clip(fine, 0.0, None)

    inner = fine[pad_lo:pad_lo + n_inner].reshape(cfg.n_bins, oversample).sum(axis=1)
    inner[0] += fine[:pad_lo].sum()
    inner[-1] += fine[pad_lo + n_inner:].sum()
    return inner


MAX_FINE_CELLS = 1 << 24


def convolved_pmf(noise: NoiseModel, cfg: AdcConfig, oversample: int = 16,
                  tol: float = 1e-6, max_cells: int = MAX_FINE_CELLS) -> Pmf:
    """Bin probabilities of (arcsine signal + Gaussian noise) after the ADC.

    The arcsine law is discretized into exact cell masses on a grid
    ``oversample`` times finer than the ADC bin, convolved with the Gaussian
    cell-transfer kernel and summed per bin. Values outside the ADC span
    saturate into the edge bins, matching :func:`quantize_values`.

    The quadrature error is estimated by repeating at twice the resolution.
    The grid is refined until the largest per-bin change is below `tol`;
    :class:`ConvolutionError` is raised if that needs more than `max_cells`
    fine cells.
    """
    if noise.sigma_frac <= 0:
        raise ValueError("convolved_pmf needs sigma_frac > 0; use arcsine_bin_probs")
    if oversample < 16:
        raise ValueError("grid must be at least 16x finer than the ADC bin")
    coarse = _convolved_bins(noise, cfg, oversample)
    err = math.inf
    while True:
        oversample *= 2
        if cfg.n_bins * oversample > max_cells:
            raise ConvolutionError(
                f"per-bin quadrature error {err:.3g} still above {tol:.3g} "
                f"at {oversample // 2}x oversampling")
        fine = _convolved_bins(noise, cfg, oversample)
        err = float(np.max(np.abs(fine - coarse)))
        if err <= tol:
            return Pmf(fine / fine.sum())
        coarse = fine


@dataclass
class EntropyReport:
    n_bits: int
    range_lo: float
    range_hi: float
    count: int
    p_max: float
    h_min: float
    saturated_below: int = 0
    saturated_above: int = 0
    estimator: str = ESTIMATOR_NOTE

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def entropy_report(counts, cfg: AdcConfig, below: int = 0, above: int = 0) -> EntropyReport:
    pmf = pmf_from_counts(counts)
    return EntropyReport(cfg.n_bits, cfg.range_lo, cfg.range_hi, int(np.sum(counts)),
                         pmf.p_max, pmf.h_min, below, above)
