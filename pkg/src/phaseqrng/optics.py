"""Front-end simulation: random pulse phases through balanced interference.

A gain-switched pulse with a uniformly random phase beats against a
continuous-wave reference on a balanced detector. Only pulse-centre values are
generated. Phases come from a seeded PRNG; this is a simulation of the
entropy source, not a source of entropy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

TWO_PI = 2.0 * math.pi

# Generator streams are keyed by this fixed block size, so the output never
# depends on how the caller chunks or parallelises generation.
STREAM_BLOCK = 1 << 20


@dataclass(frozen=True)
class InterferenceParams:
    eta_d: float = 0.8
    e1: float = 1.0
    e2: float = 1.0
    phi2: float = 0.0
    period_T: float = 4e-9
    rate_R: float = 250e6

    def __post_init__(self):
        if not 0.0 < self.eta_d <= 1.0:
            raise ValueError(f"eta_d must lie in (0, 1], got {self.eta_d}")
        if self.e1 < 0 or self.e2 < 0:
            raise ValueError("field amplitudes must be non-negative")
        if self.period_T <= 0 or self.rate_R <= 0:
            raise ValueError("period_T and rate_R must be positive")
        if abs(self.rate_R * self.period_T - 1.0) > 1e-12:
            raise ValueError(
                f"rate_R * period_T = {self.rate_R * self.period_T!r}, expected 1")

    @classmethod
    def from_rate(cls, rate_R: float = 250e6, **kw) -> "InterferenceParams":
        return cls(period_T=1.0 / rate_R, rate_R=rate_R, **kw)

    @property
    def scale(self) -> float:
        """Peak differential voltage 4 * eta_d * E1 * E2."""
        return 4.0 * self.eta_d * self.e1 * self.e2

    def check_signal(self):
        if self.e1 <= 0 or self.e2 <= 0:
            raise ValueError("e1 and e2 must be strictly positive to generate a signal")


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian classical noise, sigma given as a fraction of the full range."""

    sigma_frac: float = 0.05
    range_lo: float = -1.0
    range_hi: float = 1.0

    def __post_init__(self):
        if self.sigma_frac < 0:
            raise ValueError("sigma_frac must be >= 0")
        if not self.range_lo < self.range_hi:
            raise ValueError("range_lo must be < range_hi")

    @property
    def full_range(self) -> float:
        return self.range_hi - self.range_lo

    @property
    def sigma(self) -> float:
        """Noise standard deviation in normalized signal units."""
        return self.sigma_frac * self.full_range


NOISELESS = NoiseModel(sigma_frac=0.0)


@dataclass(frozen=True)
class PulseSample:
    index_m: int
    value: float


@dataclass
class PulseTrain:
    """Columnar batch of pulse samples (index t = m*T, normalized value)."""

    index: np.ndarray
    value: np.ndarray

    def __len__(self):
        return len(self.value)

    def __getitem__(self, i) -> PulseSample:
        return PulseSample(int(self.index[i]), float(self.value[i]))


def make_rng(seed: int, *stream_id: int) -> np.random.Generator:
    """Independent generator for one (seed, stream-id) pair."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=stream_id)))


def sample_phase(rng: np.random.Generator, size=None):
    """Uniform phase(s) on [0, 2*pi)."""
    phase = rng.random(size) * TWO_PI
    # guard the (rounding-only) case u*2pi == 2pi
    return np.where(phase >= TWO_PI, 0.0, phase) if size is not None else (
        0.0 if phase >= TWO_PI else float(phase))


def interference_voltage(params: InterferenceParams, phi1):
    """Differential balanced-detector voltage 4*eta*E1*E2*sin(phi1 - phi2)."""
    return params.scale * np.sin(np.subtract(phi1, params.phi2))


def arcsine_pdf(x):
    """Density 1/(pi*sqrt(1-x^2)) of the normalized noiseless signal."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 1.0):
        raise ValueError("arcsine density is only defined for |x| < 1")
    out = 1.0 / (np.pi * np.sqrt(1.0 - x * x))
    return float(out) if out.ndim == 0 else out


def arcsine_cdf(x):
    """CDF 1/2 + arcsin(x)/pi, saturating to 0/1 outside [-1, 1]."""
    return 0.5 + np.arcsin(np.clip(x, -1.0, 1.0)) / np.pi


def add_classical_noise(sample, noise: NoiseModel, rng: np.random.Generator):
    """Add N(0, sigma^2) to a PulseSample, a PulseTrain or a bare value array.

    With sigma_frac == 0 the input is returned untouched and the generator is
    not advanced.
    """
    if noise.sigma_frac == 0:
        return sample
    if isinstance(sample, PulseSample):
        return PulseSample(sample.index_m, sample.value + noise.sigma * rng.standard_normal())
    if isinstance(sample, PulseTrain):
        return PulseTrain(sample.index,
                          sample.value + noise.sigma * rng.standard_normal(len(sample)))
    values = np.asarray(sample, dtype=float)
    return values + noise.sigma * rng.standard_normal(values.shape)


def _stream_block(params: InterferenceParams, noise: NoiseModel, seed: int,
                  block: int, lo: int, hi: int) -> np.ndarray:
    # phase and noise draws use separate streams so any prefix of a block can
    # be produced without generating the rest of it
    phi1 = sample_phase(make_rng(seed, block, 0), hi)[lo:]
    # dividing by the same scale that multiplied keeps the ideal signal in [-1, 1]
    values = np.clip(interference_voltage(params, phi1) / params.scale, -1.0, 1.0)
    if noise.sigma_frac == 0:
        return values
    g = make_rng(seed, block, 1).standard_normal(hi)[lo:]
    return values + noise.sigma * g


def generate_values(start: int, stop: int, params: InterferenceParams,
                    noise: NoiseModel, seed: int) -> np.ndarray:
    """Normalized values for pulse indices [start, stop).

    Any sub-range reproduces exactly the corresponding slice of the full
    stream, which is what makes lane-parallel generation deterministic.
    """
    if stop <= start:
        return np.empty(0)
    params.check_signal()
    first, last = start // STREAM_BLOCK, (stop - 1) // STREAM_BLOCK
    parts = []
    for b in range(first, last + 1):
        lo = max(start - b * STREAM_BLOCK, 0)
        hi = min(stop - b * STREAM_BLOCK, STREAM_BLOCK)
        parts.append(_stream_block(params, noise, seed, b, lo, hi))
    return np.concatenate(parts)


def iter_pulse_values(count: int, params: InterferenceParams, noise: NoiseModel,
                      seed: int, chunk: int = STREAM_BLOCK) -> Iterator[np.ndarray]:
    """Yield the stream of `count` values in chunks of at most `chunk`."""
    for start in range(0, count, chunk):
        yield generate_values(start, min(start + chunk, count), params, noise, seed)


def generate_pulse_train(count: int, params: InterferenceParams, noise: NoiseModel,
                         seed: int) -> PulseTrain:
    if count < 0:
        raise ValueError("count must be >= 0")
    return PulseTrain(np.arange(count, dtype=np.int64),
                      generate_values(0, count, params, noise, seed))
