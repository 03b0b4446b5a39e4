"""Pipeline configuration: one flat JSON object, every key optional.

Example::

    {"eta_d": 0.8, "e1": 1.0, "e2": 1.0, "phi2": 0.0, "rate_R": 250e6,
     "sigma_frac": 0.05, "range_lo": -1.0, "range_hi": 1.0,
     "seed": 2024, "count": 1000000,
     "n_bits": 12, "mode": "xor", "m": 7}

``adc_lo``/``adc_hi`` default to the noiseless span widened by 4 sigma.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .digitizer import AdcConfig
from .extractor import MODES, ToeplitzSeed
from .optics import STREAM_BLOCK, InterferenceParams, NoiseModel
from .stats.battery import TestConfig

_INTERFERENCE_KEYS = ("eta_d", "e1", "e2", "phi2", "rate_R")
_NOISE_KEYS = ("sigma_frac", "range_lo", "range_hi")
_TEST_KEYS = tuple(f.name for f in fields(TestConfig))
_TOP_KEYS = ("seed", "count", "n_bits", "adc_lo", "adc_hi", "mode", "m",
             "toeplitz_seed", "n_out", "chunk_size", "lanes")
KNOWN_KEYS = frozenset(_INTERFERENCE_KEYS + _NOISE_KEYS + _TEST_KEYS + _TOP_KEYS)


@dataclass(frozen=True)
class PipelineConfig:
    interference: InterferenceParams = field(default_factory=InterferenceParams)
    noise: NoiseModel = field(default_factory=NoiseModel)
    adc: AdcConfig = None
    mode: str = "xor"
    m: int = 7
    toeplitz_seed: str | None = None
    n_out: int = 6
    tests: TestConfig = field(default_factory=TestConfig)
    seed: int = 2024
    count: int = 1_000_000
    chunk_size: int | None = None
    lanes: int = 1

    def __post_init__(self):
        if self.adc is None:
            object.__setattr__(self, "adc", AdcConfig.for_noise(12, self.noise))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.chunk_size is None:
            object.__setattr__(self, "chunk_size", _default_chunk(self.m))
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if self.lanes < 1:
            raise ValueError("lanes must be >= 1")
        # chunks must cover whole XOR blocks and whole output bytes
        if self.chunk_size <= 0 or self.chunk_size % (16 * self.m):
            raise ValueError(f"chunk_size must be a positive multiple of 16*m = {16 * self.m}")
        if self.mode == "toeplitz" and self.toeplitz_seed is None:
            raise ValueError("toeplitz mode needs a toeplitz_seed file")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        unknown = set(d) - KNOWN_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        ip = {k: d[k] for k in _INTERFERENCE_KEYS if k in d}
        interference = InterferenceParams.from_rate(**ip) if "rate_R" in ip else \
            InterferenceParams(**ip)
        noise = NoiseModel(**{k: d[k] for k in _NOISE_KEYS if k in d})
        n_bits = int(d.get("n_bits", 12))
        adc = AdcConfig.for_noise(n_bits, noise)
        if "adc_lo" in d or "adc_hi" in d:
            adc = AdcConfig(n_bits, d.get("adc_lo", adc.range_lo), d.get("adc_hi", adc.range_hi))
        tests = TestConfig(**{k: d[k] for k in _TEST_KEYS if k in d})
        m = int(d.get("m", 7))
        top = {k: d[k] for k in ("mode", "toeplitz_seed", "seed", "count", "n_out", "lanes")
               if k in d}
        for k in ("seed", "count", "n_out", "lanes"):
            if k in top:
                top[k] = int(top[k])
        chunk = d.get("chunk_size")
        return cls(interference=interference, noise=noise, adc=adc, tests=tests, m=m,
                   chunk_size=None if chunk is None else int(chunk), **top)

    @classmethod
    def load(cls, path, **overrides) -> "PipelineConfig":
        d = json.loads(Path(path).read_text()) if path else {}
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        ip, nz = self.interference, self.noise
        d = {k: getattr(ip, k) for k in _INTERFERENCE_KEYS}
        d.update({k: getattr(nz, k) for k in _NOISE_KEYS})
        d.update({k: getattr(self.tests, k) for k in _TEST_KEYS})
        d.update(seed=self.seed, count=self.count, n_bits=self.adc.n_bits,
                 adc_lo=self.adc.range_lo, adc_hi=self.adc.range_hi, mode=self.mode,
                 m=self.m, toeplitz_seed=self.toeplitz_seed, n_out=self.n_out,
                 chunk_size=self.chunk_size, lanes=self.lanes)
        return d

    def with_(self, **kw) -> "PipelineConfig":
        d = self.to_dict()
        d.update(kw)
        if "m" in kw and "chunk_size" not in kw:
            d.pop("chunk_size")
        if ("sigma_frac" in kw or "n_bits" in kw) and "adc_lo" not in kw:
            d.pop("adc_lo")
            d.pop("adc_hi")
        return self.from_dict(d)

    def load_seed(self) -> ToeplitzSeed:
        return ToeplitzSeed.load(self.toeplitz_seed, self.adc.n_bits, self.n_out)


def _default_chunk(m: int) -> int:
    unit = 16 * m
    return max(unit, (STREAM_BLOCK // unit) * unit)

