"""Run the implemented tests over N sequences and aggregate the P-values.

A test passes when the fraction of sequences with P >= alpha lies in
[p_hat - 3*sqrt(p_hat*(1 - p_hat)/N), 1], p_hat = 1 - alpha, and the chi-square uniformity P-value of its P-values is at least the
configured threshold. Tests emitting several P-values per sequence are judged
on their worst sub-test.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gammaincc

from . import nist
from .nist import InsufficientDataError

IMPLEMENTED = (
    "frequency",
    "block_frequency",
    "runs",
    "longest_run",
    "cumulative_sums",
    "approximate_entropy",
    "serial",
)
NOT_IMPLEMENTED = (
    "rank",
    "fft",
    "non_overlapping_template",
    "overlapping_template",
    "universal",
    "linear_complexity",
    "random_excursions",
    "random_excursions_variant",
)


@dataclass(frozen=True)
class TestConfig:
    alpha: float = 0.01
    n_samples: int = 100
    sample_len: int = 1_000_000
    uniformity_threshold: float = 1e-4
    block_frequency_M: int = 128
    approximate_entropy_m: int = 10
    serial_m: int = 16
    min_uniformity_samples: int = 55

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.n_samples < 1 or self.sample_len < 1:
            raise ValueError("n_samples and sample_len must be >= 1")

    @classmethod
    def reference(cls) -> "TestConfig":
        """600 sequences of 10^6 bits."""
        return cls(n_samples=600)


@dataclass(frozen=True)
class ProportionGate:
    lower: float
    upper: float
    proportion: float
    passed: bool


def proportion_bounds(N: int, alpha: float) -> tuple[float, float]:
    """Acceptance window for the pass fraction.

    The upper end is 1: an unusually high pass rate is not counted as a
    failure, so a sequence set where everything passes always passes.
    """
    p_hat = 1.0 - alpha
    half = 3.0 * math.sqrt(p_hat * (1.0 - p_hat) / N)
    return p_hat - half, 1.0


def proportion_gate(pass_count: int, N: int, alpha: float) -> ProportionGate:
    if not 0 <= pass_count <= N:
        raise ValueError("pass_count must lie in [0, N]")
    lo, hi = proportion_bounds(N, alpha)
    prop = pass_count / N
    return ProportionGate(lo, hi, prop, lo <= prop <= hi)


def pvalue_uniformity(p_values, min_count: int = 55) -> float:
    """Chi-square test of P-values against U(0, 1) over 10 equal bins."""
    p = np.asarray(p_values, dtype=float)
    if len(p) < min_count:
        raise InsufficientDataError(f"need at least {min_count} P-values, got {len(p)}")
    idx = np.minimum((p * 10).astype(int), 9)
    counts = np.bincount(idx, minlength=10)
    expected = len(p) / 10.0
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    return float(gammaincc(4.5, chi2 / 2.0))


def pvalue_histogram(p_values) -> np.ndarray:
    idx = np.minimum((np.asarray(p_values) * 10).astype(int), 9)
    return np.bincount(idx, minlength=10)


def run_tests(bits, cfg: TestConfig = TestConfig()) -> dict[str, list[float]]:
    """P-values of every implemented test on one sequence, a list per test."""
    fwd = nist.cumulative_sums(bits)
    rev = nist.cumulative_sums(bits, reverse=True)
    s1, s2 = nist.serial(bits, cfg.serial_m)
    return {
        "frequency": [nist.monobit_frequency(bits)],
        "block_frequency": [nist.block_frequency(bits, cfg.block_frequency_M)],
        "runs": [nist.runs_test(bits)],
        "longest_run": [nist.longest_run(bits)],
        "cumulative_sums": [fwd, rev],
        "approximate_entropy": [nist.approximate_entropy(bits, cfg.approximate_entropy_m)],
        "serial": [s1, s2],
    }


@dataclass
class TestResult:
    name: str
    p_values: list  # one list per sub-test, each of length N
    pass_counts: list
    proportion: float  # worst sub-test
    lower: float
    upper: float
    uniformity_p: float | None  # worst sub-test
    uniformity_threshold: float
    passed: bool

    __test__ = False


@dataclass
class TestReport:
    config: TestConfig
    results: list
    n_bits: int
    meta: dict = field(default_factory=dict)

    __test__ = False

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def result(self, name: str) -> TestResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def as_dict(self, with_p_values: bool = False) -> dict:
        tests = []
        for r in self.results:
            d = asdict(r)
            if not with_p_values:
                d.pop("p_values")
            d["p_value_histograms"] = [pvalue_histogram(p).tolist() for p in r.p_values]
            tests.append(d)
        lo, hi = proportion_bounds(self.config.n_samples, self.config.alpha)
        return {
            "config": asdict(self.config),
            "proportion_window": [lo, hi],
            "n_bits": self.n_bits,
            "passed": self.passed,
            "tests": tests,
            "not_implemented": list(NOT_IMPLEMENTED),
            "meta": self.meta,
        }


def _run_one(args):
    seq, cfg = args
    return run_tests(seq, cfg)


def aggregate(per_sample: list[dict], cfg: TestConfig) -> list[TestResult]:
    """With fewer than `min_uniformity_samples` sequences the uniformity check
    is skipped (reported as None) and only the proportion gate applies."""
    N = len(per_sample)
    out = []
    for name in IMPLEMENTED:
        pvals = [list(map(float, sub)) for sub in zip(*(s[name] for s in per_sample))]
        counts = [sum(p >= cfg.alpha for p in sub) for sub in pvals]
        gates = [proportion_gate(c, N, cfg.alpha) for c in counts]
        worst = min(gates, key=lambda g: g.proportion)
        ok = all(g.passed for g in gates)
        worst_u = None
        if N >= cfg.min_uniformity_samples:
            worst_u = min(pvalue_uniformity(sub, cfg.min_uniformity_samples) for sub in pvals)
            ok = ok and worst_u >= cfg.uniformity_threshold
        out.append(TestResult(name, pvals, counts, worst.proportion, worst.lower,
                              worst.upper, worst_u, cfg.uniformity_threshold, ok))
    return out


def run_battery(bits, cfg: TestConfig = TestConfig(), workers: int = 1,
                meta: dict | None = None) -> TestReport:
    """Split the first N*sample_len bits into N sequences and test each."""
    b = np.asarray(bits, dtype=np.uint8)
    need = cfg.n_samples * cfg.sample_len
    if len(b) < need:
        raise InsufficientDataError(
            f"battery needs {cfg.n_samples} x {cfg.sample_len} = {need} bits, got {len(b)}")
    seqs = b[:need].reshape(cfg.n_samples, cfg.sample_len)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            per_sample = list(ex.map(_run_one, ((s, cfg) for s in seqs)))
    else:
        per_sample = [run_tests(s, cfg) for s in seqs]
    return TestReport(cfg, aggregate(per_sample, cfg), need, dict(meta or {}))
