"""Throughput measurement per pipeline stage."""
from __future__ import annotations

import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels
from .config import PipelineConfig
from .digitizer import quantize_values
from .extractor import ToeplitzHasher, ToeplitzSeed, toeplitz_matmul
from .optics import generate_values
from .pipeline import simulate_words

# engineering targets for extracted output
TARGET_BITS_PER_S = 1.5e9
HARD_GATE_FRACTION = 0.5
SINGLE_LANE_WORDS_PER_S = 1e8


def measure(fn, items: int, duration: float, repeats: int = 3) -> list[float]:
    """Items/s over `repeats` runs, each looping `fn` for about duration/repeats s."""
    fn()  # warm-up (JIT, caches)
    per_run = duration / repeats
    rates = []
    for _ in range(repeats):
        calls = 0
        t0 = time.perf_counter()
        while True:
            fn()
            calls += 1
            dt = time.perf_counter() - t0
            if dt >= per_run:
                break
        rates.append(calls * items / dt)
    return rates


def _summary(rates, unit: str, bits_per_item: float | None = None) -> dict:
    mean = float(np.mean(rates))
    out = {"unit": unit, "runs": [float(r) for r in rates], "mean": mean,
           "spread": float((max(rates) - min(rates)) / mean) if mean else 0.0}
    if bits_per_item is not None:
        out["bits_per_s"] = mean * bits_per_item
    return out


def split_aligned(n_items: int, parts: int, unit: int) -> list[tuple[int, int]]:
    blocks = n_items // unit
    edges = [unit * (blocks * i // parts) for i in range(parts + 1)]
    return [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def xor_multilane(words, n: int, m: int, lanes: int, ex: ThreadPoolExecutor) -> list:
    """Block-parallel XOR over disjoint byte-aligned ranges, merged in order."""
    spans = split_aligned(len(words), lanes, 16 * m)
    return list(ex.map(lambda s: _kernels.xor_pack(words[s[0]:s[1]], n, m), spans))


def run_bench(cfg: PipelineConfig, duration: float = 10.0, repeats: int = 3,
              lanes: int | None = None, stages=None, n_words: int = 1 << 22,
              toeplitz_seed: ToeplitzSeed | None = None) -> dict:
    """Measure each stage for `duration` seconds (split over `repeats` runs).

    The Toeplitz stages use the configured seed file when there is one,
    otherwise `toeplitz_seed` or a fixed benchmark pattern; throughput does
    not depend on the seed value.
    """
    lanes = lanes or os.cpu_count() or 1
    n, m = cfg.adc.n_bits, cfg.m
    all_stages = ("simulate", "quantize", "xor_single", "xor_multi",
                  "toeplitz_lut", "toeplitz_naive")
    stages = stages or all_stages
    words = simulate_words(cfg, n_words)
    values = generate_values(0, min(n_words, 1 << 20), cfg.interference, cfg.noise, cfg.seed)
    res: dict = {"stages": {}}
    st = res["stages"]
    xor_bits = n / 2.0  # n*m output bits per 2m input words

    if "simulate" in stages:
        k = 1 << 20
        st["simulate"] = _summary(measure(
            lambda: generate_values(0, k, cfg.interference, cfg.noise, cfg.seed),
            k, duration, repeats), "samples/s")
    if "quantize" in stages:
        st["quantize"] = _summary(measure(lambda: quantize_values(values, cfg.adc),
                                          len(values), duration, repeats), "words/s")
    if "xor_single" in stages:
        st["xor_single"] = _summary(measure(lambda: _kernels.xor_pack(words, n, m),
                                            len(words), duration, repeats),
                                    "words/s", xor_bits)
    if "xor_multi" in stages:
        with ThreadPoolExecutor(lanes) as ex:
            st["xor_multi"] = _summary(
                measure(lambda: xor_multilane(words, n, m, lanes, ex), len(words),
                        duration, repeats), "words/s", xor_bits)
            st["xor_multi"]["lanes"] = lanes
    if "toeplitz_lut" in stages or "toeplitz_naive" in stages:
        if toeplitz_seed is None:
            toeplitz_seed = cfg.load_seed() if cfg.toeplitz_seed else ToeplitzSeed(
                tuple((i * 7 + 3) % 5 % 2 for i in range(n + cfg.n_out - 1)), n, cfg.n_out)
        hasher = ToeplitzHasher(toeplitz_seed)
        small = words[:1 << 18]
        if "toeplitz_lut" in stages:
            st["toeplitz_lut"] = _summary(measure(lambda: hasher.hash_packed(words),
                                                  len(words), duration, repeats),
                                          "words/s", toeplitz_seed.n_out)
        if "toeplitz_naive" in stages:
            st["toeplitz_naive"] = _summary(
                measure(lambda: _kernels.pack_words(toeplitz_matmul(small, toeplitz_seed),
                                                    toeplitz_seed.n_out),
                        len(small), duration, repeats), "words/s", toeplitz_seed.n_out)
        if "toeplitz_lut" in st and "toeplitz_naive" in st:
            res["toeplitz_speedup"] = st["toeplitz_lut"]["mean"] / st["toeplitz_naive"]["mean"]

    gates = {}
    if "xor_single" in st:
        gates["single_lane_words_per_s"] = {
            "value": st["xor_single"]["mean"], "target": SINGLE_LANE_WORDS_PER_S,
            "passed": st["xor_single"]["mean"] >= SINGLE_LANE_WORDS_PER_S}
    if "xor_multi" in st:
        agg = st["xor_multi"]["bits_per_s"]
        gates["aggregate_bits_per_s"] = {
            "value": agg, "target": TARGET_BITS_PER_S,
            "hard_gate": HARD_GATE_FRACTION * TARGET_BITS_PER_S,
            "passed": agg >= HARD_GATE_FRACTION * TARGET_BITS_PER_S,
            "stretch_met": agg >= TARGET_BITS_PER_S}
    res["gates"] = gates
    res["passed"] = all(g["passed"] for g in gates.values())
    res["machine"] = {"cpu_count": os.cpu_count(), "platform": platform.platform(),
                      "processor": platform.processor() or platform.machine()}
    res["params"] = {"n_bits": n, "m": m, "lanes": lanes, "duration_s": duration,
                     "repeats": repeats, "words": len(words)}
    return res
