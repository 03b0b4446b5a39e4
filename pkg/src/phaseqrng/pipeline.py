"""Streaming simulate -> digitize -> extract stages over bounded chunks."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import pack_words
from .config import PipelineConfig
from .digitizer import bin_counts, entropy_report, quantize_values
from .extractor import ToeplitzHasher, extract_packed, extraction_rate, xor_output_bits
from .optics import generate_values, iter_pulse_values
from .streams import ChunkWriter, read_manifest, read_samples, read_words, write_manifest


def simulate_words(cfg: PipelineConfig, count: int, start: int = 0) -> np.ndarray:
    values = generate_values(start, start + count, cfg.interference, cfg.noise, cfg.seed)
    return quantize_values(values, cfg.adc)[0]


def words_needed(cfg: PipelineConfig, n_bits_out: int) -> int:
    n = cfg.adc.n_bits
    if cfg.mode == "xor":
        return 2 * cfg.m * math.ceil(n_bits_out / (n * cfg.m))
    if cfg.mode == "toeplitz":
        return math.ceil(n_bits_out / cfg.n_out)
    return math.ceil(n_bits_out / n)


def pipeline_bits(cfg: PipelineConfig, n_bits_out: int) -> np.ndarray:
    """First `n_bits_out` extracted bits of the configured pipeline, unpacked."""
    count = words_needed(cfg, n_bits_out)
    hasher = ToeplitzHasher(cfg.load_seed()) if cfg.mode == "toeplitz" else None
    parts = []
    for start in range(0, count, cfg.chunk_size):
        words = simulate_words(cfg, min(cfg.chunk_size, count - start), start)
        packed, nbits = extract_packed(words, cfg.adc.n_bits, cfg.mode, cfg.m, hasher)
        parts.append(np.unpackbits(packed, count=nbits))
    return np.concatenate(parts)[:n_bits_out] if parts else np.zeros(0, np.uint8)


def simulate(cfg: PipelineConfig, out_path, csv_path=None) -> dict:
    """Write the analog sample stream (float64 LE) plus its manifest."""
    out_path = Path(out_path)
    with ChunkWriter(out_path) as w:
        for values in iter_pulse_values(cfg.count, cfg.interference, cfg.noise, cfg.seed):
            w.write(values.astype("<f8"))
    if csv_path is not None:
        from .streams import write_samples_csv
        write_samples_csv(csv_path, read_samples(out_path, cfg.count))
    return write_manifest(out_path, kind="samples", dtype="<f8", count=cfg.count,
                          config=cfg.to_dict(), version=__version__)


@dataclass
class _ChunkResult:
    packed: np.ndarray
    nbits: int
    words_packed: np.ndarray | None
    counts: np.ndarray
    below: int
    above: int


def _input_reader(path, cfg: PipelineConfig):
    """Returns (count, fn(start, stop) -> uint16 words, saturation-aware)."""
    man = read_manifest(path)
    kind = man.get("kind")
    if kind == "samples":
        count = int(man["count"])
        data = read_samples(path, count)

        def get(start, stop):
            return quantize_values(np.asarray(data[start:stop]), cfg.adc)
        return count, get, man
    if kind == "words":
        if int(man["n_bits"]) != cfg.adc.n_bits:
            raise ValueError(f"{path}: {man['n_bits']}-bit words, config expects {cfg.adc.n_bits}")
        count = int(man["count"])
        words = read_words(path, cfg.adc.n_bits, count)

        def get(start, stop):
            return words[start:stop], 0, 0
        return count, get, man
    raise ValueError(f"{path}: cannot extract from a {kind!r} stream")


def extract(cfg: PipelineConfig, input_path, out_path, words_path=None) -> dict:
    """Digitize (if needed) and extract; writes packed bits and a manifest.

    Chunks are aligned to whole 2m-word blocks and whole output bytes, so the
    concatenated output equals a single pass over the full stream; chunks are
    processed on `cfg.lanes` threads and merged in order.
    """
    count, get, src_man = _input_reader(input_path, cfg)
    n = cfg.adc.n_bits
    hasher = ToeplitzHasher(cfg.load_seed()) if cfg.mode == "toeplitz" else None

    def work(start):
        words, below, above = get(start, min(start + cfg.chunk_size, count))
        packed, nbits = extract_packed(words, n, cfg.mode, cfg.m, hasher)
        wp = pack_words(words, n) if words_path is not None else None
        return _ChunkResult(packed, nbits, wp, bin_counts(words, n), below, above)

    counts = np.zeros(1 << n, dtype=np.int64)
    below = above = total = 0
    starts = range(0, count, cfg.chunk_size)
    wwriter = ChunkWriter(words_path) if words_path is not None else None
    with ChunkWriter(out_path) as w, ThreadPoolExecutor(cfg.lanes) as ex:
        # bounded in-flight window keeps memory independent of stream length
        window = 2 * cfg.lanes
        pending = []
        for s in starts:
            pending.append(ex.submit(work, s))
            if len(pending) >= window:
                total, below, above = _drain(pending.pop(0).result(), w, wwriter,
                                             counts, total, below, above)
        for f in pending:
            total, below, above = _drain(f.result(), w, wwriter, counts, total, below, above)
    if wwriter is not None:
        wwriter.close()
        write_manifest(words_path, kind="words", n_bits=n, count=count,
                       config=cfg.to_dict(), version=__version__)

    expected = {"xor": xor_output_bits(count, n, cfg.m),
                "toeplitz": count * cfg.n_out, "none": count * n}[cfg.mode]
    if total != expected:
        raise RuntimeError(f"extracted {total} bits, length contract says {expected}")
    rate_R = cfg.interference.rate_R
    report = entropy_report(counts, cfg.adc, below, above).as_dict() if count else None
    return write_manifest(
        out_path, kind="bits", bits=total, input_count=count, mode=cfg.mode, n_bits=n,
        m=cfg.m if cfg.mode == "xor" else None,
        n_out=cfg.n_out if cfg.mode == "toeplitz" else None,
        discarded_words=count % (2 * cfg.m) if cfg.mode == "xor" else 0,
        rate_bps=extraction_rate(n, rate_R, cfg.mode, cfg.n_out),
        raw_rate_bps=extraction_rate(n, rate_R, "none"),
        entropy=report, source=Path(input_path).name, source_sha256=src_man.get("sha256"),
        toeplitz_seed=cfg.toeplitz_seed, config={**cfg.to_dict(), "count": count},
        version=__version__)


def _drain(r: _ChunkResult, w, wwriter, counts, total, below, above):
    w.write(r.packed)
    if wwriter is not None:
        wwriter.write(r.words_packed)
    counts += r.counts
    return total + r.nbits, below + r.below, above + r.above
