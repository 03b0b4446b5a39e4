"""On-disk formats.

* sample stream: raw float64 little-endian values, one per pulse
* word stream: n-bit ADC words packed MSB-first, concatenated without padding
* bit stream: extracted bits packed MSB-first within each byte

Every data file has a JSON manifest next to it (``<file>.json``) recording the
kind, element count, SHA-256 of the data and the configuration that made it.
"""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from ._kernels import packed_len, unpack_words

SAMPLE_DTYPE = np.dtype("<f8")


def manifest_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def sha256_file(path, block: int = 1 << 22) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        while chunk := fh.read(block):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, **fields) -> dict:
    fields.setdefault("sha256", sha256_file(path))
    fields.setdefault("file", Path(path).name)
    manifest_path(path).write_text(json.dumps(fields, indent=2, sort_keys=True) + "\n")
    return fields


def read_manifest(path) -> dict:
    mp = manifest_path(path)
    if not mp.exists():
        raise FileNotFoundError(f"no manifest for {path} (expected {mp})")
    return json.loads(mp.read_text())


class ChunkWriter:
    """Appends byte chunks to a file."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = open(self.path, "wb")
        self.nbytes = 0

    def write(self, data):
        data = np.ascontiguousarray(data)
        self._fh.write(data.tobytes())
        self.nbytes += data.nbytes

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_samples(path, values) -> int:
    values = np.asarray(values, dtype=SAMPLE_DTYPE)
    Path(path).write_bytes(values.tobytes())
    return len(values)


def read_samples(path, count: int | None = None) -> np.ndarray:
    data = np.memmap(path, dtype=SAMPLE_DTYPE, mode="r") if Path(path).stat().st_size else \
        np.empty(0, SAMPLE_DTYPE)
    if count is not None:
        if len(data) < count:
            raise ValueError(f"{path}: {len(data)} samples, manifest says {count}")
        data = data[:count]
    return data


def write_samples_csv(path, values, start_index: int = 0):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "value"])
        for i, v in enumerate(np.asarray(values), start=start_index):
            w.writerow([i, repr(float(v))])


def read_words(path, n_bits: int, count: int) -> np.ndarray:
    buf = np.fromfile(path, dtype=np.uint8)
    if len(buf) != packed_len(count * n_bits):
        raise ValueError(f"{path}: {len(buf)} bytes does not hold {count} {n_bits}-bit words")
    return unpack_words(buf, n_bits, count)


def write_bits(path, bits) -> int:
    """Pack an unpacked 0/1 vector; returns the number of bits written."""
    bits = np.asarray(bits, dtype=np.uint8)
    Path(path).write_bytes(np.packbits(bits).tobytes())
    return len(bits)


def read_bits(path, n_bits: int | None = None) -> np.ndarray:
    buf = np.fromfile(path, dtype=np.uint8)
    if n_bits is None:
        n_bits = 8 * len(buf)
    if packed_len(n_bits) > len(buf):
        raise ValueError(f"{path}: {len(buf)} bytes cannot hold {n_bits} bits")
    return np.unpackbits(buf, count=n_bits)


def read_bit_file(path) -> np.ndarray:
    """Bits from a packed file, trimmed to the manifest's count when present."""
    try:
        n_bits = read_manifest(path)["bits"]
    except FileNotFoundError:
        n_bits = None
    return read_bits(path, n_bits)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
