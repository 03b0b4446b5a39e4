"""Randomness extraction: block XOR of buffered bit lanes, and Toeplitz hashing.

XOR extraction buffers 2m consecutive n-bit words as an n x 2m bit matrix,
splits it into the first and second m columns and XORs them element-wise.
The n x m result is serialized column by column (one output word per pulse
pair, MSB first), so the output stream stays aligned with pulse order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .digitizer import AdcWord

MODES = ("xor", "toeplitz", "none")


# -- bit-matrix level ---------------------------------------------------------

@dataclass
class RneBuffer:
    """n x 2m bit matrix filled one ADC word (column) at a time."""

    n_rows: int
    m: int
    columns: list = field(default_factory=list)

    def __post_init__(self):
        if self.n_rows < 1 or self.m < 1:
            raise ValueError("n_rows and m must be >= 1")

    @classmethod
    def from_words(cls, words, n_rows: int, m: int) -> "RneBuffer":
        buf = cls(n_rows, m)
        for w in words:
            buf.push(w)
        return buf

    @classmethod
    def from_matrix(cls, matrix) -> "RneBuffer":
        matrix = np.asarray(matrix, dtype=np.uint8)
        if matrix.ndim != 2 or matrix.shape[1] % 2:
            raise ValueError("matrix must be n x 2m")
        buf = cls(matrix.shape[0], matrix.shape[1] // 2)
        buf.columns = [matrix[:, j].copy() for j in range(matrix.shape[1])]
        return buf

    def push(self, word):
        if self.is_full:
            raise ValueError("buffer already holds 2m columns")
        bits = word.bits if isinstance(word, AdcWord) else word
        col = np.asarray(bits, dtype=np.uint8)
        if col.shape != (self.n_rows,):
            raise ValueError(f"expected {self.n_rows} bits, got {col.shape}")
        self.columns.append(col)

    @property
    def is_full(self) -> bool:
        return len(self.columns) == 2 * self.m

    @property
    def matrix(self) -> np.ndarray:
        if not self.columns:
            return np.zeros((self.n_rows, 0), dtype=np.uint8)
        return np.stack(self.columns, axis=1)


def split_buffer(buf: RneBuffer) -> tuple[np.ndarray, np.ndarray]:
    if not buf.is_full:
        raise ValueError(f"buffer holds {len(buf.columns)} of {2 * buf.m} columns")
    mat = buf.matrix
    return mat[:, :buf.m], mat[:, buf.m:]


def xor_extract(first, second) -> np.ndarray:
    first = np.asarray(first, dtype=np.uint8)
    second = np.asarray(second, dtype=np.uint8)
    if first.shape != second.shape:
        raise ValueError(f"shape mismatch: {first.shape} vs {second.shape}")
    return first ^ second


def serialize(matrix) -> np.ndarray:
    """Parallel-to-serial: column-major, row 1 (MSB) first within a column."""
    return np.asarray(matrix, dtype=np.uint8).T.ravel()


# -- word-stream level --------------------------------------------------------

def xor_output_bits(count: int, n: int, m: int) -> int:
    """Exact output length n*m*floor(count/2m)."""
    return n * m * (count // (2 * m))


def discarded_words(count: int, m: int) -> int:
    return count % (2 * m)


def xor_words(words, m: int) -> np.ndarray:
    """Block XOR on integer words: out[b, j] = w[2mb + j] ^ w[2mb + m + j]."""
    if m < 1:
        raise ValueError("m must be >= 1")
    words = np.asarray(words, dtype=np.uint16)
    blocks = len(words) // (2 * m)
    w = words[:blocks * 2 * m].reshape(blocks, 2, m)
    return (w[:, 0, :] ^ w[:, 1, :]).ravel()


def words_to_bits(words, n: int) -> np.ndarray:
    """Unpacked bit vector, each word MSB first."""
    words = np.asarray(words, dtype=np.uint16)
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint16)
    return ((words[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def xor_pipeline(words, n: int, m: int) -> np.ndarray:
    """Unpacked output bits of block XOR extraction; trailing partial block dropped."""
    if len(words) and isinstance(words[0], AdcWord):
        words = [w.bin for w in words]
    return words_to_bits(xor_words(words, m), n)


def xor_pipeline_packed(words, n: int, m: int) -> np.ndarray:
    """Fast path: packed MSB-first output bytes of :func:`xor_pipeline`."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return _kernels.xor_pack(words, n, m)


def xor_pipeline_lanes(words, n: int, m: int) -> np.ndarray:
    """Same output as :func:`xor_pipeline`, computed as n independent bit lanes.

    Each lane extracts one bit position of every word on its own; the lanes
    are then interleaved back into the serial stream.
    """
    words = np.asarray(words, dtype=np.uint16)
    blocks = len(words) // (2 * m)
    lanes = []
    for row in range(n):
        lane = ((words[:blocks * 2 * m] >> (n - 1 - row)) & 1).astype(np.uint8)
        lane = lane.reshape(blocks, 2, m)
        lanes.append((lane[:, 0, :] ^ lane[:, 1, :]).ravel())
    return np.stack(lanes, axis=1).ravel() if lanes else np.zeros(0, np.uint8)


# -- Toeplitz hashing ---------------------------------------------------------

@dataclass(frozen=True)
class ToeplitzSeed:
    bits: tuple
    n_in: int = 12
    n_out: int = 6

    def __post_init__(self):
        if len(self.bits) != self.n_in + self.n_out - 1:
            raise ValueError(
                f"seed needs {self.n_in + self.n_out - 1} bits, got {len(self.bits)}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("seed bits must be 0 or 1")

    @classmethod
    def from_string(cls, text: str, n_in: int = 12, n_out: int = 6) -> "ToeplitzSeed":
        bits = tuple(int(c) for c in text if c in "01")
        return cls(bits, n_in, n_out)

    @classmethod
    def load(cls, path, n_in: int = 12, n_out: int = 6) -> "ToeplitzSeed":
        return cls.from_string(Path(path).read_text(), n_in, n_out)

    def dump(self, path):
        Path(path).write_text("".join(map(str, self.bits)) + "\n")

    @property
    def matrix(self) -> np.ndarray:
        """n_out x n_in matrix with T[i, j] = seed[i + n_in - 1 - j]."""
        i = np.arange(self.n_out)[:, None]
        j = np.arange(self.n_in)[None, :]
        return np.asarray(self.bits, dtype=np.uint8)[i + self.n_in - 1 - j]


def toeplitz_hash(word, seed: ToeplitzSeed) -> np.ndarray:
    """T @ x over GF(2); x is the word's bit vector (b_1 first)."""
    bits = word.bits if isinstance(word, AdcWord) else word
    x = np.asarray(bits, dtype=np.uint8)
    if x.shape != (seed.n_in,):
        raise ValueError(f"expected {seed.n_in} input bits, got {x.shape}")
    return (seed.matrix.astype(np.int64) @ x) & 1


def toeplitz_matmul(words, seed: ToeplitzSeed) -> np.ndarray:
    """Vectorized reference path: unpack, integer matmul, reduce mod 2, repack."""
    words = np.asarray(words, dtype=np.uint16)
    x = words_to_bits(words, seed.n_in).reshape(-1, seed.n_in).astype(np.int64)
    y = (x @ seed.matrix.T.astype(np.int64)) & 1
    weights = 1 << np.arange(seed.n_out - 1, -1, -1)
    return (y @ weights).astype(np.uint16)


def toeplitz_lut(seed: ToeplitzSeed) -> np.ndarray:
    """Hash of every n_in-bit input, built from column images by linearity."""
    if seed.n_in > 16:
        raise ValueError("lookup table limited to 16 input bits")
    t = seed.matrix
    weights = 1 << np.arange(seed.n_out - 1, -1, -1)
    # image of input bit j (column j of T), j = 0 is the MSB
    col_img = (t.T.astype(np.int64) @ weights).astype(np.uint16)
    lut = np.zeros(1 << seed.n_in, dtype=np.uint16)
    for j in reversed(range(seed.n_in)):
        bit = 1 << (seed.n_in - 1 - j)
        lut[bit:2 * bit] = lut[:bit] ^ col_img[j]
    return lut


class ToeplitzHasher:
    """Word-stream Toeplitz extractor backed by a precomputed lookup table."""

    def __init__(self, seed: ToeplitzSeed):
        self.seed = seed
        self.lut = toeplitz_lut(seed)

    def hash_words(self, words) -> np.ndarray:
        return self.lut[np.asarray(words, dtype=np.uint16)]

    def hash_packed(self, words) -> np.ndarray:
        words = np.asarray(words, dtype=np.uint16)
        if words.size and int(words.max()) >= len(self.lut):
            raise ValueError(f"word exceeds {self.seed.n_in} bits")
        return _kernels.lut_pack(words, self.lut, self.seed.n_out)


def extraction_rate(n: int, R: float, mode: str = "xor", n_out: int = 6) -> float:
    """Output bit rate for n-bit words at pulse rate R."""
    if n < 1 or R <= 0:
        raise ValueError("n must be >= 1 and R > 0")
    if mode == "xor":
        return n * R / 2
    if mode == "toeplitz":
        return n_out * R
    if mode == "none":
        return n * R
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def extract_packed(words, n: int, mode: str, m: int = 7,
                   hasher: ToeplitzHasher | None = None) -> tuple[np.ndarray, int]:
    """Dispatch to the packed fast path; returns (bytes, number of valid bits)."""
    words = np.asarray(words, dtype=np.uint16)
    if mode == "xor":
        return xor_pipeline_packed(words, n, m), xor_output_bits(len(words), n, m)
    if mode == "toeplitz":
        if hasher is None:
            raise ValueError("toeplitz mode needs a seed")
        if hasher.seed.n_in != n:
            raise ValueError(f"seed expects {hasher.seed.n_in}-bit words, got {n}")
        return hasher.hash_packed(words), len(words) * hasher.seed.n_out
    if mode == "none":
        return _kernels.pack_words(words, n), len(words) * n
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
