"""Compiled inner loops for word packing and block XOR extraction.

All packed formats are MSB-first within each byte, words concatenated without
padding; only the final byte of a stream carries zero fill.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def pack_words_into(words, n, out):
    mask = np.uint64((1 << n) - 1)
    acc = np.uint64(0)
    nacc = 0
    pos = 0
    for i in range(words.shape[0]):
        acc = (acc << np.uint64(n)) | (np.uint64(words[i]) & mask)
        nacc += n
        while nacc >= 8:
            nacc -= 8
            out[pos] = np.uint8((acc >> np.uint64(nacc)) & np.uint64(0xFF))
            pos += 1
        acc &= np.uint64((1 << nacc) - 1)
    if nacc > 0:
        out[pos] = np.uint8((acc << np.uint64(8 - nacc)) & np.uint64(0xFF))
        pos += 1
    return pos


@njit(cache=True, nogil=True)
def unpack_words_into(buf, n, count, out):
    mask = np.uint64((1 << n) - 1)
    acc = np.uint64(0)
    nacc = 0
    pos = 0
    for i in range(count):
        while nacc < n:
            acc = (acc << np.uint64(8)) | np.uint64(buf[pos])
            pos += 1
            nacc += 8
        nacc -= n
        out[i] = (acc >> np.uint64(nacc)) & mask
        acc &= np.uint64((1 << nacc) - 1)


@njit(cache=True, nogil=True)
def xor_pack_into(words, n, m, out):
    """Fused block XOR (word j with word j+m of each 2m block) and packing."""
    mask = np.uint64((1 << n) - 1)
    blocks = words.shape[0] // (2 * m)
    acc = np.uint64(0)
    nacc = 0
    pos = 0
    for b in range(blocks):
        base = b * 2 * m
        for j in range(m):
            w = np.uint64(words[base + j] ^ words[base + m + j]) & mask
            acc = (acc << np.uint64(n)) | w
            nacc += n
            while nacc >= 8:
                nacc -= 8
                out[pos] = np.uint8((acc >> np.uint64(nacc)) & np.uint64(0xFF))
                pos += 1
            acc &= np.uint64((1 << nacc) - 1)
    if nacc > 0:
        out[pos] = np.uint8((acc << np.uint64(8 - nacc)) & np.uint64(0xFF))
        pos += 1
    return pos


@njit(cache=True, nogil=True)
def xor_pack12_into(words, m, out):
    """12-bit specialisation: two output words fill exactly three bytes."""
    blocks = words.shape[0] // (2 * m)
    pos = 0
    have = False
    prev = np.uint16(0)
    for b in range(blocks):
        base = b * 2 * m
        for j in range(m):
            w = (words[base + j] ^ words[base + m + j]) & np.uint16(0xFFF)
            if have:
                out[pos] = np.uint8(prev >> 4)
                out[pos + 1] = np.uint8(((prev & 0xF) << 4) | (w >> 8))
                out[pos + 2] = np.uint8(w & 0xFF)
                pos += 3
                have = False
            else:
                prev = w
                have = True
    if have:
        out[pos] = np.uint8(prev >> 4)
        out[pos + 1] = np.uint8((prev & 0xF) << 4)
        pos += 2
    return pos


@njit(cache=True, nogil=True)
def lut_pack_into(words, lut, n_out, out):
    """Table lookup (e.g. a Toeplitz hash) followed by n_out-bit packing."""
    mask = np.uint64((1 << n_out) - 1)
    acc = np.uint64(0)
    nacc = 0
    pos = 0
    for i in range(words.shape[0]):
        acc = (acc << np.uint64(n_out)) | (np.uint64(lut[words[i]]) & mask)
        nacc += n_out
        while nacc >= 8:
            nacc -= 8
            out[pos] = np.uint8((acc >> np.uint64(nacc)) & np.uint64(0xFF))
            pos += 1
        acc &= np.uint64((1 << nacc) - 1)
    if nacc > 0:
        out[pos] = np.uint8((acc << np.uint64(8 - nacc)) & np.uint64(0xFF))
        pos += 1
    return pos


def packed_len(nbits: int) -> int:
    return (nbits + 7) // 8


def pack_words(words, n: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint16)
    out = np.empty(packed_len(len(words) * n), dtype=np.uint8)
    pack_words_into(words, n, out)
    return out


def unpack_words(buf, n: int, count: int) -> np.ndarray:
    buf = np.frombuffer(buf, dtype=np.uint8) if isinstance(buf, (bytes, bytearray)) else buf
    if len(buf) < packed_len(count * n):
        raise ValueError(f"buffer of {len(buf)} bytes too short for {count} {n}-bit words")
    out = np.empty(count, dtype=np.uint16)
    unpack_words_into(buf, n, count, out)
    return out


def xor_pack(words, n: int, m: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint16)
    nbits = n * m * (len(words) // (2 * m))
    out = np.empty(packed_len(nbits), dtype=np.uint8)
    if n == 12:
        xor_pack12_into(words, m, out)
    else:
        xor_pack_into(words, n, m, out)
    return out


def lut_pack(words, lut, n_out: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint16)
    out = np.empty(packed_len(len(words) * n_out), dtype=np.uint8)
    lut_pack_into(words, lut, n_out, out)
    return out
