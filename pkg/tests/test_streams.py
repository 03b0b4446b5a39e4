import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseqrng._kernels import pack_words
from phaseqrng.streams import (
    manifest_path,
    read_bit_file,
    read_bits,
    read_manifest,
    read_samples,
    read_words,
    sha256_file,
    write_bits,
    write_manifest,
    write_samples,
    write_samples_csv,
)


def test_samples_round_trip(tmp_path):
    v = np.random.default_rng(0).normal(size=1000)
    p = tmp_path / "s.f64"
    assert write_samples(p, v) == 1000
    assert p.stat().st_size == 8000
    assert np.array_equal(read_samples(p), v)
    assert np.array_equal(read_samples(p, 10), v[:10])
    with pytest.raises(ValueError):
        read_samples(p, 1001)
    # little-endian float64 on disk regardless of host
    assert np.array_equal(np.frombuffer(p.read_bytes(), dtype="<f8"), v)


def test_empty_samples(tmp_path):
    p = tmp_path / "e.f64"
    write_samples(p, [])
    assert len(read_samples(p)) == 0


def test_manifest(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"abc")
    man = write_manifest(p, kind="bits", bits=24)
    assert manifest_path(p).name == "x.bin.json"
    assert read_manifest(p) == man
    assert man["sha256"] == sha256_file(p)
    assert man["sha256"].startswith("ba7816bf")
    with pytest.raises(FileNotFoundError):
        read_manifest(tmp_path / "missing.bin")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=200))
def test_bits_round_trip(seq):
    import tempfile
    from pathlib import Path
    with tempfile.TemporaryDirectory() as d:
        p = Path(d) / "b.bin"
        write_bits(p, seq)
        assert read_bits(p, len(seq)).tolist() == seq
        # MSB first within each byte
        if seq:
            assert p.read_bytes()[0] >> 7 == seq[0]


def test_read_bit_file_uses_manifest(tmp_path):
    p = tmp_path / "b.bin"
    write_bits(p, [1, 0, 1])
    assert len(read_bit_file(p)) == 8
    write_manifest(p, kind="bits", bits=3)
    assert read_bit_file(p).tolist() == [1, 0, 1]
    with pytest.raises(ValueError):
        read_bits(p, 9)


def test_words_round_trip(tmp_path):
    words = np.random.default_rng(1).integers(0, 4096, 101).astype(np.uint16)
    p = tmp_path / "w.bin"
    p.write_bytes(pack_words(words, 12).tobytes())
    assert np.array_equal(read_words(p, 12, 101), words)
    with pytest.raises(ValueError):
        read_words(p, 12, 200)


def test_samples_csv(tmp_path):
    p = tmp_path / "s.csv"
    write_samples_csv(p, [0.5, -0.25])
    assert p.read_text().splitlines() == ["index,value", "0,0.5", "1,-0.25"]
