import numpy as np
import pytest

import oracles
from phaseqrng.config import PipelineConfig
from phaseqrng.extractor import ToeplitzSeed, words_to_bits
from phaseqrng.pipeline import extract, pipeline_bits, simulate, simulate_words
from phaseqrng.streams import read_bit_file, read_manifest, read_samples, read_words


@pytest.fixture
def samples(tmp_path):
    cfg = PipelineConfig(count=50_000, seed=5)
    path = tmp_path / "s.f64"
    simulate(cfg, path)
    return cfg, path


def test_simulate_manifest(samples):
    cfg, path = samples
    man = read_manifest(path)
    assert man["kind"] == "samples" and man["count"] == 50_000
    assert PipelineConfig.from_dict(man["config"]) == cfg
    v = read_samples(path, 50_000)
    assert np.array_equal(np.asarray(v), np.asarray(read_samples(path)))


def test_simulate_zero_count(tmp_path):
    man = simulate(PipelineConfig(count=0), tmp_path / "z.f64")
    assert man["count"] == 0 and (tmp_path / "z.f64").stat().st_size == 0
    out = extract(PipelineConfig(), tmp_path / "z.f64", tmp_path / "z.bin")
    assert out["bits"] == 0


def test_simulate_is_deterministic(tmp_path):
    cfg = PipelineConfig(count=30_000, seed=1)
    a = simulate(cfg, tmp_path / "a.f64")
    b = simulate(cfg, tmp_path / "b.f64")
    assert a["sha256"] == b["sha256"]


@pytest.mark.parametrize("chunk,lanes", [(112, 1), (112 * 37, 3), (None, 2)])
def test_extract_matches_single_pass(samples, tmp_path, chunk, lanes):
    cfg, path = samples
    run = cfg.with_(chunk_size=chunk, lanes=lanes) if chunk else cfg.with_(lanes=lanes)
    man = extract(run, path, tmp_path / "b.bin", tmp_path / "w.bin")
    words = simulate_words(cfg, 50_000)
    ref = oracles.xor_reference(words.tolist(), 12, 7)
    assert man["bits"] == len(ref) == 12 * 7 * (50_000 // 14)
    assert man["discarded_words"] == 50_000 % 14
    assert read_bit_file(tmp_path / "b.bin").tolist() == ref
    assert np.array_equal(read_words(tmp_path / "w.bin", 12, 50_000), words)
    assert man["rate_bps"] == 1.5e9 and man["raw_rate_bps"] == 3.0e9


def test_extract_from_words_equals_from_samples(samples, tmp_path):
    cfg, path = samples
    a = extract(cfg, path, tmp_path / "a.bin", tmp_path / "w.bin")
    b = extract(cfg, tmp_path / "w.bin", tmp_path / "b.bin")
    assert a["sha256"] == b["sha256"] and a["bits"] == b["bits"]


def test_extract_modes(samples, tmp_path):
    cfg, path = samples
    none = extract(cfg.with_(mode="none"), path, tmp_path / "n.bin")
    assert none["bits"] == 50_000 * 12
    words = simulate_words(cfg, 50_000)
    assert np.array_equal(read_bit_file(tmp_path / "n.bin"), words_to_bits(words, 12))
    seed_path = tmp_path / "seed.txt"
    ToeplitzSeed(tuple(np.random.default_rng(0).integers(0, 2, 17).tolist())).dump(seed_path)
    tcfg = cfg.with_(mode="toeplitz", toeplitz_seed=str(seed_path))
    tman = extract(tcfg, path, tmp_path / "t.bin")
    assert tman["bits"] == 50_000 * 6 and tman["n_out"] == 6
    assert np.array_equal(read_bit_file(tmp_path / "t.bin"), pipeline_bits(tcfg, 300_000))


def test_extract_rejects_bad_input(tmp_path, samples):
    cfg, path = samples
    extract(cfg, path, tmp_path / "b.bin")
    with pytest.raises(ValueError):
        extract(cfg, tmp_path / "b.bin", tmp_path / "c.bin")
    extract(cfg, path, tmp_path / "b.bin", tmp_path / "w.bin")
    with pytest.raises(ValueError):
        extract(cfg.with_(n_bits=10), tmp_path / "w.bin", tmp_path / "c.bin")


def test_pipeline_bits_prefix_consistency():
    cfg = PipelineConfig(seed=3)
    a = pipeline_bits(cfg, 200_000)
    b = pipeline_bits(cfg.with_(chunk_size=112 * 100), 100_000)
    assert np.array_equal(a[:100_000], b)
