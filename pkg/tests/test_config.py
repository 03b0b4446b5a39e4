import json

import pytest

from phaseqrng.config import KNOWN_KEYS, PipelineConfig


def test_defaults():
    cfg = PipelineConfig()
    assert cfg.adc.n_bits == 12
    assert (cfg.adc.range_lo, cfg.adc.range_hi) == pytest.approx((-1.4, 1.4))
    assert cfg.mode == "xor" and cfg.m == 7
    assert cfg.chunk_size % (16 * 7) == 0
    assert cfg.interference.rate_R * cfg.interference.period_T == pytest.approx(1.0)


def test_round_trip_through_dict():
    cfg = PipelineConfig.from_dict({"m": 5, "n_bits": 10, "sigma_frac": 0.02, "seed": 9,
                                    "n_samples": 600, "rate_R": 1e9})
    again = PipelineConfig.from_dict(cfg.to_dict())
    assert again == cfg
    assert set(cfg.to_dict()) == KNOWN_KEYS
    assert cfg.tests.n_samples == 600
    assert cfg.adc.range_hi == pytest.approx(1.16)


def test_load_with_overrides(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"m": 3, "count": 500}))
    cfg = PipelineConfig.load(p, count=900, mode=None)
    assert cfg.m == 3 and cfg.count == 900 and cfg.mode == "xor"
    assert PipelineConfig.load(None).m == 7


def test_with_recomputes_derived_fields():
    cfg = PipelineConfig().with_(m=5, sigma_frac=0.0)
    assert cfg.chunk_size % 80 == 0
    assert (cfg.adc.range_lo, cfg.adc.range_hi) == (-1.0, 1.0)
    explicit = PipelineConfig().with_(adc_lo=-2.0, adc_hi=2.0)
    assert explicit.adc.range_lo == -2.0


@pytest.mark.parametrize("bad", [
    {"bogus": 1},
    {"mode": "sha"},
    {"m": 0},
    {"chunk_size": 1000},
    {"mode": "toeplitz"},
    {"eta_d": 2.0},
    {"alpha": 1.5},
    {"n_bits": 17},
    {"lanes": 0},
    {"count": -1},
])
def test_invalid(bad):
    with pytest.raises(ValueError):
        PipelineConfig.from_dict(bad)


def test_seed_loading(tmp_path):
    p = tmp_path / "seed.txt"
    p.write_text("10110011100011110\n")
    cfg = PipelineConfig.from_dict({"mode": "toeplitz", "toeplitz_seed": str(p)})
    s = cfg.load_seed()
    assert s.n_in == 12 and s.n_out == 6 and s.bits[:3] == (1, 0, 1)
