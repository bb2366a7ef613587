#!/usr/bin/env python3
"""
Scenario tests

- CSV write/read is bit-exact and errors name the offending row
- Synthesis is deterministic per seed and respects its physical shape
- Scenario summary totals
- One-row files only carry an hourly step
"""

import sys
from dataclasses import replace
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest
from scipy import special

from scripts.scenario.scenario_csv import (
    CSV_COLUMNS,
    Scenario,
    ScenarioMeta,
    load_scenario,
    scenario_hash,
    write_scenario,
)
from scripts.scenario.scenario_stats import scenario_stats
from scripts.scenario.synth_scenario import SynthConfig, synth_scenario, weibull_from_normal
from scripts.utils.errors import ParameterError, ScenarioValidationError


@pytest.fixture(autouse=True)
def _seed_numpy_rng():
    """Ensure deterministic draws for reproducible tests."""
    np.random.seed(0)


def _flat_scenario(n: int = 24, load: float = 10.0) -> Scenario:
    return Scenario(
        load_kw=np.full(n, load),
        irradiance=np.zeros(n),
        wind_speed=np.full(n, 5.0),
        price_buy=np.full(n, 0.28),
        price_sell=np.full(n, 0.08),
        meta=ScenarioMeta(name="flat"),
    )


def _write_rows(path: Path, rows: list[str]) -> Path:
    path.write_text(",".join(CSV_COLUMNS) + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


def _rows(n: int) -> list[str]:
    return [f"{h},10.0,0.5,6.0,0.28,0.08" for h in range(n)]


class TestScenarioCsv:
    """Container format"""

    def test_roundtrip_is_bit_exact(self, tmp_path):
        s = synth_scenario(SynthConfig(days=3, seed=11))
        path = write_scenario(s, tmp_path / "s.csv")
        loaded = load_scenario(path)
        assert loaded == s
        assert scenario_hash(loaded) == scenario_hash(s)
        assert loaded.meta.origin == "ingested"
        assert loaded.meta.name == "s"

    def test_write_is_byte_stable(self, tmp_path):
        s = synth_scenario(SynthConfig(days=2, seed=3))
        a = write_scenario(s, tmp_path / "a.csv").read_bytes()
        b = write_scenario(load_scenario(tmp_path / "a.csv"), tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_sub_hourly_step_recovered(self, tmp_path):
        rows = [f"{0.25 * i},10.0,0.5,6.0,0.28,0.08" for i in range(8)]
        s = load_scenario(_write_rows(tmp_path / "q.csv", rows))
        assert s.dt_h == 0.25
        assert len(s) == 8

    def test_single_row_sub_hourly_rejected(self, tmp_path):
        s = replace(_flat_scenario(1), dt_h=0.5)
        with pytest.raises(ParameterError, match="single-row"):
            write_scenario(s, tmp_path / "one.csv")
        assert not (tmp_path / "one.csv").exists()

    def test_single_row_hourly_roundtrip(self, tmp_path):
        s = _flat_scenario(1)
        loaded = load_scenario(write_scenario(s, tmp_path / "one.csv"))
        assert loaded == s
        assert loaded.dt_h == 1.0

    def test_negative_load_names_row(self, tmp_path):
        rows = _rows(10)
        rows[6] = "6,-5,0.5,6.0,0.28,0.08"
        with pytest.raises(ScenarioValidationError) as exc:
            load_scenario(_write_rows(tmp_path / "bad.csv", rows))
        assert exc.value.row == 7
        assert exc.value.column == "load_kw"
        assert "row 7" in str(exc.value)

    def test_short_row_rejected(self, tmp_path):
        rows = _rows(5)
        rows[2] = "2,10.0,0.5,6.0,0.28"
        with pytest.raises(ScenarioValidationError) as exc:
            load_scenario(_write_rows(tmp_path / "short.csv", rows))
        assert exc.value.row == 3

    def test_long_row_rejected(self, tmp_path):
        rows = _rows(5)
        rows[2] = "2,10.0,0.5,6.0,0.28,0.08,9"
        with pytest.raises(ScenarioValidationError):
            load_scenario(_write_rows(tmp_path / "long.csv", rows))

    def test_non_numeric_cell(self, tmp_path):
        rows = _rows(5)
        rows[3] = "3,10.0,abc,6.0,0.28,0.08"
        with pytest.raises(ScenarioValidationError) as exc:
            load_scenario(_write_rows(tmp_path / "nan.csv", rows))
        assert exc.value.row == 4
        assert exc.value.column == "irradiance_kwm2"

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "hdr.csv"
        path.write_text("hour,load,irr,wind,buy,sell\n0,1,0,0,0,0\n", encoding="utf-8")
        with pytest.raises(ScenarioValidationError, match="Header"):
            load_scenario(path)

    def test_uneven_hours(self, tmp_path):
        rows = ["0,1,0,0,0,0", "1,1,0,0,0,0", "3,1,0,0,0,0"]
        with pytest.raises(ScenarioValidationError) as exc:
            load_scenario(_write_rows(tmp_path / "gap.csv", rows))
        assert exc.value.column == "hour"

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_scenario(tmp_path / "nope.csv")


class TestScenarioType:
    def test_series_are_read_only(self):
        s = _flat_scenario()
        with pytest.raises(ValueError):
            s.load_kw[0] = 1.0

    def test_length_mismatch(self):
        with pytest.raises(ScenarioValidationError, match="length"):
            Scenario(np.ones(3), np.ones(2), np.ones(3), np.ones(3), np.ones(3))

    def test_nan_rejected(self):
        with pytest.raises(ScenarioValidationError):
            Scenario(np.array([1.0, np.nan]), np.ones(2), np.ones(2), np.ones(2), np.ones(2))

    def test_window(self):
        s = synth_scenario(SynthConfig(days=2, seed=1))
        w = s.window(24, 12)
        assert len(w) == 12
        assert np.array_equal(w.load_kw, s.load_kw[24:36])
        with pytest.raises(ScenarioValidationError):
            s.window(40, 12)

    def test_hour_of_day(self):
        s = Scenario(np.ones(200), np.zeros(200), np.zeros(200), np.ones(200), np.ones(200), dt_h=0.5)
        assert s.hour_of_day(0) == 0
        assert s.hour_of_day(49) == 0
        assert s.hour_of_day(47) == 23

    def test_hash_ignores_meta(self):
        a = _flat_scenario()
        b = Scenario(a.load_kw, a.irradiance, a.wind_speed, a.price_buy, a.price_sell,
                     meta=ScenarioMeta(name="other", origin="ingested"))
        assert scenario_hash(a) == scenario_hash(b)


class TestSynthScenario:
    """Synthetic profiles"""

    def test_same_seed_identical(self):
        a = synth_scenario(SynthConfig(days=30, seed=5))
        b = synth_scenario(SynthConfig(days=30, seed=5))
        assert a == b
        assert scenario_hash(a) == scenario_hash(b)

    def test_different_seed_differs(self):
        a = synth_scenario(SynthConfig(days=30, seed=5))
        b = synth_scenario(SynthConfig(days=30, seed=6))
        assert scenario_hash(a) != scenario_hash(b)

    def test_year_length(self):
        assert len(synth_scenario(SynthConfig(days=365))) == 8760
        assert len(synth_scenario(SynthConfig(days=1, dt_h=0.25))) == 96

    def test_no_sun_at_night(self):
        s = synth_scenario(SynthConfig(days=60, seed=2))
        hod = np.arange(len(s)) % 24
        assert np.all(s.irradiance[hod == 0] == 0.0)
        assert np.all(s.irradiance[(hod < 6) | (hod >= 18)] == 0.0)
        assert s.irradiance[hod == 12].mean() > 0.3
        assert s.irradiance.max() <= 1.0

    def test_series_valid(self):
        s = synth_scenario(SynthConfig(days=30, seed=8))
        assert np.all(s.load_kw > 0)
        assert np.all(s.wind_speed >= 0)
        assert np.all(np.isfinite(s.wind_speed))

    @pytest.mark.parametrize("seed", range(100))
    def test_valid_for_any_seed(self, seed):
        s = synth_scenario(SynthConfig(days=2, seed=seed))
        hod = np.arange(len(s)) % 24
        for series in (s.load_kw, s.irradiance, s.wind_speed, s.price_buy, s.price_sell):
            assert np.all(np.isfinite(series))
            assert np.all(series >= 0)
        assert np.all(s.irradiance[(hod < 6) | (hod >= 18)] == 0.0)
        assert s.irradiance.max() <= 1.0

    def test_tou_tariff(self):
        cfg = SynthConfig(days=2, tariff="tou")
        s = synth_scenario(cfg)
        hod = np.arange(len(s)) % 24
        assert np.all(s.price_buy[(hod >= 16) & (hod < 21)] == cfg.peak_price)
        assert np.all(s.price_buy[hod < 16] == cfg.offpeak_price)
        assert np.all(s.price_sell == cfg.sell_price)

    def test_flat_tariff(self):
        s = synth_scenario(SynthConfig(days=2, tariff="flat", flat_price=0.3))
        assert np.all(s.price_buy == 0.3)

    def test_weibull_marginal_mean(self):
        z = np.random.default_rng(123).standard_normal(10000)
        speeds = weibull_from_normal(z, 2.0, 7.0)
        expected = 7.0 * special.gamma(1.5)
        assert expected == pytest.approx(6.203, abs=1e-3)
        assert speeds.mean() == pytest.approx(expected, rel=0.02)

    def test_weibull_extreme_normals_stay_finite(self):
        speeds = weibull_from_normal(np.array([-40.0, 0.0, 40.0]), 2.0, 7.0)
        assert np.all(np.isfinite(speeds))
        assert speeds[0] < speeds[1] < speeds[2]

    @pytest.mark.parametrize("kwargs", [{"days": 0}, {"dt_h": 0.7}, {"tariff": "rtp"},
                                        {"weibull_shape": 0}, {"peak_load_kw": -1}])
    def test_invalid_config(self, kwargs):
        with pytest.raises(ParameterError):
            SynthConfig(**kwargs)


class TestScenarioStats:
    def test_load_total(self):
        stats = scenario_stats(_flat_scenario(24, 10.0))
        assert stats["totals"]["load_kwh"] == pytest.approx(240.0)
        assert stats["steps"] == 24
        assert stats["series"]["load_kw"] == {"min": 10.0, "mean": 10.0, "max": 10.0}

    def test_weibull_expected_mean(self):
        stats = scenario_stats(_flat_scenario(), weibull=(2.0, 7.0))
        assert stats["series"]["wind_ms"]["expected_mean"] == pytest.approx(6.2035, abs=1e-3)

    def test_available_energy_with_fleet(self):
        from scripts.devices.params import DeviceFleet
        stats = scenario_stats(_flat_scenario(), fleet=DeviceFleet())
        assert stats["totals"]["pv_available_kwh"] == 0.0
        assert stats["totals"]["wind_available_kwh"] > 0.0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
