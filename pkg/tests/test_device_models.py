#!/usr/bin/env python3
"""
Device model tests

- Hand-computed values for PV, wind, diesel, battery, stored energy, converter
- Formula oracles on random parameter draws
- Parameter validation and fleet (de)serialization
- Linearity, monotonicity and round-trip efficiency; non-finite inputs rejected
"""

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest

from scripts.devices.params import (
    BatteryParams,
    ConverterParams,
    DeviceFleet,
    DieselParams,
    PvParams,
    WindParams,
)
from scripts.devices.physics import (
    battery_apply,
    check_converter_sizing,
    converter_limit,
    diesel_fuel_and_cost,
    pv_power,
    stored_energy,
    wind_power,
)
from scripts.utils.errors import (
    CapacityError,
    InputDomainError,
    ParameterError,
    StateCorruptionError,
)


@pytest.fixture(autouse=True)
def _seed_numpy_rng():
    """Ensure deterministic parameter draws for reproducible tests."""
    np.random.seed(0)


class TestPvPower:
    def test_zero_irradiance(self):
        assert pv_power(PvParams(rated_kw=100, derating=0.9), 0.0) == 0.0

    def test_identity_at_stc(self):
        assert pv_power(PvParams(rated_kw=100, derating=1.0), 1.0) == 100.0

    def test_derated_partial_irradiance(self):
        assert pv_power(PvParams(rated_kw=100, derating=0.9), 0.75) == pytest.approx(67.5, rel=1e-12)

    def test_negative_irradiance_rejected(self):
        with pytest.raises(InputDomainError):
            pv_power(PvParams(), -0.1)

    def test_oracle_random_params(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            rated, derating, g0 = rng.uniform(1, 500), rng.uniform(0.5, 1.0), rng.uniform(0.5, 1.2)
            g = rng.uniform(0, 1.2)
            expected = rated * (g / g0) * derating
            got = pv_power(PvParams(rated, derating, g0), g)
            assert got == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_linear_in_irradiance(self):
        params = PvParams(rated_kw=120, derating=0.85)
        rng = np.random.default_rng(11)
        for _ in range(1000):
            g1, g2 = rng.uniform(0, 0.6, size=2)
            a = rng.uniform(0, 2)
            assert pv_power(params, g1 + g2) == pytest.approx(pv_power(params, g1) + pv_power(params, g2),
                                                              rel=1e-12, abs=1e-12)
            assert pv_power(params, a * g1) == pytest.approx(a * pv_power(params, g1), rel=1e-12, abs=1e-12)


class TestWindPower:
    params = WindParams(air_density=1.225, swept_area=200, power_coeff=0.35,
                        rated_kw=50, cut_in=3, cut_out=25)

    def test_zero_wind(self):
        assert wind_power(self.params, 0.0) == 0.0

    def test_cubic_region(self):
        assert wind_power(self.params, 8.0) == pytest.approx(21.952, rel=1e-12)

    def test_cut_out_shutdown(self):
        assert wind_power(self.params, 30.0) == 0.0
        assert wind_power(self.params, 25.0) == 0.0

    def test_below_cut_in(self):
        assert wind_power(self.params, 2.99) == 0.0

    def test_rated_cap(self):
        assert wind_power(self.params, 20.0) == 50.0

    def test_negative_speed_rejected(self):
        with pytest.raises(InputDomainError):
            wind_power(self.params, -1.0)

    def test_betz_limit_enforced(self):
        with pytest.raises(ParameterError):
            WindParams(power_coeff=0.6)

    def test_oracle_random_params(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            p = WindParams(air_density=rng.uniform(1.0, 1.3), swept_area=rng.uniform(10, 500),
                           power_coeff=rng.uniform(0.1, 0.5), rated_kw=rng.uniform(10, 200),
                           cut_in=rng.uniform(1, 4), cut_out=rng.uniform(20, 30))
            v = rng.uniform(0, 35)
            if v < p.cut_in or v >= p.cut_out:
                expected = 0.0
            else:
                expected = min(0.5 * p.air_density * p.swept_area * p.power_coeff * v ** 3 / 1000, p.rated_kw)
            assert wind_power(p, v) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_monotone_up_to_rated(self):
        speeds = np.linspace(0.0, self.params.cut_out - 1e-6, 5001)
        power = np.array([wind_power(self.params, v) for v in speeds])
        assert np.all(np.diff(power) >= 0)
        assert power[-1] == self.params.rated_kw
        cubic = (speeds >= self.params.cut_in) & (power < self.params.rated_kw)
        assert np.all(np.diff(power[cubic]) > 0)


class TestDiesel:
    params = DieselParams(rated_kw=50, slope=0.246, intercept=0.08415, fuel_price=1.60)

    def test_off_burns_nothing(self):
        assert diesel_fuel_and_cost(self.params, 0.0, 1.0) == (0.0, 0.0)

    def test_fuel_curve(self):
        fuel, cost = diesel_fuel_and_cost(self.params, 30.0, 1.0)
        assert fuel == pytest.approx(11.5875, rel=1e-12)
        assert cost == pytest.approx(18.54, rel=1e-12)

    def test_above_ceiling_rejected(self):
        with pytest.raises(CapacityError):
            diesel_fuel_and_cost(self.params, 50.1, 1.0)

    def test_negative_output_rejected(self):
        with pytest.raises(InputDomainError):
            diesel_fuel_and_cost(self.params, -1.0, 1.0)

    def test_max_kw_defaults_to_rated(self):
        assert DieselParams(rated_kw=40).max_kw == 40

    def test_max_kw_above_rated_rejected(self):
        with pytest.raises(ParameterError):
            DieselParams(rated_kw=40, max_kw=50)

    def test_oracle_random_params(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            p = DieselParams(rated_kw=rng.uniform(10, 200), slope=rng.uniform(0.1, 0.4),
                             intercept=rng.uniform(0, 0.1), fuel_price=rng.uniform(0.5, 3))
            out, dt = rng.uniform(0.01, p.rated_kw), rng.uniform(0.25, 1.0)
            fuel = (p.slope * out + p.intercept * p.rated_kw) * dt
            got_fuel, got_cost = diesel_fuel_and_cost(p, out, dt)
            assert got_fuel == pytest.approx(fuel, rel=1e-12)
            assert got_cost == pytest.approx(fuel * p.fuel_price, rel=1e-12)

    def test_fuel_affine_in_output(self):
        rng = np.random.default_rng(12)
        for _ in range(1000):
            x1, x2 = rng.uniform(0.1, self.params.rated_kw, size=2)
            dt = rng.choice([0.25, 0.5, 1.0])
            f1, _ = diesel_fuel_and_cost(self.params, x1, dt)
            f2, _ = diesel_fuel_and_cost(self.params, x2, dt)
            assert f2 - f1 == pytest.approx(self.params.slope * (x2 - x1) * dt, rel=1e-9, abs=1e-12)
            # Intercept: fuel extrapolated to zero output while running
            assert f1 - self.params.slope * x1 * dt == pytest.approx(
                self.params.intercept * self.params.rated_kw * dt, rel=1e-9)


class TestBattery:
    params = BatteryParams(capacity_kwh=200, eta_ch=0.95, eta_dis=0.95, soc_min=0.1, soc_max=0.9)

    def test_charge(self):
        tr = battery_apply(self.params, 0.5, -20.0, 1.0)
        assert tr.soc_after == pytest.approx(0.595, rel=1e-12)
        assert tr.throughput_kwh == pytest.approx(20.0)
        assert tr.p_bat_kw == -20.0

    def test_discharge(self):
        tr = battery_apply(self.params, 0.5, 10.0, 1.0)
        assert tr.soc_after == pytest.approx(0.5 - 10 / 0.95 / 200, rel=1e-12)
        assert tr.soc_after == pytest.approx(0.44737, abs=1e-5)

    def test_full_battery_cannot_charge(self):
        tr = battery_apply(self.params, 0.9, -20.0, 1.0)
        assert tr.p_ch_kw == 0.0
        assert tr.soc_after == 0.9

    def test_empty_battery_cannot_discharge(self):
        tr = battery_apply(self.params, 0.1, 20.0, 1.0)
        assert tr.p_dis_kw == 0.0
        assert tr.soc_after == 0.1

    def test_partial_headroom(self):
        # 0.02·200 = 4 kWh above the floor → at most 3.8 kW at the terminals
        tr = battery_apply(self.params, 0.12, 50.0, 1.0)
        assert tr.p_dis_kw == pytest.approx(3.8, rel=1e-12)
        assert tr.soc_after == pytest.approx(0.1, abs=1e-12)

    def test_power_limit(self):
        tr = battery_apply(self.params, 0.5, 500.0, 1.0)
        assert tr.p_dis_kw == self.params.p_max_kw

    def test_degradation_cost(self):
        tr = battery_apply(self.params, 0.5, -20.0, 1.0)
        assert tr.deg_cost == pytest.approx(20.0 * self.params.deg_cost_per_kwh)

    def test_corrupted_soc_rejected(self):
        with pytest.raises(StateCorruptionError):
            battery_apply(self.params, 0.95, 0.0, 1.0)
        with pytest.raises(StateCorruptionError):
            battery_apply(self.params, float("nan"), 0.0, 1.0)

    def test_random_requests_stay_in_bounds(self):
        rng = np.random.default_rng(4)
        soc = 0.5
        for _ in range(20000):
            tr = battery_apply(self.params, soc, rng.uniform(-80, 80), rng.choice([0.25, 0.5, 1.0]))
            assert self.params.soc_min <= tr.soc_after <= self.params.soc_max
            assert tr.p_ch_kw == 0.0 or tr.p_dis_kw == 0.0
            soc = tr.soc_after

    def test_soc_window_beyond_dod_rejected(self):
        with pytest.raises(ParameterError):
            BatteryParams(dod=0.5, soc_min=0.1, soc_max=0.9)

    def test_round_trip_efficiency(self):
        soc, energy_in = self.params.soc_min, 0.0
        for _ in range(100):
            tr = battery_apply(self.params, soc, -20.0, 1.0)
            energy_in += tr.p_ch_kw
            soc = tr.soc_after
        assert soc == pytest.approx(self.params.soc_max, abs=1e-12)

        energy_out = 0.0
        for _ in range(100):
            tr = battery_apply(self.params, soc, 20.0, 1.0)
            energy_out += tr.p_dis_kw
            soc = tr.soc_after
        assert soc == pytest.approx(self.params.soc_min, abs=1e-12)
        assert energy_out / energy_in == pytest.approx(0.95 * 0.95, rel=1e-9)
        assert energy_out / energy_in == pytest.approx(0.9025, rel=1e-9)

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), float("-inf")])
    def test_non_finite_request_rejected(self, bad):
        with pytest.raises(InputDomainError):
            battery_apply(self.params, 0.5, bad, 1.0)

    @pytest.mark.parametrize("dt", [0.0, -1.0, float("nan"), float("inf")])
    def test_bad_step_length_rejected(self, dt):
        with pytest.raises(InputDomainError):
            battery_apply(self.params, 0.5, 10.0, dt)


class TestStoredEnergyAndConverter:
    @pytest.mark.parametrize("dod,capacity,expected", [(0.8, 200, 160), (1.0, 200, 200), (0.5, 100, 50)])
    def test_stored_energy(self, dod, capacity, expected):
        p = BatteryParams(capacity_kwh=capacity, dod=dod, soc_min=0.0, soc_max=min(dod, 1.0))
        assert stored_energy(p) == pytest.approx(expected)

    @pytest.mark.parametrize("rated,p_in,expected", [(100, 40, 38.0), (100, 0, 0.0), (30, 40, 30.0)])
    def test_converter(self, rated, p_in, expected):
        assert converter_limit(ConverterParams(0.95, rated), p_in) == pytest.approx(expected)

    def test_converter_negative_input(self):
        with pytest.raises(InputDomainError):
            converter_limit(ConverterParams(), -1.0)

    def test_converter_sizing(self):
        fleet = DeviceFleet(converter=ConverterParams(efficiency=0.95, rated_kw=100))
        assert check_converter_sizing(fleet, 95.0)
        assert not check_converter_sizing(fleet, 96.0)


class TestNonFiniteInputs:
    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), float("-inf")])
    def test_rejected_everywhere(self, bad):
        with pytest.raises(InputDomainError):
            pv_power(PvParams(), bad)
        with pytest.raises(InputDomainError):
            wind_power(WindParams(), bad)
        with pytest.raises(InputDomainError):
            diesel_fuel_and_cost(DieselParams(), bad, 1.0)
        with pytest.raises(InputDomainError):
            converter_limit(ConverterParams(), bad)


class TestDeviceFleet:
    def test_dict_roundtrip(self):
        fleet = DeviceFleet(battery=BatteryParams(capacity_kwh=100, p_max_kw=25))
        assert DeviceFleet.from_dict(fleet.to_dict()) == fleet

    def test_partial_sections_use_defaults(self):
        fleet = DeviceFleet.from_dict({"pv": {"rated_kw": 80}})
        assert fleet.pv.rated_kw == 80
        assert fleet.wind == WindParams()

    def test_unknown_section_rejected(self):
        with pytest.raises(ParameterError, match="section"):
            DeviceFleet.from_dict({"hydro": {}})

    def test_unknown_key_rejected(self):
        with pytest.raises(ParameterError, match="fleet.pv"):
            DeviceFleet.from_dict({"pv": {"tilt": 30}})


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
