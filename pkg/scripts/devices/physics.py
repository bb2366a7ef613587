#!/usr/bin/env python3
"""
Physical and economic device models

Pure functions of their arguments:
1. pv_power - output proportional to normalized irradiance and derating
2. wind_power - cubic law inside a cut-in / cut-out / rated envelope
3. diesel_fuel_and_cost - linear fuel curve, zero fuel when off
4. battery_apply - efficiency-split SOC update with power and SOC clipping
5. stored_energy - DoD-limited usable energy
6. converter_limit - efficiency and rated-power cap

Usage:
    from scripts.devices.physics import pv_power, battery_apply
    p = pv_power(fleet.pv, irradiance=0.75)
"""

import math
from dataclasses import dataclass

from ..utils.errors import CapacityError, InputDomainError, StateCorruptionError
from .params import (
    BatteryParams,
    ConverterParams,
    DeviceFleet,
    DieselParams,
    PvParams,
    WindParams,
)

# Tolerance for SOC bound checks on entry (floating drift from the update law)
SOC_TOL = 1e-12


def _require_input(value: float, what: str) -> None:
    """Finite and non-negative, or InputDomainError (NaN fails every comparison)"""
    if not (math.isfinite(value) and value >= 0):
        raise InputDomainError(f"{what} must be finite and >= 0, got {value}")


@dataclass(frozen=True, slots=True)
class BatteryTransition:
    """Realized battery powers and wear for one step"""
    soc_before: float
    soc_after: float
    p_ch_kw: float
    p_dis_kw: float
    throughput_kwh: float
    deg_cost: float

    @property
    def p_bat_kw(self) -> float:
        """Signed terminal power, positive = discharge"""
        return self.p_dis_kw - self.p_ch_kw


def pv_power(params: PvParams, irradiance: float) -> float:
    """
    PV output in kW: rated × (G / G0) × derating

    Temperature effects are ignored.

    Raises:
        InputDomainError: If irradiance is negative or not finite
    """
    _require_input(irradiance, "Irradiance (kW/m²)")
    return max(0.0, params.rated_kw * (irradiance / params.stc_irradiance) * params.derating)


def wind_power(params: WindParams, wind_speed: float) -> float:
    """
    Turbine output in kW

    Zero below cut-in and at/above cut-out; otherwise 0.5·ρ·A·μ·v³ (W)
    converted to kW and capped at the rated output.

    Raises:
        InputDomainError: If wind speed is negative or not finite
    """
    _require_input(wind_speed, "Wind speed (m/s)")
    if wind_speed < params.cut_in or wind_speed >= params.cut_out:
        return 0.0
    p_kw = 0.5 * params.air_density * params.swept_area * params.power_coeff * wind_speed ** 3 / 1000.0
    return min(p_kw, params.rated_kw)


def diesel_fuel_and_cost(params: DieselParams, output_kw: float, dt_h: float) -> tuple[float, float]:
    """
    Fuel burned (L) and its cost over one step

    fuel/h = slope · P_out + intercept · P_rated while running, 0 when off.

    Raises:
        InputDomainError: If output is negative or not finite
        CapacityError: If output exceeds the dispatch ceiling
    """
    _require_input(output_kw, "Diesel output (kW)")
    if output_kw > params.max_kw:
        raise CapacityError(
            f"Diesel output {output_kw:.3f} kW exceeds max_kw {params.max_kw:.3f} kW"
        )
    if output_kw == 0:
        return 0.0, 0.0

    rate_l_per_h = params.slope * output_kw + params.intercept * params.rated_kw
    fuel_l = rate_l_per_h * dt_h
    return fuel_l, fuel_l * params.fuel_price


def battery_apply(params: BatteryParams, soc: float, p_request_kw: float, dt_h: float) -> BatteryTransition:
    """
    Apply a signed power request (positive = discharge) to the battery

    The request is clipped to ±p_max_kw, then further clipped so that
        SOC' = SOC + (η_ch·P_ch − P_dis/η_dis)·dt / C
    stays inside [soc_min, soc_max].

    Args:
        params: Battery parameters
        soc: State of charge before the step (fraction)
        p_request_kw: Requested terminal power in kW
        dt_h: Step length in hours

    Returns:
        BatteryTransition with realized powers, new SOC and degradation cost

    Raises:
        StateCorruptionError: If soc is outside the configured bounds
        InputDomainError: If the request is not finite or dt_h is not positive
    """
    if not math.isfinite(p_request_kw):
        raise InputDomainError(f"Battery request must be finite, got {p_request_kw}")
    if not (math.isfinite(dt_h) and dt_h > 0):
        raise InputDomainError(f"Step length must be finite and > 0 h, got {dt_h}")
    if not (params.soc_min - SOC_TOL <= soc <= params.soc_max + SOC_TOL):
        raise StateCorruptionError(
            f"Battery SOC {soc!r} outside bounds [{params.soc_min}, {params.soc_max}]"
        )
    soc = min(max(soc, params.soc_min), params.soc_max)
    capacity = params.capacity_kwh

    request = min(max(p_request_kw, -params.p_max_kw), params.p_max_kw)
    p_ch = 0.0
    p_dis = 0.0

    if request > 0:
        headroom_kw = (soc - params.soc_min) * capacity * params.eta_dis / dt_h
        p_dis = min(request, max(headroom_kw, 0.0))
        soc_after = soc - p_dis / params.eta_dis * dt_h / capacity
    elif request < 0:
        headroom_kw = (params.soc_max - soc) * capacity / (params.eta_ch * dt_h)
        p_ch = min(-request, max(headroom_kw, 0.0))
        soc_after = soc + params.eta_ch * p_ch * dt_h / capacity
    else:
        soc_after = soc

    # Headroom arithmetic can land a few ulps past the bound
    soc_after = min(max(soc_after, params.soc_min), params.soc_max)

    throughput_kwh = (p_ch + p_dis) * dt_h
    return BatteryTransition(
        soc_before=soc,
        soc_after=soc_after,
        p_ch_kw=p_ch,
        p_dis_kw=p_dis,
        throughput_kwh=throughput_kwh,
        deg_cost=throughput_kwh * params.deg_cost_per_kwh,
    )


def stored_energy(params: BatteryParams) -> float:
    """Usable stored energy in kWh: DoD × C_bat"""
    return params.dod * params.capacity_kwh


def converter_limit(params: ConverterParams, p_in_kw: float) -> float:
    """
    Converter output in kW: min(η · P_in, rated)

    Raises:
        InputDomainError: If input power is negative or not finite
    """
    _require_input(p_in_kw, "Converter input (kW)")
    return min(params.efficiency * p_in_kw, params.rated_kw)


def check_converter_sizing(fleet: DeviceFleet, peak_load_kw: float) -> bool:
    """True if the converter at rated input can carry the peak AC load"""
    return converter_limit(fleet.converter, fleet.converter.rated_kw) >= peak_load_kw
