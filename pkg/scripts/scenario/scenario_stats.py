#!/usr/bin/env python3
"""Per-series summary of a scenario for run reports"""

from typing import Optional

import numpy as np
from scipy import special

from ..devices.params import DeviceFleet
from ..devices.physics import pv_power, wind_power
from .scenario_csv import Scenario, scenario_hash


def _series_summary(arr: np.ndarray) -> dict:
    return {
        'min': float(np.min(arr)),
        'mean': float(np.mean(arr)),
        'max': float(np.max(arr)),
    }


def scenario_stats(s: Scenario, fleet: Optional[DeviceFleet] = None,
                   weibull: Optional[tuple[float, float]] = None) -> dict:
    """
    Summarize a scenario

    Args:
        s: Scenario to summarize
        fleet: If given, also report available PV and wind energy
        weibull: (shape, scale) used for synthesis; adds the expected mean
            wind speed scale·Γ(1 + 1/shape) for comparison

    Returns:
        dict with per-series min/mean/max and energy totals (kWh, kWh/m²)
    """
    summary = {
        'name': s.meta.name,
        'origin': s.meta.origin,
        'seed': s.meta.seed,
        'steps': len(s),
        'dt_h': s.dt_h,
        'scenario_hash': scenario_hash(s),
        'series': {
            'load_kw': _series_summary(s.load_kw),
            'irradiance_kwm2': _series_summary(s.irradiance),
            'wind_ms': _series_summary(s.wind_speed),
            'price_buy': _series_summary(s.price_buy),
            'price_sell': _series_summary(s.price_sell),
        },
        'totals': {
            'load_kwh': float(np.sum(s.load_kw) * s.dt_h),
            'irradiation_kwh_m2': float(np.sum(s.irradiance) * s.dt_h),
        },
    }

    if fleet is not None:
        pv = sum(pv_power(fleet.pv, g) for g in s.irradiance)
        wind = sum(wind_power(fleet.wind, v) for v in s.wind_speed)
        summary['totals']['pv_available_kwh'] = float(pv * s.dt_h)
        summary['totals']['wind_available_kwh'] = float(wind * s.dt_h)

    if weibull is not None:
        shape, scale = weibull
        summary['series']['wind_ms']['expected_mean'] = float(scale * special.gamma(1.0 + 1.0 / shape))

    return summary
