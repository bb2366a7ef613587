#!/usr/bin/env python3
"""
Synthetic year-long community microgrid scenarios

Stand-in for site measurements. Profiles:
1. Solar - clear-sky half-sine between sunrise and sunset × clearness noise
2. Wind - Weibull marginals with hour-to-hour AR(1) correlation (Gaussian copula)
3. Load - double-peak (morning / evening) residential shape × lognormal noise
4. Tariff - flat or two-band time-of-use buy price, constant sell-back price

Seasonality follows the southern hemisphere: irradiance peaks in January,
load peaks mid-year. Everything is drawn from one numpy Generator seeded
with cfg.seed, in a fixed order, so a (seed, cfg) pair is bit-reproducible.

Usage:
    from scripts.scenario.synth_scenario import SynthConfig, synth_scenario
    scenario = synth_scenario(SynthConfig(days=365, seed=7))
"""

from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np
from scipy import stats

from ..utils.errors import ParameterError
from .scenario_csv import Scenario, ScenarioMeta

WIND_AR_COEFF = 0.8
LOAD_NOISE_SIGMA = 0.10
HOURS_PER_YEAR = 8760.0


@dataclass(frozen=True, slots=True)
class SynthConfig:
    days: int = 365
    dt_h: float = 1.0
    peak_load_kw: float = 100.0
    solar_clearness_mean: float = 0.7
    solar_clearness_std: float = 0.2
    sunrise_h: float = 6.0
    sunset_h: float = 18.0
    weibull_shape: float = 2.0
    weibull_scale: float = 7.0
    tariff: Literal["flat", "tou"] = "tou"
    flat_price: float = 0.28
    peak_price: float = 0.40
    offpeak_price: float = 0.18
    peak_start_h: int = 16
    peak_end_h: int = 21
    sell_price: float = 0.08
    seasonal_amplitude: float = 0.15
    seed: int = 0

    def __post_init__(self):
        if int(self.days) != self.days or self.days < 1:
            raise ParameterError(f"days must be an integer >= 1, got {self.days}")
        if self.dt_h <= 0 or (24.0 / self.dt_h) != int(24.0 / self.dt_h):
            raise ParameterError(f"dt_h must divide 24 h evenly, got {self.dt_h}")
        if self.peak_load_kw < 0:
            raise ParameterError(f"peak_load_kw must be >= 0, got {self.peak_load_kw}")
        if self.weibull_shape <= 0 or self.weibull_scale <= 0:
            raise ParameterError(
                f"Weibull shape and scale must be > 0, got ({self.weibull_shape}, {self.weibull_scale})"
            )
        if not (0 <= self.solar_clearness_mean <= 1) or self.solar_clearness_std < 0:
            raise ParameterError("solar clearness mean must be in [0, 1] and std >= 0")
        if not (0 <= self.sunrise_h < self.sunset_h <= 24):
            raise ParameterError(f"Need 0 <= sunrise < sunset <= 24, got {self.sunrise_h}, {self.sunset_h}")
        if self.tariff not in ("flat", "tou"):
            raise ParameterError(f"tariff must be 'flat' or 'tou', got {self.tariff!r}")
        if min(self.flat_price, self.peak_price, self.offpeak_price, self.sell_price) < 0:
            raise ParameterError("prices must be >= 0")
        if not (0 <= self.seasonal_amplitude < 1):
            raise ParameterError(f"seasonal_amplitude must be in [0, 1), got {self.seasonal_amplitude}")

    @property
    def n_steps(self) -> int:
        return int(round(self.days * 24 / self.dt_h))

    def to_dict(self) -> dict:
        return asdict(self)


def weibull_from_normal(z: np.ndarray, shape: float, scale: float) -> np.ndarray:
    """Map standard-normal values to Weibull(shape, scale) through the normal CDF"""
    # Work on the upper tail so large z never rounds to u = 1 (infinite speed)
    q = np.clip(stats.norm.sf(z), np.finfo(float).tiny, 1.0)
    return stats.weibull_min.isf(q, shape, scale=scale)


def _ar1_normal(rng: np.random.Generator, n: int, coeff: float) -> np.ndarray:
    """Stationary AR(1) with unit variance"""
    eps = rng.standard_normal(n)
    z = np.empty(n)
    z[0] = eps[0]
    innov = np.sqrt(1.0 - coeff ** 2)
    for t in range(1, n):
        z[t] = coeff * z[t - 1] + innov * eps[t]
    return z


def _seasonal(hours: np.ndarray, amplitude: float, peak_hour_of_year: float) -> np.ndarray:
    return 1.0 + amplitude * np.cos(2 * np.pi * (hours - peak_hour_of_year) / HOURS_PER_YEAR)


def clear_sky_shape(hour_of_day: np.ndarray, sunrise_h: float, sunset_h: float) -> np.ndarray:
    """Half-sine between sunrise and sunset, zero at night"""
    daylight = (hour_of_day > sunrise_h) & (hour_of_day < sunset_h)
    phase = (hour_of_day - sunrise_h) / (sunset_h - sunrise_h)
    return np.where(daylight, np.sin(np.pi * np.clip(phase, 0.0, 1.0)), 0.0)


def load_shape(hour_of_day: np.ndarray) -> np.ndarray:
    """Residential double peak (≈08:00 and ≈19:00), normalized to max 1"""
    grid = np.arange(0, 24, 0.25)
    ref = _raw_load_shape(grid).max()
    return _raw_load_shape(hour_of_day) / ref


def _raw_load_shape(h: np.ndarray) -> np.ndarray:
    morning = 0.45 * np.exp(-0.5 * ((h - 8.0) / 1.5) ** 2)
    evening = 0.65 * np.exp(-0.5 * ((h - 19.0) / 2.0) ** 2)
    return 0.35 + morning + evening


def tariff_prices(cfg: SynthConfig, hour_of_day: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Buy and sell price series for the configured tariff"""
    n = len(hour_of_day)
    if cfg.tariff == "flat":
        buy = np.full(n, cfg.flat_price)
    else:
        in_peak = (hour_of_day >= cfg.peak_start_h) & (hour_of_day < cfg.peak_end_h)
        buy = np.where(in_peak, cfg.peak_price, cfg.offpeak_price)
    return buy, np.full(n, cfg.sell_price)


def synth_scenario(cfg: SynthConfig, name: str = "synthetic") -> Scenario:
    """
    Generate a deterministic synthetic scenario

    Args:
        cfg: Synthesis configuration (seed included)
        name: Scenario name recorded in meta

    Returns:
        Scenario with origin 'synthetic'
    """
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_steps
    elapsed_h = np.arange(n) * cfg.dt_h
    hod = np.mod(elapsed_h, 24.0)

    # 1. Solar: summer peak mid-January
    clear = clear_sky_shape(hod, cfg.sunrise_h, cfg.sunset_h)
    clear = clear * _seasonal(elapsed_h, cfg.seasonal_amplitude, peak_hour_of_year=15 * 24.0)
    clearness = np.clip(rng.normal(cfg.solar_clearness_mean, cfg.solar_clearness_std, n), 0.0, 1.0)
    irradiance = np.clip(clear * clearness, 0.0, 1.0)

    # 2. Wind: correlated normals mapped to exact Weibull marginals
    z = _ar1_normal(rng, n, WIND_AR_COEFF)
    wind = weibull_from_normal(z, cfg.weibull_shape, cfg.weibull_scale)

    # 3. Load: winter peak mid-July
    shape = load_shape(hod) * _seasonal(elapsed_h, cfg.seasonal_amplitude, peak_hour_of_year=196 * 24.0)
    shape = shape / (1.0 + cfg.seasonal_amplitude)
    noise = rng.lognormal(mean=0.0, sigma=LOAD_NOISE_SIGMA, size=n)
    load = cfg.peak_load_kw * shape * noise

    # 4. Tariff
    buy, sell = tariff_prices(cfg, hod)

    return Scenario(
        load_kw=load,
        irradiance=irradiance,
        wind_speed=wind,
        price_buy=buy,
        price_sell=sell,
        dt_h=cfg.dt_h,
        meta=ScenarioMeta(name=name, origin="synthetic", seed=cfg.seed),
    )
