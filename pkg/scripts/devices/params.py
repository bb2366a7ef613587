#!/usr/bin/env python3
"""
Parameter bundles for every distributed energy resource in the microgrid

All classes are frozen and validate their invariants on construction, so a
DeviceFleet that exists is a DeviceFleet that the physics models accept.

Default values are configuration assumptions for a ~100 kW-peak community
microgrid. They are not measured values for any specific site.
"""

from dataclasses import asdict, dataclass, field, fields
from typing import Any, Optional

from ..utils.errors import ParameterError

BETZ_LIMIT = 16.0 / 27.0


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParameterError(message)


@dataclass(frozen=True, slots=True)
class PvParams:
    """PV array: rated power, derating factor, irradiance at STC"""
    rated_kw: float = 150.0
    derating: float = 0.9
    stc_irradiance: float = 1.0     # kW/m²

    def __post_init__(self):
        _require(self.rated_kw > 0, f"PV rated_kw must be > 0, got {self.rated_kw}")
        _require(0 < self.derating <= 1, f"PV derating must be in (0, 1], got {self.derating}")
        _require(self.stc_irradiance > 0,
                 f"PV stc_irradiance must be > 0, got {self.stc_irradiance}")


@dataclass(frozen=True, slots=True)
class WindParams:
    """Wind turbine: cubic power law inside a cut-in / cut-out / rated envelope"""
    air_density: float = 1.225      # kg/m³
    swept_area: float = 200.0       # m²
    power_coeff: float = 0.35
    rated_kw: float = 50.0
    cut_in: float = 3.0             # m/s
    cut_out: float = 25.0           # m/s

    def __post_init__(self):
        for name in ("air_density", "swept_area", "power_coeff", "rated_kw", "cut_in", "cut_out"):
            _require(getattr(self, name) > 0, f"Wind {name} must be > 0, got {getattr(self, name)}")
        _require(self.power_coeff <= BETZ_LIMIT + 1e-12,
                 f"Wind power_coeff {self.power_coeff} exceeds the Betz limit ({BETZ_LIMIT:.3f})")
        _require(self.cut_in < self.cut_out,
                 f"Wind cut_in ({self.cut_in}) must be below cut_out ({self.cut_out})")


@dataclass(frozen=True, slots=True)
class DieselParams:
    """Diesel generator with a linear fuel curve"""
    rated_kw: float = 60.0
    slope: float = 0.246            # L/kWh
    intercept: float = 0.08415      # L/h per kW rated
    fuel_price: float = 1.60        # currency/L
    max_kw: Optional[float] = None  # dispatch ceiling, defaults to rated_kw

    def __post_init__(self):
        if self.max_kw is None:
            object.__setattr__(self, "max_kw", self.rated_kw)
        _require(self.rated_kw > 0, f"Diesel rated_kw must be > 0, got {self.rated_kw}")
        _require(self.slope > 0, f"Diesel slope must be > 0, got {self.slope}")
        _require(self.intercept >= 0, f"Diesel intercept must be >= 0, got {self.intercept}")
        _require(self.fuel_price >= 0, f"Diesel fuel_price must be >= 0, got {self.fuel_price}")
        _require(0 <= self.max_kw <= self.rated_kw,
                 f"Diesel max_kw ({self.max_kw}) must be within [0, rated_kw={self.rated_kw}]")


@dataclass(frozen=True, slots=True)
class BatteryParams:
    """Battery bank: capacity, usable window, power limit, efficiencies, wear cost"""
    capacity_kwh: float = 200.0
    dod: float = 0.8
    soc_min: float = 0.1
    soc_max: float = 0.9
    p_max_kw: float = 50.0
    eta_ch: float = 0.95
    eta_dis: float = 0.95
    deg_cost_per_kwh: float = 0.02

    def __post_init__(self):
        _require(self.capacity_kwh > 0, f"Battery capacity_kwh must be > 0, got {self.capacity_kwh}")
        _require(self.p_max_kw > 0, f"Battery p_max_kw must be > 0, got {self.p_max_kw}")
        _require(0 <= self.soc_min < self.soc_max <= 1,
                 f"Battery SOC bounds must satisfy 0 <= soc_min < soc_max <= 1, "
                 f"got [{self.soc_min}, {self.soc_max}]")
        _require(0 < self.dod <= 1, f"Battery dod must be in (0, 1], got {self.dod}")
        _require(0 < self.eta_ch <= 1, f"Battery eta_ch must be in (0, 1], got {self.eta_ch}")
        _require(0 < self.eta_dis <= 1, f"Battery eta_dis must be in (0, 1], got {self.eta_dis}")
        _require(self.deg_cost_per_kwh >= 0,
                 f"Battery deg_cost_per_kwh must be >= 0, got {self.deg_cost_per_kwh}")
        # Usable SOC window may not exceed the stored energy allowed by the DoD
        window_kwh = (self.soc_max - self.soc_min) * self.capacity_kwh
        _require(window_kwh <= self.dod * self.capacity_kwh + 1e-9,
                 f"Battery SOC window {window_kwh:.3f} kWh exceeds DoD-limited stored energy "
                 f"{self.dod * self.capacity_kwh:.3f} kWh")

    @property
    def soc_mid(self) -> float:
        return 0.5 * (self.soc_min + self.soc_max)


@dataclass(frozen=True, slots=True)
class ConverterParams:
    """Bidirectional power converter"""
    efficiency: float = 0.95
    rated_kw: float = 150.0

    def __post_init__(self):
        _require(0 < self.efficiency <= 1,
                 f"Converter efficiency must be in (0, 1], got {self.efficiency}")
        _require(self.rated_kw > 0, f"Converter rated_kw must be > 0, got {self.rated_kw}")


@dataclass(frozen=True, slots=True)
class GridParams:
    """Utility tie-line limits and per-step outage probability"""
    import_max_kw: float = 150.0
    export_max_kw: float = 100.0
    outage_prob: float = 0.01

    def __post_init__(self):
        _require(self.import_max_kw >= 0, f"Grid import_max_kw must be >= 0, got {self.import_max_kw}")
        _require(self.export_max_kw >= 0, f"Grid export_max_kw must be >= 0, got {self.export_max_kw}")
        _require(0 <= self.outage_prob <= 1,
                 f"Grid outage_prob must be in [0, 1], got {self.outage_prob}")


_SECTIONS = {
    "pv": PvParams,
    "wind": WindParams,
    "diesel": DieselParams,
    "battery": BatteryParams,
    "converter": ConverterParams,
    "grid": GridParams,
}


@dataclass(frozen=True, slots=True)
class DeviceFleet:
    """Every device parameter bundle of one microgrid"""
    pv: PvParams = field(default_factory=PvParams)
    wind: WindParams = field(default_factory=WindParams)
    diesel: DieselParams = field(default_factory=DieselParams)
    battery: BatteryParams = field(default_factory=BatteryParams)
    converter: ConverterParams = field(default_factory=ConverterParams)
    grid: GridParams = field(default_factory=GridParams)

    def to_dict(self) -> dict:
        return {name: asdict(getattr(self, name)) for name in _SECTIONS}

    @classmethod
    def from_dict(cls, data: Optional[dict[str, Any]]) -> "DeviceFleet":
        """
        Build a fleet from nested dicts, rejecting unknown sections and keys

        Missing sections or keys fall back to the defaults above.
        """
        data = data or {}
        unknown = set(data) - set(_SECTIONS)
        if unknown:
            raise ParameterError(f"Unknown fleet section(s): {sorted(unknown)}")

        kwargs = {}
        for name, klass in _SECTIONS.items():
            section = data.get(name) or {}
            allowed = {f.name for f in fields(klass)}
            bad = set(section) - allowed
            if bad:
                raise ParameterError(f"Unknown key(s) in fleet.{name}: {sorted(bad)}")
            kwargs[name] = klass(**section)
        return cls(**kwargs)
