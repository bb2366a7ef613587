#!/usr/bin/env python3
"""
Five dispatch KPIs from a trajectory

1. reliability_pct            served / demanded energy × 100
2. battery_cycles             (charge + discharge throughput) / (2 · C_bat)
3. self_sufficiency_pct       (1 − imported / load energy) × 100, clamped to [0, 100]
4. renewable_utilization_pct  renewable energy absorbed (to load + to battery)
                              / renewable energy available × 100
5. operational_cost           Σ (c_grid + c_deg + c_dg); the unmet-load penalty is excluded

Everything is derived from additive per-step energy totals, so KPIs of a
concatenated trajectory equal those of the full run.
"""

from dataclasses import asdict, dataclass, fields
from typing import Iterable, Optional, Union

from ..devices.params import DeviceFleet
from ..environment.microgrid_env import StepRecord, Trajectory
from ..utils.errors import ParameterError


@dataclass(frozen=True, slots=True)
class KpiSpec:
    key: str
    label: str
    unit: str
    higher_is_better: bool


KPI_SPECS = (
    KpiSpec("reliability_pct", "System Reliability", "%", True),
    KpiSpec("battery_cycles", "Battery Cycles", "cycles", False),
    KpiSpec("self_sufficiency_pct", "Self-Sufficiency Ratio", "%", True),
    KpiSpec("renewable_utilization_pct", "Renewable Utilization", "%", True),
    KpiSpec("operational_cost", "Operational Cost", "currency", False),
)
KPI_KEYS = tuple(s.key for s in KPI_SPECS)


@dataclass(frozen=True, slots=True)
class EnergyTotals:
    """Additive energy and cost sums over a run (kWh, litres, currency)"""
    steps: int = 0
    load_kwh: float = 0.0
    unmet_kwh: float = 0.0
    import_kwh: float = 0.0
    export_kwh: float = 0.0
    renewable_available_kwh: float = 0.0
    renewable_used_kwh: float = 0.0
    renewable_absorbed_kwh: float = 0.0
    curtailed_kwh: float = 0.0
    dg_kwh: float = 0.0
    fuel_l: float = 0.0
    charge_kwh: float = 0.0
    discharge_kwh: float = 0.0
    cost_grid: float = 0.0
    cost_degradation: float = 0.0
    cost_diesel: float = 0.0
    penalty: float = 0.0

    def __add__(self, other: "EnergyTotals") -> "EnergyTotals":
        return EnergyTotals(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    @property
    def served_kwh(self) -> float:
        return self.load_kwh - self.unmet_kwh


def accumulate(records: Iterable[StepRecord]) -> EnergyTotals:
    """Sum per-step energies in record order"""
    sums = {f.name: 0.0 for f in fields(EnergyTotals)}
    steps = 0
    for r in records:
        dt = r.dt_h
        ren_used = r.p_pv_used + r.p_w_used
        to_load = min(ren_used, r.p_load)
        to_battery = min(ren_used - to_load, r.p_ch)
        sums['load_kwh'] += r.p_load * dt
        sums['unmet_kwh'] += r.unmet_kw * dt
        sums['import_kwh'] += r.p_grid_import * dt
        sums['export_kwh'] += r.p_grid_export * dt
        sums['renewable_available_kwh'] += (r.p_pv_avail + r.p_w_avail) * dt
        sums['renewable_used_kwh'] += ren_used * dt
        sums['renewable_absorbed_kwh'] += (to_load + to_battery) * dt
        sums['curtailed_kwh'] += r.curtailed_kw * dt
        sums['dg_kwh'] += r.p_dg * dt
        sums['fuel_l'] += r.fuel_l
        sums['charge_kwh'] += r.p_ch * dt
        sums['discharge_kwh'] += r.p_dis * dt
        sums['cost_grid'] += r.c_grid
        sums['cost_degradation'] += r.c_deg
        sums['cost_diesel'] += r.c_dg
        sums['penalty'] += r.penalty
        steps += 1
    sums['steps'] = steps
    return EnergyTotals(**sums)


@dataclass(frozen=True, slots=True)
class KpiReport:
    strategy: str
    reliability_pct: float
    battery_cycles: float
    self_sufficiency_pct: float
    renewable_utilization_pct: float
    operational_cost: float
    totals: EnergyTotals
    battery_capacity_kwh: float
    scenario_hash: str = ""
    seed: int = 0

    def kpis(self) -> dict:
        return {k: getattr(self, k) for k in KPI_KEYS}

    def to_dict(self) -> dict:
        """
        JSON schema:
            strategy, scenario_hash, seed, battery_capacity_kwh
            kpis: {reliability_pct, battery_cycles, self_sufficiency_pct,
                   renewable_utilization_pct, operational_cost}
            totals: EnergyTotals fields plus served_kwh
        """
        return {
            'strategy': self.strategy,
            'scenario_hash': self.scenario_hash,
            'seed': self.seed,
            'battery_capacity_kwh': self.battery_capacity_kwh,
            'kpis': self.kpis(),
            'totals': {**asdict(self.totals), 'served_kwh': self.totals.served_kwh},
        }


def kpis_from_totals(totals: EnergyTotals, capacity_kwh: float, strategy: str = "custom",
                     scenario_hash: str = "", seed: int = 0) -> KpiReport:
    if capacity_kwh <= 0:
        raise ParameterError(f"Battery capacity must be > 0, got {capacity_kwh}")

    if totals.load_kwh > 0:
        reliability = totals.served_kwh / totals.load_kwh * 100.0
        self_sufficiency = (1.0 - totals.import_kwh / totals.load_kwh) * 100.0
    else:
        reliability = self_sufficiency = 100.0
    if totals.renewable_available_kwh > 0:
        utilization = totals.renewable_absorbed_kwh / totals.renewable_available_kwh * 100.0
    else:
        utilization = 100.0

    return KpiReport(
        strategy=strategy,
        reliability_pct=min(max(reliability, 0.0), 100.0),
        battery_cycles=(totals.charge_kwh + totals.discharge_kwh) / (2.0 * capacity_kwh),
        self_sufficiency_pct=min(max(self_sufficiency, 0.0), 100.0),
        renewable_utilization_pct=min(max(utilization, 0.0), 100.0),
        operational_cost=totals.cost_grid + totals.cost_degradation + totals.cost_diesel,
        totals=totals,
        battery_capacity_kwh=capacity_kwh,
        scenario_hash=scenario_hash,
        seed=seed,
    )


def compute_kpis(trajectory: Union[Trajectory, list], fleet: Optional[DeviceFleet] = None,
                 strategy: Optional[str] = None) -> KpiReport:
    """
    KPI report for a trajectory (or a plain list of StepRecords)

    Args:
        trajectory: Records to evaluate
        fleet: Source of the battery capacity; falls back to the trajectory meta
        strategy: Label override

    Raises:
        ParameterError: If the trajectory is empty or no capacity is known
    """
    if len(trajectory) == 0:
        raise ParameterError("Cannot compute KPIs of an empty trajectory")

    if isinstance(trajectory, Trajectory):
        records = trajectory.records
        meta_capacity = trajectory.meta.get('battery_capacity_kwh')
        label = strategy or trajectory.strategy
        s_hash, seed = trajectory.scenario_hash, trajectory.seed
    else:
        records = trajectory
        meta_capacity = None
        label = strategy or "custom"
        s_hash, seed = "", 0

    if fleet is not None:
        capacity = fleet.battery.capacity_kwh
    elif meta_capacity is not None:
        capacity = float(meta_capacity)
    else:
        raise ParameterError("Battery capacity unknown: pass fleet or a trajectory with meta")

    return kpis_from_totals(accumulate(records), capacity, label, s_hash, seed)
