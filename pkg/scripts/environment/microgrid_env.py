#!/usr/bin/env python3
"""
Finite-horizon microgrid dispatch environment

One step takes a two-dimensional action (signed battery power, diesel power),
clips it to device limits, settles the power balance against the grid tie,
and prices the result:

    P_net = P_pv + P_w + P_bat + P_dg − P_load
    P_net > 0  → export (up to limit, zero while islanded), curtail the rest
    P_net < 0  → import (up to limit, zero while islanded), leave the rest unmet

Curtailment falls on renewables first, then backs off diesel and battery
discharge if the surplus came from them. A deficit that imports cannot cover
first reduces battery charging, then becomes unmet load. With these two rules
supply equals demand at every step, including during outages.

Grid outages are Bernoulli draws from a generator seeded at reset(), one draw
per step, so two environments with the same seed see the same outages.

Usage:
    env = MicrogridEnv(EnvConfig(fleet=DeviceFleet(), scenario=scenario, seed=1))
    state = env.reset()
    while not env.done:
        state, record = env.step(MgAction(p_bat_kw=0.0, p_dg_kw=0.0))
"""

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from ..devices.params import DeviceFleet
from ..devices.physics import battery_apply, diesel_fuel_and_cost, pv_power, wind_power
from ..scenario.scenario_csv import Scenario, scenario_hash
from ..utils.errors import EpisodeFinishedError, InputDomainError, ParameterError
from ..utils.log import get_logger

logger = get_logger("Env")

DEFAULT_UNMET_PENALTY = 10.0    # currency/kWh
DG_OFF_KW = 1e-10


@dataclass(frozen=True, slots=True)
class MgState:
    """Observation s_t = [SOC, hour, P_pv, P_w, P_load, grid flag] plus step index"""
    soc: float
    hour: int
    p_pv_avail: float
    p_w_avail: float
    p_load: float
    grid_up: bool
    t: int


@dataclass(frozen=True, slots=True)
class MgAction:
    """Requested signed battery power (positive = discharge) and diesel power"""
    p_bat_kw: float = 0.0
    p_dg_kw: float = 0.0


@dataclass(frozen=True, slots=True)
class StepRecord:
    """Audit trail of one dispatch step (powers in kW, costs in currency)"""
    t: int
    hour: int
    grid_up: bool
    p_load: float
    p_pv_avail: float
    p_w_avail: float
    p_pv_used: float
    p_w_used: float
    p_bat: float
    p_ch: float
    p_dis: float
    p_dg: float
    p_grid_import: float
    p_grid_export: float
    curtailed_kw: float
    unmet_kw: float
    soc_before: float
    soc_after: float
    fuel_l: float
    price_buy: float
    price_sell: float
    c_grid: float
    c_deg: float
    c_dg: float
    penalty: float
    reward: float
    dt_h: float

    @property
    def operational_cost(self) -> float:
        return self.c_grid + self.c_deg + self.c_dg

    @property
    def balance_residual(self) -> float:
        """supply − demand in kW; zero up to rounding"""
        supply = (self.p_pv_used + self.p_w_used + self.p_dis + self.p_dg
                  + self.p_grid_import + self.unmet_kw)
        demand = self.p_load + self.p_ch + self.p_grid_export
        return supply - demand


@dataclass(frozen=True)
class EnvConfig:
    """
    Environment settings

    Attributes:
        fleet: Device parameters
        scenario: Time series (the episode reads rows start_index .. start_index + horizon)
        horizon: Episode length in steps (default: rest of the scenario)
        unmet_penalty: Reward shaping per kWh of unserved load
        seed: Seed of the outage stream
        start_index: First scenario row of the episode
        initial_soc: Starting SOC (default: midpoint of the SOC bounds)
        export_during_outage: Allow exports while islanded
        grid_schedule: Per-step grid availability overriding the Bernoulli draws
        outage_windows: (start, end) episode-step ranges, end exclusive, during
            which the grid is forced down on top of the draws or schedule
    """
    fleet: DeviceFleet
    scenario: Scenario
    horizon: Optional[int] = None
    unmet_penalty: float = DEFAULT_UNMET_PENALTY
    seed: int = 0
    start_index: int = 0
    initial_soc: Optional[float] = None
    export_during_outage: bool = False
    grid_schedule: Optional[Sequence[bool]] = None
    outage_windows: tuple = ()

    def __post_init__(self):
        if self.horizon is None:
            object.__setattr__(self, "horizon", len(self.scenario) - self.start_index)
        if self.start_index < 0:
            raise ParameterError(f"start_index must be >= 0, got {self.start_index}")
        if self.horizon < 1 or self.start_index + self.horizon > len(self.scenario):
            raise ParameterError(
                f"Horizon {self.horizon} from row {self.start_index} exceeds scenario "
                f"length {len(self.scenario)}"
            )
        if self.unmet_penalty < 0:
            raise ParameterError(f"unmet_penalty must be >= 0, got {self.unmet_penalty}")
        bat = self.fleet.battery
        if self.initial_soc is not None and not (bat.soc_min <= self.initial_soc <= bat.soc_max):
            raise ParameterError(
                f"initial_soc {self.initial_soc} outside [{bat.soc_min}, {bat.soc_max}]"
            )
        if self.grid_schedule is not None and len(self.grid_schedule) < self.horizon:
            raise ParameterError(
                f"grid_schedule has {len(self.grid_schedule)} entries, horizon needs {self.horizon}"
            )
        windows = tuple((int(s), int(e)) for s, e in self.outage_windows)
        for start, end in windows:
            if not 0 <= start < end <= self.horizon:
                raise ParameterError(
                    f"Outage window [{start}, {end}) must satisfy 0 <= start < end <= horizon {self.horizon}"
                )
        object.__setattr__(self, "outage_windows", windows)

    @property
    def soc0(self) -> float:
        return self.fleet.battery.soc_mid if self.initial_soc is None else self.initial_soc

    def episode_scenario(self) -> Scenario:
        return self.scenario.window(self.start_index, self.horizon)


@dataclass
class Trajectory:
    """StepRecords of one episode plus the provenance needed to compare runs"""
    records: list[StepRecord]
    scenario_hash: str
    strategy: str = "custom"
    seed: int = 0
    dt_h: float = 1.0
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[StepRecord]:
        return iter(self.records)

    def __getitem__(self, index):
        return self.records[index]

    @property
    def total_reward(self) -> float:
        return float(sum(r.reward for r in self.records))

    @property
    def total_cost(self) -> float:
        return float(sum(r.operational_cost for r in self.records))


def sample_outage(rng: np.random.Generator, p_out: float = 0.01) -> bool:
    """One Bernoulli draw: returns grid_up (False with probability p_out)"""
    return bool(rng.random() >= p_out)


def grid_cost(p_import_kw: float, p_export_kw: float, price_buy: float,
              price_sell: float, dt_h: float) -> float:
    """
    Grid interaction cost of one step; imports cost, exports earn

    P_net here is the surplus routed to the grid (export − import).
    """
    p_net = p_export_kw - p_import_kw
    if p_net > 0:
        return -p_net * dt_h * price_sell
    if p_net < 0:
        return -p_net * dt_h * price_buy
    return 0.0


class MicrogridEnv:
    """Mutable single-episode environment; one instance per worker"""

    def __init__(self, cfg: EnvConfig):
        self.cfg = cfg
        self.fleet = cfg.fleet
        self.scenario = cfg.scenario
        self.dt_h = cfg.scenario.dt_h
        self._rng: Optional[np.random.Generator] = None
        self._state: Optional[MgState] = None

    @property
    def horizon(self) -> int:
        return self.cfg.horizon

    @property
    def state(self) -> MgState:
        if self._state is None:
            raise EpisodeFinishedError("Environment not reset")
        return self._state

    @property
    def done(self) -> bool:
        return self._state is not None and self._state.t >= self.horizon

    def _grid_flag(self, t: int) -> bool:
        # Draw every step so the outage stream does not depend on the schedule
        up = sample_outage(self._rng, self.fleet.grid.outage_prob)
        if any(start <= t < end for start, end in self.cfg.outage_windows):
            return False
        if self.cfg.grid_schedule is not None and t < self.horizon:
            return bool(self.cfg.grid_schedule[t])
        return up

    def _observe(self, t: int, soc: float, grid_up: bool) -> MgState:
        row = min(self.cfg.start_index + t, len(self.scenario) - 1)
        return MgState(
            soc=soc,
            hour=self.scenario.hour_of_day(row),
            p_pv_avail=pv_power(self.fleet.pv, float(self.scenario.irradiance[row])),
            p_w_avail=wind_power(self.fleet.wind, float(self.scenario.wind_speed[row])),
            p_load=float(self.scenario.load_kw[row]),
            grid_up=grid_up,
            t=t,
        )

    def reset(self) -> MgState:
        """Start a new episode at t = 0 with a freshly seeded outage stream"""
        self._rng = np.random.default_rng(self.cfg.seed)
        self._state = self._observe(0, self.cfg.soc0, self._grid_flag(0))
        return self._state

    def step(self, action: MgAction) -> tuple[MgState, StepRecord]:
        """
        Advance one step

        Raises:
            EpisodeFinishedError: If the horizon was already reached
            InputDomainError: If the action is not finite
        """
        state = self.state
        if state.t >= self.horizon:
            raise EpisodeFinishedError(f"Episode finished at t={state.t} (horizon {self.horizon})")
        if not (np.isfinite(action.p_bat_kw) and np.isfinite(action.p_dg_kw)):
            raise InputDomainError(f"Action must be finite, got {action}")

        fleet = self.fleet
        bat = fleet.battery
        dt = self.dt_h
        row = self.cfg.start_index + state.t
        price_buy = float(self.scenario.price_buy[row])
        price_sell = float(self.scenario.price_sell[row])

        # 1. Clip actions to device limits
        p_dg = min(max(action.p_dg_kw, 0.0), fleet.diesel.max_kw)
        p_bat_req = min(max(action.p_bat_kw, -bat.p_max_kw), bat.p_max_kw)
        trans = battery_apply(bat, state.soc, p_bat_req, dt)

        # 2. Settle against the grid tie
        renewables = state.p_pv_avail + state.p_w_avail
        import_cap = fleet.grid.import_max_kw if state.grid_up else 0.0
        export_allowed = state.grid_up or self.cfg.export_during_outage
        export_cap = fleet.grid.export_max_kw if export_allowed else 0.0

        p_net = renewables + trans.p_dis_kw - trans.p_ch_kw + p_dg - state.p_load
        p_import = p_export = curtailed = unmet = 0.0

        if p_net > 0:
            p_export = min(p_net, export_cap)
            excess = p_net - p_export
            if excess > 0:
                curtailed = min(excess, renewables)
                excess -= curtailed
            if excess > 0:
                backoff = min(excess, p_dg)
                p_dg -= backoff
                excess -= backoff
                if p_dg < DG_OFF_KW:
                    # Rounding residue would otherwise bill an idle generator
                    p_dg = 0.0
            if excess > 0:
                trans = battery_apply(bat, state.soc, max(trans.p_dis_kw - excess, 0.0), dt)
        elif p_net < 0:
            deficit = -p_net
            p_import = min(deficit, import_cap)
            shortfall = deficit - p_import
            if shortfall > 0 and trans.p_ch_kw > 0:
                if trans.p_ch_kw >= shortfall:
                    reduced_ch = trans.p_ch_kw - shortfall
                    shortfall = 0.0
                else:
                    reduced_ch = 0.0
                    shortfall -= trans.p_ch_kw
                trans = battery_apply(bat, state.soc, -reduced_ch, dt)
            unmet = max(shortfall, 0.0)

        if renewables > 0:
            pv_curtailed = curtailed * state.p_pv_avail / renewables
        else:
            pv_curtailed = 0.0
        p_pv_used = max(state.p_pv_avail - pv_curtailed, 0.0)
        p_w_used = max(state.p_w_avail - (curtailed - pv_curtailed), 0.0)

        # 3. Costs and reward
        c_grid = grid_cost(p_import, p_export, price_buy, price_sell, dt)
        fuel_l, c_dg = diesel_fuel_and_cost(fleet.diesel, p_dg, dt)
        c_deg = trans.deg_cost
        penalty = self.cfg.unmet_penalty * unmet * dt
        reward = -(c_grid + c_deg + c_dg) - penalty

        record = StepRecord(
            t=state.t,
            hour=state.hour,
            grid_up=state.grid_up,
            p_load=state.p_load,
            p_pv_avail=state.p_pv_avail,
            p_w_avail=state.p_w_avail,
            p_pv_used=p_pv_used,
            p_w_used=p_w_used,
            p_bat=trans.p_bat_kw,
            p_ch=trans.p_ch_kw,
            p_dis=trans.p_dis_kw,
            p_dg=p_dg,
            p_grid_import=p_import,
            p_grid_export=p_export,
            curtailed_kw=curtailed,
            unmet_kw=unmet,
            soc_before=trans.soc_before,
            soc_after=trans.soc_after,
            fuel_l=fuel_l,
            price_buy=price_buy,
            price_sell=price_sell,
            c_grid=c_grid,
            c_deg=c_deg,
            c_dg=c_dg,
            penalty=penalty,
            reward=reward,
            dt_h=dt,
        )

        next_t = state.t + 1
        self._state = self._observe(next_t, trans.soc_after, self._grid_flag(next_t))
        return self._state, record


Controller = Callable[[MgState], MgAction]


def run_episode(cfg: EnvConfig, controller: Controller, strategy: Optional[str] = None) -> Trajectory:
    """
    Roll a controller over the full horizon

    Args:
        cfg: Environment configuration
        controller: Policy mapping MgState -> MgAction
        strategy: Label stored in the trajectory (default: controller.name)

    Returns:
        Trajectory with exactly cfg.horizon records
    """
    env = MicrogridEnv(cfg)
    state = env.reset()
    records = []
    while not env.done:
        state, record = env.step(controller(state))
        records.append(record)

    label = strategy or getattr(controller, "name", "custom")
    trajectory = Trajectory(
        records=records,
        scenario_hash=scenario_hash(cfg.episode_scenario()),
        strategy=label,
        seed=cfg.seed,
        dt_h=env.dt_h,
        meta={'battery_capacity_kwh': cfg.fleet.battery.capacity_kwh,
              'start_index': cfg.start_index,
              'horizon': cfg.horizon},
    )
    logger.debug(f"{label}: {len(records)} steps, cost {trajectory.total_cost:.2f}, "
                 f"reward {trajectory.total_reward:.2f}")
    return trajectory
