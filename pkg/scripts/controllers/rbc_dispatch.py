#!/usr/bin/env python3
"""
Rule-based dispatch

Static priority rules, three operating cases:
1. Grid up, renewable surplus  - charge the battery (up to its limit); the
   environment exports what is left
2. Grid up, renewable deficit  - discharge the battery if above its SOC floor
   (up to its limit); the environment imports what is left
3. Grid down                   - if load exceeds renewables plus full battery
   discharge, run the diesel for the remainder (up to its ceiling);
   otherwise the battery alone follows the net load

The diesel never runs while the grid is up. Shortfall beyond the islanded
capacity shows up as unmet load in the environment.

Usage:
    from scripts.controllers.rbc_dispatch import rbc_episode
    trajectory = rbc_episode(env_cfg)
"""

from dataclasses import dataclass

from ..devices.params import DeviceFleet
from ..environment.microgrid_env import EnvConfig, MgAction, MgState, Trajectory, run_episode
from .base_controller import DispatchController


@dataclass(frozen=True, slots=True)
class RbcParams:
    """Fleet limits the rules branch on"""
    p_max_ch: float
    p_max_dis: float
    grid_import_max: float
    p_dg_max: float
    soc_floor: float

    @classmethod
    def from_fleet(cls, fleet: DeviceFleet) -> "RbcParams":
        return cls(
            p_max_ch=fleet.battery.p_max_kw,
            p_max_dis=fleet.battery.p_max_kw,
            grid_import_max=fleet.grid.import_max_kw,
            p_dg_max=fleet.diesel.max_kw,
            soc_floor=fleet.battery.soc_min,
        )


def rbc_action(state: MgState, params: RbcParams) -> MgAction:
    """Rule-based action for one state (pure function)"""
    renewables = state.p_pv_avail + state.p_w_avail

    if state.grid_up:
        if state.p_load < renewables:
            surplus = renewables - state.p_load
            return MgAction(p_bat_kw=-min(surplus, params.p_max_ch), p_dg_kw=0.0)

        deficit = state.p_load - renewables
        if state.soc > params.soc_floor:
            return MgAction(p_bat_kw=min(deficit, params.p_max_dis), p_dg_kw=0.0)
        # Battery at floor: the whole deficit is imported
        return MgAction(p_bat_kw=0.0, p_dg_kw=0.0)

    # Islanded
    if state.p_load > renewables + params.p_max_dis:
        remaining = state.p_load - renewables - params.p_max_dis
        return MgAction(p_bat_kw=params.p_max_dis, p_dg_kw=min(remaining, params.p_dg_max))

    net_load = state.p_load - renewables
    return MgAction(p_bat_kw=max(min(net_load, params.p_max_dis), -params.p_max_ch), p_dg_kw=0.0)


class RbcController(DispatchController):
    """DispatchController wrapper around rbc_action"""

    def __init__(self, params: RbcParams):
        self.params = params

    @property
    def name(self) -> str:
        return "rbc"

    def __call__(self, state: MgState) -> MgAction:
        return rbc_action(state, self.params)


def rbc_episode(cfg: EnvConfig) -> Trajectory:
    """Run the rule-based controller over the configured horizon"""
    controller = RbcController(RbcParams.from_fleet(cfg.fleet))
    return run_episode(cfg, controller, strategy=controller.name)
