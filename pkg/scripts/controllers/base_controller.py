#!/usr/bin/env python3
from abc import ABC, abstractmethod

from ..devices.params import DeviceFleet
from ..environment.microgrid_env import MgAction, MgState


class DispatchController(ABC):
    """Abstract base class for dispatch strategies"""

    @abstractmethod
    def __call__(self, state: MgState) -> MgAction:
        """
        Choose the dispatch for one step

        Args:
            state: Current observation

        Returns:
            Requested action; the environment clips it to device limits
        """
        pass

    @property
    @abstractmethod
    def name(self) -> str:
        """Return strategy name used in artifacts and reports"""
        pass


class IdleController(DispatchController):
    """Battery and diesel idle; the grid and curtailment absorb everything"""

    @property
    def name(self) -> str:
        return "idle"

    def __call__(self, state: MgState) -> MgAction:
        return MgAction(0.0, 0.0)


def get_controller(name: str, fleet: DeviceFleet, **kwargs) -> DispatchController:
    """
    Factory function to get a dispatch controller by name

    Args:
        name: 'rbc', 'idle', 'ppo' (ppo needs policy=PolicyNet)
        fleet: Device parameters the controller dispatches against

    Returns:
        DispatchController instance

    Raises:
        ValueError: If name is unknown
    """
    name = name.lower()

    if name == "rbc":
        from .rbc_dispatch import RbcController, RbcParams
        return RbcController(RbcParams.from_fleet(fleet))

    elif name == "idle":
        return IdleController()

    elif name == "ppo":
        from ..ppo.trainer import PolicyController
        return PolicyController(kwargs["policy"], fleet)

    else:
        raise ValueError(
            f"Unknown controller: {name}. "
            f"Supported: rbc, idle, ppo"
        )
