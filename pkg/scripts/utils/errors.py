#!/usr/bin/env python3
"""Exception hierarchy shared by every microgrid module"""

from pathlib import Path
from typing import Optional


class MicrogridError(Exception):
    """Base class for all errors raised by the microgrid lab"""


class InputDomainError(MicrogridError, ValueError):
    """Physical input outside its domain (negative irradiance, NaN action, ...)"""


class CapacityError(MicrogridError, ValueError):
    """Requested device output above its dispatch ceiling"""


class ParameterError(MicrogridError, ValueError):
    """Parameter bundle violates one of its invariants"""


class StateCorruptionError(MicrogridError, RuntimeError):
    """Internal state found outside its legal range"""


class ScenarioValidationError(MicrogridError, ValueError):
    """Scenario file or series failed schema or value checks"""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.row = row
        self.column = column


class EpisodeFinishedError(MicrogridError, RuntimeError):
    """step() called after the horizon was reached"""


class TrainingDivergenceError(MicrogridError, RuntimeError):
    """Non-finite network output or loss during PPO training"""

    def __init__(self, message: str, diagnostics: Optional[dict] = None,
                 last_checkpoint: Optional[Path] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
        self.last_checkpoint = last_checkpoint


class UndefinedScoreError(MicrogridError, ValueError):
    """Normalized KPI score has no meaningful denominator"""


class ScenarioMismatchError(MicrogridError, ValueError):
    """Two trajectories were produced on different scenarios"""


class ConfigError(MicrogridError, ValueError):
    """Run configuration has unknown keys or invalid values"""


class IntegrityError(MicrogridError, RuntimeError):
    """Artifact content does not match its recorded hash"""
