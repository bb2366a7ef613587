from dataclasses import asdict, dataclass, field, fields, replace
import json
import os
from pathlib import Path
from typing import Any, Optional

from ..devices.params import DeviceFleet
from ..scenario.synth_scenario import SynthConfig
from .errors import ConfigError, ParameterError

# Project root (microgrid-lab/)
PROJECT_ROOT = Path(__file__).parent.parent.parent

# Output root for run directories and the run manifest
# Priority: 1) MICROGRID_OUTPUT_ROOT environment variable, 2) <project>/runs
OUTPUT_ROOT_ENV = "MICROGRID_OUTPUT_ROOT"
DEFAULT_OUTPUT_ROOT = PROJECT_ROOT / "runs"
MANIFEST_NAME = "runs.db"
RESOLVED_CONFIG_NAME = "resolved_config.json"


def get_output_root() -> Path:
    """Read at call time so the environment variable can change between runs"""
    if OUTPUT_ROOT_ENV in os.environ:
        return Path(os.environ[OUTPUT_ROOT_ENV])
    return DEFAULT_OUTPUT_ROOT


def manifest_path() -> Path:
    return get_output_root() / MANIFEST_NAME


@dataclass(frozen=True, slots=True)
class EnvSettings:
    """
    Environment section of a run config

    outage_prob, when set, replaces fleet.grid.outage_prob.
    outage_windows holds [start, end) episode steps with the grid forced down.
    """
    horizon: Optional[int] = None
    unmet_penalty: float = 10.0
    seed: int = 0
    start_index: int = 0
    initial_soc: Optional[float] = None
    export_during_outage: bool = False
    outage_prob: Optional[float] = None
    outage_windows: tuple = ()


def parse_outage_windows(raw: Any) -> tuple:
    """
    Validate outage windows given as [[start, end], ...] with 0 <= start < end

    The upper bound (episode horizon) is checked when the environment is built.

    Raises:
        ConfigError: On anything but a list of integer pairs in increasing order
    """
    if raw is None:
        return ()
    if not isinstance(raw, (list, tuple)):
        raise ConfigError(f"environment.outage_windows must be a list, got {type(raw).__name__}")
    windows = []
    for i, window in enumerate(raw):
        if (not isinstance(window, (list, tuple)) or len(window) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in window)):
            raise ConfigError(f"environment.outage_windows[{i}] must be [start, end] integers, got {window!r}")
        start, end = window
        if not 0 <= start < end:
            raise ConfigError(f"environment.outage_windows[{i}] needs 0 <= start < end, got [{start}, {end}]")
        windows.append((start, end))
    return tuple(windows)


@dataclass(frozen=True)
class RunConfig:
    fleet: DeviceFleet = field(default_factory=DeviceFleet)
    scenario_path: Optional[Path] = None
    synth: SynthConfig = field(default_factory=SynthConfig)
    environment: EnvSettings = field(default_factory=EnvSettings)
    training: dict = field(default_factory=dict)
    output_dir: Optional[Path] = None

    def resolved_fleet(self) -> DeviceFleet:
        if self.environment.outage_prob is None:
            return self.fleet
        try:
            return replace(self.fleet, grid=replace(self.fleet.grid, outage_prob=self.environment.outage_prob))
        except ParameterError as e:
            raise ConfigError(f"environment.outage_prob: {e}") from e

    def to_dict(self) -> dict:
        """Fully resolved config; feeding it back to load_run_config reproduces the run"""
        scenario = ({'path': str(self.scenario_path)} if self.scenario_path is not None
                    else {'synth': self.synth.to_dict()})
        return {
            'fleet': self.resolved_fleet().to_dict(),
            'scenario': scenario,
            'environment': asdict(self.environment),
            'training': dict(self.training),
            'output_dir': str(self.output_dir) if self.output_dir is not None else None,
        }


_TOP_KEYS = {"fleet", "scenario", "environment", "training", "output_dir"}


def _check_keys(section: str, data: Any, allowed: set) -> dict:
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{section} must be an object, got {type(data).__name__}")
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"Unknown key(s) in {section}: {sorted(unknown)}")
    return data


def merge_overrides(base: dict, overrides: dict) -> dict:
    """Recursive dict merge; override values win, None values are ignored"""
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict):
            base_section = merged.get(key)
            merged[key] = merge_overrides(base_section if isinstance(base_section, dict) else {}, value)
        else:
            merged[key] = value
    return merged


def parse_run_config(data: dict) -> RunConfig:
    """
    Validate a config dict

    scenario.path wins when both path and synth are given; synth is still
    validated so a bad value never passes silently.

    Raises:
        ConfigError: On unknown keys at any level or invalid values
    """
    data = _check_keys("config", data, _TOP_KEYS)

    try:
        fleet = DeviceFleet.from_dict(data.get("fleet"))
    except (ParameterError, TypeError) as e:
        raise ConfigError(f"fleet: {e}") from e

    scenario = _check_keys("scenario", data.get("scenario"), {"path", "synth"})
    synth_data = _check_keys("scenario.synth", scenario.get("synth"),
                             {f.name for f in fields(SynthConfig)})
    try:
        synth = SynthConfig(**synth_data)
    except ParameterError as e:
        raise ConfigError(f"scenario.synth: {e}") from e
    path = scenario.get("path")

    env_data = _check_keys("environment", data.get("environment"), {f.name for f in fields(EnvSettings)})
    env_data = {**env_data, 'outage_windows': parse_outage_windows(env_data.get("outage_windows"))}
    environment = EnvSettings(**env_data)

    # Imported here: trainer pulls in the whole PPO stack
    from ..ppo.trainer import TrainConfig
    training = _check_keys("training", data.get("training"), {f.name for f in fields(TrainConfig)})
    try:
        TrainConfig.from_dict(training)
    except ParameterError as e:
        raise ConfigError(f"training: {e}") from e

    output_dir = data.get("output_dir")
    config = RunConfig(
        fleet=fleet,
        scenario_path=Path(path) if path is not None else None,
        synth=synth,
        environment=environment,
        training=dict(training),
        output_dir=Path(output_dir) if output_dir is not None else None,
    )
    config.resolved_fleet()
    return config


def load_run_config(path: Optional[Path] = None, overrides: Optional[dict] = None) -> RunConfig:
    """
    Load a JSON run config and apply CLI overrides (flags win over file values)

    Args:
        path: JSON file, or None for all defaults
        overrides: Nested dict in the same shape as the file

    Raises:
        FileNotFoundError: If path does not exist
        ConfigError: On malformed JSON, unknown keys or invalid values
    """
    data = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from e
    if overrides:
        data = merge_overrides(data, overrides)
    return parse_run_config(data)
