#!/usr/bin/env python3
"""
Run configuration tests

- File + override merge (flags win, unset flags ignored)
- Unknown keys and invalid values are rejected with ConfigError
- Resolved config round-trips
- Outage windows are integer [start, end) pairs
"""

import json
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest

from scripts.utils.config import (
    DEFAULT_OUTPUT_ROOT,
    OUTPUT_ROOT_ENV,
    get_output_root,
    load_run_config,
    manifest_path,
    merge_overrides,
    parse_run_config,
)
from scripts.utils.errors import ConfigError


@pytest.fixture(autouse=True)
def _seed_numpy_rng():
    """Ensure deterministic draws for reproducible tests."""
    np.random.seed(0)


def _write(tmp_path: Path, data: dict) -> Path:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestMerge:
    def test_override_wins(self):
        assert merge_overrides({"a": 1, "b": {"c": 2}}, {"b": {"c": 3}}) == {"a": 1, "b": {"c": 3}}

    def test_none_ignored(self):
        assert merge_overrides({"a": 1}, {"a": None, "b": None}) == {"a": 1}

    def test_missing_base_section(self):
        assert merge_overrides({}, {"s": {"x": None, "y": 2}}) == {"s": {"y": 2}}


class TestLoadRunConfig:
    def test_defaults(self):
        config = load_run_config()
        assert config.scenario_path is None
        assert config.synth.days == 365
        assert config.environment.unmet_penalty == 10.0
        assert config.training == {}
        assert config.output_dir is None

    def test_file_values(self, tmp_path):
        path = _write(tmp_path, {
            "fleet": {"battery": {"capacity_kwh": 300}},
            "scenario": {"synth": {"days": 10, "seed": 4}},
            "environment": {"unmet_penalty": 5.0},
            "training": {"total_steps": 4096},
        })
        config = load_run_config(path)
        assert config.fleet.battery.capacity_kwh == 300
        assert config.synth.days == 10
        assert config.environment.unmet_penalty == 5.0
        assert config.training == {"total_steps": 4096}

    def test_flags_override_file(self, tmp_path):
        path = _write(tmp_path, {"scenario": {"synth": {"days": 10, "seed": 4}}})
        config = load_run_config(path, {"scenario": {"synth": {"seed": 9, "days": None}}})
        assert config.synth.seed == 9
        assert config.synth.days == 10

    def test_path_wins_over_synth(self):
        config = parse_run_config({"scenario": {"path": "data/s.csv", "synth": {"days": 3}}})
        assert config.scenario_path == Path("data/s.csv")
        assert "path" in config.to_dict()["scenario"]

    def test_outage_override(self):
        config = parse_run_config({"environment": {"outage_prob": 0.2}})
        assert config.fleet.grid.outage_prob == 0.01
        assert config.resolved_fleet().grid.outage_prob == 0.2

    @pytest.mark.parametrize("data", [
        {"fleets": {}},
        {"fleet": {"pv": {"tilt": 10}}},
        {"scenario": {"synth": {"weeks": 2}}},
        {"environment": {"horizon_days": 2}},
        {"training": {"batch": 64}},
        {"scenario": "synthetic"},
    ])
    def test_unknown_keys(self, data):
        with pytest.raises(ConfigError):
            parse_run_config(data)

    @pytest.mark.parametrize("data", [
        {"fleet": {"battery": {"capacity_kwh": -1}}},
        {"scenario": {"synth": {"days": 0}}},
        {"environment": {"outage_prob": 1.5}},
        {"training": {"clip_eps": 0}},
    ])
    def test_invalid_values(self, data):
        with pytest.raises(ConfigError):
            parse_run_config(data)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_run_config(tmp_path / "none.json")

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{fleet: }", encoding="utf-8")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_run_config(path)

    def test_resolved_roundtrip(self):
        config = parse_run_config({"scenario": {"synth": {"days": 5, "seed": 2}},
                                   "environment": {"outage_prob": 0.05, "seed": 2},
                                   "training": {"total_steps": 100, "rollout_length": 64,
                                                "minibatch_size": 32}})
        resolved = config.to_dict()
        again = parse_run_config(json.loads(json.dumps(resolved)))
        assert again.to_dict() == resolved

class TestOutageWindows:
    def test_parsed_as_tuples(self):
        config = parse_run_config({"environment": {"outage_windows": [[0, 24], [48, 50]]}})
        assert config.environment.outage_windows == ((0, 24), (48, 50))

    def test_default_empty(self):
        assert parse_run_config({}).environment.outage_windows == ()

    @pytest.mark.parametrize("windows", [
        "0:24",
        [[5, 3]],
        [[4, 4]],
        [[-1, 3]],
        [[1]],
        [[0, 2, 4]],
        [[0.5, 2]],
        [[True, 3]],
        [5],
    ])
    def test_invalid(self, windows):
        with pytest.raises(ConfigError, match="outage_windows"):
            parse_run_config({"environment": {"outage_windows": windows}})

    def test_file_roundtrip(self, tmp_path):
        path = _write(tmp_path, {"environment": {"outage_windows": [[2, 6]]}})
        config = load_run_config(path)
        again = parse_run_config(json.loads(json.dumps(config.to_dict())))
        assert again.environment.outage_windows == ((2, 6),)


class TestOutputRoot:
    def test_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path))
        assert get_output_root() == tmp_path
        assert manifest_path() == tmp_path / "runs.db"

    def test_default(self, monkeypatch):
        monkeypatch.delenv(OUTPUT_ROOT_ENV, raising=False)
        assert get_output_root() == DEFAULT_OUTPUT_ROOT


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
