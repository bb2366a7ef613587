#!/usr/bin/env python3
"""
Trajectory artifacts: CSV data + JSON meta pair

    <stem>.trajectory.csv        one StepRecord per row, header = StepRecord fields
    <stem>.trajectory-meta.json  strategy, seed, scenario hash, BLAKE3 of the CSV

The CSV hash is computed after the file hits disk and checked again on load,
so a hand-edited trajectory is refused instead of silently compared.
"""

import json
from dataclasses import asdict, fields
from pathlib import Path

import pandas as pd

from ..utils.errors import IntegrityError
from ..utils.hashing import calculate_file_hash
from .microgrid_env import StepRecord, Trajectory

TRAJECTORY_FORMAT = "microgrid-trajectory/1"
CSV_SUFFIX = ".trajectory.csv"
META_SUFFIX = ".trajectory-meta.json"

_FIELDS = [f.name for f in fields(StepRecord)]
_INT_FIELDS = {"t", "hour"}
_BOOL_FIELDS = {"grid_up"}


def trajectory_paths(stem: Path) -> tuple[Path, Path]:
    stem = Path(stem)
    return stem.with_name(stem.name + CSV_SUFFIX), stem.with_name(stem.name + META_SUFFIX)


def _stem_from_csv(csv_path: Path) -> Path:
    name = csv_path.name
    if not name.endswith(CSV_SUFFIX):
        raise ValueError(f"Not a trajectory CSV (expected *{CSV_SUFFIX}): {csv_path}")
    return csv_path.with_name(name[:-len(CSV_SUFFIX)])


def write_json(data: dict, path: Path) -> Path:
    """Stable JSON: sorted keys, fixed indentation, trailing newline"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")
    return path


def write_trajectory(trajectory: Trajectory, stem: Path) -> dict:
    """
    Write trajectory CSV and meta JSON

    Args:
        trajectory: Records and provenance
        stem: Output path without suffix, e.g. out/rbc

    Returns:
        Meta dict (also written to disk) with 'csv_path' and 'meta_path'
    """
    csv_path, meta_path = trajectory_paths(stem)
    csv_path.parent.mkdir(parents=True, exist_ok=True)

    frame = pd.DataFrame([asdict(r) for r in trajectory.records], columns=_FIELDS)
    frame.to_csv(csv_path, index=False, lineterminator="\n")

    meta = {
        'format': TRAJECTORY_FORMAT,
        'strategy': trajectory.strategy,
        'seed': trajectory.seed,
        'dt_h': trajectory.dt_h,
        'steps': len(trajectory),
        'scenario_hash': trajectory.scenario_hash,
        'data_blake3': calculate_file_hash(csv_path),
        'extra': trajectory.meta,
    }
    write_json(meta, meta_path)
    return {**meta, 'csv_path': csv_path, 'meta_path': meta_path}


def read_trajectory_meta(csv_path: Path, verify: bool = True) -> dict:
    """
    Load the meta sidecar of a trajectory CSV

    Raises:
        FileNotFoundError: If the CSV or its meta file is missing
        IntegrityError: If the CSV no longer matches its recorded hash
    """
    csv_path = Path(csv_path)
    _, meta_path = trajectory_paths(_stem_from_csv(csv_path))
    for p in (csv_path, meta_path):
        if not p.exists():
            raise FileNotFoundError(f"Trajectory file not found: {p}")

    with open(meta_path, encoding="utf-8") as f:
        meta = json.load(f)

    if verify:
        actual = calculate_file_hash(csv_path)
        if actual != meta['data_blake3']:
            raise IntegrityError(
                f"{csv_path.name}: BLAKE3 {actual[:16]}… does not match meta {meta['data_blake3'][:16]}…"
            )
    return meta


def read_trajectory(csv_path: Path, verify: bool = True) -> Trajectory:
    """
    Load a trajectory written by write_trajectory

    Raises:
        FileNotFoundError: If the CSV or its meta file is missing
        IntegrityError: If the CSV no longer matches its recorded hash
    """
    csv_path = Path(csv_path)
    meta = read_trajectory_meta(csv_path, verify)

    frame = pd.read_csv(csv_path, float_precision="round_trip")
    missing = set(_FIELDS) - set(frame.columns)
    if missing:
        raise IntegrityError(f"{csv_path.name}: missing columns {sorted(missing)}")

    records = []
    for row in frame[_FIELDS].itertuples(index=False):
        values = row._asdict()
        for name in _FIELDS:
            if name in _INT_FIELDS:
                values[name] = int(values[name])
            elif name in _BOOL_FIELDS:
                values[name] = bool(values[name])
            else:
                values[name] = float(values[name])
        records.append(StepRecord(**values))

    return Trajectory(
        records=records,
        scenario_hash=meta['scenario_hash'],
        strategy=meta['strategy'],
        seed=meta['seed'],
        dt_h=meta['dt_h'],
        meta=meta.get('extra', {}),
    )
