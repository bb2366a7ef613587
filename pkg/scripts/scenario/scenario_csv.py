#!/usr/bin/env python3
"""
Scenario time series and their CSV container

CSV schema (UTF-8, decimal point, no thousands separators, one row per step):

    hour,load_kw,irradiance_kwm2,wind_ms,price_buy,price_sell

`hour` is elapsed hours since the start of the scenario (0, dt, 2·dt, ...);
the step length is recovered from its spacing, and a one-row file is taken as
hourly (the writer refuses a one-row scenario at any other step). The writer
emits exactly this schema with shortest round-trip float formatting, so reading a written file
gives back bit-identical series.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from ..utils.errors import ParameterError, ScenarioValidationError
from ..utils.hashing import hash_arrays

CSV_COLUMNS = ("hour", "load_kw", "irradiance_kwm2", "wind_ms", "price_buy", "price_sell")

# Step length assumed for a one-row file, where `hour` has no spacing
SINGLE_ROW_DT_H = 1.0

# Scenario attribute backing each data column
_SERIES = {
    "load_kw": "load_kw",
    "irradiance_kwm2": "irradiance",
    "wind_ms": "wind_speed",
    "price_buy": "price_buy",
    "price_sell": "price_sell",
}


@dataclass(frozen=True, slots=True)
class ScenarioMeta:
    name: str = "scenario"
    origin: str = "synthetic"       # 'ingested' | 'synthetic'
    seed: Optional[int] = None


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    Aligned per-step series driving one simulation

    Arrays are copied to float64 and made read-only, so a Scenario can be
    shared between environments and workers.

    Equality compares dt_h and every series bit-exactly; meta is ignored.
    """
    load_kw: np.ndarray
    irradiance: np.ndarray
    wind_speed: np.ndarray
    price_buy: np.ndarray
    price_sell: np.ndarray
    dt_h: float = 1.0
    meta: ScenarioMeta = field(default_factory=ScenarioMeta)

    def __post_init__(self):
        for attr in _SERIES.values():
            arr = np.array(getattr(self, attr), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        validate_series(self)

    def __len__(self) -> int:
        return len(self.load_kw)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return self.dt_h == other.dt_h and all(
            np.array_equal(getattr(self, a), getattr(other, a)) for a in _SERIES.values()
        )

    __hash__ = None

    def hour_of_day(self, index: int) -> int:
        """Hour-of-day (0-23) at the start of step `index`"""
        return int(np.floor(index * self.dt_h)) % 24

    def window(self, start: int, length: int) -> "Scenario":
        """Contiguous slice [start, start + length) as a new Scenario"""
        stop = start + length
        if start < 0 or length < 1 or stop > len(self):
            raise ScenarioValidationError(
                f"Window [{start}, {stop}) outside scenario of length {len(self)}"
            )
        return Scenario(
            **{a: getattr(self, a)[start:stop] for a in _SERIES.values()},
            dt_h=self.dt_h,
            meta=self.meta,
        )


def validate_series(s: Scenario) -> None:
    """
    Check the Scenario invariants

    Raises:
        ScenarioValidationError: naming the first offending row and column
    """
    if not (np.isfinite(s.dt_h) and s.dt_h > 0):
        raise ScenarioValidationError(f"dt_h must be a positive number, got {s.dt_h}")

    n = len(s.load_kw)
    if n < 1:
        raise ScenarioValidationError("Scenario must contain at least one step")

    for column, attr in _SERIES.items():
        arr = getattr(s, attr)
        if arr.ndim != 1 or len(arr) != n:
            raise ScenarioValidationError(
                f"Series length mismatch: {column} has {arr.size} values, load_kw has {n}",
                column=column,
            )
        bad = np.flatnonzero(~np.isfinite(arr) | (arr < 0))
        if len(bad):
            row = int(bad[0])
            raise ScenarioValidationError(
                f"Value {arr[row]!r} must be finite and >= 0", row=row + 1, column=column
            )


def scenario_hash(s: Scenario) -> str:
    """BLAKE3 digest over dt_h and all series; identifies a scenario across runs"""
    return hash_arrays(
        np.array([s.dt_h]), *(getattr(s, a) for a in _SERIES.values()),
        prefix=b"microgrid-scenario-v1",
    )


def write_scenario(s: Scenario, path: Path) -> Path:
    """
    Write scenario to CSV using the documented schema

    Raises:
        ParameterError: Single-row scenario with dt_h != 1 (the hour column
            cannot carry the step length, so it would not read back)
    """
    if len(s) == 1 and s.dt_h != SINGLE_ROW_DT_H:
        raise ParameterError(
            f"A single-row scenario is read back with dt_h {SINGLE_ROW_DT_H}; got dt_h {s.dt_h}"
        )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"hour": np.arange(len(s)) * s.dt_h})
    for column, attr in _SERIES.items():
        frame[column] = getattr(s, attr)

    # repr() is the shortest string that parses back to the same double
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(",".join(CSV_COLUMNS) + "\n")
        for row in frame.itertuples(index=False):
            f.write(",".join(repr(float(v)) for v in row) + "\n")
    return path


def load_scenario(path: Path, name: Optional[str] = None) -> Scenario:
    """
    Load and validate a scenario CSV

    Args:
        path: CSV file following the documented schema
        name: Scenario name for meta (default: file stem)

    Returns:
        Validated Scenario with origin 'ingested'

    Raises:
        FileNotFoundError: If path does not exist
        ScenarioValidationError: On header mismatch, ragged rows, non-numeric
            cells or invariant violations (row numbers are 1-based data rows)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Scenario file not found: {path}")

    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.ParserError as exc:
        raise ScenarioValidationError(f"Ragged or malformed CSV in {path}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise ScenarioValidationError(f"Empty scenario file: {path}") from exc

    header = [c.strip() for c in raw.columns]
    if tuple(header) != CSV_COLUMNS:
        raise ScenarioValidationError(
            f"Header {header} does not match schema {list(CSV_COLUMNS)}"
        )
    raw.columns = header
    if len(raw) == 0:
        raise ScenarioValidationError(f"Scenario file has no data rows: {path}")

    values = {}
    for column in CSV_COLUMNS:
        cells = raw[column].str.strip()
        missing = np.flatnonzero((cells.isna() | (cells == "")).to_numpy())
        if len(missing):
            raise ScenarioValidationError(
                "Missing value (ragged row?)", row=int(missing[0]) + 1, column=column
            )
        numeric = pd.to_numeric(cells, errors="coerce")
        bad = np.flatnonzero(numeric.isna().to_numpy())
        if len(bad):
            row = int(bad[0])
            raise ScenarioValidationError(
                f"Non-numeric cell {cells.iloc[row]!r}", row=row + 1, column=column
            )
        # Python float() parsing is correctly rounded, keeping round-trips exact
        values[column] = np.array([float(c) for c in cells], dtype=np.float64)

    hours = values["hour"]
    dt_h = float(hours[1] - hours[0]) if len(hours) > 1 else SINGLE_ROW_DT_H
    expected = np.arange(len(hours)) * dt_h
    off_grid = np.flatnonzero(~np.isclose(hours, expected, rtol=0, atol=1e-9))
    if dt_h <= 0 or len(off_grid):
        row = int(off_grid[0]) + 1 if len(off_grid) else 2
        raise ScenarioValidationError(
            "Hour column must start at 0 and advance by a constant positive step",
            row=row, column="hour",
        )
    if hours[0] != 0:
        raise ScenarioValidationError("Hour column must start at 0", row=1, column="hour")

    for column in _SERIES:
        negative = np.flatnonzero(values[column] < 0)
        if len(negative):
            row = int(negative[0])
            raise ScenarioValidationError(
                f"Negative value {values[column][row]!r}", row=row + 1, column=column
            )

    return Scenario(
        **{attr: values[column] for column, attr in _SERIES.items()},
        dt_h=dt_h,
        meta=ScenarioMeta(name=name or path.stem, origin="ingested", seed=None),
    )
