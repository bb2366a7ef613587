#!/usr/bin/env python3
import json
import sqlite3
from datetime import datetime
from pathlib import Path
from typing import Optional

from ..utils.hashing import calculate_file_hash
from ..utils.log import get_logger

logger = get_logger("DB")

DDL_RUNS = """
CREATE TABLE IF NOT EXISTS runs (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    timestamp TEXT NOT NULL,
    command TEXT NOT NULL,
    strategy TEXT,
    seed INTEGER,
    scenario_hash TEXT,
    output_dir TEXT NOT NULL,
    config_json TEXT NOT NULL,
    kpis_json TEXT,
    notes TEXT
);
"""

DDL_ARTIFACTS = """
CREATE TABLE IF NOT EXISTS artifacts (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    run_id INTEGER NOT NULL,
    file_path TEXT NOT NULL,
    file_size_bytes INTEGER NOT NULL,
    data_hash TEXT NOT NULL,
    FOREIGN KEY(run_id) REFERENCES runs(id) ON DELETE CASCADE
);
"""


def init_db(db_path: Path) -> Path:
    """Initialize the run manifest with schema"""
    db_path = Path(db_path)
    db_path.parent.mkdir(parents=True, exist_ok=True)

    conn = sqlite3.connect(db_path)
    conn.execute(DDL_RUNS)
    conn.execute(DDL_ARTIFACTS)
    conn.commit()
    conn.close()
    logger.debug(f"Initialized SQLite at {db_path}")
    return db_path


def log_run(db_path: Path, run: dict) -> int:
    """
    Log a CLI run to the manifest.

    Args:
        db_path: Manifest database (created if missing)
        run: dict containing:
            - command: subcommand name
            - output_dir: Path of the run's artifacts
            - config: resolved config dict
            - strategy, seed, scenario_hash, kpis, notes (optional)

    Returns:
        run_id: Integer primary key for this run
    """
    init_db(db_path)
    conn = sqlite3.connect(db_path)
    c = conn.cursor()

    kpis = run.get("kpis")
    c.execute('''
        INSERT INTO runs (timestamp, command, strategy, seed, scenario_hash,
                          output_dir, config_json, kpis_json, notes)
        VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
    ''', (
        run.get("timestamp", datetime.now()).isoformat(),
        run["command"],
        run.get("strategy"),
        run.get("seed"),
        run.get("scenario_hash"),
        str(run["output_dir"]),
        json.dumps(run["config"], sort_keys=True),
        json.dumps(kpis, sort_keys=True) if kpis is not None else None,
        run.get("notes", ""),
    ))

    run_id = c.lastrowid
    conn.commit()
    conn.close()

    logger.info(f"Logged run #{run_id}: {run['command']} → {run['output_dir']}")
    return run_id


def log_artifact(db_path: Path, run_id: int, path: Path) -> str:
    """Record an output file with its BLAKE3 digest; returns the digest"""
    path = Path(path)
    digest = calculate_file_hash(path)
    conn = sqlite3.connect(db_path)
    conn.execute('''
        INSERT INTO artifacts (run_id, file_path, file_size_bytes, data_hash)
        VALUES (?, ?, ?, ?)
    ''', (run_id, str(path), path.stat().st_size, digest))
    conn.commit()
    conn.close()
    return digest


def list_runs(db_path: Path, command: Optional[str] = None) -> list[dict]:
    """Runs in insertion order, each with its artifact list"""
    db_path = Path(db_path)
    if not db_path.exists():
        return []

    conn = sqlite3.connect(db_path)
    conn.row_factory = sqlite3.Row
    if command:
        rows = conn.execute("SELECT * FROM runs WHERE command = ? ORDER BY id", (command,)).fetchall()
    else:
        rows = conn.execute("SELECT * FROM runs ORDER BY id").fetchall()

    runs = []
    for row in rows:
        run = dict(row)
        run["config"] = json.loads(run.pop("config_json"))
        kpis = run.pop("kpis_json")
        run["kpis"] = json.loads(kpis) if kpis else None
        run["artifacts"] = [
            dict(a) for a in conn.execute(
                "SELECT file_path, file_size_bytes, data_hash FROM artifacts WHERE run_id = ? ORDER BY id",
                (run["id"],),
            ).fetchall()
        ]
        runs.append(run)
    conn.close()
    return runs
