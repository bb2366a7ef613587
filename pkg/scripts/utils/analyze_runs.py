#!/usr/bin/env python3
"""
Period rollups of trajectory CSVs with DuckDB

Usage:
    python -m scripts.utils.analyze_runs runs/rbc_seed0/rbc.trajectory.csv --period-hours 720
"""

import argparse
from pathlib import Path

import duckdb
import pandas as pd

from ..environment.trajectory_io import read_trajectory_meta

ROLLUP_SQL = """
SELECT  CAST(floor(t * dt_h / {period}) AS BIGINT)          AS period,
        COUNT(*)                                            AS steps,
        SUM(p_load * dt_h)                                  AS load_kwh,
        SUM(unmet_kw * dt_h)                                AS unmet_kwh,
        SUM(p_grid_import * dt_h)                           AS import_kwh,
        SUM(p_grid_export * dt_h)                           AS export_kwh,
        SUM((p_pv_used + p_w_used) * dt_h)                  AS renewable_used_kwh,
        SUM(curtailed_kw * dt_h)                            AS curtailed_kwh,
        SUM(p_dg * dt_h)                                    AS dg_kwh,
        SUM((p_ch + p_dis) * dt_h)                          AS throughput_kwh,
        SUM(c_grid + c_deg + c_dg)                          AS cost,
        MIN(soc_after)                                      AS soc_min,
        MAX(soc_after)                                      AS soc_max,
        SUM(CASE WHEN grid_up THEN 0 ELSE 1 END)            AS outage_steps
FROM read_csv_auto('{path}', header = true)
GROUP BY period
ORDER BY period
"""


def summarize_trajectory(csv_path: Path, period_hours: float = 24.0, verify: bool = True) -> pd.DataFrame:
    """
    Energy and cost per period of a trajectory

    Args:
        csv_path: *.trajectory.csv written by write_trajectory
        period_hours: Rollup width in hours (24 = daily, 720 ≈ monthly)
        verify: Check the CSV against its recorded BLAKE3 first

    Returns:
        DataFrame, one row per period
    """
    if period_hours <= 0:
        raise ValueError(f"period_hours must be > 0, got {period_hours}")
    csv_path = Path(csv_path)
    read_trajectory_meta(csv_path, verify)

    sql = ROLLUP_SQL.format(period=float(period_hours),
                            path=str(csv_path).replace("'", "''"))
    con = duckdb.connect()
    try:
        return con.execute(sql).df()
    finally:
        con.close()


def main():
    parser = argparse.ArgumentParser(description="Period rollup of a trajectory CSV")
    parser.add_argument("csv", type=Path, help="Path to *.trajectory.csv")
    parser.add_argument("--period-hours", type=float, default=24.0,
                        help="Rollup width in hours (default: 24)")
    args = parser.parse_args()

    frame = summarize_trajectory(args.csv, args.period_hours)

    print(f"\n=== Rollup per {args.period_hours:g} h ===")
    print(frame.to_string(index=False, float_format=lambda v: f"{v:.2f}"))

    print("\n=== Totals ===")
    print(f"Load: {frame['load_kwh'].sum():.1f} kWh")
    print(f"Unmet: {frame['unmet_kwh'].sum():.1f} kWh")
    print(f"Cost: {frame['cost'].sum():.2f}")


if __name__ == "__main__":
    main()
