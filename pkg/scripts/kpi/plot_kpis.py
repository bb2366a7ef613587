#!/usr/bin/env python3
"""Grouped bar chart of normalized KPI scores, written as a static SVG"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .comparison import ComparisonReport  # noqa: E402
from .kpi_metrics import KPI_SPECS  # noqa: E402

# Fixed id salt and no Date metadata: same report → byte-identical SVG
SVG_HASHSALT = "microgrid-kpi"


def plot_normalized(report: ComparisonReport, path: Path) -> Path:
    """
    Draw one bar per strategy for each KPI (best = 1.0)

    Args:
        report: Comparison with normalized scores
        path: Output .svg path

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    strategies = [report.baseline.strategy, report.candidate.strategy]
    labels = [spec.label for spec in KPI_SPECS]
    x = np.arange(len(labels))
    width = 0.38

    with plt.rc_context({"svg.hashsalt": SVG_HASHSALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(9, 4.5))
        for i, name in enumerate(strategies):
            scores = [report.normalized[name][spec.key] for spec in KPI_SPECS]
            bars = ax.bar(x + (i - 0.5) * width, scores, width, label=name.upper())
            ax.bar_label(bars, fmt="%.2f", fontsize=8, padding=2)

        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=15, ha="right")
        ax.set_ylim(0, 1.15)
        ax.set_ylabel("Normalized score (best = 1.0)")
        ax.set_title("Normalized Performance Metrics")
        ax.legend(loc="lower right")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)

    return path
