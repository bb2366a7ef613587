#!/usr/bin/env python3
"""
Baseline-vs-candidate KPI comparison

Improvement convention (positive = candidate is better):
    higher-is-better   (new − old) / |old| × 100   "improvement" / "decline"
    lower-is-better    (old − new) / |old| × 100   "reduction" / "increase"

Normalized scores put the best strategy at 1.0 on every KPI:
    higher-is-better   value / max
    lower-is-better    min / value when all values are positive,
                       otherwise 1 − (value − min) / (max − min)
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..devices.params import DeviceFleet
from ..environment.microgrid_env import Trajectory
from ..utils.errors import ParameterError, ScenarioMismatchError, UndefinedScoreError
from ..utils.log import get_logger
from .kpi_metrics import KPI_SPECS, KpiReport, compute_kpis

logger = get_logger("KPI")


def improvement(old: float, new: float, higher_is_better: bool) -> Optional[float]:
    """Signed improvement in percent; None when the baseline is zero"""
    if old == 0:
        return None
    if higher_is_better:
        return (new - old) / abs(old) * 100.0
    return (old - new) / abs(old) * 100.0


def describe_improvement(value: Optional[float], higher_is_better: bool) -> str:
    if value is None:
        return "n/a"
    if higher_is_better:
        word = "improvement" if value >= 0 else "decline"
    else:
        word = "reduction" if value >= 0 else "increase"
    return f"{abs(value):.1f}% {word}"


def _scores(values: list, higher_is_better: bool, key: str) -> list:
    if higher_is_better:
        top = max(values)
        if top <= 0:
            raise UndefinedScoreError(f"{key}: no positive value to scale by")
        return [v / top for v in values]

    lo, hi = min(values), max(values)
    if lo == hi:
        return [1.0] * len(values)
    if lo > 0:
        return [lo / v for v in values]
    return [1.0 - (v - lo) / (hi - lo) for v in values]


def normalize_kpis(reports: Sequence[KpiReport]) -> dict:
    """
    Normalized scores per strategy

    Returns:
        {strategy: {kpi_key: score in [0, 1]}}

    Raises:
        ParameterError: Fewer than two reports or duplicate strategy names
        UndefinedScoreError: A higher-is-better KPI is zero for every strategy
    """
    if len(reports) < 2:
        raise ParameterError(f"Need at least 2 reports to normalize, got {len(reports)}")
    names = [r.strategy for r in reports]
    if len(set(names)) != len(names):
        raise ParameterError(f"Duplicate strategy names: {names}")

    scores = {name: {} for name in names}
    for spec in KPI_SPECS:
        values = [getattr(r, spec.key) for r in reports]
        for name, score in zip(names, _scores(values, spec.higher_is_better, spec.key)):
            scores[name][spec.key] = score
    return scores


@dataclass
class ComparisonReport:
    baseline: KpiReport
    candidate: KpiReport
    improvements: dict = field(default_factory=dict)
    normalized: dict = field(default_factory=dict)

    @property
    def scenario_hash(self) -> str:
        return self.baseline.scenario_hash

    def to_dict(self) -> dict:
        """
        JSON schema:
            scenario_hash, baseline, candidate (strategy names)
            kpis: [{key, label, unit, higher_is_better, baseline, candidate,
                    improvement_pct, summary}]
            normalized: {strategy: {kpi_key: score}}
            reports: {strategy: KpiReport.to_dict()}
        """
        rows = []
        for spec in KPI_SPECS:
            value = self.improvements[spec.key]
            rows.append({
                'key': spec.key,
                'label': spec.label,
                'unit': spec.unit,
                'higher_is_better': spec.higher_is_better,
                'baseline': getattr(self.baseline, spec.key),
                'candidate': getattr(self.candidate, spec.key),
                'improvement_pct': value,
                'summary': describe_improvement(value, spec.higher_is_better),
            })
        return {
            'scenario_hash': self.scenario_hash,
            'baseline': self.baseline.strategy,
            'candidate': self.candidate.strategy,
            'kpis': rows,
            'normalized': self.normalized,
            'reports': {r.strategy: r.to_dict() for r in (self.baseline, self.candidate)},
        }


def comparison_report(baseline: KpiReport, candidate: KpiReport) -> ComparisonReport:
    """
    Compare two reports from the same scenario

    Raises:
        ScenarioMismatchError: If the scenario hashes differ
    """
    if baseline.scenario_hash != candidate.scenario_hash:
        raise ScenarioMismatchError(
            f"Scenario hash mismatch: {baseline.strategy} {baseline.scenario_hash[:16]}… vs "
            f"{candidate.strategy} {candidate.scenario_hash[:16]}…"
        )
    if baseline.seed != candidate.seed:
        logger.warning(f"Outage seeds differ ({baseline.seed} vs {candidate.seed}); "
                       f"reliability is not like-for-like")

    improvements = {
        spec.key: improvement(getattr(baseline, spec.key), getattr(candidate, spec.key),
                              spec.higher_is_better)
        for spec in KPI_SPECS
    }
    return ComparisonReport(
        baseline=baseline,
        candidate=candidate,
        improvements=improvements,
        normalized=normalize_kpis([baseline, candidate]),
    )


def compare_trajectories(baseline: Trajectory, candidate: Trajectory,
                         fleet: Optional[DeviceFleet] = None) -> ComparisonReport:
    """compute_kpis on both trajectories, then comparison_report"""
    if baseline.scenario_hash != candidate.scenario_hash:
        raise ScenarioMismatchError(
            f"Trajectories ran on different scenarios: {baseline.scenario_hash[:16]}… "
            f"vs {candidate.scenario_hash[:16]}…"
        )
    return comparison_report(compute_kpis(baseline, fleet), compute_kpis(candidate, fleet))


def render_table(report: ComparisonReport) -> str:
    """Plain-text table with a Key Improvement column"""
    base, cand = report.baseline.strategy.upper(), report.candidate.strategy.upper()
    header = f"{'Metric':<30}{base:>14}{cand:>14}   Key Improvement"
    lines = [header, "-" * len(header)]
    for spec in KPI_SPECS:
        label = f"{spec.label} ({spec.unit})" if spec.unit == "%" else spec.label
        lines.append(
            f"{label:<30}{getattr(report.baseline, spec.key):>14.2f}"
            f"{getattr(report.candidate, spec.key):>14.2f}   "
            f"{describe_improvement(report.improvements[spec.key], spec.higher_is_better)}"
        )
    return "\n".join(lines)


def render_kpis(report: KpiReport) -> str:
    """Single-strategy KPI summary"""
    lines = [f"KPIs for {report.strategy} ({report.totals.steps} steps)"]
    for spec in KPI_SPECS:
        unit = "" if spec.unit == "currency" else f" {spec.unit}"
        lines.append(f"  {spec.label:<28}{getattr(report, spec.key):>14.2f}{unit}")
    return "\n".join(lines)
