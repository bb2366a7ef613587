"""
Validation and regression tests for microgrid-lab

Test coverage:
- Device model values and formula oracles
- Power balance, SOC bounds and outage statistics of the environment
- RBC golden trace, PPO numerics and reproducible training
- KPI formulas, comparison reports and CLI artifacts
"""
