#!/usr/bin/env python3
"""
microgrid - scenario generation, RBC simulation, PPO training, evaluation and comparison

Every run directory holds resolved_config.json, so a run can be repeated
bit-exactly with `--config <run dir>/resolved_config.json`. Runs and their
artifact hashes are appended to <output root>/runs.db.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from ..controllers.rbc_dispatch import rbc_episode
from ..database.run_logger import list_runs, log_artifact, log_run
from ..devices.physics import check_converter_sizing
from ..environment.microgrid_env import EnvConfig
from ..environment.trajectory_io import read_trajectory, write_json, write_trajectory
from ..kpi.comparison import compare_trajectories, render_kpis, render_table
from ..kpi.kpi_metrics import compute_kpis
from ..kpi.plot_kpis import plot_normalized
from ..ppo.checkpoint import load_checkpoint
from ..ppo.trainer import TrainConfig, evaluate, train, write_training_log
from ..scenario.scenario_csv import Scenario, load_scenario, write_scenario
from ..scenario.scenario_stats import scenario_stats
from ..scenario.synth_scenario import synth_scenario
from ..utils.analyze_runs import summarize_trajectory
from ..utils.config import (RESOLVED_CONFIG_NAME, RunConfig, get_output_root,
                            load_run_config, manifest_path)
from ..utils.errors import (ConfigError, IntegrityError, MicrogridError, ParameterError,
                            ScenarioMismatchError, ScenarioValidationError)
from ..utils.log import configure_logging, get_logger

logger = get_logger("CLI")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
USAGE_ERRORS = (ConfigError, ScenarioValidationError, ScenarioMismatchError,
                FileNotFoundError, IntegrityError)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def _window(text: str) -> list:
    start, sep, end = text.partition(":")
    try:
        window = [int(start), int(end)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:END integers, got {text!r}") from None
    if not sep or not 0 <= window[0] < window[1]:
        raise argparse.ArgumentTypeError(f"expected 0 <= START < END, got {text!r}")
    return window


# ---------------------------------------------------------------- helpers

def _overrides(args: argparse.Namespace) -> dict:
    """CLI flags in config-file shape; unset flags are None and ignored by the merge"""
    get = lambda name: getattr(args, name, None)  # noqa: E731
    seed = get("seed")
    synth = {'seed': seed, 'days': get("days"), 'dt_h': get("dt_h"),
             'peak_load_kw': get("peak_load"), 'tariff': get("tariff")}
    training = {
        'seed': seed,
        'total_steps': get("total_steps"),
        'rollout_length': get("rollout"),
        'epochs_per_update': get("epochs"),
        'minibatch_size': get("minibatch"),
        'learning_rate': get("lr"),
        'episode_days': get("episode_days"),
        'checkpoint_every': get("checkpoint_every"),
    }
    environment = {'seed': seed, 'horizon': get("horizon"),
                   'outage_prob': get("outage_prob"), 'unmet_penalty': get("unmet_penalty"),
                   'outage_windows': get("outage_window")}
    scenario_path = get("scenario")
    return {
        'scenario': {'synth': synth, 'path': str(scenario_path) if scenario_path else None},
        'environment': environment,
        'training': training,
        'output_dir': str(get("output_dir")) if get("output_dir") else None,
    }


def _run_dir(config: RunConfig, default_name: str) -> Path:
    out = config.output_dir if config.output_dir is not None else get_output_root() / default_name
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config(args: argparse.Namespace) -> RunConfig:
    return load_run_config(args.config, _overrides(args))


def _build_scenario(config: RunConfig) -> Scenario:
    if config.scenario_path is not None:
        return load_scenario(config.scenario_path)
    return synth_scenario(config.synth)


def _env_config(config: RunConfig, scenario: Scenario) -> EnvConfig:
    env = config.environment
    fleet = config.resolved_fleet()
    if not check_converter_sizing(fleet, float(scenario.load_kw.max())):
        logger.warning(f"Converter ({fleet.converter.rated_kw} kW) cannot cover peak load "
                       f"{scenario.load_kw.max():.1f} kW")
    try:
        return EnvConfig(
            fleet=fleet,
            scenario=scenario,
            horizon=env.horizon,
            unmet_penalty=env.unmet_penalty,
            seed=env.seed,
            start_index=env.start_index,
            initial_soc=env.initial_soc,
            export_during_outage=env.export_during_outage,
            outage_windows=env.outage_windows,
        )
    except ParameterError as e:
        raise ConfigError(f"environment: {e}") from e


def _start_run(config: RunConfig, default_name: str) -> Path:
    run_dir = _run_dir(config, default_name)
    resolved = config.to_dict()
    resolved['output_dir'] = str(run_dir)
    write_json(resolved, run_dir / RESOLVED_CONFIG_NAME)
    return run_dir


def _record(command: str, config: RunConfig, run_dir: Path, artifacts: list,
            **fields) -> int:
    db = manifest_path()
    run_id = log_run(db, {
        'command': command,
        'output_dir': run_dir,
        'config': config.to_dict(),
        **fields,
    })
    for path in [run_dir / RESOLVED_CONFIG_NAME, *artifacts]:
        log_artifact(db, run_id, path)
    return run_id


# ---------------------------------------------------------------- commands

def cmd_gen_scenario(args: argparse.Namespace) -> int:
    config = _load_config(args)
    scenario = synth_scenario(config.synth, name=args.name)
    run_dir = _start_run(config, f"scenario_seed{config.synth.seed}")

    csv_path = Path(args.output) if args.output else run_dir / f"{args.name}.csv"
    write_scenario(scenario, csv_path)
    stats = scenario_stats(scenario, config.resolved_fleet(),
                           weibull=(config.synth.weibull_shape, config.synth.weibull_scale))
    stats_path = write_json(stats, csv_path.with_name(csv_path.stem + ".stats.json"))

    print(f"[Scenario] {len(scenario)} steps (dt {scenario.dt_h} h) → {csv_path}")
    print(f"[Scenario] hash {stats['scenario_hash'][:16]}…, load {stats['totals']['load_kwh']:.0f} kWh")
    _record("gen-scenario", config, run_dir, [csv_path, stats_path],
            seed=config.synth.seed, scenario_hash=stats['scenario_hash'])
    return EXIT_OK


def cmd_simulate_rbc(args: argparse.Namespace) -> int:
    config = _load_config(args)
    scenario = _build_scenario(config)
    env_cfg = _env_config(config, scenario)
    run_dir = _start_run(config, f"rbc_seed{env_cfg.seed}")

    trajectory = rbc_episode(env_cfg)
    meta = write_trajectory(trajectory, run_dir / "rbc")
    report = compute_kpis(trajectory, env_cfg.fleet)
    kpi_path = write_json(report.to_dict(), run_dir / "rbc_kpis.json")

    print(render_kpis(report))
    print(f"\n[RBC] trajectory → {meta['csv_path']}")
    _record("simulate-rbc", config, run_dir, [meta['csv_path'], meta['meta_path'], kpi_path],
            strategy="rbc", seed=env_cfg.seed, scenario_hash=trajectory.scenario_hash,
            kpis=report.kpis())
    return EXIT_OK


def cmd_train_ppo(args: argparse.Namespace) -> int:
    resume = load_checkpoint(args.resume) if args.resume else None
    config = _load_config(args)
    training = dict(config.training)
    if resume is not None:
        # Checkpointed hyperparameters, then explicit flags on top
        training = {**resume.train_config,
                    **{k: v for k, v in _overrides(args)['training'].items() if v is not None}}
    try:
        train_cfg = TrainConfig.from_dict(training)
    except ParameterError as e:
        raise ConfigError(f"training: {e}") from e
    config = replace(config, training=train_cfg.to_dict())

    scenario = _build_scenario(config)
    env_cfg = _env_config(config, scenario)
    run_dir = _start_run(config, f"ppo_seed{train_cfg.seed}")
    ckpt_dir = run_dir / "checkpoints"

    result = train(env_cfg, train_cfg, checkpoint_dir=ckpt_dir, resume=resume,
                   workers=args.workers)
    log_path = write_training_log(result.log, run_dir / "training_log.csv")

    first, last = result.log[0], result.log[-1]
    print(f"[PPO] {len(result.log)} updates, {result.steps} steps")
    print(f"[PPO] mean reward {first['mean_reward']:.3f} → {last['mean_reward']:.3f}")
    print(f"[PPO] checkpoint → {result.checkpoint_path}")
    _record("train-ppo", config, run_dir, [log_path, result.checkpoint_path],
            strategy="ppo", seed=train_cfg.seed, scenario_hash=None)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    checkpoint = load_checkpoint(args.checkpoint)
    config = _load_config(args)
    scenario = _build_scenario(config)
    env_cfg = _env_config(config, scenario)
    run_dir = _start_run(config, f"eval_seed{env_cfg.seed}")

    trajectory = evaluate(checkpoint.net, env_cfg)
    meta = write_trajectory(trajectory, run_dir / "ppo")
    report = compute_kpis(trajectory, env_cfg.fleet)
    kpi_path = write_json(report.to_dict(), run_dir / "ppo_kpis.json")

    print(render_kpis(report))
    print(f"\n[PPO] trajectory → {meta['csv_path']}")
    _record("evaluate", config, run_dir, [meta['csv_path'], meta['meta_path'], kpi_path],
            strategy="ppo", seed=env_cfg.seed, scenario_hash=trajectory.scenario_hash,
            kpis=report.kpis(), notes=f"checkpoint {args.checkpoint}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    baseline = read_trajectory(args.baseline)
    candidate = read_trajectory(args.candidate)
    report = compare_trajectories(baseline, candidate)

    config = _load_config(args)
    run_dir = _start_run(config, "compare")
    json_path = write_json(report.to_dict(), run_dir / "comparison.json")
    table = render_table(report)
    table_path = run_dir / "comparison.txt"
    table_path.write_text(table + "\n", encoding="utf-8")
    svg_path = plot_normalized(report, run_dir / "normalized_kpis.svg")

    print(table)
    print(f"\n[KPI] report → {json_path}")
    print(f"[KPI] chart → {svg_path}")
    _record("compare", config, run_dir, [json_path, table_path, svg_path],
            scenario_hash=report.scenario_hash,
            kpis={k: v for k, v in report.improvements.items()})
    return EXIT_OK


def cmd_summarize(args: argparse.Namespace) -> int:
    frame = summarize_trajectory(args.trajectory, args.period_hours)
    print(f"=== Rollup per {args.period_hours:g} h: {args.trajectory} ===")
    print(frame.to_string(index=False, float_format=lambda v: f"{v:.2f}"))
    if args.output:
        frame.to_csv(args.output, index=False, lineterminator="\n")
        print(f"\n[CLI] rollup → {args.output}")
    return EXIT_OK


def cmd_runs(args: argparse.Namespace) -> int:
    runs = list_runs(manifest_path(), args.command_filter)
    if not runs:
        print(f"No runs recorded in {manifest_path()}")
        return EXIT_OK
    for run in runs:
        strategy = run['strategy'] or "-"
        print(f"#{run['id']:<4} {run['timestamp']}  {run['command']:<13} {strategy:<5} "
              f"seed={run['seed']}  {run['output_dir']}  ({len(run['artifacts'])} artifacts)")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run config (flags override its values)")
    common.add_argument("--seed", type=int, help="Root seed for scenario synthesis, outages and training")
    common.add_argument("--output-dir", type=Path,
                        help="Run directory (default: $MICROGRID_OUTPUT_ROOT/<command>_seed<N>)")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")

    scenario = argparse.ArgumentParser(add_help=False)
    scenario.add_argument("--scenario", type=Path, help="Scenario CSV (default: synthesize)")
    scenario.add_argument("--days", type=_positive_int, help="Days to synthesize (default: 365)")
    scenario.add_argument("--dt-h", type=_positive_float, help="Step length in hours (default: 1)")
    scenario.add_argument("--peak-load", type=_positive_float, help="Synthetic peak load in kW")
    scenario.add_argument("--tariff", choices=("flat", "tou"), help="Synthetic tariff")

    env = argparse.ArgumentParser(add_help=False)
    env.add_argument("--horizon", type=_positive_int, help="Episode length in steps (default: whole scenario)")
    env.add_argument("--outage-prob", type=float, help="Per-step grid outage probability")
    env.add_argument("--unmet-penalty", type=float, help="Reward penalty per kWh of unmet load")
    env.add_argument("--outage-window", type=_window, action="append", metavar="START:END",
                     help="Force the grid down for episode steps [START, END); repeatable")

    parser = argparse.ArgumentParser(
        prog="microgrid",
        description="Hybrid community microgrid dispatch lab",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Year-long synthetic scenario
  microgrid gen-scenario --days 365 --seed 7

  # Baseline and learned dispatch on the same scenario and outages
  microgrid simulate-rbc --seed 1
  microgrid train-ppo --seed 1 --total-steps 200000 --workers 4
  microgrid evaluate --seed 1 --checkpoint runs/ppo_seed1/checkpoints/final.npz

  # Table, JSON and SVG chart
  microgrid compare runs/rbc_seed1/rbc.trajectory.csv runs/eval_seed1/ppo.trajectory.csv
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenario", parents=[common, scenario], help="Write a synthetic scenario CSV")
    p.add_argument("--name", default="scenario", help="Scenario name and file stem (default: scenario)")
    p.add_argument("-o", "--output", type=Path, help="CSV path (default: <run dir>/<name>.csv)")
    p.set_defaults(func=cmd_gen_scenario)

    p = sub.add_parser("simulate-rbc", parents=[common, scenario, env], help="Run the rule-based controller")
    p.set_defaults(func=cmd_simulate_rbc)

    p = sub.add_parser("train-ppo", parents=[common, scenario, env], help="Train a PPO policy")
    p.add_argument("--total-steps", type=_positive_int, help="Environment steps (default: 500000)")
    p.add_argument("--rollout", type=_positive_int, help="Steps per update (default: 2048)")
    p.add_argument("--epochs", type=_positive_int, help="Epochs per update (default: 10)")
    p.add_argument("--minibatch", type=_positive_int, help="Minibatch size (default: 64)")
    p.add_argument("--lr", type=float, help="Learning rate (default: 3e-4)")
    p.add_argument("--episode-days", type=_positive_float, help="Training window length (default: 7)")
    p.add_argument("--checkpoint-every", type=int, help="Iterations between checkpoints (default: final only)")
    p.add_argument("--resume", type=Path, help="Continue from a checkpoint")
    p.add_argument("--workers", type=_positive_int, default=1, help="Parallel rollout workers (default: 1)")
    p.set_defaults(func=cmd_train_ppo)

    p = sub.add_parser("evaluate", parents=[common, scenario, env], help="Greedy rollout of a trained policy")
    p.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint .npz")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", parents=[common], help="Compare two trajectories")
    p.add_argument("baseline", type=Path, help="Baseline *.trajectory.csv (e.g. RBC)")
    p.add_argument("candidate", type=Path, help="Candidate *.trajectory.csv (e.g. PPO)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("summarize", parents=[common], help="Per-period rollup of a trajectory (DuckDB)")
    p.add_argument("trajectory", type=Path, help="*.trajectory.csv")
    p.add_argument("--period-hours", type=_positive_float, default=24.0, help="Rollup width (default: 24)")
    p.add_argument("-o", "--output", type=Path, help="Also write the rollup as CSV")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("runs", parents=[common], help="List the run manifest")
    p.add_argument("--command", dest="command_filter", help="Only runs of this subcommand")
    p.set_defaults(func=cmd_runs)

    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    configure_logging(level)

    try:
        return args.func(args)
    except USAGE_ERRORS as e:
        print(f"[CLI] error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except MicrogridError as e:
        print(f"[CLI] failed: {e}", file=sys.stderr)
        last = getattr(e, "last_checkpoint", None)
        if last is not None:
            print(f"[CLI] last good checkpoint: {last}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as e:
        print(f"[CLI] failed: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
