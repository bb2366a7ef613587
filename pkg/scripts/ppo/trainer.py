#!/usr/bin/env python3
"""
PPO training and greedy evaluation

Loop per iteration:
1. Collect rollout_length transitions on random windows (workers in parallel)
2. GAE advantages with bootstrapping at every cut point
3. epochs_per_update passes of shuffled minibatch Adam steps
4. Fold the batch's raw observations into the normalizer
5. Log, checkpoint on cadence

All randomness derives from TrainConfig.seed: the initial weights from
default_rng(seed), iteration i / worker w from default_rng([seed, i, w]),
minibatch shuffling from default_rng([seed, i, UPDATE_STREAM]). A run
resumed from a checkpoint therefore replays the same iterations as an
uninterrupted one.

Usage:
    result = train(env_cfg, TrainConfig(total_steps=200_000), checkpoint_dir=Path("out/ckpt"))
    trajectory = evaluate(result.net, eval_cfg)
"""

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd

from ..devices.params import DeviceFleet
from ..environment.microgrid_env import EnvConfig, MgAction, MgState, Trajectory, run_episode
from ..controllers.base_controller import DispatchController
from ..utils.errors import ParameterError, TrainingDivergenceError
from ..utils.log import get_logger
from .checkpoint import Checkpoint, save_checkpoint
from .optimizer import Adam, clip_grad_norm
from .policy_net import PolicyNet, greedy_action, obs_encode, ppo_loss
from .ppo_math import compute_gae, normalize_advantages
from .rollout import RolloutBatch, collect_parallel

logger = get_logger("PPO")

UPDATE_STREAM = 2 ** 20
LOG_COLUMNS = ("iteration", "steps", "mean_reward", "mean_episode_return", "episodes",
               "loss", "policy_loss", "value_loss", "entropy", "approx_kl", "clip_fraction",
               "grad_norm", "log_std_bat", "log_std_dg")


@dataclass(frozen=True, slots=True)
class TrainConfig:
    """
    PPO hyperparameters

    Attributes:
        gamma: Discount factor γ
        gae_lambda: GAE λ
        clip_eps: Ratio clip ε
        learning_rate: Adam step size
        epochs_per_update: Passes over each batch
        minibatch_size: Samples per gradient step
        rollout_length: Transitions collected per iteration
        total_steps: Training budget; total_steps // rollout_length updates (at least one)
        entropy_coef: Entropy bonus weight
        value_coef: Value loss weight
        seed: Root seed
        hidden: Width of both hidden layers
        episode_days: Length of each random training window
        max_grad_norm: Global gradient-norm ceiling (0 disables)
        reward_scale: Multiplier on rewards during learning
        init_log_std: Initial log-std of both action dimensions
        checkpoint_every: Iterations between checkpoints (0: final only)
    """
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    learning_rate: float = 3e-4
    epochs_per_update: int = 10
    minibatch_size: int = 64
    rollout_length: int = 2048
    total_steps: int = 500_000
    entropy_coef: float = 0.001
    value_coef: float = 0.5
    seed: int = 0
    hidden: int = 64
    episode_days: float = 7.0
    max_grad_norm: float = 0.5
    reward_scale: float = 0.01
    init_log_std: float = -0.5
    checkpoint_every: int = 0

    def __post_init__(self):
        if not (0 <= self.gamma <= 1) or not (0 <= self.gae_lambda <= 1):
            raise ParameterError(f"gamma and gae_lambda must be in [0, 1], got {self.gamma}, {self.gae_lambda}")
        if self.clip_eps <= 0:
            raise ParameterError(f"clip_eps must be > 0, got {self.clip_eps}")
        if self.learning_rate < 0:
            raise ParameterError(f"learning_rate must be >= 0, got {self.learning_rate}")
        for name in ("epochs_per_update", "minibatch_size", "rollout_length", "total_steps", "hidden"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.minibatch_size > self.rollout_length:
            raise ParameterError(
                f"minibatch_size {self.minibatch_size} exceeds rollout_length {self.rollout_length}"
            )
        if self.episode_days <= 0:
            raise ParameterError(f"episode_days must be > 0, got {self.episode_days}")
        if min(self.entropy_coef, self.value_coef, self.max_grad_norm, self.checkpoint_every) < 0:
            raise ParameterError("coefficients, max_grad_norm and checkpoint_every must be >= 0")
        if self.reward_scale <= 0:
            raise ParameterError(f"reward_scale must be > 0, got {self.reward_scale}")

    @property
    def n_updates(self) -> int:
        return max(1, self.total_steps // self.rollout_length)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"Unknown training keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True, slots=True)
class UpdateStats:
    loss: float
    policy_loss: float
    value_loss: float
    entropy: float
    approx_kl: float
    clip_fraction: float
    grad_norm: float


@dataclass
class TrainResult:
    net: PolicyNet
    log: list = field(default_factory=list)
    steps: int = 0
    checkpoint_path: Optional[Path] = None


def update(net: PolicyNet, batch: RolloutBatch, cfg: TrainConfig, optimizer: Adam,
           rng: np.random.Generator) -> UpdateStats:
    """
    PPO update on one batch (advantages and returns already filled in)

    The batch's stored log-probs are the frozen π_old.

    Raises:
        ParameterError: If the batch is smaller than one minibatch
        TrainingDivergenceError: On a non-finite loss or gradient
    """
    n = len(batch)
    if n < cfg.minibatch_size:
        raise ParameterError(f"Batch of {n} smaller than minibatch_size {cfg.minibatch_size}")
    if batch.advantages is None or batch.returns is None:
        raise ParameterError("Batch has no advantages; run compute_gae first")

    advantages = normalize_advantages(batch.advantages)
    totals = np.zeros(7)
    n_steps = 0
    for epoch in range(cfg.epochs_per_update):
        order = rng.permutation(n)
        for start in range(0, n, cfg.minibatch_size):
            idx = order[start:start + cfg.minibatch_size]
            stats, grads = ppo_loss(
                net, batch.obs[idx], batch.actions[idx], batch.log_probs[idx],
                advantages[idx], batch.returns[idx],
                cfg.clip_eps, cfg.value_coef, cfg.entropy_coef,
            )
            if not np.isfinite(stats.loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                raise TrainingDivergenceError(
                    f"Non-finite loss in epoch {epoch}",
                    diagnostics={**stats._asdict(), 'epoch': epoch, 'minibatch_start': start},
                )
            grad_norm = clip_grad_norm(grads, cfg.max_grad_norm)
            optimizer.step(net.params, grads)
            net.clamp_log_std()
            totals += np.array([*stats[:6], grad_norm])
            n_steps += 1

    means = totals / n_steps
    return UpdateStats(*(float(x) for x in means))


def _snapshot(net: PolicyNet, optimizer: Adam) -> tuple:
    return ({k: v.copy() for k, v in net.params.items()},
            optimizer.t,
            {k: v.copy() for k, v in optimizer.m.items()},
            {k: v.copy() for k, v in optimizer.v.items()})


def _restore(net: PolicyNet, optimizer: Adam, snap: tuple) -> None:
    params, t, m, v = snap
    net.params = params
    optimizer.t, optimizer.m, optimizer.v = t, m, v


def train(env_cfg: EnvConfig, cfg: TrainConfig, checkpoint_dir: Optional[Path] = None,
          resume: Optional[Checkpoint] = None, workers: int = 1,
          on_iteration: Optional[Callable[[dict], None]] = None) -> TrainResult:
    """
    Train a policy on random windows of env_cfg.scenario

    Args:
        env_cfg: Fleet, scenario and reward settings (start/horizon/seed are drawn per window)
        cfg: Hyperparameters
        checkpoint_dir: Where checkpoint_<iter>.npz and final.npz go (None: no files)
        resume: Continue from this checkpoint's iteration, weights, optimizer and log
        workers: Parallel rollout workers
        on_iteration: Called with each new log row

    Returns:
        TrainResult with the trained net and the per-iteration log

    Raises:
        TrainingDivergenceError: The net is restored to its state before the
            failing update; with a checkpoint_dir that state is on disk and its
            path is attached as last_checkpoint
    """
    dt_h = env_cfg.scenario.dt_h
    episode_steps = max(1, int(round(cfg.episode_days * 24.0 / dt_h)))

    if resume is not None:
        net = resume.net
        optimizer = Adam(net.params, lr=cfg.learning_rate)
        optimizer.load_state_dict(resume.optimizer_state)
        start_iter, steps, log = resume.iteration, resume.steps, list(resume.log)
        logger.info(f"Resuming at iteration {start_iter} ({steps} steps)")
    else:
        power_scale = max(float(np.max(env_cfg.scenario.load_kw)), 1.0)
        net = PolicyNet.create(env_cfg.fleet, power_scale, np.random.default_rng(cfg.seed),
                               hidden=cfg.hidden, init_log_std=cfg.init_log_std)
        optimizer = Adam(net.params, lr=cfg.learning_rate)
        start_iter, steps, log = 0, 0, []

    last_checkpoint = None
    if checkpoint_dir is not None:
        checkpoint_dir = Path(checkpoint_dir)

    for it in range(start_iter, cfg.n_updates):
        batch = collect_parallel(net, env_cfg, cfg.rollout_length, episode_steps,
                                 cfg.reward_scale, cfg.seed, it, workers)
        batch.advantages, batch.returns = compute_gae(
            batch.rewards, batch.values, 0.0, cfg.gamma, cfg.gae_lambda,
            ends=batch.ends, end_values=batch.end_values,
        )

        snap = _snapshot(net, optimizer)
        try:
            stats = update(net, batch, cfg, optimizer, np.random.default_rng([cfg.seed, it, UPDATE_STREAM]))
        except TrainingDivergenceError as e:
            _restore(net, optimizer, snap)
            logger.error(f"Diverged at iteration {it + 1}: {e}")
            if checkpoint_dir is not None:
                good = checkpoint_dir / f"checkpoint_{it:05d}.npz"
                if last_checkpoint != good:
                    last_checkpoint = save_checkpoint(good, net, optimizer, cfg.to_dict(), it, steps, log)
            raise TrainingDivergenceError(str(e), diagnostics={**e.diagnostics, 'iteration': it + 1},
                                          last_checkpoint=last_checkpoint) from e

        net.normalizer.update(batch.obs_raw)
        steps += len(batch)

        row = {
            'iteration': it + 1,
            'steps': steps,
            'mean_reward': float(np.mean(batch.raw_rewards)),
            'mean_episode_return': (float(np.mean(batch.episode_returns))
                                    if batch.episode_returns else None),
            'episodes': len(batch.episode_returns),
            **{k: getattr(stats, k) for k in ("loss", "policy_loss", "value_loss", "entropy",
                                              "approx_kl", "clip_fraction", "grad_norm")},
            'log_std_bat': float(net.params["log_std"][0]),
            'log_std_dg': float(net.params["log_std"][1]),
        }
        log.append(row)
        logger.info(f"iter {row['iteration']}/{cfg.n_updates} steps {steps} "
                    f"mean_reward {row['mean_reward']:.3f} kl {row['approx_kl']:.4f} "
                    f"clip {row['clip_fraction']:.3f}")
        if on_iteration is not None:
            on_iteration(row)

        if checkpoint_dir is not None and cfg.checkpoint_every and (it + 1) % cfg.checkpoint_every == 0:
            last_checkpoint = save_checkpoint(checkpoint_dir / f"checkpoint_{it + 1:05d}.npz",
                                              net, optimizer, cfg.to_dict(), it + 1, steps, log)

    if checkpoint_dir is not None:
        last_checkpoint = save_checkpoint(checkpoint_dir / "final.npz", net, optimizer,
                                          cfg.to_dict(), max(cfg.n_updates, start_iter), steps, log)

    return TrainResult(net=net, log=log, steps=steps, checkpoint_path=last_checkpoint)


def write_training_log(log: list, path: Path) -> Path:
    """Learning curve as CSV, one row per iteration"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(log, columns=list(LOG_COLUMNS)).to_csv(path, index=False, lineterminator="\n")
    return path


class PolicyController(DispatchController):
    """Greedy (mean-action) dispatch from a trained PolicyNet"""

    def __init__(self, net: PolicyNet, fleet: Optional[DeviceFleet] = None):
        self.net = net
        if fleet is not None and (fleet.battery.p_max_kw != net.bat_max_kw
                                  or fleet.diesel.max_kw != net.dg_max_kw):
            logger.warning(
                f"Policy trained for battery {net.bat_max_kw} kW / diesel {net.dg_max_kw} kW, "
                f"fleet has {fleet.battery.p_max_kw} kW / {fleet.diesel.max_kw} kW"
            )

    @property
    def name(self) -> str:
        return "ppo"

    def __call__(self, state: MgState) -> MgAction:
        obs = self.net.normalizer.normalize(obs_encode(state, self.net.power_scale_kw))
        return greedy_action(self.net, obs)


def evaluate(net: PolicyNet, env_cfg: EnvConfig) -> Trajectory:
    """Greedy rollout over the full horizon of env_cfg"""
    return run_episode(env_cfg, PolicyController(net, env_cfg.fleet), strategy="ppo")
