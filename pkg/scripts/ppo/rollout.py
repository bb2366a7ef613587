#!/usr/bin/env python3
"""
Rollout collection on randomly windowed scenario segments

Each worker owns an environment and a private numpy Generator derived from
(seed, iteration, worker). Workers run in separate processes on
pickled copies of the policy and config; batches are concatenated in worker order, which keeps the result
independent of scheduling.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..environment.microgrid_env import EnvConfig, MicrogridEnv
from .policy_net import PolicyNet, obs_encode, policy_sample


@dataclass(frozen=True, slots=True)
class Transition:
    obs: np.ndarray
    action: np.ndarray
    log_prob_old: float
    reward: float
    value: float
    done: bool


@dataclass
class RolloutBatch:
    """
    Column-wise transitions of one collection phase

    obs holds observations normalized with the statistics in force during
    collection; obs_raw feeds the normalizer update afterwards. rewards are
    scaled for learning, raw_rewards are the environment's.
    """
    obs_raw: np.ndarray
    obs: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    raw_rewards: np.ndarray
    values: np.ndarray
    ends: np.ndarray
    end_values: np.ndarray
    episode_returns: list = field(default_factory=list)
    advantages: Optional[np.ndarray] = None
    returns: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.rewards)

    def transition(self, i: int) -> Transition:
        return Transition(self.obs[i], self.actions[i], float(self.log_probs[i]),
                          float(self.rewards[i]), float(self.values[i]), bool(self.ends[i]))


def _window_config(base: EnvConfig, episode_steps: int, rng: np.random.Generator) -> EnvConfig:
    n = len(base.scenario)
    horizon = min(episode_steps, n)
    bat = base.fleet.battery
    return replace(
        base,
        start_index=int(rng.integers(0, n - horizon + 1)),
        horizon=horizon,
        seed=int(rng.integers(0, 2 ** 31 - 1)),
        initial_soc=float(rng.uniform(bat.soc_min, bat.soc_max)),
        grid_schedule=None,
        outage_windows=(),
    )


def collect_rollout(net: PolicyNet, base_cfg: EnvConfig, n_steps: int, episode_steps: int,
                    reward_scale: float, rng: np.random.Generator) -> RolloutBatch:
    """
    Sample n_steps transitions with the stochastic policy

    A window that reaches the last scenario row ends with value 0; any other
    cut (window end or the end of this batch) bootstraps from the critic.

    Args:
        net: Policy snapshot (not modified)
        base_cfg: Fleet, scenario and penalty; start/horizon/seed are drawn per window
        n_steps: Transitions to collect
        episode_steps: Window length in steps
        reward_scale: Multiplier applied to rewards for learning
        rng: Worker random stream (windows and action noise)
    """
    obs_raw = np.empty((n_steps, 7))
    obs = np.empty((n_steps, 7))
    actions = np.empty((n_steps, 2))
    log_probs = np.empty(n_steps)
    raw_rewards = np.empty(n_steps)
    values = np.empty(n_steps)
    ends = np.zeros(n_steps, dtype=bool)
    end_values = np.zeros(n_steps)
    episode_returns = []

    env = None
    cfg = None
    episode_return = 0.0
    state = None
    for i in range(n_steps):
        if env is None or env.done:
            cfg = _window_config(base_cfg, episode_steps, rng)
            env = MicrogridEnv(cfg)
            state = env.reset()
            episode_return = 0.0

        x_raw = obs_encode(state, net.power_scale_kw)
        x = net.normalizer.normalize(x_raw)
        sample = policy_sample(net, x, rng)
        obs_raw[i] = x_raw
        obs[i] = x
        actions[i] = sample.raw
        log_probs[i] = sample.log_prob
        values[i] = net.value(x)

        state, record = env.step(sample.action)
        raw_rewards[i] = record.reward
        episode_return += record.reward

        if env.done:
            ends[i] = True
            episode_returns.append(episode_return)
            if cfg.start_index + cfg.horizon < len(cfg.scenario):
                end_values[i] = net.value(net.normalizer.normalize(obs_encode(state, net.power_scale_kw)))
        elif i == n_steps - 1:
            ends[i] = True
            end_values[i] = net.value(net.normalizer.normalize(obs_encode(state, net.power_scale_kw)))

    return RolloutBatch(
        obs_raw=obs_raw,
        obs=obs,
        actions=actions,
        log_probs=log_probs,
        rewards=raw_rewards * reward_scale,
        raw_rewards=raw_rewards,
        values=values,
        ends=ends,
        end_values=end_values,
        episode_returns=episode_returns,
    )


def merge_batches(batches: list[RolloutBatch]) -> RolloutBatch:
    def cat(name):
        return np.concatenate([getattr(b, name) for b in batches])

    return RolloutBatch(
        obs_raw=cat("obs_raw"),
        obs=cat("obs"),
        actions=cat("actions"),
        log_probs=cat("log_probs"),
        rewards=cat("rewards"),
        raw_rewards=cat("raw_rewards"),
        values=cat("values"),
        ends=cat("ends"),
        end_values=cat("end_values"),
        episode_returns=[r for b in batches for r in b.episode_returns],
    )


def worker_rng(seed: int, iteration: int, worker: int) -> np.random.Generator:
    return np.random.default_rng([seed, iteration, worker])


def _rollout_job(job: tuple) -> RolloutBatch:
    """Picklable entry point for the process pool"""
    net, base_cfg, n_steps, episode_steps, reward_scale, seed, iteration, worker = job
    return collect_rollout(net, base_cfg, n_steps, episode_steps, reward_scale,
                           worker_rng(seed, iteration, worker))


def collect_parallel(net: PolicyNet, base_cfg: EnvConfig, n_steps: int, episode_steps: int,
                     reward_scale: float, seed: int, iteration: int, workers: int = 1) -> RolloutBatch:
    """
    Split n_steps across workers (remainder to the first ones) and merge in worker order

    The result depends on the worker count but not on process scheduling.
    """
    workers = max(1, min(workers, n_steps))
    base, extra = divmod(n_steps, workers)
    shares = [base + (1 if w < extra else 0) for w in range(workers)]

    jobs = [(net, base_cfg, shares[w], episode_steps, reward_scale, seed, iteration, w)
            for w in range(workers)]
    if workers == 1:
        return _rollout_job(jobs[0])
    with ProcessPoolExecutor(max_workers=workers) as pool:
        batches = list(pool.map(_rollout_job, jobs))
    return merge_batches(batches)
