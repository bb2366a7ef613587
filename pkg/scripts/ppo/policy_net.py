#!/usr/bin/env python3
"""
Actor-critic network for continuous dispatch, numpy only

Actor:  obs(7) → tanh(64) → tanh(64) → mean(2)      + state-independent log-std(2)
Critic: obs(7) → tanh(64) → tanh(64) → value(1)

Action dimension 0 is the battery command u_bat, dimension 1 the diesel
command u_dg. They are mapped to power after sampling:

    p_bat = clip(u_bat, −1, 1) · P_bat_max
    p_dg  = clip(u_dg,   0, 1) · P_dg_max

Log-probabilities are always taken on the raw (unclipped) sample.

Usage:
    net = PolicyNet.create(fleet, power_scale_kw=100.0, rng=np.random.default_rng(0))
    obs = net.normalizer.normalize(obs_encode(state, net.power_scale_kw))
    sample = policy_sample(net, obs, rng)
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..devices.params import DeviceFleet
from ..environment.microgrid_env import MgAction, MgState
from ..utils.errors import ParameterError, TrainingDivergenceError
from .ppo_math import (clipped_objective, clipped_objective_grad, gaussian_entropy,
                       gaussian_log_prob, prob_ratio, LOG_RATIO_CLAMP)

OBS_DIM = 7
ACT_DIM = 2
LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
NORM_CLIP = 10.0

ACTOR_KEYS = ("pi_w1", "pi_b1", "pi_w2", "pi_b2", "pi_w3", "pi_b3")
CRITIC_KEYS = ("v_w1", "v_b1", "v_w2", "v_b2", "v_w3", "v_b3")
PARAM_KEYS = ACTOR_KEYS + ("log_std",) + CRITIC_KEYS


def obs_encode(state: MgState, power_scale_kw: float) -> np.ndarray:
    """
    Raw 7-feature observation

    [soc, sin(2πh/24), cos(2πh/24), p_pv/scale, p_w/scale, p_load/scale, grid_up]
    """
    angle = 2.0 * np.pi * state.hour / 24.0
    return np.array([
        state.soc,
        np.sin(angle),
        np.cos(angle),
        state.p_pv_avail / power_scale_kw,
        state.p_w_avail / power_scale_kw,
        state.p_load / power_scale_kw,
        1.0 if state.grid_up else 0.0,
    ])


class RunningNormalizer:
    """Per-feature running mean/variance (parallel-merge update)"""

    def __init__(self, dim: int = OBS_DIM):
        self.mean = np.zeros(dim)
        self.var = np.ones(dim)
        self.count = 1e-4

    def update(self, batch: np.ndarray) -> None:
        batch = np.asarray(batch, dtype=np.float64).reshape(-1, len(self.mean))
        n = batch.shape[0]
        if n == 0:
            return
        b_mean = batch.mean(axis=0)
        b_var = batch.var(axis=0)
        delta = b_mean - self.mean
        total = self.count + n
        m2 = self.var * self.count + b_var * n + delta ** 2 * self.count * n / total
        self.mean = self.mean + delta * n / total
        self.var = m2 / total
        self.count = total

    def normalize(self, obs: np.ndarray) -> np.ndarray:
        z = (np.asarray(obs, dtype=np.float64) - self.mean) / np.sqrt(self.var + 1e-8)
        return np.clip(z, -NORM_CLIP, NORM_CLIP)

    def state_dict(self) -> dict:
        return {'mean': self.mean.copy(), 'var': self.var.copy(), 'count': float(self.count)}

    def load_state_dict(self, state: dict) -> None:
        self.mean = np.array(state['mean'], dtype=np.float64)
        self.var = np.array(state['var'], dtype=np.float64)
        self.count = float(state['count'])


def _layer_init(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    return rng.standard_normal((fan_in, fan_out)) / np.sqrt(fan_in)


def _mlp_forward(params: dict, prefix: str, x: np.ndarray) -> tuple[np.ndarray, tuple]:
    h1 = np.tanh(x @ params[f"{prefix}_w1"] + params[f"{prefix}_b1"])
    h2 = np.tanh(h1 @ params[f"{prefix}_w2"] + params[f"{prefix}_b2"])
    out = h2 @ params[f"{prefix}_w3"] + params[f"{prefix}_b3"]
    return out, (x, h1, h2)


def _mlp_backward(params: dict, prefix: str, cache: tuple, d_out: np.ndarray) -> dict:
    x, h1, h2 = cache
    grads = {
        f"{prefix}_w3": h2.T @ d_out,
        f"{prefix}_b3": d_out.sum(axis=0),
    }
    d_a2 = (d_out @ params[f"{prefix}_w3"].T) * (1.0 - h2 ** 2)
    grads[f"{prefix}_w2"] = h1.T @ d_a2
    grads[f"{prefix}_b2"] = d_a2.sum(axis=0)
    d_a1 = (d_a2 @ params[f"{prefix}_w2"].T) * (1.0 - h1 ** 2)
    grads[f"{prefix}_w1"] = x.T @ d_a1
    grads[f"{prefix}_b1"] = d_a1.sum(axis=0)
    return grads


@dataclass
class PolicyNet:
    """
    Parameters plus the scaling the policy was trained with

    Attributes:
        params: Weight arrays keyed by PARAM_KEYS
        normalizer: Observation statistics (frozen at evaluation)
        power_scale_kw: Divisor for the power features of obs_encode
        bat_max_kw: Battery power at |u_bat| = 1
        dg_max_kw: Diesel power at u_dg = 1
    """
    params: dict
    normalizer: RunningNormalizer
    power_scale_kw: float
    bat_max_kw: float
    dg_max_kw: float

    @classmethod
    def create(cls, fleet: DeviceFleet, power_scale_kw: float, rng: np.random.Generator,
               hidden: int = 64, init_log_std: float = -0.5) -> "PolicyNet":
        """Fresh network; the actor output layer starts at zero (mean action 0)"""
        if hidden < 1:
            raise ParameterError(f"hidden width must be >= 1, got {hidden}")
        if power_scale_kw <= 0:
            raise ParameterError(f"power_scale_kw must be > 0, got {power_scale_kw}")
        params = {}
        for prefix, out_dim in (("pi", ACT_DIM), ("v", 1)):
            params[f"{prefix}_w1"] = _layer_init(rng, OBS_DIM, hidden)
            params[f"{prefix}_b1"] = np.zeros(hidden)
            params[f"{prefix}_w2"] = _layer_init(rng, hidden, hidden)
            params[f"{prefix}_b2"] = np.zeros(hidden)
            params[f"{prefix}_w3"] = np.zeros((hidden, out_dim))
            params[f"{prefix}_b3"] = np.zeros(out_dim)
        params["log_std"] = np.full(ACT_DIM, float(np.clip(init_log_std, LOG_STD_MIN, LOG_STD_MAX)))
        return cls(params=params, normalizer=RunningNormalizer(OBS_DIM),
                   power_scale_kw=float(power_scale_kw),
                   bat_max_kw=fleet.battery.p_max_kw, dg_max_kw=fleet.diesel.max_kw)

    @property
    def hidden(self) -> int:
        return self.params["pi_w1"].shape[1]

    def actor(self, obs: np.ndarray) -> tuple[np.ndarray, tuple]:
        return _mlp_forward(self.params, "pi", np.atleast_2d(obs))

    def critic(self, obs: np.ndarray) -> tuple[np.ndarray, tuple]:
        return _mlp_forward(self.params, "v", np.atleast_2d(obs))

    def value(self, obs: np.ndarray) -> float:
        v, _ = self.critic(obs)
        return float(v[0, 0])

    def clamp_log_std(self) -> None:
        np.clip(self.params["log_std"], LOG_STD_MIN, LOG_STD_MAX, out=self.params["log_std"])

    def to_action(self, u: np.ndarray) -> MgAction:
        """Map a raw command vector to physical set-points"""
        return MgAction(
            p_bat_kw=float(np.clip(u[0], -1.0, 1.0) * self.bat_max_kw),
            p_dg_kw=float(np.clip(u[1], 0.0, 1.0) * self.dg_max_kw),
        )

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.params.values())


class PolicySample(NamedTuple):
    action: MgAction
    raw: np.ndarray
    log_prob: float


def _checked_mean(net: PolicyNet, obs: np.ndarray) -> np.ndarray:
    mean, _ = net.actor(obs)
    mean = mean[0]
    if not np.all(np.isfinite(mean)):
        raise TrainingDivergenceError(
            "Non-finite actor output",
            diagnostics={'mean': mean.tolist(), 'log_std': net.params["log_std"].tolist()},
        )
    return mean


def policy_sample(net: PolicyNet, obs: np.ndarray, rng: np.random.Generator) -> PolicySample:
    """
    Draw one action from the diagonal normal policy

    Args:
        net: Policy
        obs: Normalized observation
        rng: Random stream (two normal draws per call)

    Returns:
        PolicySample with the clipped physical action, the raw draw and its log-prob

    Raises:
        TrainingDivergenceError: If the actor output is not finite
    """
    mean = _checked_mean(net, obs)
    log_std = net.params["log_std"]
    raw = mean + np.exp(log_std) * rng.standard_normal(ACT_DIM)
    log_prob = float(gaussian_log_prob(raw, mean, log_std))
    return PolicySample(net.to_action(raw), raw, log_prob)


def greedy_action(net: PolicyNet, obs: np.ndarray) -> MgAction:
    """Deterministic action: the scaled mean"""
    return net.to_action(_checked_mean(net, obs))


class LossStats(NamedTuple):
    loss: float
    policy_loss: float
    value_loss: float
    entropy: float
    approx_kl: float
    clip_fraction: float


def ppo_loss(net: PolicyNet, obs: np.ndarray, actions: np.ndarray, log_prob_old: np.ndarray,
             advantages: np.ndarray, returns: np.ndarray, clip_eps: float,
             value_coef: float, entropy_coef: float) -> tuple[LossStats, dict]:
    """
    Total PPO loss and its gradient w.r.t. every parameter

        L = −mean(min(r·A, clip(r)·A)) + c_v·mean((V − R)²) − c_e·H

    Args:
        net: Current policy
        obs: Normalized observations (N, 7)
        actions: Raw sampled commands (N, 2)
        log_prob_old: Log-probs under the policy that collected the batch
        advantages: Advantage estimates (already normalized if desired)
        returns: Value targets
        clip_eps: Ratio clip ε
        value_coef: Value loss weight
        entropy_coef: Entropy bonus weight

    Returns:
        (LossStats, grads) with grads keyed like net.params
    """
    n = len(obs)
    log_std = net.params["log_std"]
    std = np.exp(log_std)

    mean, actor_cache = net.actor(obs)
    values, critic_cache = net.critic(obs)
    values = values[:, 0]

    log_prob = gaussian_log_prob(actions, mean, log_std)
    diff = log_prob - log_prob_old
    ratio = prob_ratio(log_prob, log_prob_old)
    surrogate = clipped_objective(ratio, advantages, clip_eps)
    policy_loss = -float(np.mean(surrogate))
    value_loss = float(np.mean((values - returns) ** 2))
    entropy = gaussian_entropy(log_std)
    loss = policy_loss + value_coef * value_loss - entropy_coef * entropy

    # d loss / d log π; the exponent clamp has zero slope outside ±20
    d_ratio = -clipped_objective_grad(ratio, advantages, clip_eps) / n
    d_ratio = np.where(np.abs(diff) < LOG_RATIO_CLAMP, d_ratio, 0.0)
    d_log_prob = d_ratio * ratio

    z = (actions - mean) / std
    d_mean = d_log_prob[:, None] * z / std
    grads = _mlp_backward(net.params, "pi", actor_cache, d_mean)
    grads["log_std"] = (d_log_prob[:, None] * (z ** 2 - 1.0)).sum(axis=0) - entropy_coef

    d_values = (value_coef * 2.0 / n) * (values - returns)
    grads.update(_mlp_backward(net.params, "v", critic_cache, d_values[:, None]))

    stats = LossStats(
        loss=float(loss),
        policy_loss=policy_loss,
        value_loss=value_loss,
        entropy=entropy,
        approx_kl=float(np.mean((ratio - 1.0) - np.log(ratio))),
        clip_fraction=float(np.mean(np.abs(ratio - 1.0) > clip_eps)),
    )
    return stats, grads
