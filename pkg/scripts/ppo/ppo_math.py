#!/usr/bin/env python3
"""
PPO building blocks on plain numpy arrays

1. compute_gae - generalized advantage estimation with episode cuts
2. prob_ratio - π_new / π_old from log-probabilities (exponent clamped)
3. clipped_objective - min(r·A, clip(r, 1−ε, 1+ε)·A) and its d/dr
4. Diagonal-normal log-density and entropy
"""

from typing import Optional

import numpy as np

from ..utils.errors import ParameterError

LOG_RATIO_CLAMP = 20.0
LOG_2PI = float(np.log(2.0 * np.pi))


def compute_gae(rewards: np.ndarray, values: np.ndarray, bootstrap_value: float,
                gamma: float, lam: float, ends: Optional[np.ndarray] = None,
                end_values: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Generalized advantage estimation

        δ_t = r_t + γ·V_{t+1} − V_t
        A_t = Σ_k (γλ)^k δ_{t+k}     (the sum stops at episode ends)
        returns_t = A_t + V_t

    Args:
        rewards: Per-step rewards
        values: Critic values V(s_t), same length as rewards
        bootstrap_value: V(s_T) after the last step (0 if terminal)
        gamma: Discount factor
        lam: GAE λ
        ends: Optional flags marking the last step of an episode inside the batch
        end_values: V(s_{t+1}) to use where ends[t] is set (0 for a true terminal)

    Returns:
        (advantages, returns), both unnormalized
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if rewards.shape != values.shape:
        raise ParameterError(
            f"rewards and values length mismatch: {rewards.shape} vs {values.shape}"
        )
    if ends is not None and (end_values is None or len(ends) != len(rewards)):
        raise ParameterError("ends needs matching end_values of the same length as rewards")

    n = len(rewards)
    advantages = np.zeros(n)
    last = 0.0
    for t in reversed(range(n)):
        if ends is not None and ends[t]:
            next_value = end_values[t]
            last = 0.0
        elif t == n - 1:
            next_value = bootstrap_value
            last = 0.0
        else:
            next_value = values[t + 1]
        delta = rewards[t] + gamma * next_value - values[t]
        last = delta + gamma * lam * last
        advantages[t] = last
    return advantages, advantages + values


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    """Zero mean, unit variance per batch"""
    std = advantages.std()
    return (advantages - advantages.mean()) / (std + 1e-8)


def prob_ratio(log_prob_new: np.ndarray, log_prob_old: np.ndarray) -> np.ndarray:
    """exp(log π_new − log π_old), exponent clamped to ±20"""
    diff = np.clip(np.asarray(log_prob_new) - np.asarray(log_prob_old),
                   -LOG_RATIO_CLAMP, LOG_RATIO_CLAMP)
    return np.exp(diff)


def clipped_objective(ratio: np.ndarray, advantage: np.ndarray, clip_eps: float) -> np.ndarray:
    """Per-sample clipped surrogate min(r·A, clip(r, 1−ε, 1+ε)·A)"""
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps)
    return np.minimum(ratio * advantage, clipped * advantage)


def clipped_objective_grad(ratio: np.ndarray, advantage: np.ndarray, clip_eps: float) -> np.ndarray:
    """
    d/dr of clipped_objective

    A where the unclipped branch is the minimum (including inside the band),
    0 where the clipped branch wins.
    """
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps)
    unclipped_active = ratio * advantage <= clipped * advantage
    return np.where(unclipped_active, advantage, 0.0)


def gaussian_log_prob(actions: np.ndarray, mean: np.ndarray, log_std: np.ndarray) -> np.ndarray:
    """Log-density of a diagonal normal, summed over the last axis"""
    std = np.exp(log_std)
    z = (actions - mean) / std
    return np.sum(-0.5 * z ** 2 - log_std - 0.5 * LOG_2PI, axis=-1)


def gaussian_entropy(log_std: np.ndarray) -> float:
    """Entropy of a diagonal normal (state-independent std)"""
    return float(np.sum(log_std + 0.5 * (LOG_2PI + 1.0)))
