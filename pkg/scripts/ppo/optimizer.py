#!/usr/bin/env python3
"""Adam with bias-corrected moments and global-norm gradient clipping"""

from typing import Optional

import numpy as np


def clip_grad_norm(grads: dict, max_norm: Optional[float]) -> float:
    """Scale grads in place so their global L2 norm is at most max_norm; returns the pre-clip norm"""
    total = float(np.sqrt(sum(float(np.sum(g ** 2)) for g in grads.values())))
    if max_norm is not None and max_norm > 0 and total > max_norm:
        scale = max_norm / (total + 1e-12)
        for g in grads.values():
            g *= scale
    return total


class Adam:
    def __init__(self, params: dict, lr: float = 3e-4, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        """In-place update of params; lr = 0 leaves them bit-exactly untouched"""
        self.t += 1
        c1 = 1 - self.beta1 ** self.t
        c2 = 1 - self.beta2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g ** 2
            if self.lr != 0:
                params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)

    def state_dict(self) -> dict:
        return {'t': self.t, 'm': self.m, 'v': self.v,
                'lr': self.lr, 'beta1': self.beta1, 'beta2': self.beta2, 'eps': self.eps}

    def load_state_dict(self, state: dict) -> None:
        self.t = int(state['t'])
        self.m = {k: np.array(v, dtype=np.float64) for k, v in state['m'].items()}
        self.v = {k: np.array(v, dtype=np.float64) for k, v in state['v'].items()}
