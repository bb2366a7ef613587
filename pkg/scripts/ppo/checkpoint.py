#!/usr/bin/env python3
"""
PPO checkpoints as versioned .npz containers

Arrays:
    param/<key>     network parameters
    adam_m/<key>    first moments
    adam_v/<key>    second moments
    norm/mean, norm/var
Plus 'meta', a JSON string with format/version, TrainConfig, counters,
policy scaling and the training log so far.
"""

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..utils.errors import IntegrityError
from .optimizer import Adam
from .policy_net import PARAM_KEYS, PolicyNet, RunningNormalizer

CHECKPOINT_FORMAT = "microgrid-ppo-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class Checkpoint:
    net: PolicyNet
    optimizer_state: dict
    train_config: dict
    iteration: int
    steps: int
    log: list = field(default_factory=list)


def save_checkpoint(path: Path, net: PolicyNet, optimizer: Adam, train_config: dict,
                    iteration: int, steps: int, log: list) -> Path:
    """Write to a temp file, then rename into place"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    arrays = {}
    for k in PARAM_KEYS:
        arrays[f"param/{k}"] = net.params[k]
        arrays[f"adam_m/{k}"] = optimizer.m[k]
        arrays[f"adam_v/{k}"] = optimizer.v[k]
    norm = net.normalizer.state_dict()
    arrays["norm/mean"] = norm['mean']
    arrays["norm/var"] = norm['var']

    meta = {
        'format': CHECKPOINT_FORMAT,
        'version': CHECKPOINT_VERSION,
        'train_config': train_config,
        'iteration': iteration,
        'steps': steps,
        'norm_count': norm['count'],
        'power_scale_kw': net.power_scale_kw,
        'bat_max_kw': net.bat_max_kw,
        'dg_max_kw': net.dg_max_kw,
        'adam': {'t': optimizer.t, 'lr': optimizer.lr, 'beta1': optimizer.beta1,
                 'beta2': optimizer.beta2, 'eps': optimizer.eps},
        'log': log,
    }
    arrays["meta"] = np.array(json.dumps(meta, sort_keys=True))

    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        np.savez(f, **arrays)
    os.replace(tmp, path)
    return path


def load_checkpoint(path: Path) -> Checkpoint:
    """
    Read a checkpoint written by save_checkpoint

    Raises:
        FileNotFoundError: If path does not exist
        IntegrityError: On unknown format, unsupported version or missing arrays
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")

    with np.load(path, allow_pickle=False) as data:
        if "meta" not in data.files:
            raise IntegrityError(f"{path.name}: not a PPO checkpoint (no meta)")
        meta = json.loads(str(data["meta"]))
        if meta.get('format') != CHECKPOINT_FORMAT:
            raise IntegrityError(f"{path.name}: unknown format {meta.get('format')!r}")
        if meta.get('version') != CHECKPOINT_VERSION:
            raise IntegrityError(
                f"{path.name}: checkpoint version {meta.get('version')} unsupported "
                f"(expected {CHECKPOINT_VERSION})"
            )
        try:
            params = {k: np.array(data[f"param/{k}"]) for k in PARAM_KEYS}
            m = {k: np.array(data[f"adam_m/{k}"]) for k in PARAM_KEYS}
            v = {k: np.array(data[f"adam_v/{k}"]) for k in PARAM_KEYS}
            norm_mean = np.array(data["norm/mean"])
            norm_var = np.array(data["norm/var"])
        except KeyError as e:
            raise IntegrityError(f"{path.name}: missing array {e}") from e

    normalizer = RunningNormalizer(len(norm_mean))
    normalizer.load_state_dict({'mean': norm_mean, 'var': norm_var, 'count': meta['norm_count']})
    net = PolicyNet(params=params, normalizer=normalizer,
                    power_scale_kw=meta['power_scale_kw'],
                    bat_max_kw=meta['bat_max_kw'], dg_max_kw=meta['dg_max_kw'])
    adam = meta['adam']
    return Checkpoint(
        net=net,
        optimizer_state={'t': adam['t'], 'm': m, 'v': v},
        train_config=meta['train_config'],
        iteration=int(meta['iteration']),
        steps=int(meta['steps']),
        log=list(meta.get('log', [])),
    )
