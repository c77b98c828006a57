"""Imitation training: minimize the summed per-head cross-entropy.

Each demo pair becomes (scene graph, one-hot targets); minibatches
average the per-sample losses and take one Adam step. Training is
bit-deterministic given the seed.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from ..demos import DemoDataset, augment, make_targets
from ..numerics import (
    Tensor,
    adam_init,
    adam_step,
    add,
    backward,
    cross_entropy,
    scale,
)
from ..policy import GnnConfig, PolicyParams, init_policy, policy_forward
from ..scenegraph import encode_scene


class TrainingError(RuntimeError):
    """Training diverged (non-finite loss)."""


@dataclass
class ILConfig:
    architecture: str = "sage"
    epochs: int = 200
    batch_size: int = 32
    lr: float = 1e-3
    seed: int = 0
    augment_factor: int = 10
    hidden_layers: int = 3
    hidden_width: int = 64
    log_path: str | None = None

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1 or self.lr <= 0 or self.augment_factor < 1:
            raise ValueError("hyperparameters must be positive")


def _prepare_samples(dataset: DemoDataset):
    """Encode every pair once; returns (graphs, target dicts, feature width, heads)."""
    prepared = []
    heads: set[str] = set()
    width = None
    for pair in dataset.pairs():
        graph = encode_scene(pair.scene)
        targets = {
            name: Tensor(arr)
            for name, arr in make_targets(pair.action, graph.n_objects, graph.n_goals).items()
        }
        heads.update(targets)
        if width is None:
            width = graph.feature_width
        elif width != graph.feature_width:
            raise ValueError("dataset mixes feature widths")
        prepared.append((graph, targets))
    return prepared, width, heads


def _head_tuple(heads: set[str]) -> tuple[str, ...]:
    order = ("object", "goal", "orientation", "tray")
    return tuple(h for h in order if h in heads)


def train_il(dataset: DemoDataset, config: ILConfig) -> PolicyParams:
    """Train a policy on expert pairs; returns the best-by-training-loss params."""
    if dataset.n_pairs() == 0:
        raise ValueError("cannot train on an empty dataset")
    working = (
        augment(dataset, config.augment_factor, seed=config.seed)
        if config.augment_factor > 1
        else dataset
    )
    samples, width, head_set = _prepare_samples(working)
    gnn_config = GnnConfig(
        architecture=config.architecture,
        hidden_layers=config.hidden_layers,
        hidden_width=config.hidden_width,
        feature_width=width,
        heads=_head_tuple(head_set),
    )
    params = init_policy(gnn_config, seed=config.seed)
    if config.epochs == 0:
        return params

    opt = adam_init(params.parameters(), lr=config.lr)
    rng = np.random.default_rng(config.seed)
    log_fh = open(config.log_path, "w", encoding="utf-8") if config.log_path else None
    best_loss = np.inf
    best = params.clone()
    started = time.time()
    try:
        for epoch in range(config.epochs):
            order = rng.permutation(len(samples))
            epoch_loss = 0.0
            head_losses: dict[str, float] = {}
            for start in range(0, len(order), config.batch_size):
                batch = order[start : start + config.batch_size]
                total = None
                for idx in batch:
                    graph, targets = samples[idx]
                    dists = policy_forward(graph, params)
                    per_head = dists.heads()
                    sample_loss = None
                    for name, target in targets.items():
                        ce = cross_entropy(per_head[name], target)
                        head_losses[name] = head_losses.get(name, 0.0) + ce.item()
                        sample_loss = ce if sample_loss is None else add(sample_loss, ce)
                    total = sample_loss if total is None else add(total, sample_loss)
                loss = scale(total, 1.0 / len(batch))
                value = loss.item()
                if not np.isfinite(value):
                    raise TrainingError(
                        f"loss became non-finite at epoch {epoch} "
                        f"(lr={config.lr}, batch={config.batch_size})"
                    )
                epoch_loss += value * len(batch)
                backward(loss, params.parameters())
                adam_step(params.parameters(), opt)
            epoch_loss /= len(samples)
            if epoch_loss < best_loss:
                best_loss = epoch_loss
                best = params.clone()
            if log_fh:
                record = {
                    "event": "epoch",
                    "epoch": epoch,
                    "loss": epoch_loss,
                    "elapsed_s": round(time.time() - started, 3),
                }
                for name, v in head_losses.items():
                    record[f"loss_{name}"] = v / len(samples)
                log_fh.write(json.dumps(record) + "\n")
    finally:
        if log_fh:
            log_fh.close()
    return best
