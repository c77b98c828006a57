"""Imitation training, PPO baselines, and the evaluation harness."""

from .evaluate import EvalReport, evaluate, greedy_policy, rollout
from .imitation import ILConfig, TrainingError, train_il
from .ppo import (
    PPOResult,
    RLConfig,
    VARIANTS,
    clipped_objective,
    gae,
    ladder_specs,
    total_interactions,
    train_ppo,
)

__all__ = [
    "EvalReport", "ILConfig", "PPOResult", "RLConfig", "TrainingError",
    "VARIANTS", "clipped_objective", "evaluate", "gae", "greedy_policy",
    "ladder_specs", "rollout", "total_interactions", "train_il", "train_ppo",
]
