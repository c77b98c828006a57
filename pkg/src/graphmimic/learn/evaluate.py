"""Greedy rollout evaluation: mean goals-fraction over episodes and seeds."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .. import worlds
from ..policy import PolicyParams, policy_forward, select_action
from ..scenegraph import encode_scene
from ..worlds import WorldSpec


@dataclass
class EvalReport:
    scenario: str
    mean: float
    std: float | None  # std over seed means; needs >= 3 seeds
    success_rate: float
    seed_means: dict[int, float] = field(default_factory=dict)
    episodes: list[dict] = field(default_factory=list)

    def row(self) -> str:
        std = f"{self.std:.3f}" if self.std is not None else "  -  "
        return (
            f"{self.scenario:<28} {self.mean:.3f} ± {std}  "
            f"success {self.success_rate:.2f}"
        )


def greedy_policy(params: PolicyParams):
    """Wrap params as a state -> action callable with argmax selection."""

    def act(state):
        return select_action(policy_forward(encode_scene(state), params), mode="argmax")

    return act


def rollout(policy, spec: WorldSpec, max_steps: int | None = None):
    """One episode under `policy` (a state -> ActionTuple callable)."""
    state = worlds.reset(spec)
    done = worlds.is_done(state)
    steps = 0
    while not done:
        action = policy(state)
        state, _, done = worlds.step(state, action)
        steps += 1
        if max_steps is not None and steps >= max_steps:
            break
    return state, steps


def evaluate(policy_or_params, spec: WorldSpec, n_episodes: int = 50,
             seeds=(0, 1, 2), scenario: str | None = None) -> EvalReport:
    """Greedy rollouts; per-seed episode seeds are seed*1000 + episode."""
    policy = (
        greedy_policy(policy_or_params)
        if isinstance(policy_or_params, PolicyParams)
        else policy_or_params
    )
    seed_means: dict[int, float] = {}
    episodes: list[dict] = []
    successes = 0
    fractions: list[float] = []
    for seed in seeds:
        per_seed: list[float] = []
        for ep in range(n_episodes):
            ep_spec = replace(spec, seed=seed * 1000 + ep)
            final, steps = rollout(policy, ep_spec)
            frac = worlds.goals_fraction(final)
            per_seed.append(frac)
            fractions.append(frac)
            if frac >= 1.0:
                successes += 1
            episodes.append({"seed": seed, "episode": ep, "fraction": frac, "steps": steps})
        seed_means[seed] = float(np.mean(per_seed))
    means = list(seed_means.values())
    std = float(np.std(means)) if len(means) >= 3 else None
    return EvalReport(
        scenario=scenario or f"{spec.family} k={spec.k}",
        mean=float(np.mean(fractions)),
        std=std,
        success_rate=successes / max(len(fractions), 1),
        seed_means=seed_means,
        episodes=episodes,
    )
