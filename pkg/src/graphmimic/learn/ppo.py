"""Clipped-surrogate PPO baselines over the block worlds.

Variants: 'gnn' and 'mlp' train a fresh policy per stack size; 'gnn-seq'
warm-starts each stage from the previous one; 'gnn-demo' adds a
cross-entropy-to-expert auxiliary loss weighted by lambda_il. Exact
numeric parity with any particular PPO library is not claimed; the
acceptance checks are ordering properties.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .. import worlds
from ..demos import DemoDataset, make_targets
from ..numerics import (
    Tensor,
    adam_init,
    adam_step,
    add,
    backward,
    clamp,
    cross_entropy,
    entropy,
    exp,
    log,
    minimum,
    mul,
    neg,
    pick,
    scale,
    sub,
)
from ..policy import GnnConfig, PolicyParams, init_policy, policy_forward
from ..scenegraph import encode_scene
from ..worlds import WorldSpec

VARIANTS = ("mlp", "gnn", "gnn-seq", "gnn-demo")


@dataclass
class RLConfig:
    interactions_per_stack: int = 2000
    clip_eps: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    lambda_il: float = 0.0
    k_base: int = 2
    k_max: int = 9
    rollout_steps: int = 200
    update_epochs: int = 4
    minibatch_size: int = 50
    lr: float = 3e-4
    hidden_layers: int = 3
    hidden_width: int = 64
    demo_batch: int = 16
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.clip_eps < 1.0:
            raise ValueError("clip_eps must lie in (0, 1)")
        if not 0.0 < self.gamma <= 1.0 or not 0.0 < self.gae_lambda <= 1.0:
            raise ValueError("gamma and gae_lambda must lie in (0, 1]")
        if self.lambda_il < 0.0:
            raise ValueError("lambda_il must be >= 0")


def ladder_specs(config: RLConfig, family: str = "kblock", seed: int | None = None):
    """The K = k_base .. k_max curriculum ladder."""
    base = seed if seed is not None else config.seed
    return [
        WorldSpec(family=family, k=k, seed=base)
        for k in range(config.k_base, config.k_max + 1)
    ]


def total_interactions(config: RLConfig) -> int:
    return (config.k_max - config.k_base + 1) * config.interactions_per_stack


def gae(rewards, values, gamma: float, lam: float) -> np.ndarray:
    """Generalized advantage estimates for one episode (terminal value 0)."""
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if rewards.shape != values.shape:
        raise ValueError("rewards and values must align")
    n = len(rewards)
    adv = np.zeros(n, dtype=np.float64)
    running = 0.0
    for t in range(n - 1, -1, -1):
        next_value = values[t + 1] if t + 1 < n else 0.0
        delta = rewards[t] + gamma * next_value - values[t]
        running = delta + gamma * lam * running
        adv[t] = running
    return adv


def clipped_objective(ratio: float, advantage: float, clip_eps: float) -> float:
    """Scalar reference form of the PPO clipped surrogate."""
    return min(ratio * advantage, float(np.clip(ratio, 1 - clip_eps, 1 + clip_eps)) * advantage)


@dataclass
class PPOResult:
    final: PolicyParams
    stages: dict[int, PolicyParams] = field(default_factory=dict)
    stage_initial: dict[int, PolicyParams] = field(default_factory=dict)
    metrics: list[dict] = field(default_factory=list)


def _policy_config(spec: WorldSpec, config: RLConfig, kind: str, architecture: str) -> GnnConfig:
    if kind == "mlp":
        probe = encode_scene(worlds.reset(spec))
        return GnnConfig(
            architecture="mlp",
            hidden_layers=config.hidden_layers,
            hidden_width=config.hidden_width,
            feature_width=probe.feature_width,
            n_objects=probe.n_objects,
            n_goals=probe.n_goals,
            with_value=True,
        )
    return GnnConfig(
        architecture=architecture,
        hidden_layers=config.hidden_layers,
        hidden_width=config.hidden_width,
        feature_width=5,
        with_value=True,
    )


def _sample_index(rng: np.random.Generator, probs: np.ndarray) -> int:
    p = probs.astype(np.float64)
    return int(rng.choice(len(p), p=p / p.sum()))


def _collect_rollout(spec: WorldSpec, params: PolicyParams, rng: np.random.Generator,
                     budget_left: int, target_steps: int):
    """Whole episodes until target_steps transitions (or budget) are stored."""
    episodes = []
    steps = 0
    ep_returns = []
    while steps < min(target_steps, budget_left):
        ep_spec = replace(spec, seed=int(rng.integers(0, 2**31 - 1)))
        state = worlds.reset(ep_spec)
        ep = {"graphs": [], "a_obj": [], "a_goal": [], "logp": [], "value": [], "reward": []}
        done = worlds.is_done(state)
        ep_return = 0.0
        while not done:
            graph = encode_scene(state)
            dists = policy_forward(graph, params)
            a_obj = _sample_index(rng, dists.p_object.data)
            a_goal = _sample_index(rng, dists.p_goal.data)
            logp = float(
                np.log(max(dists.p_object.data[a_obj], 1e-12))
                + np.log(max(dists.p_goal.data[a_goal], 1e-12))
            )
            action = worlds.ActionTuple(object_id=a_obj, goal_id=a_goal)
            state, reward, done = worlds.step(state, action)
            ep["graphs"].append(graph)
            ep["a_obj"].append(a_obj)
            ep["a_goal"].append(a_goal)
            ep["logp"].append(logp)
            ep["value"].append(float(dists.value.data))
            ep["reward"].append(reward)
            ep_return += reward
            steps += 1
        episodes.append(ep)
        ep_returns.append(ep_return)
    return episodes, steps, float(np.mean(ep_returns)) if ep_returns else 0.0


def _flatten_rollout(episodes, config: RLConfig):
    graphs, a_obj, a_goal, logp, adv, ret = [], [], [], [], [], []
    for ep in episodes:
        advantages = gae(ep["reward"], ep["value"], config.gamma, config.gae_lambda)
        returns = advantages + np.asarray(ep["value"], dtype=np.float64)
        graphs.extend(ep["graphs"])
        a_obj.extend(ep["a_obj"])
        a_goal.extend(ep["a_goal"])
        logp.extend(ep["logp"])
        adv.extend(advantages.tolist())
        ret.extend(returns.tolist())
    adv = np.asarray(adv, dtype=np.float64)
    if len(adv) > 1 and adv.std() > 1e-8:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    return graphs, a_obj, a_goal, np.asarray(logp), adv, np.asarray(ret)


def _demo_samples(demos_dataset: DemoDataset):
    samples = []
    for pair in demos_dataset.pairs():
        graph = encode_scene(pair.scene)
        targets = make_targets(pair.action, graph.n_objects, graph.n_goals)
        if "object" in targets and "goal" in targets:
            samples.append((graph, Tensor(targets["object"]), Tensor(targets["goal"])))
    return samples


def _update(params: PolicyParams, opt, batch, config: RLConfig,
            rng: np.random.Generator, demo_samples, demo_rng) -> None:
    graphs, a_obj, a_goal, logp_old, adv, ret = batch
    n = len(graphs)
    for _ in range(config.update_epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.minibatch_size):
            mb = order[start : start + config.minibatch_size]
            total = None
            for i in mb:
                dists = policy_forward(graphs[i], params)
                logp_new = add(
                    log(pick(dists.p_object, a_obj[i])), log(pick(dists.p_goal, a_goal[i]))
                )
                ratio = exp(sub(logp_new, Tensor(np.float32(logp_old[i]))))
                clipped = clamp(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps)
                surrogate = minimum(scale(ratio, float(adv[i])), scale(clipped, float(adv[i])))
                pi_loss = neg(surrogate)
                v_err = sub(dists.value, Tensor(np.float32(ret[i])))
                v_loss = mul(v_err, v_err)
                ent = add(entropy(dists.p_object), entropy(dists.p_goal))
                sample_loss = add(
                    add(pi_loss, scale(v_loss, config.value_coef)),
                    scale(ent, -config.entropy_coef),
                )
                total = sample_loss if total is None else add(total, sample_loss)
            loss = scale(total, 1.0 / len(mb))
            if config.lambda_il > 0.0 and demo_samples:
                idxs = demo_rng.integers(0, len(demo_samples), size=config.demo_batch)
                aux = None
                for j in idxs:
                    graph, t_obj, t_goal = demo_samples[int(j)]
                    d = policy_forward(graph, params)
                    ce = add(cross_entropy(d.p_object, t_obj), cross_entropy(d.p_goal, t_goal))
                    aux = ce if aux is None else add(aux, ce)
                loss = add(loss, scale(aux, config.lambda_il / len(idxs)))
            backward(loss, params.parameters())
            adam_step(params.parameters(), opt)


def train_ppo(specs: list[WorldSpec], config: RLConfig, variant: str = "gnn-seq",
              demos_dataset: DemoDataset | None = None,
              architecture: str = "sage") -> PPOResult:
    """Run the PPO baseline over a spec ladder; returns per-stage params."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "gnn-demo" and config.lambda_il > 0.0 and demos_dataset is None:
        raise ValueError("gnn-demo with lambda_il > 0 needs a demo dataset")
    kind = "mlp" if variant == "mlp" else "gnn"
    warm = variant in ("gnn-seq", "gnn-demo")
    demo_samples = (
        _demo_samples(demos_dataset)
        if (variant == "gnn-demo" and config.lambda_il > 0.0 and demos_dataset)
        else []
    )
    result = PPOResult(final=None)
    params: PolicyParams | None = None
    for stage, spec in enumerate(specs):
        rng = np.random.default_rng((config.seed, stage))
        demo_rng = np.random.default_rng((config.seed, stage, 77))
        if params is None or not warm or kind == "mlp":
            params = init_policy(_policy_config(spec, config, kind, architecture),
                                 seed=config.seed + stage)
        else:
            params = params.clone()
        result.stage_initial[spec.k] = params.clone()
        opt = adam_init(params.parameters(), lr=config.lr)
        used = 0
        while used < config.interactions_per_stack:
            episodes, steps, mean_return = _collect_rollout(
                spec, params, rng, config.interactions_per_stack - used, config.rollout_steps
            )
            if steps == 0:
                break
            used += steps
            batch = _flatten_rollout(episodes, config)
            _update(params, opt, batch, config, rng, demo_samples, demo_rng)
            result.metrics.append(
                {"k": spec.k, "interactions": used, "mean_return": mean_return, "variant": variant}
            )
        result.stages[spec.k] = params.clone()
    result.final = params
    return result
