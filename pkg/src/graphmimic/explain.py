"""Post-hoc policy explanations via edge and feature masks.

For one decision we optimize sigmoid-relaxed per-edge and per-feature
logits so the masked policy output stays close to the original output
(cross-entropy surrogate for the conditional entropy), plus L1 sparsity
pressure, then harden to the top-c_E edges and top-c_F features. The
edge mask scales each layer's message term; the self term is untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import worlds
from .numerics import (
    Tensor,
    adam_init,
    adam_step,
    add,
    backward,
    cross_entropy,
    scale,
    sigmoid,
    sum_all,
)
from .policy import ActionDistributions, PolicyParams, policy_forward, select_action
from .scenegraph import SceneGraph, encode_scene, feature_names
from .worlds import WorldSpec


@dataclass
class ExplainConfig:
    steps: int = 300
    lr: float = 1e-2
    edge_sparsity: float = 0.2
    feature_sparsity: float = 0.2
    mask_init: float = -1.0
    seed: int = 0


@dataclass
class Explanation:
    edge_mask: np.ndarray  # (E,) in [0, 1]
    feature_mask: np.ndarray  # (d,) in [0, 1]
    top_edges: list[tuple[int, int]]  # (src, dst) node indices, best first
    top_features: list[str]
    objective_trace: list[float]
    converged: bool
    chosen_object: int | None
    chosen_goal: int | None

    def to_json(self) -> dict:
        return {
            "chosen_object": self.chosen_object,
            "chosen_goal": self.chosen_goal,
            "top_edges": [[int(a), int(b)] for a, b in self.top_edges],
            "top_features": list(self.top_features),
            "edge_mask": [float(v) for v in self.edge_mask],
            "feature_mask": [float(v) for v in self.feature_mask],
            "converged": self.converged,
        }


@dataclass
class FeatureProfile:
    counts: dict[str, int] = field(default_factory=dict)

    def add(self, name: str) -> None:
        self.counts[name] = self.counts.get(name, 0) + 1

    def total(self) -> int:
        return sum(self.counts.values())

    def top(self, n: int = 2) -> list[str]:
        ranked = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return [name for name, _ in ranked[:n]]

    def entropy(self) -> float:
        total = self.total()
        if total == 0:
            return 0.0
        probs = np.array([c / total for c in self.counts.values()])
        return float(-(probs * np.log(probs)).sum())


def conditional_entropy_surrogate(original: ActionDistributions,
                                  masked: ActionDistributions) -> Tensor:
    """Sum over heads of cross_entropy(masked_head, target=original_head)."""
    total = None
    for name, head in original.heads().items():
        masked_head = masked.heads().get(name)
        if masked_head is None or masked_head.shape != head.shape:
            raise ValueError(f"head {name!r} missing or mismatched in masked output")
        term = cross_entropy(masked_head, Tensor(head.data.copy()))
        total = term if total is None else add(total, term)
    return total


def _top_k(values: np.ndarray, k: int) -> np.ndarray:
    order = np.argsort(-values, kind="stable")
    return order[: max(k, 0)]


def explain_decision(params: PolicyParams, graph: SceneGraph, c_edges: int = 3,
                     c_features: int = 1, config: ExplainConfig | None = None) -> Explanation:
    """Optimize the relaxed masks for one decision and harden them."""
    if c_edges < 1 or c_features < 1:
        raise ValueError("edge and feature budgets must be >= 1")
    config = config or ExplainConfig()
    frozen = params.frozen()
    original = policy_forward(graph, frozen)
    original_const = ActionDistributions(
        p_object=Tensor(original.p_object.data.copy()),
        p_goal=Tensor(original.p_goal.data.copy()),
        p_orientation=(
            Tensor(original.p_orientation.data.copy())
            if original.p_orientation is not None
            else None
        ),
        p_tray=Tensor(original.p_tray.data.copy()) if original.p_tray is not None else None,
    )
    action = select_action(original, mode="argmax")

    rng = np.random.default_rng(config.seed)
    n_edges = len(graph.edges)
    width = graph.feature_width
    # Start mostly-closed: the heavily degraded output gives the objective
    # real gradients, so whatever the decision needs has to fight its way
    # back up through the sparsity pressure.
    edge_logits = Tensor(
        config.mask_init + 0.1 * rng.standard_normal(n_edges).astype(np.float32),
        requires_grad=True,
    )
    feat_logits = Tensor(
        config.mask_init + 0.1 * rng.standard_normal(width).astype(np.float32),
        requires_grad=True,
    )
    masks = [edge_logits, feat_logits]
    opt = adam_init(masks, lr=config.lr)

    trace: list[float] = []
    best = np.inf
    best_edge = None
    best_feat = None
    for _ in range(config.steps):
        edge_mask = sigmoid(edge_logits)
        feat_mask = sigmoid(feat_logits)
        masked = policy_forward(graph, frozen, edge_weights=edge_mask, feature_mask=feat_mask)
        objective = conditional_entropy_surrogate(original_const, masked)
        loss = add(
            objective,
            add(
                scale(sum_all(edge_mask), config.edge_sparsity),
                scale(sum_all(feat_mask), config.feature_sparsity),
            ),
        )
        # best-so-far on the optimized total, not the bare surrogate: the
        # sparsity terms are what force the masks to commit
        value = loss.item()
        trace.append(value)
        if value < best:
            best = value
            best_edge = edge_mask.data.copy()
            best_feat = feat_mask.data.copy()
        backward(loss, masks)
        adam_step(masks, opt)

    # Plateau check: the end of the trace should sit at the best value found.
    converged = bool(trace and trace[-1] - best <= 1e-3)
    names = feature_names(width)
    edge_order = _top_k(best_edge, min(c_edges, n_edges))
    feat_order = _top_k(best_feat, min(c_features, width))
    return Explanation(
        edge_mask=best_edge,
        feature_mask=best_feat,
        top_edges=[(int(graph.edges[e, 0]), int(graph.edges[e, 1])) for e in edge_order],
        top_features=[names[f] for f in feat_order],
        objective_trace=trace,
        converged=converged,
        chosen_object=action.object_id,
        chosen_goal=action.goal_id,
    )


def feature_profile(params: PolicyParams, spec: WorldSpec, n_decisions: int,
                    c_edges: int = 3, c_features: int = 1,
                    config: ExplainConfig | None = None, seed: int = 0) -> FeatureProfile:
    """Explain up to n_decisions greedy steps and tally the top feature of each."""
    profile = FeatureProfile()
    episode = 0
    while profile.total() < n_decisions:
        ep_spec = replace(spec, seed=seed * 1000 + episode)
        state = worlds.reset(ep_spec)
        done = worlds.is_done(state)
        while not done and profile.total() < n_decisions:
            graph = encode_scene(state)
            explanation = explain_decision(params, graph, c_edges, c_features, config)
            profile.add(explanation.top_features[0])
            action = select_action(policy_forward(graph, params), mode="argmax")
            state, _, done = worlds.step(state, action)
        episode += 1
    return profile
