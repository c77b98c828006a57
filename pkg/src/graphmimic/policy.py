"""GNN policy architectures, the MLP baseline, and the action heads.

Each architecture stacks `hidden_layers` message-passing layers over the
scene graph, reads a scalar per node through separate object/goal
projections, and softmaxes each subset into a categorical distribution.
Dishwasher policies add 6-way orientation and 3-way tray heads fed from
a mean-pooled graph embedding; RL policies add a pooled value head.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .numerics import (
    Tensor,
    add,
    div,
    gather_rows,
    leaky_relu,
    matmul,
    mean_rows,
    mul,
    relu,
    reshape,
    segment_softmax,
    segment_sum,
    sigmoid,
    softmax,
    sub,
    tanh,
    ShapeError,
)
from .scenegraph import SceneGraph, flat_features
from .worlds import ActionTuple, NOOP, TOGGLE_BOTTOM, TOGGLE_TOP

ARCHITECTURES = ("gcn", "sage", "gated", "attention", "mlp")
TRAY_CHOICES = (TOGGLE_TOP, TOGGLE_BOTTOM, NOOP)
N_TRAY = 3
N_ORIENT = 6


@dataclass
class GnnConfig:
    architecture: str = "sage"
    hidden_layers: int = 3
    hidden_width: int = 64
    attention_heads: int = 1
    feature_width: int = 5
    heads: tuple[str, ...] = ("object", "goal")
    with_value: bool = False
    # fixed sizes, used by the MLP baseline only
    n_objects: int | None = None
    n_goals: int | None = None

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.hidden_layers < 1:
            raise ValueError("hidden_layers must be >= 1")
        if self.attention_heads != 1:
            raise ValueError("only a single attention head is supported")
        if self.architecture == "mlp" and (self.n_objects is None or self.n_goals is None):
            raise ValueError("mlp config needs fixed n_objects and n_goals")
        self.heads = tuple(self.heads)

    def to_json(self) -> dict:
        d = asdict(self)
        d["heads"] = list(self.heads)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "GnnConfig":
        d = dict(d)
        d["heads"] = tuple(d.get("heads", ("object", "goal")))
        return cls(**d)


@dataclass
class ActionDistributions:
    p_object: Tensor
    p_goal: Tensor
    p_orientation: Tensor | None = None
    p_tray: Tensor | None = None
    value: Tensor | None = None

    def heads(self) -> dict[str, Tensor]:
        out = {"object": self.p_object, "goal": self.p_goal}
        if self.p_orientation is not None:
            out["orientation"] = self.p_orientation
        if self.p_tray is not None:
            out["tray"] = self.p_tray
        return out


@dataclass
class PolicyParams:
    config: GnnConfig
    tensors: dict[str, Tensor] = field(default_factory=dict)

    def parameters(self) -> list[Tensor]:
        return list(self.tensors.values())

    def clone(self) -> "PolicyParams":
        out = PolicyParams(config=self.config)
        for name, t in self.tensors.items():
            c = Tensor(t.data.copy(), requires_grad=t.requires_grad)
            out.tensors[name] = c
        return out

    def frozen(self) -> "PolicyParams":
        """Copy with gradient tracking off; used by the explainer."""
        out = self.clone()
        for t in out.tensors.values():
            t.requires_grad = False
        return out


def _uniform(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(np.float32)


def init_policy(config: GnnConfig, seed: int = 0) -> PolicyParams:
    """Seed-controlled fan-in-uniform initialization for any architecture."""
    rng = np.random.default_rng(seed)
    params = PolicyParams(config=config)

    def param(name: str, data: np.ndarray):
        params.tensors[name] = Tensor(data, requires_grad=True)

    def linear(name: str, fan_in: int, fan_out: int):
        param(f"{name}.w", _uniform(rng, fan_in, (fan_in, fan_out)))
        param(f"{name}.b", np.zeros(fan_out, dtype=np.float32))

    d, w = config.feature_width, config.hidden_width
    arch = config.architecture

    if arch == "mlp":
        in_dim = (config.n_objects + config.n_goals) * d
        for i in range(config.hidden_layers):
            linear(f"layers.{i}", in_dim if i == 0 else w, w)
    elif arch == "gated":
        # A GRU cell cannot change width, so embed the input first.
        linear("embed", d, w)
        for i in range(config.hidden_layers):
            p = f"layers.{i}"
            param(f"{p}.msg.w", _uniform(rng, w, (w, w)))
            for gate in ("r", "z", "n"):
                param(f"{p}.gru.wi_{gate}", _uniform(rng, w, (w, w)))
                param(f"{p}.gru.wh_{gate}", _uniform(rng, w, (w, w)))
                param(f"{p}.gru.b_{gate}", np.zeros(w, dtype=np.float32))
            param(f"{p}.gru.b_hn", np.zeros(w, dtype=np.float32))
    else:
        for i in range(config.hidden_layers):
            p = f"layers.{i}"
            fan_in = d if i == 0 else w
            param(f"{p}.self.w", _uniform(rng, fan_in, (fan_in, w)))
            param(f"{p}.msg.w", _uniform(rng, fan_in, (fan_in, w)))
            param(f"{p}.b", np.zeros(w, dtype=np.float32))
            if arch == "attention":
                param(f"{p}.attn.src", _uniform(rng, w, (w, 1)))
                param(f"{p}.attn.dst", _uniform(rng, w, (w, 1)))

    # One shared per-node scalar readout; the K+L scores are split into the
    # object and goal heads afterwards. For the message-passing
    # architectures the readout is itself a (linear) graph layer, so a
    # node's score sees its in-edges directly; the GRU cannot change width,
    # so the gated variant reads out with a plain projection.
    if arch == "mlp":
        linear("head.object", w, config.n_objects)
        linear("head.goal", w, config.n_goals)
    elif arch == "gated":
        linear("readout", w, 1)
    else:
        param("readout.self.w", _uniform(rng, w, (w, 1)))
        param("readout.msg.w", _uniform(rng, w, (w, 1)))
        param("readout.b", np.zeros(1, dtype=np.float32))
        if arch == "attention":
            param("readout.attn.src", _uniform(rng, 1, (1, 1)))
            param("readout.attn.dst", _uniform(rng, 1, (1, 1)))
    if "orientation" in config.heads:
        linear("head.orientation", w, N_ORIENT)
    if "tray" in config.heads:
        linear("head.tray", w, N_TRAY)
    if config.with_value:
        linear("value", w, 1)
    return params


# ---------------------------------------------------------------------------
# message-passing layers


def _masked(rows: Tensor, edge_weights: Tensor | None) -> Tensor:
    if edge_weights is None:
        return rows
    return mul(rows, reshape(edge_weights, (rows.shape[0], 1)))


def gcn_layer(h: Tensor, edges: np.ndarray, w_self: Tensor, w_msg: Tensor,
              bias: Tensor, edge_weights: Tensor | None = None,
              activate: bool = True) -> Tensor:
    """h_i' = ReLU(W_self h_i + W_msg * sum_{j in N(i)} h_j); unit edge weights."""
    n = h.shape[0]
    src, dst = edges[:, 0], edges[:, 1]
    agg = segment_sum(_masked(gather_rows(h, src), edge_weights), dst, n)
    pre = add(add(matmul(h, w_self), matmul(agg, w_msg)), bias)
    return relu(pre) if activate else pre


def sage_layer(h: Tensor, edges: np.ndarray, w_self: Tensor, w_msg: Tensor,
               bias: Tensor, edge_weights: Tensor | None = None,
               activate: bool = True) -> Tensor:
    """h_i' = ReLU(W_self h_i + W_msg * mean_{j in N(i)} h_j)."""
    n = h.shape[0]
    src, dst = edges[:, 0], edges[:, 1]
    summed = segment_sum(_masked(gather_rows(h, src), edge_weights), dst, n)
    counts = np.bincount(dst, minlength=n).astype(np.float32)
    inv = Tensor((1.0 / np.maximum(counts, 1.0))[:, None])
    agg = mul(summed, inv)
    pre = add(add(matmul(h, w_self), matmul(agg, w_msg)), bias)
    return relu(pre) if activate else pre


def gated_layer(h: Tensor, edges: np.ndarray, gru: dict[str, Tensor],
                edge_weights: Tensor | None = None) -> Tensor:
    """h_i' = GRU(h_i, sum_j W_msg h_j) with the carry-through convention
    h' = (1 - z) * h + z * n."""
    n = h.shape[0]
    src, dst = edges[:, 0], edges[:, 1]
    transformed = matmul(h, gru["msg.w"])
    m = segment_sum(_masked(gather_rows(transformed, src), edge_weights), dst, n)
    r = sigmoid(add(add(matmul(m, gru["gru.wi_r"]), matmul(h, gru["gru.wh_r"])), gru["gru.b_r"]))
    z = sigmoid(add(add(matmul(m, gru["gru.wi_z"]), matmul(h, gru["gru.wh_z"])), gru["gru.b_z"]))
    cand = tanh(
        add(
            add(
                matmul(m, gru["gru.wi_n"]),
                mul(r, add(matmul(h, gru["gru.wh_n"]), gru["gru.b_hn"])),
            ),
            gru["gru.b_n"],
        )
    )
    one_minus_z = sub(Tensor(np.float32(1.0)), z)
    return add(mul(one_minus_z, h), mul(z, cand))


def attention_layer(h: Tensor, edges: np.ndarray, w_self: Tensor, w_msg: Tensor,
                    bias: Tensor, a_src: Tensor, a_dst: Tensor,
                    edge_weights: Tensor | None = None,
                    activate: bool = True) -> Tensor:
    """Single-head GAT-style layer: softmax-normalized scores over in-edges."""
    n = h.shape[0]
    src, dst = edges[:, 0], edges[:, 1]
    t = matmul(h, w_msg)
    score_src = reshape(matmul(t, a_src), (n,))
    score_dst = reshape(matmul(t, a_dst), (n,))
    e = leaky_relu(add(gather_rows(score_dst, dst), gather_rows(score_src, src)), 0.2)
    alpha = segment_softmax(e, dst, n)
    msg = mul(gather_rows(t, src), reshape(alpha, (len(src), 1)))
    agg = segment_sum(_masked(msg, edge_weights), dst, n)
    pre = add(add(matmul(h, w_self), agg), bias)
    return relu(pre) if activate else pre


def _run_layers(graph: SceneGraph, params: PolicyParams,
                edge_weights: Tensor | None, feature_mask: Tensor | None) -> Tensor:
    cfg = params.config
    if graph.feature_width != cfg.feature_width:
        raise ShapeError(
            f"graph feature width {graph.feature_width} != config {cfg.feature_width}"
        )
    t = params.tensors
    h = graph.node_features
    if feature_mask is not None:
        h = mul(h, reshape(feature_mask, (1, cfg.feature_width)))
    arch = cfg.architecture
    if arch == "gated":
        h = add(matmul(h, t["embed.w"]), t["embed.b"])
    for i in range(cfg.hidden_layers):
        p = f"layers.{i}"
        if arch == "gcn":
            h = gcn_layer(h, graph.edges, t[f"{p}.self.w"], t[f"{p}.msg.w"], t[f"{p}.b"], edge_weights)
        elif arch == "sage":
            h = sage_layer(h, graph.edges, t[f"{p}.self.w"], t[f"{p}.msg.w"], t[f"{p}.b"], edge_weights)
        elif arch == "gated":
            gru = {k[len(p) + 1 :]: v for k, v in t.items() if k.startswith(p + ".")}
            h = gated_layer(h, graph.edges, gru, edge_weights)
        elif arch == "attention":
            h = attention_layer(
                h, graph.edges, t[f"{p}.self.w"], t[f"{p}.msg.w"], t[f"{p}.b"],
                t[f"{p}.attn.src"], t[f"{p}.attn.dst"], edge_weights,
            )
    return h


def _pooled_head(pooled: Tensor, w: Tensor, b: Tensor, n_out: int) -> Tensor:
    logits = add(matmul(reshape(pooled, (1, pooled.shape[0])), w), b)
    return softmax(reshape(logits, (n_out,)))


def _node_scores(graph: SceneGraph, params: PolicyParams, h: Tensor,
                 edge_weights: Tensor | None) -> Tensor:
    """The shared K+L score vector, one scalar per node."""
    t = params.tensors
    arch = params.config.architecture
    if arch == "gated":
        scores = add(matmul(h, t["readout.w"]), t["readout.b"])
    elif arch == "gcn":
        scores = gcn_layer(h, graph.edges, t["readout.self.w"], t["readout.msg.w"],
                           t["readout.b"], edge_weights, activate=False)
    elif arch == "sage":
        scores = sage_layer(h, graph.edges, t["readout.self.w"], t["readout.msg.w"],
                            t["readout.b"], edge_weights, activate=False)
    else:
        scores = attention_layer(h, graph.edges, t["readout.self.w"], t["readout.msg.w"],
                                 t["readout.b"], t["readout.attn.src"],
                                 t["readout.attn.dst"], edge_weights, activate=False)
    return reshape(scores, (graph.n_nodes,))


def policy_forward(graph: SceneGraph, params: PolicyParams,
                   edge_weights: Tensor | None = None,
                   feature_mask: Tensor | None = None) -> ActionDistributions:
    """Run the policy on a graph of any size; returns per-head distributions."""
    cfg = params.config
    if cfg.architecture == "mlp":
        if edge_weights is not None or feature_mask is not None:
            raise ValueError("masking applies to graph policies only")
        return mlp_forward(flat_features(graph), params)
    if graph.n_objects == 0 or graph.n_goals == 0:
        raise ValueError("scene graph has an empty object or goal head")
    h = _run_layers(graph, params, edge_weights, feature_mask)
    t = params.tensors
    scores = _node_scores(graph, params, h, edge_weights)
    p_object = softmax(gather_rows(scores, graph.object_node_ids))
    p_goal = softmax(gather_rows(scores, graph.goal_node_ids))
    dists = ActionDistributions(p_object=p_object, p_goal=p_goal)
    pooled = None
    if "orientation" in cfg.heads or "tray" in cfg.heads or cfg.with_value:
        pooled = mean_rows(h)
    if "orientation" in cfg.heads:
        dists.p_orientation = _pooled_head(pooled, t["head.orientation.w"], t["head.orientation.b"], N_ORIENT)
    if "tray" in cfg.heads:
        dists.p_tray = _pooled_head(pooled, t["head.tray.w"], t["head.tray.b"], N_TRAY)
    if cfg.with_value:
        dists.value = reshape(add(matmul(reshape(pooled, (1, pooled.shape[0])), t["value.w"]), t["value.b"]), ())
    return dists


def mlp_forward(state_vector: Tensor, params: PolicyParams) -> ActionDistributions:
    """Fixed-size baseline; raises on any K/L other than the ones it was built for."""
    cfg = params.config
    if cfg.architecture != "mlp":
        raise ValueError("mlp_forward needs an mlp config")
    expected = (cfg.n_objects + cfg.n_goals) * cfg.feature_width
    if state_vector.data.ndim != 1 or state_vector.shape[0] != expected:
        raise ShapeError(
            f"mlp built for {cfg.n_objects}+{cfg.n_goals} nodes expects input "
            f"length {expected}, got {state_vector.shape}"
        )
    t = params.tensors
    h = reshape(state_vector, (1, expected))
    for i in range(cfg.hidden_layers):
        h = relu(add(matmul(h, t[f"layers.{i}.w"]), t[f"layers.{i}.b"]))
    k, l = cfg.n_objects, cfg.n_goals
    obj_logits = add(matmul(h, t["head.object.w"]), t["head.object.b"])
    goal_logits = add(matmul(h, t["head.goal.w"]), t["head.goal.b"])
    dists = ActionDistributions(
        p_object=softmax(reshape(obj_logits, (k,))),
        p_goal=softmax(reshape(goal_logits, (l,))),
    )
    if cfg.with_value:
        pooled = reshape(h, (cfg.hidden_width,))
        dists.value = reshape(add(matmul(reshape(pooled, (1, cfg.hidden_width)), t["value.w"]), t["value.b"]), ())
    return dists


def select_action(dists: ActionDistributions, mode: str = "argmax",
                  rng: np.random.Generator | int | None = None) -> ActionTuple:
    """argmax (ties -> lowest index) or seeded categorical sampling."""
    if mode == "argmax":
        choose = lambda p: int(np.argmax(p.data))
    elif mode == "sample":
        if rng is None:
            raise ValueError("sampling needs an rng or seed")
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

        def choose(p):
            probs = p.data.astype(np.float64)
            probs = probs / probs.sum()
            return int(gen.choice(len(probs), p=probs))
    else:
        raise ValueError(f"unknown selection mode {mode!r}")

    obj = choose(dists.p_object)
    goal = choose(dists.p_goal)
    orientation = choose(dists.p_orientation) if dists.p_orientation is not None else None
    if dists.p_tray is not None:
        tray_choice = TRAY_CHOICES[choose(dists.p_tray)]
        if tray_choice != NOOP:
            return ActionTuple(tray_op=tray_choice)
        return ActionTuple(object_id=obj, goal_id=goal, orientation=orientation, tray_op=NOOP)
    return ActionTuple(object_id=obj, goal_id=goal, orientation=orientation)
