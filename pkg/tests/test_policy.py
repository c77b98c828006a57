import numpy as np
import pytest

from graphmimic import policy, worlds
from graphmimic.numerics import ShapeError, Tensor, segment_softmax
from graphmimic.policy import (
    ActionDistributions,
    GnnConfig,
    attention_layer,
    gated_layer,
    gcn_layer,
    init_policy,
    mlp_forward,
    policy_forward,
    sage_layer,
    select_action,
)
from graphmimic.scenegraph import dense_edges, encode_scene, flat_features
from graphmimic.worlds import WorldSpec


def _t(data, grad=False):
    return Tensor(np.asarray(data, dtype=np.float32), requires_grad=grad)


def test_gcn_two_node_swap():
    h = _t([[1.0], [3.0]])
    out = gcn_layer(h, dense_edges(2), _t([[0.0]]), _t([[1.0]]), _t([0.0]))
    assert np.allclose(out.data, [[3.0], [1.0]])


def test_gcn_isolated_node_is_self_term():
    h = _t([[1.0, 2.0]])
    out = gcn_layer(h, dense_edges(1), _t(np.eye(2)), _t(np.eye(2)), _t([0.0, 0.0]))
    assert np.allclose(out.data, [[1.0, 2.0]])


def test_gcn_zero_message_weights_reduce_to_mlp():
    rng = np.random.default_rng(2)
    h = _t(rng.uniform(0.1, 1.0, size=(4, 3)))
    w_self = _t(rng.normal(size=(3, 3)))
    bias = _t(rng.normal(size=3))
    out = gcn_layer(h, dense_edges(4), w_self, _t(np.zeros((3, 3))), bias)
    expected = np.maximum(h.data @ w_self.data + bias.data, 0)
    assert np.allclose(out.data, expected, atol=1e-6)


def test_sage_mean_neighbors():
    # node 0 has neighbors with features 2 and 4: ReLU(1 + mean) = 4
    h = _t([[1.0], [2.0], [4.0]])
    edges = np.array([[1, 0], [2, 0]])
    out = sage_layer(h, edges, _t([[1.0]]), _t([[1.0]]), _t([0.0]))
    assert out.data[0, 0] == pytest.approx(4.0)
    # neighbor order cannot matter
    out2 = sage_layer(h, edges[::-1].copy(), _t([[1.0]]), _t([[1.0]]), _t([0.0]))
    assert np.allclose(out.data, out2.data)


def test_sage_no_neighbors_keeps_self_term():
    h = _t([[2.0]])
    out = sage_layer(h, np.zeros((0, 2), dtype=np.int64), _t([[1.5]]), _t([[1.0]]), _t([0.0]))
    assert out.data[0, 0] == pytest.approx(3.0)


def _zero_gru(width):
    zeros = lambda shape: _t(np.zeros(shape, dtype=np.float32))
    return {
        "msg.w": zeros((width, width)),
        "gru.wi_r": zeros((width, width)), "gru.wh_r": zeros((width, width)),
        "gru.b_r": zeros(width),
        "gru.wi_z": zeros((width, width)), "gru.wh_z": zeros((width, width)),
        "gru.b_z": zeros(width),
        "gru.wi_n": zeros((width, width)), "gru.wh_n": zeros((width, width)),
        "gru.b_hn": zeros(width), "gru.b_n": zeros(width),
    }


def test_gated_all_zero_weights_halve_features():
    h = _t([[0.8, -0.4], [0.2, 1.0]])
    out = gated_layer(h, dense_edges(2), _zero_gru(2))
    assert np.allclose(out.data, 0.5 * h.data)


def test_gated_saturated_gates_carry_input_through():
    h = _t([[0.8, -0.4], [0.2, 1.0]])
    gru = _zero_gru(2)
    gru["gru.b_r"] = _t([-30.0, -30.0])
    gru["gru.b_z"] = _t([-30.0, -30.0])
    out = gated_layer(h, dense_edges(2), gru)
    assert np.allclose(out.data, h.data, atol=1e-5)


def test_gated_output_width_independent_of_degree():
    rng = np.random.default_rng(3)
    gru = {
        k: _t(rng.normal(scale=0.2, size=v.shape))
        for k, v in _zero_gru(3).items()
    }
    for n in (1, 2, 5):
        h = _t(rng.normal(size=(n, 3)))
        out = gated_layer(h, dense_edges(n), gru)
        assert out.shape == (n, 3)


def test_attention_single_neighbor_gets_full_weight():
    rng = np.random.default_rng(4)
    h = _t(rng.uniform(0.1, 1.0, size=(2, 3)))
    w_self = _t(np.zeros((3, 3)))
    w_msg = _t(rng.normal(size=(3, 3)))
    edges = np.array([[1, 0]])  # node 0 aggregates only node 1
    out = attention_layer(h, edges, w_self, w_msg, _t(np.zeros(3)),
                          _t(rng.normal(size=(3, 1))), _t(rng.normal(size=(3, 1))))
    expected = np.maximum(h.data[1] @ w_msg.data, 0)
    assert np.allclose(out.data[0], expected, atol=1e-6)


def test_attention_identical_neighbors_average():
    rng = np.random.default_rng(5)
    feat = rng.uniform(0.1, 1.0, size=3).astype(np.float32)
    h = _t(np.stack([np.zeros(3, dtype=np.float32), feat, feat]))
    edges = np.array([[1, 0], [2, 0]])
    w_msg = _t(rng.normal(size=(3, 3)))
    out = attention_layer(h, edges, _t(np.zeros((3, 3))), w_msg, _t(np.zeros(3)),
                          _t(rng.normal(size=(3, 1))), _t(rng.normal(size=(3, 1))))
    expected = np.maximum(feat @ w_msg.data, 0)
    assert np.allclose(out.data[0], expected, atol=1e-5)


def test_attention_weights_normalize_per_node():
    rng = np.random.default_rng(6)
    scores = Tensor(rng.normal(size=12).astype(np.float32))
    seg = np.repeat(np.arange(4), 3)
    alpha = segment_softmax(scores, seg, 4).data
    for node in range(4):
        assert abs(alpha[seg == node].sum() - 1.0) < 1e-6


def test_policy_forward_uniform_at_zero_readout():
    state = worlds.reset(WorldSpec(family="kblock", k=3, seed=7))
    graph = encode_scene(state)
    params = init_policy(GnnConfig(architecture="sage"), seed=1)
    for name in ("readout.self.w", "readout.msg.w", "readout.b"):
        params.tensors[name].data[:] = 0.0
    dists = policy_forward(graph, params)
    assert np.allclose(dists.p_object.data, 1 / 3, atol=1e-6)
    assert np.allclose(dists.p_goal.data, 1 / 3, atol=1e-6)


@pytest.mark.parametrize("arch", ["gcn", "sage", "gated", "attention"])
def test_policy_forward_permutation_equivariance(arch):
    rng = np.random.default_rng(8)
    state = worlds.reset(WorldSpec(family="kblock", k=4, seed=11))
    graph = encode_scene(state)
    params = init_policy(GnnConfig(architecture=arch), seed=2)
    base = policy_forward(graph, params)
    perm_e = rng.permutation(len(state.entities))
    perm_g = rng.permutation(len(state.goals))
    shuffled = state.copy()
    shuffled.entities = [shuffled.entities[i] for i in perm_e]
    shuffled.goals = [shuffled.goals[i] for i in perm_g]
    permuted = policy_forward(encode_scene(shuffled), params)
    assert np.allclose(permuted.p_object.data, base.p_object.data[perm_e], atol=1e-5)
    assert np.allclose(permuted.p_goal.data, base.p_goal.data[perm_g], atol=1e-5)


@pytest.mark.parametrize("arch", ["gcn", "sage", "gated", "attention"])
def test_policy_forward_size_generalization(arch):
    params = init_policy(GnnConfig(architecture=arch), seed=3)
    for k in (1, 2, 5, 9):
        graph = encode_scene(worlds.reset(WorldSpec(family="kblock", k=k, seed=k)))
        dists = policy_forward(graph, params)
        assert dists.p_object.shape == (k,)
        assert dists.p_goal.shape == (k,)
        assert abs(float(dists.p_object.data.sum()) - 1.0) < 1e-5
        assert abs(float(dists.p_goal.data.sum()) - 1.0) < 1e-5


def test_policy_forward_deterministic():
    state = worlds.reset(WorldSpec(family="kblock", k=3, seed=7))
    graph = encode_scene(state)
    params = init_policy(GnnConfig(architecture="attention"), seed=4)
    a = policy_forward(graph, params)
    b = policy_forward(graph, params)
    assert a.p_object.data.tobytes() == b.p_object.data.tobytes()


def test_policy_forward_rejects_empty_heads():
    state = worlds.SceneState(
        entities=[worlds.Entity(id=0, kind=worlds.BLOCK, pose=(0, 0, 0))],
        goals=[],
        step_budget=1,
    )
    graph = encode_scene(state)
    params = init_policy(GnnConfig(architecture="sage"), seed=5)
    with pytest.raises(ValueError):
        policy_forward(graph, params)


def test_dishwasher_heads_present_and_normalized():
    state = worlds.reset(WorldSpec(family="dishwasher", seed=2))
    graph = encode_scene(state)
    config = GnnConfig(architecture="sage", feature_width=8,
                       heads=("object", "goal", "orientation", "tray"))
    dists = policy_forward(graph, init_policy(config, seed=6))
    assert dists.p_orientation.shape == (6,)
    assert dists.p_tray.shape == (3,)
    assert abs(float(dists.p_orientation.data.sum()) - 1.0) < 1e-5
    assert abs(float(dists.p_tray.data.sum()) - 1.0) < 1e-5


def test_select_action_argmax_and_ties():
    dists = ActionDistributions(p_object=_t([0.1, 0.7, 0.2]), p_goal=_t([0.5, 0.5]))
    action = select_action(dists)
    assert action.object_id == 1
    assert action.goal_id == 0  # tie breaks to the lowest index


def test_select_action_sampling_is_seed_reproducible():
    dists = ActionDistributions(p_object=_t([0.3, 0.7]), p_goal=_t([0.6, 0.4]))
    a = select_action(dists, mode="sample", rng=42)
    b = select_action(dists, mode="sample", rng=42)
    assert (a.object_id, a.goal_id) == (b.object_id, b.goal_id)
    with pytest.raises(ValueError):
        select_action(dists, mode="sample")


def test_select_action_tray_toggle_short_circuits():
    dists = ActionDistributions(
        p_object=_t([1.0]), p_goal=_t([1.0]),
        p_orientation=_t(np.full(6, 1 / 6)),
        p_tray=_t([0.8, 0.1, 0.1]),
    )
    action = select_action(dists)
    assert action.tray_op == worlds.TOGGLE_TOP
    assert action.object_id is None


def test_mlp_uniform_at_zero_heads_and_fixed_size():
    state = worlds.reset(WorldSpec(family="kblock", k=3, seed=7))
    graph = encode_scene(state)
    config = GnnConfig(architecture="mlp", n_objects=3, n_goals=3)
    params = init_policy(config, seed=7)
    for name in ("head.object.w", "head.object.b", "head.goal.w", "head.goal.b"):
        params.tensors[name].data[:] = 0.0
    dists = mlp_forward(flat_features(graph), params)
    assert np.allclose(dists.p_object.data, 1 / 3, atol=1e-6)
    # identical scenes give identical outputs
    again = mlp_forward(flat_features(graph), params)
    assert np.array_equal(dists.p_object.data, again.p_object.data)
    # wrong K: hard dimension error
    bigger = encode_scene(worlds.reset(WorldSpec(family="kblock", k=4, seed=7)))
    with pytest.raises(ShapeError):
        mlp_forward(flat_features(bigger), params)


def test_config_validation():
    with pytest.raises(ValueError):
        GnnConfig(architecture="transformer")
    with pytest.raises(ValueError):
        GnnConfig(hidden_layers=0)
    with pytest.raises(ValueError):
        GnnConfig(attention_heads=2)
    with pytest.raises(ValueError):
        GnnConfig(architecture="mlp")


def test_params_clone_is_independent():
    params = init_policy(GnnConfig(architecture="gcn"), seed=8)
    clone = params.clone()
    clone.tensors["readout.self.w"].data[:] = 9.0
    assert not np.array_equal(
        params.tensors["readout.self.w"].data, clone.tensors["readout.self.w"].data
    )
