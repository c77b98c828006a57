"""Independent float64 reference implementations used as test oracles.

These re-derive every layer and loss in plain numpy float64, entirely
separate from the library's float32 tape, so gradient checks compare
two independent routes.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from graphmimic import worlds


def central_difference(f, arrays: list[np.ndarray], h: float = 1e-3) -> list[np.ndarray]:
    """Elementwise central differences of scalar f over float64 copies."""
    grads = []
    base = [a.astype(np.float64).copy() for a in arrays]
    for ai, arr in enumerate(base):
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + h
            up = f(*base)
            flat[i] = keep - h
            down = f(*base)
            flat[i] = keep
            gflat[i] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def max_rel_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-3) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom))


# ---------------------------------------------------------------------------
# float64 layer references (must mirror the documented layer math, not the code)


def relu64(x):
    return np.maximum(x, 0.0)


def sigmoid64(x):
    return 1.0 / (1.0 + np.exp(-x))


def softmax64(x):
    e = np.exp(x - x.max())
    return e / e.sum()


def aggregate64(h, edges, n, weights=None):
    agg = np.zeros((n, h.shape[1]), dtype=np.float64)
    for idx, (s, d) in enumerate(edges):
        w = 1.0 if weights is None else weights[idx]
        agg[d] += w * h[s]
    return agg


def gcn64(h, edges, w_self, w_msg, b):
    agg = aggregate64(h, edges, h.shape[0])
    return relu64(h @ w_self + agg @ w_msg + b)


def sage64(h, edges, w_self, w_msg, b):
    n = h.shape[0]
    agg = aggregate64(h, edges, n)
    counts = np.zeros(n)
    for _, d in edges:
        counts[d] += 1
    agg /= np.maximum(counts, 1.0)[:, None]
    return relu64(h @ w_self + agg @ w_msg + b)


def gated64(h, edges, w_msg, wi_r, wh_r, b_r, wi_z, wh_z, b_z, wi_n, wh_n, b_hn, b_n):
    m = aggregate64(h @ w_msg, edges, h.shape[0])
    r = sigmoid64(m @ wi_r + h @ wh_r + b_r)
    z = sigmoid64(m @ wi_z + h @ wh_z + b_z)
    cand = np.tanh(m @ wi_n + r * (h @ wh_n + b_hn) + b_n)
    return (1.0 - z) * h + z * cand


def leaky64(x, slope=0.2):
    return np.where(x > 0, x, slope * x)


def attention64(h, edges, w_self, w_msg, b, a_src, a_dst):
    n = h.shape[0]
    t = h @ w_msg
    s_src = (t @ a_src).reshape(-1)
    s_dst = (t @ a_dst).reshape(-1)
    scores = np.array([leaky64(s_dst[d] + s_src[s]) for s, d in edges])
    alpha = np.zeros(len(edges))
    for node in range(n):
        idx = [i for i, (_, d) in enumerate(edges) if d == node]
        if idx:
            alpha[idx] = softmax64(scores[idx])
    agg = aggregate64(t, edges, n, weights=alpha)
    return relu64(h @ w_self + agg + b)


def softmax_ce64(logits, target):
    p = softmax64(logits)
    return float(-(target * np.log(np.maximum(p, 1e-12))).sum())


# ---------------------------------------------------------------------------
# brute-force world search


def brute_force_minimal_steps(spec: worlds.WorldSpec, depth_limit: int = 8) -> int | None:
    """BFS over feasible pick-and-place sequences to the first done state."""
    start = worlds.reset(spec)
    if worlds.goals_filled(start) == worlds.total_goals(start):
        return 0
    queue = deque([(start, 0)])
    seen = {_state_key(start)}
    while queue:
        state, depth = queue.popleft()
        if depth >= depth_limit:
            continue
        n_obj = len(worlds.visible_entities(state))
        n_goal = len(worlds.visible_goals(state))
        actions = [
            worlds.ActionTuple(object_id=o, goal_id=g)
            for o in range(n_obj)
            for g in range(n_goal)
        ]
        if state.trays is not None:
            actions += [
                worlds.ActionTuple(tray_op=worlds.TOGGLE_TOP),
                worlds.ActionTuple(tray_op=worlds.TOGGLE_BOTTOM),
            ]
        for action in actions:
            if not action.is_tray_toggle():
                ok, _ = worlds.feasible(state, action)
                if not ok:
                    continue
            nxt, _, _ = worlds.step(state, action)
            if worlds.goals_filled(nxt) == worlds.total_goals(nxt):
                return depth + 1
            key = _state_key(nxt)
            if key not in seen:
                seen.add(key)
                queue.append((nxt, depth + 1))
    return None


def _state_key(state: worlds.SceneState) -> tuple:
    ents = tuple(
        (e.id, e.kind, tuple(round(v, 6) for v in e.pose), e.orientation, e.support, e.container_box)
        for e in state.entities
    )
    goals = tuple((g.id, g.filled_by) for g in state.goals)
    trays = (state.trays.top_open, state.trays.bottom_open) if state.trays else None
    return (ents, goals, trays)
