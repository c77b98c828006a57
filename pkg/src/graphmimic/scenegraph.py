"""Encode a symbolic scene as the dense graph the policy consumes.

Nodes are the visible objects followed by the visible goals; edges are
every ordered pair of distinct nodes. Blockworld features are 5-wide
[kind, x, y, z, unfilled]; dishwasher scenes append the orientation code
and the two broadcast tray-open flags. The occupancy bit is 1 for empty
goals and loose objects, 0 once a goal is filled or an object sits in
one; this keeps the column informative (nonzero) from the first step of
an episode, where nothing has been placed yet.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .numerics import Tensor
from .worlds import (
    Entity,
    Goal,
    N_ORIENTATIONS,
    SceneState,
    TrayState,
    goal_filled_by,
    visible_entities,
    visible_goals,
)
from . import worlds


class NodeKind(IntEnum):
    """Categorical node codes; persisted in dataset files, do not renumber."""

    COVER = 0
    BLOCK = 1
    GOAL_BLOCK = 2
    GOAL_COVER = 3
    PLATE = 4
    BOWL = 5
    GOAL_TOP_TRAY = 6
    GOAL_BOTTOM_TRAY = 7
    TRAY = 8  # reserved; tray state is broadcast in features instead


_ENTITY_CODES = {
    worlds.COVER: NodeKind.COVER,
    worlds.BLOCK: NodeKind.BLOCK,
    worlds.PLATE: NodeKind.PLATE,
    worlds.BOWL: NodeKind.BOWL,
}
_GOAL_CODES = {
    worlds.GOAL_BLOCK: NodeKind.GOAL_BLOCK,
    worlds.GOAL_COVER: NodeKind.GOAL_COVER,
    worlds.GOAL_TOP: NodeKind.GOAL_TOP_TRAY,
    worlds.GOAL_BOTTOM: NodeKind.GOAL_BOTTOM_TRAY,
}

BLOCKWORLD_FEATURES = ("kind", "x", "y", "z", "unfilled")
DISHWASHER_FEATURES = BLOCKWORLD_FEATURES + ("orientation", "top_open", "bottom_open")


def feature_names(width: int) -> tuple[str, ...]:
    if width == len(BLOCKWORLD_FEATURES):
        return BLOCKWORLD_FEATURES
    if width == len(DISHWASHER_FEATURES):
        return DISHWASHER_FEATURES
    raise ValueError(f"no feature naming for width {width}")


@dataclass
class SceneGraph:
    n_objects: int
    n_goals: int
    node_features: Tensor  # (n_objects + n_goals, d)
    edges: np.ndarray  # (E, 2) ordered (src, dst) pairs, no self-loops
    node_roles: list[NodeKind]
    object_node_ids: np.ndarray
    goal_node_ids: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.n_objects + self.n_goals

    @property
    def feature_width(self) -> int:
        return self.node_features.shape[1]


def dense_edges(n: int) -> np.ndarray:
    """All ordered pairs (i, j), i != j, over n nodes."""
    src, dst = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    mask = src != dst
    return np.stack([src[mask], dst[mask]], axis=1).astype(np.int64)


def node_feature(item: Entity | Goal, trays: TrayState | None = None,
                 in_goal: bool = False) -> np.ndarray:
    """Feature vector for one node; 8-wide when tray state is supplied.

    `in_goal` marks an entity currently sitting in a goal; goals carry
    their own occupancy. The unfilled bit is 1 for empty goals and for
    objects not resting in any goal.
    """
    if isinstance(item, Goal):
        code = float(_GOAL_CODES[item.kind])
        unfilled = 0.0 if item.filled_by is not None else 1.0
        orient = item.required_orientation if item.required_orientation is not None else 0
    else:
        code = float(_ENTITY_CODES[item.kind])
        unfilled = 0.0 if in_goal else 1.0
        orient = item.orientation
    x, y, z = item.pose
    base = [code, x, y, z, unfilled]
    if trays is not None:
        base += [
            orient / N_ORIENTATIONS,
            1.0 if trays.top_open else 0.0,
            1.0 if trays.bottom_open else 0.0,
        ]
    return np.asarray(base, dtype=np.float32)


def encode_scene(state: SceneState, observability: str = "partial",
                 normalize: bool = False) -> SceneGraph:
    """Pure encoding of (state, observability) into a SceneGraph.

    With partial observability the contents of closed boxes (entities
    and goals alike) are left out of the graph.
    """
    if observability == "partial":
        objects = visible_entities(state)
        goals = visible_goals(state)
    elif observability == "full":
        objects = list(state.entities)
        goals = list(state.goals)
    else:
        raise ValueError(f"unknown observability {observability!r}")
    n = len(objects) + len(goals)
    if n == 0:
        raise ValueError("cannot encode a scene with no visible nodes")

    rows = []
    roles: list[NodeKind] = []
    for e in objects:
        rows.append(node_feature(e, state.trays, in_goal=goal_filled_by(state, e.id) is not None))
        roles.append(_ENTITY_CODES[e.kind])
    for g in goals:
        rows.append(node_feature(g, state.trays))
        roles.append(_GOAL_CODES[g.kind])
    features = np.stack(rows, axis=0)
    if normalize:
        features[:, 1:3] -= features[:, 1:3].mean(axis=0, keepdims=True)

    return SceneGraph(
        n_objects=len(objects),
        n_goals=len(goals),
        node_features=Tensor(features),
        edges=dense_edges(n),
        node_roles=roles,
        object_node_ids=np.arange(len(objects), dtype=np.int64),
        goal_node_ids=np.arange(len(objects), n, dtype=np.int64),
    )


def flat_features(graph: SceneGraph) -> Tensor:
    """Node features flattened in scene order; the fixed-size MLP input."""
    return Tensor(graph.node_features.data.reshape(-1))
