"""Deterministic abstract manipulation environments."""

from .engine import (
    GOAL_FILLED,
    NOT_TOP_OF_STACK,
    OK,
    TRAY_CLOSED,
    TRAY_CONFLICT,
    UNSUPPORTED_GOAL,
    box_open,
    entity_pickable,
    feasible,
    goal_filled_by,
    goals_filled,
    goals_fraction,
    is_done,
    step,
    total_goals,
    visible_entities,
    visible_goals,
)
from .families import reset
from .state import (
    BOX_MODES,
    FAMILIES,
    SCENARIOS,
    BLOCK,
    BLOCK_HEIGHT,
    BLOCK_WIDTH,
    BOWL,
    BOWL_ORIENTATION,
    COVER,
    GOAL_BLOCK,
    GOAL_BOTTOM,
    GOAL_COVER,
    GOAL_TOP,
    N_ORIENTATIONS,
    NOOP,
    PLATE,
    PLATE_ORIENTATION,
    TOGGLE_BOTTOM,
    TOGGLE_TOP,
    TRAY_OPS,
    ActionTuple,
    Box,
    Entity,
    Goal,
    SceneState,
    TrayState,
    WorldSpec,
    action_from_json,
    action_to_json,
    scene_from_json,
    scene_to_json,
)

__all__ = [
    "ActionTuple", "Box", "BOX_MODES", "Entity", "FAMILIES", "Goal",
    "SCENARIOS", "SceneState", "TrayState",
    "WorldSpec", "BLOCK", "BLOCK_HEIGHT", "BLOCK_WIDTH", "BOWL",
    "BOWL_ORIENTATION", "COVER", "GOAL_BLOCK", "GOAL_BOTTOM", "GOAL_COVER",
    "GOAL_TOP", "N_ORIENTATIONS", "NOOP", "PLATE", "PLATE_ORIENTATION",
    "TOGGLE_BOTTOM", "TOGGLE_TOP", "TRAY_OPS", "GOAL_FILLED",
    "NOT_TOP_OF_STACK", "OK", "TRAY_CLOSED", "TRAY_CONFLICT",
    "UNSUPPORTED_GOAL", "action_from_json", "action_to_json", "box_open",
    "entity_pickable", "feasible", "goal_filled_by", "goals_filled", "goals_fraction",
    "is_done", "reset", "scene_from_json", "scene_to_json", "step",
    "total_goals", "visible_entities", "visible_goals",
]
