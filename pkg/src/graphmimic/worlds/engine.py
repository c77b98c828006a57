"""Feasibility checks, the pick-and-place transition, and scoring.

Actions index into the currently visible entity/goal lists. Infeasible
pick-and-place actions are zero-reward no-ops (only the step counter
advances); tray toggles are always feasible. Failure injection draws a
deterministic pseudo-random number from (episode_seed, step_count), so
stepping stays a pure function of (state, action).
"""

from __future__ import annotations

import numpy as np

from .state import (
    BLOCK_HEIGHT,
    COVER,
    COVER_REST_Z,
    TOGGLE_BOTTOM,
    TOGGLE_TOP,
    ActionTuple,
    Entity,
    Goal,
    SceneState,
)

# feasibility reasons
OK = "ok"
NOT_TOP_OF_STACK = "NotTopOfStack"
GOAL_FILLED = "GoalFilled"
UNSUPPORTED_GOAL = "UnsupportedGoal"
TRAY_CLOSED = "TrayClosed"
TRAY_CONFLICT = "TrayConflict"
NO_TRAYS = "NoTrays"


def box_open(state: SceneState, box_id: int) -> bool:
    box = state.box_by_id(box_id)
    return state.goal_by_id(box.cover_goal).filled_by is None


def visible_entities(state: SceneState) -> list[Entity]:
    """Entities the policy can see: everything not inside a closed box."""
    return [
        e
        for e in state.entities
        if e.container_box is None or box_open(state, e.container_box)
    ]


def visible_goals(state: SceneState) -> list[Goal]:
    return [
        g
        for g in state.goals
        if g.container_box is None or box_open(state, g.container_box)
    ]


def goal_filled_by(state: SceneState, entity_id: int) -> Goal | None:
    for g in state.goals:
        if g.filled_by == entity_id:
            return g
    return None


def entity_pickable(state: SceneState, ent: Entity) -> tuple[bool, str]:
    # Something stacked directly on the entity blocks the grasp.
    for other in state.entities:
        if other.support == ("entity", ent.id):
            return False, NOT_TOP_OF_STACK
    # A filled goal resting on the entity's goal blocks it the same way.
    g = goal_filled_by(state, ent.id)
    if g is not None:
        for other in state.goals:
            if g.id in other.support_goals and other.filled_by is not None:
                return False, NOT_TOP_OF_STACK
        ok, reason = _tray_reachable(state, g)
        if not ok:
            return False, reason
    return True, OK


def _tray_reachable(state: SceneState, goal: Goal) -> tuple[bool, str]:
    if goal.tray is None:
        return True, OK
    if state.trays is None:
        return False, NO_TRAYS
    if goal.tray == "top":
        if not state.trays.top_open:
            return False, TRAY_CLOSED
    else:
        # The top rack slides over the bottom one.
        if state.trays.top_open:
            return False, TRAY_CONFLICT
        if not state.trays.bottom_open:
            return False, TRAY_CLOSED
    return True, OK


def feasible(state: SceneState, action: ActionTuple) -> tuple[bool, str]:
    """Whether the action can execute, with a reason when it cannot."""
    if action.is_tray_toggle():
        if state.trays is None:
            return False, NO_TRAYS
        return True, OK
    objects = visible_entities(state)
    goals = visible_goals(state)
    if action.object_id is None or action.goal_id is None:
        raise IndexError("pick-and-place action needs object and goal indices")
    if not 0 <= action.object_id < len(objects):
        raise IndexError(f"object index {action.object_id} out of range")
    if not 0 <= action.goal_id < len(goals):
        raise IndexError(f"goal index {action.goal_id} out of range")
    ent = objects[action.object_id]
    goal = goals[action.goal_id]
    ok, reason = entity_pickable(state, ent)
    if not ok:
        return False, reason
    ok, reason = _tray_reachable(state, goal)
    if not ok:
        return False, reason
    if goal.filled_by is not None:
        return False, GOAL_FILLED
    for gid in goal.support_goals:
        if state.goal_by_id(gid).filled_by is None:
            return False, UNSUPPORTED_GOAL
    return True, OK


def _kind_matches(goal: Goal, ent: Entity) -> bool:
    if goal.required_kind is not None and ent.kind != goal.required_kind:
        return False
    if goal.required_orientation is not None and ent.orientation != goal.required_orientation:
        return False
    return True


def goals_filled(state: SceneState) -> int:
    """Scored goals filled by a correct occupant (kind and orientation)."""
    n = 0
    for g in state.goals:
        if not g.scored or g.filled_by is None:
            continue
        if _kind_matches(g, state.entity_by_id(g.filled_by)):
            n += 1
    return n


def total_goals(state: SceneState) -> int:
    return sum(1 for g in state.goals if g.scored)


def goals_fraction(state: SceneState) -> float:
    g_total = total_goals(state)
    return goals_filled(state) / g_total if g_total else 0.0


def is_done(state: SceneState) -> bool:
    return goals_filled(state) == total_goals(state) or state.step_count >= state.step_budget


def _failure_draw(state: SceneState) -> bool:
    if state.failure_rate <= 0.0:
        return False
    rng = np.random.default_rng((state.episode_seed, state.step_count, 0x5EED))
    return bool(rng.random() < state.failure_rate)


def _failure_offset(state: SceneState) -> tuple[float, float]:
    rng = np.random.default_rng((state.episode_seed, state.step_count, 0x0FF5))
    r = 0.03 + 0.05 * rng.random(2)
    sign = np.where(rng.random(2) < 0.5, -1.0, 1.0)
    return float(r[0] * sign[0]), float(r[1] * sign[1])


def step(state: SceneState, action: ActionTuple) -> tuple[SceneState, float, bool]:
    """Apply one high-level action; returns (next_state, reward, done)."""
    before = goals_filled(state)
    g_total = total_goals(state)
    nxt = state.copy()
    nxt.step_count += 1

    if action.is_tray_toggle():
        if nxt.trays is not None:
            if action.tray_op == TOGGLE_TOP:
                nxt.trays.top_open = not nxt.trays.top_open
            elif action.tray_op == TOGGLE_BOTTOM:
                nxt.trays.bottom_open = not nxt.trays.bottom_open
    else:
        ok, _ = feasible(state, action)
        if ok:
            objects = visible_entities(nxt)
            goals = visible_goals(nxt)
            ent = objects[action.object_id]
            goal = goals[action.goal_id]
            old_goal = goal_filled_by(nxt, ent.id)
            if old_goal is not None:
                old_goal.filled_by = None
            if action.orientation is not None:
                ent.orientation = action.orientation
            if _failure_draw(state):
                # Missed placement: the object lands beside the goal on the table.
                dx, dy = _failure_offset(state)
                ent.pose = (goal.pose[0] + dx, goal.pose[1] + dy, _rest_height(ent))
                ent.support = ("table", None)
                ent.container_box = None
            else:
                ent.pose = goal.pose
                ent.support = ("goal", goal.id)
                ent.container_box = goal.container_box
                goal.filled_by = ent.id

    after = goals_filled(nxt)
    reward = (after - before) / g_total if g_total else 0.0
    return nxt, reward, is_done(nxt)


def _rest_height(ent: Entity) -> float:
    return COVER_REST_Z if ent.kind == COVER else BLOCK_HEIGHT / 2
