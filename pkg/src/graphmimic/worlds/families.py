"""Reset builders for the five task families.

All randomness comes from the spec seed; resets are reproducible. Block
stacks and goal columns are placed at uniformly sampled table locations
kept at least 10 cm apart.
"""

from __future__ import annotations

import numpy as np

from .engine import total_goals
from .state import (
    BLOCK,
    BLOCK_HEIGHT,
    BLOCK_WIDTH,
    BOWL,
    BOWL_ORIENTATION,
    BOX_HEIGHT,
    COVER,
    GOAL_BLOCK,
    GOAL_BOTTOM,
    GOAL_COVER,
    GOAL_TOP,
    PLATE,
    PLATE_ORIENTATION,
    Box,
    Entity,
    Goal,
    SceneState,
    TrayState,
    WorldSpec,
)

MIN_SEPARATION = 0.10
_MAX_PLACEMENT_TRIES = 200


def _sample_locations(rng: np.random.Generator, n: int, bounds, min_sep: float = MIN_SEPARATION):
    """n table locations pairwise at least min_sep apart; raises on infeasible bounds."""
    (x_lo, x_hi), (y_lo, y_hi) = bounds
    if x_hi < x_lo or y_hi < y_lo:
        raise ValueError(f"degenerate placement bounds {bounds}")
    points: list[tuple[float, float]] = []
    tries = 0
    while len(points) < n:
        if tries >= _MAX_PLACEMENT_TRIES * n:
            raise ValueError(
                f"cannot place {n} locations {min_sep} m apart inside bounds {bounds}"
            )
        tries += 1
        x = float(rng.uniform(x_lo, x_hi))
        y = float(rng.uniform(y_lo, y_hi))
        if all((x - px) ** 2 + (y - py) ** 2 >= min_sep**2 for px, py in points):
            points.append((x, y))
    return points


def _block_z(level: int) -> float:
    return (level + 0.5) * BLOCK_HEIGHT


def _stack_entities(base: tuple[float, float], k: int, start_id: int,
                    container: int | None = None, support_base=("table", None)):
    """One column of k blocks; block i rests on block i-1."""
    ents = []
    for i in range(k):
        support = support_base if i == 0 else ("entity", start_id + i - 1)
        ents.append(
            Entity(
                id=start_id + i,
                kind=BLOCK,
                pose=(base[0], base[1], _block_z(i)),
                support=support,
                container_box=container,
            )
        )
    return ents


def _goal_column(base: tuple[float, float], k: int, start_id: int,
                 container: int | None = None):
    """One column of k block goals; slot i requires slot i-1 filled."""
    goals = []
    for i in range(k):
        goals.append(
            Goal(
                id=start_id + i,
                kind=GOAL_BLOCK,
                pose=(base[0], base[1], _block_z(i)),
                required_kind=BLOCK,
                support_goals=() if i == 0 else (start_id + i - 1,),
                container_box=container,
            )
        )
    return goals


def _finish(state: SceneState, spec: WorldSpec) -> SceneState:
    state.episode_seed = spec.seed
    state.failure_rate = spec.failure_rate
    state.step_budget = spec.budget_factor * total_goals(state)
    return state


def _reset_kblock(spec: WorldSpec, rng: np.random.Generator) -> SceneState:
    (a, b) = _sample_locations(rng, 2, spec.bounds)
    state = SceneState(
        entities=_stack_entities(a, spec.k, start_id=0),
        goals=_goal_column(b, spec.k, start_id=0),
    )
    return _finish(state, spec)


def _pyramid_rows(k: int) -> int:
    """Rows m with m(m+1)/2 == k, or raise."""
    m = int((np.sqrt(8 * k + 1) - 1) / 2)
    if m * (m + 1) // 2 != k:
        raise ValueError(f"kpyramid needs a triangular block count, got k={k}")
    return m


def _reset_kpyramid(spec: WorldSpec, rng: np.random.Generator) -> SceneState:
    m = _pyramid_rows(spec.k)
    (a, b) = _sample_locations(rng, 2, spec.bounds)
    goals: list[Goal] = []
    gid = 0
    row_ids: list[list[int]] = []
    for r in range(m):
        ids = []
        for j in range(m - r):
            supports = ()
            if r > 0:
                supports = (row_ids[r - 1][j], row_ids[r - 1][j + 1])
            goals.append(
                Goal(
                    id=gid,
                    kind=GOAL_BLOCK,
                    pose=(b[0], b[1] + (j + r * 0.5) * BLOCK_WIDTH, _block_z(r)),
                    required_kind=BLOCK,
                    support_goals=supports,
                )
            )
            ids.append(gid)
            gid += 1
        row_ids.append(ids)
    state = SceneState(entities=_stack_entities(a, spec.k, start_id=0), goals=goals)
    return _finish(state, spec)


def _reset_multistack(spec: WorldSpec, rng: np.random.Generator) -> SceneState:
    s = spec.stacks
    locs = _sample_locations(rng, 2 * s, spec.bounds)
    entities: list[Entity] = []
    goals: list[Goal] = []
    for i in range(s):
        entities.extend(_stack_entities(locs[i], spec.k, start_id=i * spec.k))
        goals.extend(_goal_column(locs[s + i], spec.k, start_id=i * spec.k))
    state = SceneState(entities=entities, goals=goals)
    return _finish(state, spec)


def _reset_boxrearrange(spec: WorldSpec, rng: np.random.Generator) -> SceneState:
    n_boxes = 1 if spec.box_mode in ("pack", "unpack") else spec.n_boxes
    # boxes + one external stack-or-goal site + one storage spot per box
    locs = _sample_locations(rng, 2 * n_boxes + 1, spec.bounds)
    box_locs = locs[:n_boxes]
    outside = locs[n_boxes]
    storage_locs = locs[n_boxes + 1 :]

    entities: list[Entity] = []
    goals: list[Goal] = []
    boxes: list[Box] = []
    gid = 0

    # Cover goal on each box top, filled by its cover at reset (boxes start closed).
    for b in range(n_boxes):
        cover_goal = Goal(
            id=gid,
            kind=GOAL_COVER,
            pose=(box_locs[b][0], box_locs[b][1], BOX_HEIGHT),
            required_kind=COVER,
            filled_by=None,  # set after the cover entity exists
        )
        goals.append(cover_goal)
        boxes.append(Box(id=b, pose=(box_locs[b][0], box_locs[b][1], 0.0), cover_goal=gid))
        gid += 1

    # Table storage spots for covers; parking only, never scored.
    for i, (sx, sy) in enumerate(storage_locs):
        goals.append(
            Goal(
                id=gid,
                kind=GOAL_COVER,
                pose=(sx, sy, 0.0),
                required_kind=COVER,
                scored=False,
            )
        )
        gid += 1

    # Blocks and their goal column.
    if spec.box_mode == "pack":
        entities.extend(_stack_entities(outside, spec.k, start_id=0))
        goals.extend(
            _goal_column((boxes[0].pose[0], boxes[0].pose[1]), spec.k, start_id=gid, container=0)
        )
    elif spec.box_mode == "unpack":
        entities.extend(
            _stack_entities(
                (boxes[0].pose[0], boxes[0].pose[1]), spec.k, start_id=0,
                container=0, support_base=("box", 0),
            )
        )
        goals.extend(_goal_column(outside, spec.k, start_id=gid))
    else:  # swap: blocks in box 0, goals in box 1
        entities.extend(
            _stack_entities(
                (boxes[0].pose[0], boxes[0].pose[1]), spec.k, start_id=0,
                container=0, support_base=("box", 0),
            )
        )
        goals.extend(
            _goal_column((boxes[1].pose[0], boxes[1].pose[1]), spec.k, start_id=gid, container=1)
        )

    # Covers sit on their boxes.
    next_eid = len(entities)
    for b in range(n_boxes):
        cover = Entity(
            id=next_eid,
            kind=COVER,
            pose=goals[b].pose,
            support=("goal", boxes[b].cover_goal),
        )
        goals[b].filled_by = cover.id
        entities.append(cover)
        next_eid += 1

    state = SceneState(entities=entities, goals=goals, boxes=boxes)
    return _finish(state, spec)


def _reset_dishwasher(spec: WorldSpec, rng: np.random.Generator) -> SceneState:
    counter_bounds = ((0.15, 0.55), (-0.35, 0.35))
    locs = _sample_locations(rng, spec.n_plates + spec.n_bowls, counter_bounds, min_sep=0.08)
    entities: list[Entity] = []
    for i in range(spec.n_plates):
        entities.append(Entity(id=i, kind=PLATE, pose=(locs[i][0], locs[i][1], 0.03)))
    for j in range(spec.n_bowls):
        i = spec.n_plates + j
        entities.append(Entity(id=i, kind=BOWL, pose=(locs[i][0], locs[i][1], 0.03)))

    # Slot goals mirror the dish multiset; which tray/side they sit on is
    # the user preference the policy has to pick up from demonstrations.
    goals: list[Goal] = []
    gid = 0

    def slot(kind: str, tray: str, required: str, orientation: int, index: int, side: float):
        nonlocal gid
        z = 0.60 if tray == "top" else 0.30
        goals.append(
            Goal(
                id=gid,
                kind=kind,
                pose=(0.85, side * (0.06 + 0.06 * index), z),
                required_kind=required,
                required_orientation=orientation,
                tray=tray,
            )
        )
        gid += 1

    if spec.scenario == "top_bottom":
        for j in range(spec.n_bowls):
            slot(GOAL_TOP, "top", BOWL, BOWL_ORIENTATION, j, 1.0)
        for j in range(spec.n_plates):
            slot(GOAL_BOTTOM, "bottom", PLATE, PLATE_ORIENTATION, j, 1.0)
    else:  # left_right: everything on the top tray, plates left, bowls right
        for j in range(spec.n_plates):
            slot(GOAL_TOP, "top", PLATE, PLATE_ORIENTATION, j, -1.0)
        for j in range(spec.n_bowls):
            slot(GOAL_TOP, "top", BOWL, BOWL_ORIENTATION, j, 1.0)

    state = SceneState(entities=entities, goals=goals, trays=TrayState())
    return _finish(state, spec)


_RESETTERS = {
    "kblock": _reset_kblock,
    "kpyramid": _reset_kpyramid,
    "multistack": _reset_multistack,
    "boxrearrange": _reset_boxrearrange,
    "dishwasher": _reset_dishwasher,
}


def reset(spec: WorldSpec) -> SceneState:
    """Build the initial scene for a spec; deterministic in spec.seed."""
    rng = np.random.default_rng(spec.seed)
    return _RESETTERS[spec.family](spec, rng)
