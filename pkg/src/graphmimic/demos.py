"""Scripted experts, demonstration recording, augmentation, and demo files.

Experts take phase decisions from the ground-truth scene (they are the
demonstrator) but always emit indices into the visible node ordering, so
recorded pairs line up with what the policy sees. Demo files are
newline-delimited JSON with one header record, one record per
trajectory, one per state-action pair, and one terminal snapshot.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import worlds
from .worlds import (
    ActionTuple,
    BLOCK,
    COVER,
    GOAL_BLOCK,
    NOOP,
    SceneState,
    TOGGLE_BOTTOM,
    TOGGLE_TOP,
    WorldSpec,
    action_from_json,
    action_to_json,
    feasible,
    goal_filled_by,
    scene_from_json,
    scene_to_json,
    visible_entities,
    visible_goals,
)

DEMO_FORMAT = "gmim-demos"
DEMO_VERSION = 1


class NoActionError(RuntimeError):
    """The expert has no move left (terminal or stuck state)."""


class RecordingError(RuntimeError):
    """An episode could not be recorded to completion."""


@dataclass
class DemoPair:
    spec: WorldSpec
    scene: SceneState
    action: ActionTuple


@dataclass
class Trajectory:
    spec: WorldSpec
    seed: int
    source: str  # "scripted" | "human"
    pairs: list[tuple[SceneState, ActionTuple]]
    final_state: SceneState


@dataclass
class DemoDataset:
    trajectories: list[Trajectory] = field(default_factory=list)
    samples: list[DemoPair] = field(default_factory=list)

    def pairs(self) -> list[DemoPair]:
        out = [
            DemoPair(spec=t.spec, scene=s, action=a)
            for t in self.trajectories
            for (s, a) in t.pairs
        ]
        out.extend(self.samples)
        return out

    def n_pairs(self) -> int:
        return sum(len(t.pairs) for t in self.trajectories) + len(self.samples)

    def merged(self, other: "DemoDataset") -> "DemoDataset":
        return DemoDataset(
            trajectories=self.trajectories + other.trajectories,
            samples=self.samples + other.samples,
        )


# ---------------------------------------------------------------------------
# scripted experts


def _correctly_placed(state: SceneState, ent) -> bool:
    g = goal_filled_by(state, ent.id)
    if g is None or not g.scored:
        return False
    if g.required_kind is not None and ent.kind != g.required_kind:
        return False
    if g.required_orientation is not None and ent.orientation != g.required_orientation:
        return False
    return True


def expert_blocks(state: SceneState) -> ActionTuple:
    """Pick the highest movable block, place it in the lowest free goal."""
    objects = visible_entities(state)
    goals = visible_goals(state)
    best_obj = None
    for idx, ent in enumerate(objects):
        if ent.kind != BLOCK or _correctly_placed(state, ent):
            continue
        if not worlds.entity_pickable(state, ent)[0]:
            continue
        if best_obj is None or ent.pose[2] > objects[best_obj].pose[2]:
            best_obj = idx
    best_goal = None
    for idx, g in enumerate(goals):
        if g.kind != GOAL_BLOCK or not g.scored or g.filled_by is not None:
            continue
        if any(state.goal_by_id(s).filled_by is None for s in g.support_goals):
            continue
        if best_goal is None or g.pose[2] < goals[best_goal].pose[2]:
            best_goal = idx
    if best_obj is None or best_goal is None:
        raise NoActionError("no block move available")
    return ActionTuple(object_id=best_obj, goal_id=best_goal)


def expert_rearrange(state: SceneState) -> ActionTuple:
    """Open closed boxes, move blocks with the block rule, then re-cover."""
    blocks_done = all(
        g.filled_by is not None
        for g in state.goals
        if g.scored and g.kind == GOAL_BLOCK
    )
    objects = visible_entities(state)
    goals = visible_goals(state)
    if not blocks_done:
        for box in state.boxes:
            if worlds.box_open(state, box.id):
                continue
            cover_goal = state.goal_by_id(box.cover_goal)
            cover_idx = next(
                i for i, e in enumerate(objects) if e.id == cover_goal.filled_by
            )
            storage_idx = next(
                (
                    i
                    for i, g in enumerate(goals)
                    if g.kind == worlds.GOAL_COVER and not g.scored and g.filled_by is None
                ),
                None,
            )
            if storage_idx is None:
                raise NoActionError("no free storage spot for a cover")
            return ActionTuple(object_id=cover_idx, goal_id=storage_idx)
        return expert_blocks(state)
    # Blocks finished: return covers to the box tops.
    for goal_idx, g in enumerate(goals):
        if g.kind != worlds.GOAL_COVER or not g.scored or g.filled_by is not None:
            continue
        cover_idx = next(
            (
                i
                for i, e in enumerate(objects)
                if e.kind == COVER and not _on_scored_cover_goal(state, e.id)
            ),
            None,
        )
        if cover_idx is None:
            raise NoActionError("no loose cover to close the box with")
        return ActionTuple(object_id=cover_idx, goal_id=goal_idx)
    raise NoActionError("rearrangement already complete")


def _on_scored_cover_goal(state: SceneState, entity_id: int) -> bool:
    g = goal_filled_by(state, entity_id)
    return g is not None and g.scored and g.kind == worlds.GOAL_COVER


def expert_dishwasher(state: SceneState, preference: str | None = None) -> ActionTuple:
    """Load trays top-first with the orientations the slot goals demand.

    The preference (which slots want plates vs bowls) is already baked
    into the reset goals; the argument is accepted for symmetry and only
    documents intent.
    """
    del preference
    objects = visible_entities(state)
    goals = visible_goals(state)
    trays = state.trays
    if trays is None:
        raise NoActionError("not a dishwasher scene")
    for tray in ("top", "bottom"):
        todo = [
            (idx, g)
            for idx, g in enumerate(goals)
            if g.tray == tray and g.scored and g.filled_by is None
        ]
        if not todo:
            continue
        if tray == "top" and not trays.top_open:
            return ActionTuple(tray_op=TOGGLE_TOP)
        if tray == "bottom":
            if trays.top_open:
                return ActionTuple(tray_op=TOGGLE_TOP)  # close the top rack first
            if not trays.bottom_open:
                return ActionTuple(tray_op=TOGGLE_BOTTOM)
        for goal_idx, g in todo:
            dish_idx = next(
                (
                    i
                    for i, e in enumerate(objects)
                    if e.kind == g.required_kind and not _correctly_placed(state, e)
                ),
                None,
            )
            if dish_idx is not None:
                return ActionTuple(
                    object_id=dish_idx,
                    goal_id=goal_idx,
                    orientation=g.required_orientation,
                    tray_op=NOOP,
                )
    raise NoActionError("dishwasher already loaded")


EXPERTS = {
    "kblock": expert_blocks,
    "kpyramid": expert_blocks,
    "multistack": expert_blocks,
    "boxrearrange": expert_rearrange,
    "dishwasher": expert_dishwasher,
}


def expert_for(spec: WorldSpec):
    return EXPERTS[spec.family]


# ---------------------------------------------------------------------------
# recording


def record(spec: WorldSpec, expert, n_traj: int, seed: int = 0,
           source: str = "scripted") -> DemoDataset:
    """Roll n_traj expert episodes, storing every (state, action) pair."""
    dataset = DemoDataset()
    for i in range(n_traj):
        traj_seed = seed * 1000 + i
        episode_spec = replace(spec, seed=traj_seed)
        state = worlds.reset(episode_spec)
        pairs: list[tuple[SceneState, ActionTuple]] = []
        done = worlds.is_done(state)
        while not done:
            try:
                action = expert(state)
            except NoActionError as exc:
                raise RecordingError(f"expert stalled mid-episode: {exc}") from exc
            if not action.is_tray_toggle():
                ok, reason = feasible(state, action)
                if not ok:
                    raise RecordingError(f"expert proposed an infeasible action: {reason}")
            pairs.append((state.copy(), action))
            state, _, done = worlds.step(state, action)
        dataset.trajectories.append(
            Trajectory(spec=episode_spec, seed=traj_seed, source=source,
                       pairs=pairs, final_state=state.copy())
        )
    return dataset


def default_blockworld_corpus(seed: int = 0) -> DemoDataset:
    """20 trajectories / 90 pairs: plain K=3,4 stack inversion plus
    single-box pack/unpack at K=3,4 (the open/close-cover demonstrations)."""
    corpus = DemoDataset()
    corpus = corpus.merged(record(WorldSpec(family="kblock", k=3), expert_blocks, 5, seed=seed))
    corpus = corpus.merged(record(WorldSpec(family="kblock", k=4), expert_blocks, 5, seed=seed + 1))
    for i, k in enumerate((3, 3, 3, 4, 4)):
        mode = "pack" if i % 2 == 0 else "unpack"
        corpus = corpus.merged(
            record(
                WorldSpec(family="boxrearrange", k=k, box_mode=mode, n_boxes=1),
                expert_rearrange, 1, seed=seed + 10 + i,
            )
        )
    # Balance: the 5 box episodes above give 5+5+5+6+6 = 27 pairs; add the
    # remaining 5 box episodes mirrored at the other K for 90 pairs total.
    for i, k in enumerate((4, 4, 4, 3, 3)):
        mode = "unpack" if i % 2 == 0 else "pack"
        corpus = corpus.merged(
            record(
                WorldSpec(family="boxrearrange", k=k, box_mode=mode, n_boxes=1),
                expert_rearrange, 1, seed=seed + 20 + i,
            )
        )
    return corpus


def default_dishwasher_corpus(scenario: str = "top_bottom", seed: int = 0,
                              n_demos: int = 5) -> DemoDataset:
    spec = WorldSpec(family="dishwasher", scenario=scenario, n_plates=5, n_bowls=5)
    return record(spec, expert_dishwasher, n_demos, seed=seed)


# ---------------------------------------------------------------------------
# targets and augmentation


def make_targets(action: ActionTuple, n_objects: int, n_goals: int) -> dict[str, np.ndarray]:
    """One-hot target distribution per head the action constrains."""
    targets: dict[str, np.ndarray] = {}
    if action.is_tray_toggle():
        tray = np.zeros(3, dtype=np.float32)
        tray[0 if action.tray_op == TOGGLE_TOP else 1] = 1.0
        targets["tray"] = tray
        return targets
    if action.object_id is None or action.goal_id is None:
        raise ValueError("pick-and-place action is missing indices")
    if not 0 <= action.object_id < n_objects:
        raise ValueError(f"object index {action.object_id} outside K={n_objects}")
    if not 0 <= action.goal_id < n_goals:
        raise ValueError(f"goal index {action.goal_id} outside L={n_goals}")
    obj = np.zeros(n_objects, dtype=np.float32)
    obj[action.object_id] = 1.0
    targets["object"] = obj
    goal = np.zeros(n_goals, dtype=np.float32)
    goal[action.goal_id] = 1.0
    targets["goal"] = goal
    if action.orientation is not None:
        orient = np.zeros(worlds.N_ORIENTATIONS, dtype=np.float32)
        if not 0 <= action.orientation < worlds.N_ORIENTATIONS:
            raise ValueError(f"orientation {action.orientation} out of range")
        orient[action.orientation] = 1.0
        targets["orientation"] = orient
    if action.tray_op == NOOP:
        targets["tray"] = np.array([0.0, 0.0, 1.0], dtype=np.float32)
    return targets


def _translate_scene(scene: SceneState, dx: float, dy: float) -> SceneState:
    out = scene.copy()
    for e in out.entities:
        e.pose = (e.pose[0] + dx, e.pose[1] + dy, e.pose[2])
    for g in out.goals:
        g.pose = (g.pose[0] + dx, g.pose[1] + dy, g.pose[2])
    for b in out.boxes:
        b.pose = (b.pose[0] + dx, b.pose[1] + dy, b.pose[2])
    return out


def _translation_range(scene: SceneState, bounds) -> tuple[float, float, float, float]:
    xs = [e.pose[0] for e in scene.entities] + [g.pose[0] for g in scene.goals]
    ys = [e.pose[1] for e in scene.entities] + [g.pose[1] for g in scene.goals]
    (x_lo, x_hi), (y_lo, y_hi) = bounds
    dx_lo, dx_hi = x_lo - min(xs), x_hi - max(xs)
    dy_lo, dy_hi = y_lo - min(ys), y_hi - max(ys)
    if dx_lo > dx_hi:
        dx_lo = dx_hi = 0.0
    if dy_lo > dy_hi:
        dy_lo = dy_hi = 0.0
    return dx_lo, dx_hi, dy_lo, dy_hi


def _permute_scene(scene: SceneState, action: ActionTuple,
                   rng: np.random.Generator) -> tuple[SceneState, ActionTuple]:
    """Shuffle entity/goal list order and remap the action's visible indices."""
    old_objects = visible_entities(scene)
    old_goals = visible_goals(scene)
    out = scene.copy()
    out.entities = [out.entities[i] for i in rng.permutation(len(out.entities))]
    out.goals = [out.goals[i] for i in rng.permutation(len(out.goals))]
    new_action = ActionTuple(
        object_id=action.object_id,
        goal_id=action.goal_id,
        orientation=action.orientation,
        tray_op=action.tray_op,
    )
    if not action.is_tray_toggle():
        obj_id = old_objects[action.object_id].id
        goal_id = old_goals[action.goal_id].id
        new_objects = visible_entities(out)
        new_goals = visible_goals(out)
        new_action.object_id = next(i for i, e in enumerate(new_objects) if e.id == obj_id)
        new_action.goal_id = next(i for i, g in enumerate(new_goals) if g.id == goal_id)
    return out, new_action


def augment(dataset: DemoDataset, factor: int = 10, seed: int = 0) -> DemoDataset:
    """Replicate every pair: the original plus factor-1 translated,
    re-enumerated copies with action indices remapped consistently."""
    base = dataset.pairs()
    if not base:
        raise ValueError("cannot augment an empty dataset")
    if factor < 1:
        raise ValueError("factor must be >= 1")
    rng = np.random.default_rng(seed)
    out = DemoDataset()
    for pair in base:
        out.samples.append(pair)
        dx_lo, dx_hi, dy_lo, dy_hi = _translation_range(pair.scene, pair.spec.bounds)
        for _ in range(factor - 1):
            dx = float(rng.uniform(dx_lo, dx_hi))
            dy = float(rng.uniform(dy_lo, dy_hi))
            scene = _translate_scene(pair.scene, dx, dy)
            scene, action = _permute_scene(scene, pair.action, rng)
            out.samples.append(DemoPair(spec=pair.spec, scene=scene, action=action))
    return out


# ---------------------------------------------------------------------------
# demo files (newline-delimited JSON)


def _header_record() -> dict:
    return {"type": "header", "format": DEMO_FORMAT, "version": DEMO_VERSION}


def _trajectory_records(traj: Trajectory, traj_id: int):
    yield {
        "type": "trajectory",
        "traj_id": traj_id,
        "world": traj.spec.to_json(),
        "seed": traj.seed,
        "source": traj.source,
    }
    for t, (scene, action) in enumerate(traj.pairs):
        yield {
            "type": "pair",
            "traj_id": traj_id,
            "t": t,
            "scene": scene_to_json(scene),
            "action": action_to_json(action),
        }
    yield {"type": "terminal", "traj_id": traj_id, "scene": scene_to_json(traj.final_state)}


def save_demos(dataset: DemoDataset, path: str) -> None:
    if dataset.samples:
        raise ValueError("only recorded trajectories are persisted; augment at training time")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(_header_record()) + "\n")
        for i, traj in enumerate(dataset.trajectories):
            for rec in _trajectory_records(traj, i):
                fh.write(json.dumps(rec) + "\n")


def append_trajectory(path: str, traj: Trajectory) -> None:
    """Append one trajectory, writing the header for a fresh file."""
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    next_id = 0
    if not fresh:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                if rec["type"] == "trajectory":
                    next_id = max(next_id, rec["traj_id"] + 1)
    with open(path, "a", encoding="utf-8") as fh:
        if fresh:
            fh.write(json.dumps(_header_record()) + "\n")
        for rec in _trajectory_records(traj, next_id):
            fh.write(json.dumps(rec) + "\n")


def load_demos(path: str) -> DemoDataset:
    trajs: dict[int, dict] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != DEMO_FORMAT:
            raise ValueError(f"{path} is not a demo file")
        if header.get("version") != DEMO_VERSION:
            raise ValueError(f"unsupported demo file version {header.get('version')}")
        for line in fh:
            rec = json.loads(line)
            if rec["type"] == "trajectory":
                trajs[rec["traj_id"]] = {
                    "spec": WorldSpec.from_json(rec["world"]),
                    "seed": rec["seed"],
                    "source": rec["source"],
                    "pairs": [],
                    "final": None,
                }
            elif rec["type"] == "pair":
                trajs[rec["traj_id"]]["pairs"].append(
                    (rec["t"], scene_from_json(rec["scene"]), action_from_json(rec["action"]))
                )
            elif rec["type"] == "terminal":
                trajs[rec["traj_id"]]["final"] = scene_from_json(rec["scene"])
    dataset = DemoDataset()
    for tid in sorted(trajs):
        info = trajs[tid]
        info["pairs"].sort(key=lambda p: p[0])
        dataset.trajectories.append(
            Trajectory(
                spec=info["spec"],
                seed=info["seed"],
                source=info["source"],
                pairs=[(s, a) for (_, s, a) in info["pairs"]],
                final_state=info["final"],
            )
        )
    return dataset


def replay(dataset: DemoDataset) -> list[str]:
    """Re-simulate every trajectory; returns divergence descriptions (empty = faithful)."""
    problems: list[str] = []
    for tid, traj in enumerate(dataset.trajectories):
        state = worlds.reset(traj.spec)
        for t, (snap, action) in enumerate(traj.pairs):
            if scene_to_json(state) != scene_to_json(snap):
                problems.append(f"trajectory {tid} diverges at step {t}")
                break
            state, _, _ = worlds.step(state, action)
        else:
            if scene_to_json(state) != scene_to_json(traj.final_state):
                problems.append(f"trajectory {tid} terminal state diverges")
    return problems
