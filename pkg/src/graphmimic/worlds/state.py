"""Symbolic scene state shared by every task family.

A scene is a flat list of entities (things the robot can move), a flat
list of goals (places entities can be put), optional boxes whose covers
hide their contents, and optional dishwasher trays. Everything is a
plain value; stepping copies the state.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, asdict

# entity kinds
BLOCK = "block"
COVER = "cover"
PLATE = "plate"
BOWL = "bowl"

# goal kinds
GOAL_BLOCK = "goal_block"
GOAL_COVER = "goal_cover"
GOAL_TOP = "goal_top"
GOAL_BOTTOM = "goal_bottom"

# tray ops
TOGGLE_TOP = "toggle_top"
TOGGLE_BOTTOM = "toggle_bottom"
NOOP = "noop"
TRAY_OPS = (TOGGLE_TOP, TOGGLE_BOTTOM, NOOP)

BLOCK_HEIGHT = 0.05
BLOCK_WIDTH = 0.05
COVER_REST_Z = 0.01
BOX_HEIGHT = 0.20

# fixed per-kind dish orientations demanded by the slot goals
PLATE_ORIENTATION = 2
BOWL_ORIENTATION = 4
N_ORIENTATIONS = 6


@dataclass
class Entity:
    id: int
    kind: str
    pose: tuple[float, float, float]
    orientation: int = 0
    # what the entity rests on: ("table", None) | ("entity", id) | ("goal", id) | ("box", id)
    support: tuple[str, int | None] = ("table", None)
    container_box: int | None = None


@dataclass
class Goal:
    id: int
    kind: str
    pose: tuple[float, float, float]
    required_kind: str | None = None
    required_orientation: int | None = None
    filled_by: int | None = None
    support_goals: tuple[int, ...] = ()
    scored: bool = True
    container_box: int | None = None
    tray: str | None = None  # "top" | "bottom" for dishwasher slots


@dataclass
class Box:
    id: int
    pose: tuple[float, float, float]
    cover_goal: int  # goal id on the box top; box is open while it is unfilled


@dataclass
class TrayState:
    top_open: bool = False
    bottom_open: bool = False


@dataclass
class SceneState:
    entities: list[Entity] = field(default_factory=list)
    goals: list[Goal] = field(default_factory=list)
    boxes: list[Box] = field(default_factory=list)
    trays: TrayState | None = None
    step_count: int = 0
    step_budget: int = 0
    episode_seed: int = 0
    failure_rate: float = 0.0

    def copy(self) -> "SceneState":
        return copy.deepcopy(self)

    def entity_by_id(self, eid: int) -> Entity:
        return next(e for e in self.entities if e.id == eid)

    def goal_by_id(self, gid: int) -> Goal:
        return next(g for g in self.goals if g.id == gid)

    def box_by_id(self, bid: int) -> Box:
        return next(b for b in self.boxes if b.id == bid)


@dataclass
class ActionTuple:
    """One high-level decision: pick object -> place goal, or a tray toggle.

    Indices refer to the currently *visible* object/goal node ordering,
    not entity ids. When tray_op is a toggle the pick/place fields are
    ignored.
    """

    object_id: int | None = None
    goal_id: int | None = None
    orientation: int | None = None
    tray_op: str | None = None

    def is_tray_toggle(self) -> bool:
        return self.tray_op in (TOGGLE_TOP, TOGGLE_BOTTOM)


FAMILIES = ("kblock", "kpyramid", "multistack", "boxrearrange", "dishwasher")
BOX_MODES = ("swap", "pack", "unpack")
SCENARIOS = ("top_bottom", "left_right")


@dataclass
class WorldSpec:
    family: str = "kblock"
    k: int = 3
    stacks: int = 1
    n_boxes: int = 2
    box_mode: str = "swap"
    n_plates: int = 5
    n_bowls: int = 5
    scenario: str = "top_bottom"
    seed: int = 0
    failure_rate: float = 0.0
    budget_factor: int = 4
    bounds: tuple[tuple[float, float], tuple[float, float]] = ((0.25, 0.75), (-0.35, 0.35))

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown world family {self.family!r}")
        if self.family != "dishwasher" and self.k < 1:
            raise ValueError("k must be >= 1")
        if self.family == "multistack" and self.stacks < 1:
            raise ValueError("stacks must be >= 1")
        if self.family == "boxrearrange" and self.box_mode not in BOX_MODES:
            raise ValueError(f"unknown box_mode {self.box_mode!r}")
        if self.family == "dishwasher" and self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if not 0.0 <= self.failure_rate <= 1.0:
            raise ValueError("failure_rate must lie in [0, 1]")

    def to_json(self) -> dict:
        d = asdict(self)
        d["bounds"] = [list(self.bounds[0]), list(self.bounds[1])]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "WorldSpec":
        d = dict(d)
        if "bounds" in d:
            b = d["bounds"]
            d["bounds"] = ((b[0][0], b[0][1]), (b[1][0], b[1][1]))
        return cls(**d)


# ---------------------------------------------------------------------------
# JSON serialization of scenes (shared with the demo files and the service)


def scene_to_json(state: SceneState) -> dict:
    return {
        "entities": [
            {
                "id": e.id,
                "kind": e.kind,
                "pose": list(e.pose),
                "orientation": e.orientation,
                "support": [e.support[0], e.support[1]],
                "container_box": e.container_box,
            }
            for e in state.entities
        ],
        "goals": [
            {
                "id": g.id,
                "kind": g.kind,
                "pose": list(g.pose),
                "required_kind": g.required_kind,
                "required_orientation": g.required_orientation,
                "filled_by": g.filled_by,
                "support_goals": list(g.support_goals),
                "scored": g.scored,
                "container_box": g.container_box,
                "tray": g.tray,
            }
            for g in state.goals
        ],
        "boxes": [
            {"id": b.id, "pose": list(b.pose), "cover_goal": b.cover_goal}
            for b in state.boxes
        ],
        "trays": (
            {"top_open": state.trays.top_open, "bottom_open": state.trays.bottom_open}
            if state.trays is not None
            else None
        ),
        "step_count": state.step_count,
        "step_budget": state.step_budget,
        "episode_seed": state.episode_seed,
        "failure_rate": state.failure_rate,
    }


def scene_from_json(d: dict) -> SceneState:
    return SceneState(
        entities=[
            Entity(
                id=e["id"],
                kind=e["kind"],
                pose=tuple(e["pose"]),
                orientation=e["orientation"],
                support=(e["support"][0], e["support"][1]),
                container_box=e["container_box"],
            )
            for e in d["entities"]
        ],
        goals=[
            Goal(
                id=g["id"],
                kind=g["kind"],
                pose=tuple(g["pose"]),
                required_kind=g["required_kind"],
                required_orientation=g["required_orientation"],
                filled_by=g["filled_by"],
                support_goals=tuple(g["support_goals"]),
                scored=g["scored"],
                container_box=g["container_box"],
                tray=g["tray"],
            )
            for g in d["goals"]
        ],
        boxes=[Box(id=b["id"], pose=tuple(b["pose"]), cover_goal=b["cover_goal"]) for b in d["boxes"]],
        trays=(
            TrayState(top_open=d["trays"]["top_open"], bottom_open=d["trays"]["bottom_open"])
            if d.get("trays") is not None
            else None
        ),
        step_count=d["step_count"],
        step_budget=d["step_budget"],
        episode_seed=d["episode_seed"],
        failure_rate=d["failure_rate"],
    )


def action_to_json(a: ActionTuple) -> dict:
    return {
        "object": a.object_id,
        "goal": a.goal_id,
        "orientation": a.orientation,
        "tray_op": a.tray_op,
    }


def action_from_json(d: dict) -> ActionTuple:
    return ActionTuple(
        object_id=d.get("object"),
        goal_id=d.get("goal"),
        orientation=d.get("orientation"),
        tray_op=d.get("tray_op"),
    )
