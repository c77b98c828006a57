"""HTTP demonstration-collection service.

A thin adapter over the worlds library: every transition it reports is
exactly worlds.step on the same inputs. Sessions live in memory, one
lock each; finished sessions append their pairs to the demo file in the
same schema scripted recording uses. Infeasible submissions return
feasible=false with a reason and leave the session untouched.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, Request
from fastapi.staticfiles import StaticFiles

from .. import worlds
from ..demos import Trajectory, append_trajectory
from ..explain import ExplainConfig, explain_decision
from ..scenegraph import encode_scene
from ..worlds import (
    ActionTuple,
    SceneState,
    WorldSpec,
    action_from_json,
    action_to_json,
    scene_to_json,
)
from .weights import load_weights


@dataclass
class Session:
    id: str
    spec: WorldSpec
    state: SceneState
    pairs: list[tuple[SceneState, ActionTuple]] = field(default_factory=list)
    status: str = "active"
    lock: threading.Lock = field(default_factory=threading.Lock)


def _feasible_actions(state: SceneState) -> list[dict]:
    actions: list[dict] = []
    n_obj = len(worlds.visible_entities(state))
    n_goal = len(worlds.visible_goals(state))
    for o in range(n_obj):
        for g in range(n_goal):
            probe = ActionTuple(object_id=o, goal_id=g)
            ok, _ = worlds.feasible(state, probe)
            if ok:
                actions.append({"object": o, "goal": g})
    if state.trays is not None:
        actions.append({"tray_op": worlds.TOGGLE_TOP})
        actions.append({"tray_op": worlds.TOGGLE_BOTTOM})
    return actions


def _session_view(session: Session) -> dict:
    state = session.state
    return {
        "session_id": session.id,
        "status": session.status,
        "scene": scene_to_json(state),
        "feasible_actions": _feasible_actions(state),
        "goals_filled": worlds.goals_filled(state),
        "goals_total": worlds.total_goals(state),
        "done": worlds.is_done(state),
    }


def create_app(demo_path: str = "demos.jsonl", ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="graphmimic demo service")
    sessions: dict[str, Session] = {}
    weight_cache: dict[str, object] = {}

    async def _json_body(request: Request) -> dict:
        try:
            payload = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="malformed JSON body")
        if not isinstance(payload, dict):
            raise HTTPException(status_code=400, detail="body must be a JSON object")
        return payload

    def _get(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    @app.post("/sessions")
    async def create_session(request: Request):
        payload = await _json_body(request)
        world = payload.get("world")
        if not isinstance(world, dict):
            raise HTTPException(status_code=400, detail="missing world spec")
        try:
            spec = WorldSpec.from_json(world)
            state = worlds.reset(spec)
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        session = Session(id=uuid.uuid4().hex[:12], spec=spec, state=state)
        sessions[session.id] = session
        return _session_view(session)

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        return _session_view(_get(session_id))

    @app.post("/sessions/{session_id}/action")
    async def submit_action(session_id: str, request: Request):
        session = _get(session_id)
        payload = await _json_body(request)
        body = payload.get("action", payload)
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="missing action")
        try:
            action = action_from_json(body)
        except (TypeError, ValueError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=f"bad action: {exc}")
        with session.lock:
            if session.status != "active":
                raise HTTPException(status_code=409, detail="session already finished")
            try:
                ok, reason = worlds.feasible(session.state, action)
            except IndexError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            if not ok:
                view = _session_view(session)
                view.update({"feasible": False, "reason": reason, "reward": 0.0})
                return view
            session.pairs.append((session.state.copy(), action))
            session.state, reward, _ = worlds.step(session.state, action)
            view = _session_view(session)
            view.update({"feasible": True, "reason": worlds.OK, "reward": reward})
            return view

    @app.post("/sessions/{session_id}/finish")
    async def finish_session(session_id: str):
        session = _get(session_id)
        with session.lock:
            if session.status != "active":
                raise HTTPException(status_code=409, detail="session already finished")
            session.status = "finished"
            traj = Trajectory(
                spec=session.spec,
                seed=session.spec.seed,
                source="human",
                pairs=session.pairs,
                final_state=session.state.copy(),
            )
            if session.pairs:
                append_trajectory(demo_path, traj)
        return {"session_id": session.id, "pairs": len(session.pairs), "demo_file": demo_path}

    @app.get("/sessions/{session_id}/explain")
    async def explain_session(session_id: str, weights: str, c_e: int = 3, c_f: int = 1):
        session = _get(session_id)
        try:
            params = weight_cache.get(weights)
            if params is None:
                params = load_weights(weights)
                weight_cache[weights] = params
        except (OSError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"cannot load weights: {exc}")
        with session.lock:
            graph = encode_scene(session.state)
            explanation = explain_decision(
                params, graph, c_edges=c_e, c_features=c_f,
                config=ExplainConfig(steps=100),
            )
        return explanation.to_json()

    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
