"""Interactive session server.

Exposes the pick-and-place pipeline to clients: create a deterministic
scene, submit a typed command, stream the planned and executed motion as
ordered events, then command again against the evolved scene.

Wire format (``dash-wire/1``): each event is a JSON object
``{"v": "dash-wire/1", "seq": n, "kind": k, "payload": {...}}`` with kinds
``scene_snapshot | plan_ready | step_batch | stage_change | trial_outcome |
error | heartbeat``. Sequence numbers are strictly increasing per session;
clients resume by passing the last seen number. Pose samples inside
``step_batch`` are decimated to at most 30 Hz; full-rate traces stay
server-side.
"""

import json
import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from . import body as B
from . import command_lang as L
from . import envs as E
from . import harness as H
from . import perception as V
from . import scene as scene_mod

WIRE_VERSION = "dash-wire/1"
EVENT_KINDS = ("scene_snapshot", "plan_ready", "step_batch", "stage_change",
               "trial_outcome", "error", "heartbeat")
STEP_BATCH_SIZE = 8  # pose samples per step_batch event
PLAN_SAMPLE_HZ = 10.0  # preview sampling of planned trajectories


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8437
    session_ttl: float = 1800.0  # seconds of inactivity before expiry
    max_sessions: int = 32


class BusySession(Exception):
    """A command arrived while the session was still executing one."""


def _round(x, nd=5):
    return [round(float(v), nd) for v in np.asarray(x, dtype=float).ravel()]


def _skeleton(model, q) -> list:
    """Arm joint origins plus the palm point, for client-side line drawing."""
    frames, palm = B._arm_frames(model, np.asarray(q, dtype=float)[:B.ARM_DOFS])
    pts = [frames[i][:3, 3] for i in range(B.ARM_DOFS)]
    pts.append(palm[:3, 3])
    return [_round(p) for p in pts]


def _reward_payload(env) -> dict:
    """Current reward breakdown for the in-flight episode, if any."""
    if env.spec is None or env.state is None:
        return None
    try:
        if env.spec.kind == "grasp":
            br = E.reward_grasp(env.state, env.spec.target.id, env.spec.p_bar)
        else:
            br = E.reward_place(env.state, env.spec.target.id, env.spec.p_bar,
                                env.q_bar)
    except Exception:  # focus object may be gone mid-transition
        return None
    terms = {k: round(float(v), 5) for k, v in vars(br).items()
             if v is not None and k != "total"}
    return {"terms": terms, "total": round(float(br.total), 5)}


def _scene_payload(scene) -> dict:
    return {
        "table_extent": _round(scene.table_extent, 4),
        "objects": [
            {
                "id": o.id, "shape": o.shape, "color": o.color,
                "width": round(float(o.width), 5),
                "height": round(float(o.height), 5),
                "position": _round(o.base_position),
                "orientation": _round(o.orientation),
            }
            for o in scene.objects
        ],
    }


@dataclass
class Session:
    id: str
    seed: int
    mode: str
    scene: object
    model: object
    created: float = field(default_factory=time.monotonic)
    last_active: float = field(default_factory=time.monotonic)
    events: list = field(default_factory=list)
    history: list = field(default_factory=list)  # submitted command texts
    busy: bool = False
    trial_index: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    def emit(self, kind: str, payload: dict) -> dict:
        with self.lock:
            event = {"v": WIRE_VERSION, "seq": len(self.events) + 1,
                     "kind": kind, "payload": payload}
            self.events.append(event)
        return event

    def events_after(self, seq: int) -> list:
        with self.lock:
            return [e for e in self.events if e["seq"] > seq]

    def touch(self):
        self.last_active = time.monotonic()


class _StreamObserver(H.PipelineObserver):
    """Folds pipeline hooks into wire events on a session."""

    def __init__(self, session: Session):
        self.session = session
        self._batch = []
        self.last_env = None

    def on_stage(self, stage: str):
        self._flush()
        self.session.emit("stage_change", {"stage": stage})

    def on_plan(self, stage: str, traj, model):
        duration = float(traj.times[-1])
        n = max(2, int(duration * PLAN_SAMPLE_HZ) + 1)
        ts = np.linspace(0.0, duration, n)
        self.session.emit("plan_ready", {
            "stage": stage,
            "duration": round(duration, 4),
            "samples": [[round(float(t), 4)] + _round(traj.sample(t))
                        for t in ts],
            "links": [_skeleton(model, traj.sample(t)) for t in ts],
        })

    def on_sample(self, env):
        self.last_env = env
        st = env.state
        self._batch.append({
            "t": round(float(st.time), 4),
            "q": _round(st.q),
            "links": _skeleton(st.model, st.q),
            "reward": _reward_payload(env),
            "objects": {
                o.id: {"position": _round(o.position),
                       "orientation": _round(o.orientation)}
                for o in st.objects
            },
        })
        if len(self._batch) >= STEP_BATCH_SIZE:
            self._flush()

    def _flush(self):
        if self._batch:
            self.session.emit("step_batch", {"poses": self._batch})
            self._batch = []


class _SessionTask:
    """Adapter giving a grounded command the scene-task field shape."""

    def __init__(self, spec):
        self.kind = spec.kind
        self.target_id = spec.target_id
        self.destination = tuple(float(v) for v in spec.p_destination)
        self.bottom_id = spec.bottom_id


def _execute(session: Session, spec):
    """Worker: run one trial on the session scene, streaming events."""
    observer = _StreamObserver(session)
    try:
        seed = H._child_seed(session.seed, 0xE0 + session.trial_index)
        result = H.run_trial(seed, spec.kind, session.mode,
                             model=session.model, scene=session.scene,
                             task=_SessionTask(spec), observer=observer)
        observer._flush()
        if observer.last_env is not None:
            session.scene = H._scene_now(observer.last_env.state)
        session.emit("trial_outcome", {
            "outcome": result.outcome,
            "kind": result.kind,
            "target_id": result.target_id,
            "final_position": (_round(result.final_position)
                               if result.final_position else None),
            "destination": (_round(result.destination)
                            if result.destination else None),
            "note": result.note,
            "sim_steps": result.sim_steps,
        })
        session.emit("scene_snapshot", _scene_payload(session.scene))
    except Exception as exc:  # pragma: no cover - defensive
        session.emit("error", {"error": type(exc).__name__,
                               "detail": str(exc)})
    finally:
        session.trial_index += 1
        session.busy = False
        session.touch()


class CreateSessionRequest(BaseModel):
    seed: int = 0
    object_count: int = 0  # 0 keeps the generator's default 4-6 range
    mode: str = "ground_truth"


class CommandRequest(BaseModel):
    text: str


def build_app(config: ServiceConfig = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="dash session server")
    sessions: dict = {}
    model = B.build_right_model()

    def _purge():
        now = time.monotonic()
        for sid in [s for s, v in sessions.items()
                    if now - v.last_active > config.session_ttl]:
            del sessions[sid]

    def _get(sid: str) -> Session:
        _purge()
        if sid not in sessions:
            raise HTTPException(status_code=404, detail="session expired")
        return sessions[sid]

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        _purge()
        if req.object_count < 0 or req.object_count > 6:
            raise HTTPException(status_code=422,
                                detail="object_count must be 1-6 (0: default)")
        if req.mode not in ("ground_truth", "noisy"):
            raise HTTPException(status_code=422,
                                detail=f"unknown mode {req.mode!r}")
        if len(sessions) >= config.max_sessions:
            raise HTTPException(status_code=503, detail="capacity exceeded")
        count_range = ((req.object_count, req.object_count)
                       if req.object_count else (4, 6))
        scene = scene_mod.generate_scene(req.seed,
                                         object_count_range=count_range)
        session = Session(id=uuid.uuid4().hex[:12], seed=req.seed,
                          mode=req.mode, scene=scene, model=model)
        sessions[session.id] = session
        session.emit("scene_snapshot", _scene_payload(scene))
        return {"id": session.id, "seed": req.seed, "mode": req.mode,
                "scene": _scene_payload(scene)}

    @app.post("/sessions/{sid}/command")
    def submit_command(sid: str, req: CommandRequest):
        session = _get(sid)
        session.touch()
        if session.busy:
            raise HTTPException(status_code=409, detail={
                "error": "BusySession",
                "detail": "an execution is already in flight"})
        estimates = V.snapshot(session.scene, V.NoiseProfile.exact(),
                               np.random.default_rng(0))
        try:
            spec = L.parse_and_ground(req.text, estimates)
        except L.AmbiguousCommand as exc:
            raise HTTPException(status_code=422, detail={
                "error": "AmbiguousCommand", "detail": str(exc),
                "candidates": list(exc.candidate_ids)})
        except L.ParseFailure as exc:
            raise HTTPException(status_code=422, detail={
                "error": "ParseFailure", "detail": str(exc)})
        session.busy = True
        session.history.append(req.text)
        worker = threading.Thread(target=_execute, args=(session, spec),
                                  daemon=True)
        worker.start()
        return {"accepted": True, "task": {
            "kind": spec.kind, "target_id": spec.target_id,
            "destination": _round(spec.p_destination),
            "bottom_id": spec.bottom_id}}

    @app.get("/sessions/{sid}/events")
    def poll_events(sid: str, after: int = 0):
        session = _get(sid)
        session.touch()
        events = session.events_after(after)
        if not events and not session.busy:
            return {"events": [{"v": WIRE_VERSION, "seq": after,
                                "kind": "heartbeat", "payload": {}}],
                    "busy": session.busy}
        return {"events": events, "busy": session.busy}

    @app.get("/sessions/{sid}")
    def session_info(sid: str):
        session = _get(sid)
        return {"id": session.id, "seed": session.seed,
                "mode": session.mode, "busy": session.busy,
                "history": list(session.history),
                "scene": _scene_payload(session.scene)}

    @app.websocket("/sessions/{sid}/stream")
    async def stream(ws: WebSocket, sid: str):
        import asyncio
        await ws.accept()
        try:
            after = int(ws.query_params.get("after", 0))
        except ValueError:
            after = 0
        last = after
        try:
            if sid not in sessions:
                await ws.send_text(json.dumps({
                    "v": WIRE_VERSION, "seq": last, "kind": "error",
                    "payload": {"error": "SessionExpired",
                                "detail": "session expired"}}))
                await ws.close()
                return
            idle = 0.0
            while True:
                session = sessions.get(sid)
                if session is None:
                    break
                events = session.events_after(last)
                for event in events:
                    await ws.send_text(json.dumps(event))
                    last = event["seq"]
                if events:
                    idle = 0.0
                else:
                    await asyncio.sleep(0.05)
                    idle += 0.05
                    if idle >= 2.0:  # keep idle connections alive
                        await ws.send_text(json.dumps({
                            "v": WIRE_VERSION, "seq": last,
                            "kind": "heartbeat", "payload": {}}))
                        idle = 0.0
        except WebSocketDisconnect:
            pass

    static_dir = _frontend_dist()
    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="studio")

    return app


def _frontend_dist():
    from pathlib import Path
    here = Path(__file__).resolve()
    for parent in here.parents:
        cand = parent / "frontend" / "dist"
        if cand.is_dir():
            return str(cand)
    return None


def serve(config: ServiceConfig = None):  # pragma: no cover - manual entry
    import uvicorn
    config = config or ServiceConfig()
    uvicorn.run(build_app(config), host=config.host, port=config.port)
