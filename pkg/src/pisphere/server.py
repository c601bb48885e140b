"""Live session service: one robot session per WebSocket connection.

The client sends start/pause/resume and interaction events as JSON text
messages; the service streams per-tick state updates back.  A latest-value
outbox keeps a stalled client from blocking the session loop: state updates
are overwritten when stale, while acks, errors and the finished notice are
queued and never dropped.  Blind mode starts sessions from opaque tokens so
no outbound message names the condition.
"""

from __future__ import annotations

import asyncio
import json
import pathlib
import uuid
from collections import deque
from dataclasses import dataclass

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles

from . import defaults, experiment
from .arena import arena_to_dict, load_arena
from .simulator import HandWall, InteractionEvent, Nudge

PHASES = ("idle", "running", "paused", "finished")


@dataclass
class ServerSettings:
    arena_path: str | None = None
    snapshot_path: str | None = None
    config_path: str | None = None
    log_dir: str = "logs"
    blind: bool = False
    tokens_path: str | None = None
    tokens: dict | None = None  # token -> {"condition": ...} (overrides tokens_path)
    duration_s: float = experiment.DEFAULT_DURATION_S
    speedup: float = 1.0  # sim seconds per wall second; 0 = unthrottled
    static_dir: str | None = None


class Outbox:
    """Queued events plus a latest-value slot for state updates."""

    def __init__(self):
        self._events: deque = deque()
        self._state: dict | None = None
        self._wake = asyncio.Event()
        self.history: list[dict] = []  # all messages handed to the sender

    def push_event(self, msg: dict) -> None:
        self._events.append(msg)
        self._wake.set()

    def set_state(self, msg: dict) -> None:
        self._state = msg
        self._wake.set()

    async def drain(self) -> list[dict]:
        await self._wake.wait()
        self._wake.clear()
        out = list(self._events)
        self._events.clear()
        if self._state is not None:
            out.append(self._state)
            self._state = None
        self.history.extend(out)
        return out


class LiveSession:
    """Wraps a ConditionSession with a phase machine and an event inbox."""

    def __init__(self, settings: ServerSettings, condition: str, seed: int):
        arena = (
            load_arena(settings.arena_path)
            if settings.arena_path
            else defaults.default_arena_spec()
        )
        cfg = _load_config(settings)
        sim_cfg = defaults.sim_from_dict(cfg["sim"])
        if settings.snapshot_path:
            snap = pathlib.Path(settings.snapshot_path).read_bytes()
        else:
            snap = defaults.default_snapshot_bytes()
        if condition == experiment.REA:
            from .networks import LearningConfig

            learning = LearningConfig(eps_controller=0.0, eps_model=0.0, adapting=False)
        else:
            learning = defaults.learning_from_dict({**cfg["learning"], "adapting": True})
        spec = experiment.ConditionSpec(
            condition, snap, learning, duration=settings.duration_s
        )
        self.session = experiment.ConditionSession(
            spec, arena, sim_cfg, experiment.NullInteractor(), seed, fall_policy="end"
        )
        self.session_id = uuid.uuid4().hex[:12]
        self.phase = "running"
        self.pending: list[InteractionEvent] = []
        self.dt = sim_cfg.dt

    def tick(self) -> dict:
        evs, self.pending = self.pending, []
        return self.session.tick(evs)


def _load_config(settings: ServerSettings) -> dict:
    if settings.config_path:
        with open(settings.config_path) as f:
            return json.load(f)
    return defaults.default_config()


def _load_tokens(settings: ServerSettings) -> dict:
    if settings.tokens is not None:
        return settings.tokens
    if settings.tokens_path:
        with open(settings.tokens_path) as f:
            return json.load(f)
    return {}


def _state_message(live: LiveSession, row: dict) -> dict:
    s = row["state"]
    return {
        "type": "state",
        "t": row["t"],
        "position": s["position"],
        "heading": s["heading"],
        "speed": s["speed"],
        "pi_value": row["diag"]["pi_value"],
        "prediction_error_sq": row["diag"]["prediction_error_sq"],
        "phase": live.phase,
    }


def _error(code: str, text: str, t: float = 0.0) -> dict:
    return {"type": "error", "code": code, "text": text, "t": t}


async def _sender(ws: WebSocket, outbox: Outbox) -> None:
    while True:
        for msg in await outbox.drain():
            await ws.send_text(json.dumps(msg))


async def _session_loop(live: LiveSession, outbox: Outbox, settings: ServerSettings) -> None:
    loop = asyncio.get_running_loop()
    deadline = loop.time()
    while not live.session.finished:
        if live.phase == "paused":
            await asyncio.sleep(0.005)
            deadline = loop.time()
            continue
        row = live.tick()
        outbox.set_state(_state_message(live, row))
        if settings.speedup > 0:
            deadline += live.dt / settings.speedup
            delay = deadline - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
        else:
            await asyncio.sleep(0)
    live.phase = "finished"
    log_dir = pathlib.Path(settings.log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    path = log_dir / f"{live.session_id}.jsonl"
    live.session.log.save(str(path))
    outbox.push_event(
        {
            "type": "finished",
            "t": live.session.elapsed,
            "log_id": live.session_id,
            "fell": live.session.ended_early,
        }
    )


def create_app(settings: ServerSettings) -> FastAPI:
    app = FastAPI()
    tokens = _load_tokens(settings)
    app.state.settings = settings

    @app.get("/arena")
    def get_arena():
        arena = (
            load_arena(settings.arena_path)
            if settings.arena_path
            else defaults.default_arena_spec()
        )
        return arena_to_dict(arena)

    @app.get("/logs/{log_id}")
    def get_log(log_id: str):
        path = pathlib.Path(settings.log_dir) / f"{log_id}.jsonl"
        if not path.is_file() or not log_id.isalnum():
            return PlainTextResponse("no such log", status_code=404)
        return PlainTextResponse(path.read_text(), media_type="application/jsonl")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        outbox = Outbox()
        sender = asyncio.create_task(_sender(ws, outbox))
        live: LiveSession | None = None
        runner: asyncio.Task | None = None
        try:
            while True:
                try:
                    text = await ws.receive_text()
                except WebSocketDisconnect:
                    break
                try:
                    msg = json.loads(text)
                    if not isinstance(msg, dict) or "type" not in msg:
                        raise ValueError("message must be an object with a type")
                except (json.JSONDecodeError, ValueError) as e:
                    outbox.push_event(_error("bad_message", str(e)))
                    continue
                kind = msg["type"]
                t_now = live.session.elapsed if live else 0.0
                if kind == "start":
                    if live is not None and live.phase != "finished":
                        outbox.push_event(_error("already_running", "session in progress", t_now))
                        continue
                    condition = None
                    if "token" in msg:
                        entry = tokens.get(str(msg["token"]))
                        if entry is None:
                            outbox.push_event(_error("bad_token", "unknown token", t_now))
                            continue
                        condition = entry["condition"]
                    elif not settings.blind and "condition" in msg:
                        condition = str(msg["condition"]).upper()
                    if condition not in (experiment.REA, experiment.ADA):
                        outbox.push_event(
                            _error("bad_start", "need a valid token or condition", t_now)
                        )
                        continue
                    try:
                        live = LiveSession(settings, condition, int(msg.get("seed", 0)))
                    except (OSError, ValueError) as e:
                        outbox.push_event(_error("start_failed", str(e), t_now))
                        continue
                    runner = asyncio.create_task(_session_loop(live, outbox, settings))
                    outbox.push_event(
                        {"type": "event_ack", "event": "start", "t": 0.0,
                         "session_id": live.session_id, "duration_s": settings.duration_s}
                    )
                elif live is None or live.phase == "finished":
                    outbox.push_event(_error("no_session", "start a session first", t_now))
                elif kind == "pause":
                    live.phase = "paused"
                    outbox.push_event({"type": "event_ack", "event": "pause", "t": t_now})
                elif kind == "resume":
                    live.phase = "running"
                    outbox.push_event({"type": "event_ack", "event": "resume", "t": t_now})
                elif kind == "nudge":
                    try:
                        ix, iy = (float(v) for v in msg["impulse"])
                        live.pending.append(Nudge((ix, iy), timestamp=t_now))
                    except (KeyError, TypeError, ValueError) as e:
                        outbox.push_event(_error("bad_message", f"bad nudge: {e}", t_now))
                        continue
                    outbox.push_event({"type": "event_ack", "event": "nudge", "t": t_now})
                elif kind == "hand_wall":
                    try:
                        seg = tuple(
                            (float(p[0]), float(p[1])) for p in msg["segment"]
                        )
                        dur = float(msg.get("duration_s", 0.4))
                        live.pending.append(
                            HandWall(seg, expiry=t_now + dur, timestamp=t_now)
                        )
                    except (KeyError, TypeError, ValueError) as e:
                        outbox.push_event(_error("bad_message", f"bad hand_wall: {e}", t_now))
                        continue
                    outbox.push_event({"type": "event_ack", "event": "hand_wall", "t": t_now})
                else:
                    outbox.push_event(_error("bad_message", f"unknown type {kind!r}", t_now))
        finally:
            if runner is not None:
                runner.cancel()
            sender.cancel()

    static = settings.static_dir
    if static and pathlib.Path(static).is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="ui")
    return app
