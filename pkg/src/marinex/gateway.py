"""Service gateway: live simulation sessions for human operators.

One background thread per session owns all world state and ticks a SimLoop at
wall-clock rate (or flat out in headless mode). Inbound commands cross into
the loop through an ordered queue drained once per tick boundary, so a
telemetry frame never reflects a partially applied command; outbound frames
fan out through per-subscriber bounded queues, so a slow consumer skips
frames instead of stalling the loop.

HTTP:      GET /scenarios, POST /sessions, GET /sessions/{id},
           DELETE /sessions/{id}, GET /sessions/{id}/telemetry
WebSocket: /sessions/{id}/stream   (server -> client TelemetryFrame JSON)
           /sessions/{id}/control  (client -> server CommandMessage JSON,
                                    per-message ack/rejection echoing client_ts)

All messages carry schema_version 1; unknown fields on input are ignored.
"""

from __future__ import annotations

import json
import math
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import anyio
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse

from .control import PidGains
from .dynamics import ThrustCommand
from .engine import SimLoop
from .navigator import Mode
from .scenario import Scenario, ScenarioError, list_presets, load_preset, scenario_from_dict
from .telemetry import TelemetryRecord, records_to_jsonl

MESSAGE_SCHEMA_VERSION = 1
COMMAND_TIMEOUT_S = 3.0
SUBSCRIBER_QUEUE_FRAMES = 256

STATUS_RUNNING = "running"
STATUS_PAUSED = "paused"
STATUS_FINISHED = "finished"


def _rejection(reason: str) -> dict:
    return {"schema_version": MESSAGE_SCHEMA_VERSION, "type": "rejection", "reason": reason}


@dataclass
class _PendingCommand:
    payload: dict
    done: threading.Event = field(default_factory=threading.Event)
    result: dict | None = None


class _Subscriber:
    """Bounded frame queue; overflow drops the frame (gap visible in ticks)."""

    def __init__(self, stride: int):
        self.stride = stride
        self.q: queue.Queue = queue.Queue(maxsize=SUBSCRIBER_QUEUE_FRAMES)

    def offer(self, item: dict) -> None:
        try:
            self.q.put_nowait(item)
        except queue.Full:
            pass

    def poll(self, timeout: float = 0.25) -> dict | None:
        try:
            return self.q.get(timeout=timeout)
        except queue.Empty:
            return None


class GatewaySession:
    """One live simulation and its command/telemetry plumbing."""

    def __init__(self, scenario: Scenario, realtime: bool = True):
        self.id = uuid.uuid4().hex[:12]
        self.scenario = scenario
        self.realtime = realtime
        self.loop = SimLoop(scenario)
        self.records: list[TelemetryRecord] = []
        self.status = STATUS_RUNNING
        self.clients = 0
        self._commands: queue.Queue[_PendingCommand] = queue.Queue()
        self._subscribers: list[_Subscriber] = []
        self._lock = threading.RLock()
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, name=f"sim-{self.id}", daemon=True)

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=5.0)
        self._drain(reject_all="session closed")

    # --- sim thread -----------------------------------------------------

    def _run(self) -> None:
        dt = self.scenario.dt
        deadline = time.monotonic()
        while not self._stop.is_set():
            self._drain()
            with self._lock:
                status = self.status
            if status == STATUS_PAUSED:
                time.sleep(0.01)
                deadline = time.monotonic()
                continue
            if self.loop.finished:
                break
            rec = self.loop.advance()
            with self._lock:
                self.records.append(rec)
                subscribers = list(self._subscribers)
            frame = self._frame(rec)
            for sub in subscribers:
                if rec.tick % sub.stride == 0:
                    sub.offer(frame)
            if self.loop.finished:
                break
            if self.realtime:
                deadline += dt
                delay = deadline - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                else:
                    deadline = time.monotonic()
        with self._lock:
            self.status = STATUS_FINISHED
        self._drain(reject_all="session finished")

    def _drain(self, reject_all: str | None = None) -> None:
        while True:
            try:
                pc = self._commands.get_nowait()
            except queue.Empty:
                return
            pc.result = _rejection(reject_all) if reject_all else self._apply(pc.payload)
            pc.done.set()

    def _apply(self, payload: dict) -> dict:
        kind = payload.get("kind")
        body = payload.get("payload") or {}
        try:
            if kind == "set_thrust":
                if self.loop.nav.mode != Mode.TELEOP:
                    return _rejection("teleop command in AUTO")
                left, right = float(body["left"]), float(body["right"])
                if not (math.isfinite(left) and math.isfinite(right)):
                    return _rejection("set_thrust: left/right must be finite")
                self.loop.set_teleop(ThrustCommand(left, right))
            elif kind == "set_mode":
                self.loop.switch_mode(Mode(str(body["mode"])))
            elif kind == "set_gains":
                self.loop.set_gains(PidGains(kp=float(body["kp"]), ki=float(body["ki"]),
                                             kd=float(body["kd"])))
            elif kind == "pause":
                with self._lock:
                    self.status = STATUS_PAUSED
            elif kind == "resume":
                with self._lock:
                    if self.status == STATUS_PAUSED:
                        self.status = STATUS_RUNNING
            elif kind == "reset":
                self.loop = SimLoop(self.scenario)
                with self._lock:
                    self.records.clear()
                    self.status = STATUS_RUNNING
                    subscribers = list(self._subscribers)
                for sub in subscribers:
                    sub.offer({"schema_version": MESSAGE_SCHEMA_VERSION, "type": "reset"})
            else:
                return _rejection(f"unknown command kind {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            return _rejection(f"{kind}: invalid payload ({exc})")
        return {"schema_version": MESSAGE_SCHEMA_VERSION, "type": "ack",
                "kind": kind, "effective_tick": self.loop.tick}

    # --- called from the API side ----------------------------------------

    def submit(self, payload: dict) -> dict:
        with self._lock:
            if self.status == STATUS_FINISHED:
                return _rejection("session finished")
        pc = _PendingCommand(payload)
        self._commands.put(pc)
        if not pc.done.wait(COMMAND_TIMEOUT_S):
            return _rejection("command timed out")
        assert pc.result is not None
        return pc.result

    def subscribe(self, stride: int) -> _Subscriber:
        sub = _Subscriber(stride)
        with self._lock:
            self._subscribers.append(sub)
            self.clients += 1
        return sub

    def unsubscribe(self, sub: _Subscriber) -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)
                self.clients -= 1

    def _frame(self, rec: TelemetryRecord) -> dict:
        data = rec.to_dict()
        bearing = None
        if rec.detection is not None:
            cam = self.scenario.camera
            bearing = math.degrees(math.atan(
                (rec.detection.center_x - cam.image_width / 2.0) / cam.focal_px))
        data["bearing_deg"] = bearing
        return {"schema_version": MESSAGE_SCHEMA_VERSION, "type": "frame", "data": data}

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "schema_version": MESSAGE_SCHEMA_VERSION,
                "id": self.id,
                "status": self.status,
                "scenario": self.scenario.name,
                "seed": self.scenario.seed,
                "dt": self.scenario.dt,
                "tick": self.loop.tick,
                "total_ticks": self.loop.total_ticks,
                "clients": self.clients,
                "mode": self.loop.nav.mode.value,
                "phase": self.loop.nav.phase.value,
                "realtime": self.realtime,
                "limits": {
                    "max_thrust_forward": self.scenario.vessel.max_thrust_forward,
                    "max_thrust_reverse": self.scenario.vessel.max_thrust_reverse,
                },
                "target": {"x": self.loop.target.x, "y": self.loop.target.y},
                "gains": {"kp": self.loop.gains.kp, "ki": self.loop.gains.ki,
                          "kd": self.loop.gains.kd},
            }

    def telemetry_jsonl(self) -> str:
        with self._lock:
            return records_to_jsonl(self.records)


class SessionRegistry:
    def __init__(self) -> None:
        self._sessions: dict[str, GatewaySession] = {}
        self._lock = threading.Lock()

    def add(self, session: GatewaySession) -> None:
        with self._lock:
            self._sessions[session.id] = session

    def get(self, sid: str) -> GatewaySession | None:
        with self._lock:
            return self._sessions.get(sid)

    def remove(self, sid: str) -> GatewaySession | None:
        with self._lock:
            return self._sessions.pop(sid, None)

    def all(self) -> list[GatewaySession]:
        with self._lock:
            return list(self._sessions.values())


def create_app(ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="marinex gateway", version="1")
    registry = SessionRegistry()
    app.state.registry = registry

    @app.get("/scenarios")
    def scenarios() -> dict:
        presets = []
        for name in list_presets():
            sc = load_preset(name)
            presets.append({"name": name, "duration": sc.duration, "dt": sc.dt,
                            "seed": sc.seed, "initial_mode": sc.initial_mode.value})
        return {"schema_version": MESSAGE_SCHEMA_VERSION, "presets": presets}

    @app.post("/sessions", status_code=201)
    def create_session(body: dict) -> JSONResponse:
        try:
            if "preset" in body:
                scenario = load_preset(str(body["preset"]))
            elif "scenario" in body:
                scenario = scenario_from_dict(body["scenario"])
            else:
                raise ScenarioError("body must contain 'preset' or 'scenario'")
            if "seed" in body:
                seed = body["seed"]
                if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
                    raise ScenarioError(f"seed: must be a non-negative integer, got {seed!r}")
                scenario = Scenario(**{**scenario.__dict__, "seed": seed})
                scenario.validate()
        except ScenarioError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        session = GatewaySession(scenario, realtime=bool(body.get("realtime", True)))
        registry.add(session)
        session.start()
        return JSONResponse(status_code=201, content=session.snapshot())

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        session = registry.get(sid)
        if session is None:
            return JSONResponse(status_code=404, content={"error": f"no session {sid}"})
        return session.snapshot()

    @app.delete("/sessions/{sid}", status_code=204)
    def delete_session(sid: str):
        session = registry.remove(sid)
        if session is None:
            return JSONResponse(status_code=404, content={"error": f"no session {sid}"})
        session.stop()
        return PlainTextResponse(status_code=204, content="")

    @app.get("/sessions/{sid}/telemetry")
    def session_telemetry(sid: str):
        session = registry.get(sid)
        if session is None:
            return JSONResponse(status_code=404, content={"error": f"no session {sid}"})
        return PlainTextResponse(session.telemetry_jsonl(), media_type="application/x-ndjson")

    @app.websocket("/sessions/{sid}/stream")
    async def stream(ws: WebSocket, sid: str, rate: float = 10.0):
        session = registry.get(sid)
        if session is None:
            await ws.close(code=1008, reason=f"no session {sid}")
            return
        tick_rate = 1.0 / session.scenario.dt
        if rate <= 0 or rate > tick_rate + 1e-9:
            await ws.close(code=1008, reason=f"rate must be in (0, {tick_rate}] Hz")
            return
        stride = max(1, round(tick_rate / rate))
        sub = session.subscribe(stride)
        await ws.accept()
        try:
            while True:
                item = await anyio.to_thread.run_sync(sub.poll)
                if item is None:
                    with session._lock:
                        finished = session.status == STATUS_FINISHED
                    if finished and sub.q.empty():
                        break
                    continue
                await ws.send_text(json.dumps(item))
        except WebSocketDisconnect:
            pass
        finally:
            session.unsubscribe(sub)

    @app.websocket("/sessions/{sid}/control")
    async def control(ws: WebSocket, sid: str):
        session = registry.get(sid)
        if session is None:
            await ws.close(code=1008, reason=f"no session {sid}")
            return
        await ws.accept()
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg: Any = json.loads(text)
                except json.JSONDecodeError:
                    await ws.send_text(json.dumps(_rejection("invalid JSON")))
                    continue
                if not isinstance(msg, dict):
                    await ws.send_text(json.dumps(_rejection("command must be an object")))
                    continue
                reply = await anyio.to_thread.run_sync(session.submit, msg)
                reply = dict(reply)
                reply["client_ts"] = msg.get("client_ts")
                await ws.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass

    @app.on_event("shutdown")
    def shutdown() -> None:
        for session in registry.all():
            session.stop()

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
