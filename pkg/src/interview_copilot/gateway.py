"""Wire boundary: websocket push protocol, command handling, and fan-out.

One logical owner per session serializes commands and event emission; the
hub fans events out to any number of subscribers. A subscriber first
receives the full event history for its session, then live events, with
event_seq dedup bridging the handoff. Slow subscribers are disconnected on
queue overflow and may resubscribe (which replays).

Client -> server messages:
    {"type": "subscribe", "session_id": "..."}
    {"type": "command", "command": {"kind": "...", "payload": {...}},
     "session_id": "..."?}

Server -> client messages:
    {"type": "event", "event": EventEnvelope}
    {"type": "partial", "session_id": "...", "segment": {...}}   (ephemeral)
    {"type": "ack", "kind": "...", ...}
    {"type": "error", "error": "<code>", "detail": "..."}
"""

from __future__ import annotations

import asyncio
import json
import logging
import socket
import threading
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import RedirectResponse
from fastapi.staticfiles import StaticFiles

from .config import GatewayConfig
from .engine import SessionEngine
from .errors import EngineError, UnknownSessionError
from .eventlog import EventLog
from .events import EventEnvelope, validate_command
from .ids import new_ulid
from .profile import JobProfile, load_profile
from .provider import Provider, make_provider
from .transcript import open_replay_source

logger = logging.getLogger(__name__)

_OVERFLOW = object()


class _Subscriber:
    __slots__ = ("queue", "dead")

    def __init__(self):
        self.queue: asyncio.Queue = asyncio.Queue()
        self.dead = False


class Hub:
    """Per-session fan-out. publish_* are safe to call from engine threads;
    delivery happens on the event loop in emission order."""

    def __init__(self, queue_size: int = 1024):
        self.queue_size = queue_size
        self._subs: dict[str, list[_Subscriber]] = {}
        self._loop: asyncio.AbstractEventLoop | None = None

    def bind_loop(self, loop: asyncio.AbstractEventLoop) -> None:
        self._loop = loop

    def attach(self, session_id: str) -> _Subscriber:
        sub = _Subscriber()
        self._subs.setdefault(session_id, []).append(sub)
        return sub

    def detach(self, session_id: str, sub: _Subscriber) -> None:
        subs = self._subs.get(session_id, [])
        if sub in subs:
            subs.remove(sub)
        if not subs:
            self._subs.pop(session_id, None)

    def publish_event(self, session_id: str, envelope: EventEnvelope) -> None:
        self._publish(session_id, {"type": "event", "event": envelope.to_dict()})

    def publish_partial(self, session_id: str, segment: dict) -> None:
        self._publish(
            session_id,
            {"type": "partial", "session_id": session_id, "segment": segment},
        )

    def _publish(self, session_id: str, message: dict) -> None:
        if self._loop is None:
            return
        self._loop.call_soon_threadsafe(self._fanout, session_id, message)

    def _fanout(self, session_id: str, message: dict) -> None:
        for sub in list(self._subs.get(session_id, [])):
            if sub.dead:
                continue
            if sub.queue.qsize() >= self.queue_size:
                sub.dead = True
                sub.queue.put_nowait(_OVERFLOW)
            else:
                sub.queue.put_nowait(message)


class SessionHost:
    """Owns the live engines and the event-log directory."""

    def __init__(self, config: GatewayConfig, hub: Hub,
                 provider: Provider | None = None):
        self.config = config
        self.hub = hub
        self.provider = provider or make_provider(config.engine.provider)
        self.engines: dict[str, SessionEngine] = {}
        self._lock = threading.Lock()
        Path(config.data_dir).mkdir(parents=True, exist_ok=True)

    def log_path(self, session_id: str) -> Path:
        return Path(self.config.data_dir) / f"{session_id}.events.jsonl"

    def active_count(self) -> int:
        return sum(
            1 for e in self.engines.values() if e.session.state in ("created", "live")
        )

    def _resolve_profile(self, payload: dict) -> JobProfile:
        if "profile" in payload:
            return JobProfile.from_dict(payload["profile"])
        ref = payload["profile_ref"]
        name = ref if ref.endswith(".json") else f"{ref}.json"
        return load_profile(Path(self.config.profiles_dir) / name)

    def start_session(self, payload: dict) -> SessionEngine:
        profile = self._resolve_profile(payload)
        session_id = payload.get("session_id") or new_ulid()
        with self._lock:
            if session_id in self.engines or self.log_path(session_id).exists():
                raise EngineError(f"session {session_id} already exists")
            engine = SessionEngine(
                profile,
                self.provider,
                EventLog(self.log_path(session_id)),
                self.config.engine,
                session_id=session_id,
                event_sink=lambda env: self.hub.publish_event(session_id, env),
                partial_sink=lambda seg: self.hub.publish_partial(session_id, seg),
            )
            self.engines[session_id] = engine
        engine.start()
        replay = payload.get("replay")
        if replay:
            name = replay if replay.endswith(".jsonl") else f"{replay}.jsonl"
            source = open_replay_source(
                Path(self.config.replays_dir) / name,
                speed=float(payload.get("speed", 1.0)),
            )
            thread = threading.Thread(
                target=self._stream_replay, args=(engine, source), daemon=True
            )
            thread.start()
        return engine

    def _stream_replay(self, engine: SessionEngine, source) -> None:
        try:
            engine.ingest_source(source)
            engine.end()
        except EngineError as exc:
            logger.warning("replay stream for %s stopped: %s", engine.session_id, exc)
        except Exception:
            logger.exception("replay stream for %s crashed", engine.session_id)

    def get_engine(self, session_id: str) -> SessionEngine:
        engine = self.engines.get(session_id)
        if engine is None:
            raise UnknownSessionError(f"no live session {session_id!r}")
        return engine

    def read_events(self, session_id: str) -> list[EventEnvelope]:
        engine = self.engines.get(session_id)
        if engine is not None:
            return engine.log.read_all()
        path = self.log_path(session_id)
        if not path.exists():
            raise UnknownSessionError(f"unknown session {session_id!r}")
        return EventLog(path).read_all()

    def handle_command(self, session_id: str, kind: str, payload: dict) -> dict:
        """Forward a non-start command to the session owner."""
        validate_command(kind, payload)
        engine = self.get_engine(session_id)
        if kind == "add_note":
            note = engine.add_note(payload["text"])
            return {"note_id": note.note_id}
        if kind == "request_question":
            suggestion = engine.request_question(
                payload["mode"],
                target_segment_seq=payload.get("target_segment_seq"),
                target_skill_id=payload.get("target_skill_id"),
            )
            return {"suggestion_id": suggestion.suggestion_id}
        if kind == "end_session":
            engine.end()
            return {"state": engine.session.state}
        raise EngineError(f"unsupported command {kind!r}")


def create_app(config: GatewayConfig, provider: Provider | None = None) -> FastAPI:
    hub = Hub(config.subscriber_queue_size)
    host = SessionHost(config, hub, provider)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        hub.bind_loop(asyncio.get_running_loop())
        yield

    app = FastAPI(title="interview-copilot gateway", lifespan=lifespan)
    app.state.host = host
    app.state.hub = hub

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "active_sessions": host.active_count(),
            "provider": host.provider.kind,
        }

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        sub: _Subscriber | None = None
        sub_session: str | None = None
        sender: asyncio.Task | None = None

        async def switch_subscription(session_id: str) -> None:
            nonlocal sub, sub_session, sender
            # Atomic relative to publishes: no awaits between the history
            # snapshot and queue attachment.
            try:
                history = host.read_events(session_id)
            except UnknownSessionError as exc:
                await ws.send_json(
                    {"type": "error", "error": exc.code, "detail": str(exc)}
                )
                return
            if sender is not None:
                sender.cancel()
            if sub is not None and sub_session is not None:
                hub.detach(sub_session, sub)
            new_sub = hub.attach(session_id)
            sub, sub_session = new_sub, session_id
            await ws.send_json({"type": "ack", "kind": "subscribe",
                                "session_id": session_id})
            sender = asyncio.create_task(_pump(ws, new_sub, history))

        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_json({"type": "error", "error": "bad-message",
                                        "detail": "not JSON"})
                    continue
                msg_type = msg.get("type")
                if msg_type == "subscribe":
                    await switch_subscription(str(msg.get("session_id", "")))
                elif msg_type == "command":
                    command = msg.get("command") or {}
                    kind = command.get("kind", "")
                    payload = command.get("payload") or {}
                    if kind == "start_session":
                        try:
                            validate_command(kind, payload)
                            engine = await asyncio.to_thread(
                                host.start_session, payload
                            )
                        except EngineError as exc:
                            await ws.send_json({"type": "error", "error": exc.code,
                                                "detail": str(exc)})
                            continue
                        await ws.send_json({
                            "type": "ack", "kind": "start_session",
                            "session_id": engine.session_id,
                        })
                        await switch_subscription(engine.session_id)
                        continue
                    session_id = msg.get("session_id") or sub_session
                    if not session_id:
                        await ws.send_json({
                            "type": "error", "error": "no-session",
                            "detail": "subscribe or pass session_id first",
                        })
                        continue
                    try:
                        result = await asyncio.to_thread(
                            host.handle_command, session_id, kind, payload
                        )
                    except EngineError as exc:
                        await ws.send_json({"type": "error", "error": exc.code,
                                            "detail": str(exc)})
                        continue
                    await ws.send_json({"type": "ack", "kind": kind, **result})
                else:
                    await ws.send_json({"type": "error", "error": "bad-message",
                                        "detail": f"unknown type {msg_type!r}"})
        except WebSocketDisconnect:
            pass
        finally:
            if sender is not None:
                sender.cancel()
            if sub is not None and sub_session is not None:
                hub.detach(sub_session, sub)

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=config.static_dir, html=True),
                  name="ui")

        @app.get("/")
        def index():
            return RedirectResponse(url="/ui/")

    return app


async def _pump(ws: WebSocket, sub: _Subscriber, history: list[EventEnvelope]) -> None:
    """Send historical events, then live queue items, deduped by event_seq."""
    last_seq = 0
    try:
        for env in history:
            await ws.send_json({"type": "event", "event": env.to_dict()})
            last_seq = env.event_seq
        while True:
            item = await sub.queue.get()
            if item is _OVERFLOW:
                await ws.send_json({
                    "type": "error", "error": "subscriber-overflow",
                    "detail": "event queue overflowed; resubscribe to replay",
                })
                await ws.close(code=1013)
                return
            if item.get("type") == "event":
                seq = item["event"]["event_seq"]
                if seq <= last_seq:
                    continue
                last_seq = seq
            await ws.send_json(item)
    except (WebSocketDisconnect, RuntimeError, asyncio.CancelledError):
        return


def check_port_free(host: str, port: int) -> None:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((host, port))
        except OSError as exc:
            raise EngineError(f"port-in-use: {host}:{port} ({exc})") from exc


def serve(config: GatewayConfig, provider: Provider | None = None) -> None:
    """Run the gateway until interrupted."""
    import uvicorn

    check_port_free(config.host, config.port)
    app = create_app(config, provider)
    logger.info(
        "gateway listening on %s:%d (provider=%s, data_dir=%s)",
        config.host, config.port, app.state.host.provider.kind, config.data_dir,
    )
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
