"""Session hosting behind the wire protocol.

One sequential processing loop per document session (a lock, since handlers
are short); the socket acceptor and any value collector run concurrently
and funnel work into those loops.  Replay scripts travel through the exact
same handler as live clients, which is what makes golden traces meaningful.
"""

from __future__ import annotations

import logging
import socket
import socketserver
import threading
from typing import Any, BinaryIO, Callable

from .errors import (EngineError, InvalidChange, NothingToRevert, ProtocolError,
                     StaleInstance, UnknownAction, UnknownLanguage)
from .instrument import StreamRegistry
from .protocol import (INVALID_REQUEST, MALFORMED, STALE_INSTANCE, STALE_VERSION,
                       UNKNOWN_ACTION, UNKNOWN_SESSION, ReplayScript,
                       error_payload, read_frame, state_payload, state_hash,
                       write_frame)
from .textchange import TextChange
from .tools.builtin import default_tool_host
from .transactions import Session

log = logging.getLogger(__name__)

Sink = Callable[[dict], None]


class _Runtime:
    """One hosted document: session, tools, subscribers, sequential lock."""

    def __init__(self, session_id: int, session: Session) -> None:
        self.id = session_id
        self.session = session
        self.lock = threading.Lock()
        self.subscribers: list[Sink] = []


class EngineService:
    """Protocol message handler over a table of sessions."""

    def __init__(self, *, streams: StreamRegistry | None = None) -> None:
        self._sessions: dict[int, _Runtime] = {}
        self._next_id = 1
        self._table_lock = threading.Lock()
        self._streams = streams

    # transport-independent core -------------------------------------------

    def handle_message(self, message: dict, *, sink: Sink | None = None) -> dict:
        """Exactly one terminal response per request, session intact on error."""
        request_id = message.get("id")
        kind = message.get("type")
        try:
            if kind == "open":
                return self._open(message, request_id)
            runtime = self._runtime(message)
            with runtime.lock:
                if kind == "change":
                    return self._change(runtime, message, request_id)
                if kind == "action":
                    return self._action(runtime, message, request_id)
                if kind == "revert":
                    return self._revert(runtime, message, request_id)
                if kind == "subscribeState":
                    if sink is not None:
                        runtime.subscribers.append(sink)
                    return self._state(runtime, request_id)
            return error_payload(request_id, MALFORMED,
                                 f"unknown message type {kind!r}")
        except _RequestError as exc:
            return error_payload(request_id, exc.code, str(exc))
        except EngineError as exc:
            return error_payload(request_id, INVALID_REQUEST, str(exc))

    def drop_sink(self, sink: Sink) -> None:
        """Forget a disconnected client's subscriptions."""
        with self._table_lock:
            runtimes = list(self._sessions.values())
        for runtime in runtimes:
            with runtime.lock:
                if sink in runtime.subscribers:
                    runtime.subscribers.remove(sink)

    # request handlers -----------------------------------------------------

    def _open(self, message: dict, request_id: Any) -> dict:
        text = message.get("text")
        language = message.get("languageId")
        if not isinstance(text, str) or not isinstance(language, str):
            raise _RequestError(MALFORMED, "open needs 'text' and 'languageId'")
        registry = self._streams if self._streams is not None else StreamRegistry()
        host = default_tool_host(streams=registry)
        try:
            session = Session(text, language, tool_host=host)
        except UnknownLanguage as exc:
            raise _RequestError(MALFORMED, f"unknown language: {exc}") from exc
        with self._table_lock:
            session_id = self._next_id
            self._next_id += 1
            runtime = _Runtime(session_id, session)
            self._sessions[session_id] = runtime
        return self._state(runtime, request_id)

    def _change(self, runtime: _Runtime, message: dict, request_id: Any) -> dict:
        session = runtime.session
        if message.get("version") != session.version:
            raise _RequestError(
                STALE_VERSION,
                f"change built against version {message.get('version')}, "
                f"session is at {session.version}")
        raw = message.get("changes")
        if not isinstance(raw, list):
            raise _RequestError(MALFORMED, "'changes' must be a list")
        try:
            changes = [TextChange(c["from"], c["to"], c.get("insert", ""))
                       for c in raw]
        except (TypeError, KeyError) as exc:
            raise _RequestError(MALFORMED, f"bad change record: {exc}") from exc
        intents = message.get("intents", [])
        if not isinstance(intents, list):
            raise _RequestError(MALFORMED, "'intents' must be a list")
        try:
            session.apply_changes(changes,
                                  intent_delete_nodes=intents,
                                  force_apply=bool(message.get("forceApply")))
        except InvalidChange as exc:
            raise _RequestError(MALFORMED, str(exc)) from exc
        return self._state(runtime, request_id, broadcast=True)

    def _action(self, runtime: _Runtime, message: dict, request_id: Any) -> dict:
        session = runtime.session
        host = session.tool_host
        try:
            host.dispatch_action(session,
                                 message.get("instanceId"),
                                 message.get("actionId"),
                                 message.get("payload") or {})
        except StaleInstance as exc:
            raise _RequestError(STALE_INSTANCE, str(exc)) from exc
        except UnknownAction as exc:
            raise _RequestError(UNKNOWN_ACTION, str(exc)) from exc
        return self._state(runtime, request_id, broadcast=True)

    def _revert(self, runtime: _Runtime, message: dict, request_id: Any) -> dict:
        try:
            runtime.session.revert_pending()
        except NothingToRevert as exc:
            raise _RequestError(INVALID_REQUEST, str(exc)) from exc
        return self._state(runtime, request_id, broadcast=True)

    # plumbing -------------------------------------------------------------

    def _runtime(self, message: dict) -> _Runtime:
        session_id = message.get("sessionId")
        with self._table_lock:
            runtime = self._sessions.get(session_id)
        if runtime is None:
            raise _RequestError(UNKNOWN_SESSION, f"no session {session_id!r}")
        return runtime

    def _state(self, runtime: _Runtime, request_id: Any,
               *, broadcast: bool = False) -> dict:
        state = state_payload(runtime.session, runtime.session.tool_host,
                              session_id=runtime.id, request_id=request_id)
        if broadcast and runtime.subscribers:
            push = {k: v for k, v in state.items() if k != "id"}
            for sink in list(runtime.subscribers):
                try:
                    sink(push)
                except Exception:
                    log.exception("state push failed; dropping subscriber")
                    runtime.subscribers.remove(sink)
        return state


class _RequestError(EngineError):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


# -- transports ------------------------------------------------------------

class _Connection(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        stream_in = self.request.makefile("rb")
        stream_out = self.request.makefile("wb")
        write_lock = threading.Lock()

        def sink(payload: dict) -> None:
            with write_lock:
                write_frame(stream_out, payload)

        try:
            while True:
                try:
                    message = read_frame(stream_in)
                except ProtocolError as exc:
                    sink(error_payload(None, MALFORMED, str(exc)))
                    return
                if message is None:
                    return
                sink(self.server.service.handle_message(message, sink=sink))
        except (ConnectionError, BrokenPipeError, ValueError):
            pass
        finally:
            self.server.service.drop_sink(sink)


class SocketServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, service: EngineService, host: str = "127.0.0.1",
                 port: int = 0) -> None:
        super().__init__((host, port), _Connection)
        self.service = service

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve_stdio(service: EngineService, stream_in: BinaryIO,
                stream_out: BinaryIO) -> None:
    """Same protocol over pipes; one client, so pushes share the stream."""
    write_lock = threading.Lock()

    def sink(payload: dict) -> None:
        with write_lock:
            write_frame(stream_out, payload)

    while True:
        try:
            message = read_frame(stream_in)
        except ProtocolError as exc:
            sink(error_payload(None, MALFORMED, str(exc)))
            return
        if message is None:
            return
        sink(service.handle_message(message, sink=sink))


# -- replay ----------------------------------------------------------------

def replay_script(script: ReplayScript) -> list[str]:
    """Run a script through the live handler; one trace line per step.

    Line format: step index, outcome tag, edit-script op count, state hash.
    Assertion failures are marked and the run continues; the final state
    hash closes a non-empty run.
    """
    service = EngineService()
    state = service.handle_message({"id": 0, "type": "open",
                                    "languageId": script.language,
                                    "text": script.text})
    if state["type"] == "error":
        raise ProtocolError(f"open failed: {state['message']}")
    session_id = state["sessionId"]
    trace = [f"init {state_hash(state)}"]

    for index, step in enumerate(script.steps):
        kind, body = next(iter(step.items()))
        if kind == "assert":
            ok = _check_assert(body, state)
            tag = "AssertOk" if ok else "AssertFailed"
            trace.append(f"{index} {tag} 0 {state_hash(state)}")
            continue
        message = {"id": index + 1, "type": kind, "sessionId": session_id}
        if kind == "change":
            message["version"] = body.get("version", state["version"])
            message["changes"] = body.get("changes", [])
            message["intents"] = body.get("intents", [])
            if body.get("forceApply"):
                message["forceApply"] = True
        elif kind == "action":
            message.update(instanceId=body.get("instanceId"),
                           actionId=body.get("actionId"),
                           payload=body.get("payload", {}))
        reply = service.handle_message(message)
        if reply["type"] == "error":
            trace.append(f"{index} Error 0 {state_hash(state)}")
            continue
        state = reply
        trace.append(f"{index} {state['outcome']} {state['opCount']} "
                     f"{state_hash(state)}")

    if script.steps:
        trace.append(f"final {state_hash(state)}")
    return trace


def _check_assert(body: dict, state: dict) -> bool:
    checks = {
        "frozen": lambda want: state["frozen"] == want,
        "text": lambda want: state["text"] == want,
        "toolCount": lambda want: len(state["tools"]) == want,
        "version": lambda want: state["version"] == want,
        "pendingCount": lambda want: state["pendingCount"] == want,
        "violations": lambda want: state["violations"] == want,
    }
    for key, want in body.items():
        probe = checks.get(key)
        if probe is None or not probe(want):
            return False
    return True
