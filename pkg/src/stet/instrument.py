"""Runtime value capture for watched expressions.

Watched expressions are rewritten in a shadow copy of the program, never in
the user's buffer.  The rewritten program posts every evaluated value to a
loopback collector, which routes it into a per-node stream that tools can
subscribe to.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from collections import deque
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Callable, Iterable

from .errors import NotAnExpression, UnsupportedGrammar
from .languages import get_grammar
from .tree import SyntaxNode, SyntaxTree

log = logging.getLogger(__name__)

DEFAULT_PORT = 3000
DEFAULT_URL = f"http://127.0.0.1:{DEFAULT_PORT}/watch"
HISTORY_CAP = 64
DEPTH_CAP = 4
STRING_CAP = 1024


def clamp_value(value: Any, *, depth: int = DEPTH_CAP, strings: int = STRING_CAP) -> Any:
    """Bound a decoded runtime value before it enters a stream.

    Containers nested deeper than `depth` levels collapse to "..." and
    strings are cut to `strings` UTF-8 bytes; unbounded values must not
    stall the editor.
    """
    if isinstance(value, str):
        raw = value.encode("utf-8")
        if len(raw) <= strings:
            return value
        return raw[:strings].decode("utf-8", "ignore")
    if isinstance(value, dict):
        if depth <= 0:
            return "..."
        return {str(k): clamp_value(v, depth=depth - 1, strings=strings)
                for k, v in value.items()}
    if isinstance(value, list):
        if depth <= 0:
            return "..."
        return [clamp_value(v, depth=depth - 1, strings=strings) for v in value]
    return value


# -- source rewriting ------------------------------------------------------

def rewrite_for_watch(node: SyntaxNode, node_id: int, url: str,
                      *, language_id: str) -> str:
    """Wrapped source text for one watched expression.

    The wrapper binds the evaluated value once, posts {id, e} to `url` and
    evaluates to the original value.  Re-wrapping already-wrapped text is a
    no-op.
    """
    grammar = get_grammar(language_id)
    if node.kind not in grammar.expression_kinds:
        raise NotAnExpression(f"cannot watch a {node.kind} node")
    text = node.text
    if grammar.is_watch_wrapped(text):
        return text
    wrapped = grammar.rewrite_watch(text, node_id, url)
    if wrapped is None:
        raise UnsupportedGrammar(language_id)
    return wrapped


def build_instrumented_source(tree: SyntaxTree, watch_ids: Iterable[int],
                              url: str = DEFAULT_URL) -> str:
    """Document text with every watched node wrapped, innermost first.

    Each wrapper posts the watched node's own id, so collected values route
    straight back to the node's stream.
    """
    grammar = get_grammar(tree.language_id)
    wanted = set(watch_ids)
    seen: set[int] = set()
    for nid in wanted:
        node = tree.node(nid)
        if node is None:
            raise ValueError(f"node {nid} is not in the tree")
        if node.kind not in grammar.expression_kinds:
            raise NotAnExpression(f"cannot watch a {node.kind} node")
        seen.add(nid)
    if wanted and grammar.rewrite_watch("0", 0, url) is None:
        raise UnsupportedGrammar(tree.language_id)

    def render(node: SyntaxNode) -> str:
        if node.children:
            body = "".join(render(child) for child in node.children)
        else:
            body = node.text
        # the guard must look at the buffer text, not the rendered body:
        # a watched child's wrapper would otherwise mask the parent's
        if node.id in wanted and not grammar.is_watch_wrapped(node.text):
            body = grammar.rewrite_watch(body, node.id, url)
        return body

    return render(tree.root)


# -- value streams ---------------------------------------------------------

@dataclass(frozen=True, slots=True)
class ValueEvent:
    node_id: int
    value: Any
    sequence: int
    timestamp: float


class ValueStream:
    """History plus live subscribers for one watched node."""

    __slots__ = ("node_id", "history", "subscribers", "next_sequence")

    def __init__(self, node_id: int, cap: int = HISTORY_CAP) -> None:
        self.node_id = node_id
        self.history: deque[ValueEvent] = deque(maxlen=cap)
        self.subscribers: list[Callable[[ValueEvent], None]] = []
        self.next_sequence = 0

    @property
    def last(self) -> Any:
        return self.history[-1].value if self.history else None


class Subscription:
    __slots__ = ("_registry", "_node_id", "_callback")

    def __init__(self, registry: "StreamRegistry", node_id: int,
                 callback: Callable[[ValueEvent], None]) -> None:
        self._registry = registry
        self._node_id = node_id
        self._callback = callback

    def cancel(self) -> None:
        self._registry._unsubscribe(self._node_id, self._callback)


class StreamRegistry:
    """Routes collected values into per-node streams.

    Thread-safe: deliveries arrive on collector threads.  Subscriber
    callbacks run on the delivering thread while the registry lock is held,
    which is what keeps per-node delivery order equal to arrival order;
    keep callbacks short and never block in them.
    """

    def __init__(self, *, history_cap: int = HISTORY_CAP) -> None:
        self._lock = threading.RLock()
        self._changed = threading.Condition(self._lock)
        self._streams: dict[int, ValueStream] = {}
        self._cap = history_cap
        self.dropped_count = 0

    def ensure(self, node_id: int) -> ValueStream:
        with self._lock:
            stream = self._streams.get(node_id)
            if stream is None:
                stream = self._streams[node_id] = ValueStream(node_id, self._cap)
            return stream

    def stream(self, node_id: int) -> ValueStream | None:
        with self._lock:
            return self._streams.get(node_id)

    def last(self, node_id: int) -> Any:
        with self._lock:
            stream = self._streams.get(node_id)
            return stream.last if stream is not None else None

    def deliver(self, node_id: int, value: Any) -> bool:
        """Append to the node's stream; unknown nodes are counted, not fatal."""
        with self._changed:
            stream = self._streams.get(node_id)
            if stream is None:
                self.dropped_count += 1
                self._changed.notify_all()
                return False
            event = ValueEvent(node_id, clamp_value(value),
                               stream.next_sequence, time.time())
            stream.next_sequence += 1
            stream.history.append(event)
            for callback in list(stream.subscribers):
                try:
                    callback(event)
                except Exception:
                    log.exception("stream subscriber raised")
            self._changed.notify_all()
            return True

    def subscribe(self, node_id: int,
                  callback: Callable[[ValueEvent], None]) -> Subscription:
        """Replay existing history to `callback`, then feed it live events."""
        with self._lock:
            stream = self.ensure(node_id)
            for event in list(stream.history):
                callback(event)
            stream.subscribers.append(callback)
            return Subscription(self, node_id, callback)

    def _unsubscribe(self, node_id: int,
                     callback: Callable[[ValueEvent], None]) -> None:
        with self._lock:
            stream = self._streams.get(node_id)
            if stream is not None and callback in stream.subscribers:
                stream.subscribers.remove(callback)

    def wait_for(self, node_id: int, count: int, timeout: float) -> bool:
        """Block until the node's history holds `count` events, or time out."""
        deadline = time.monotonic() + timeout
        with self._changed:
            while True:
                stream = self._streams.get(node_id)
                if stream is not None and len(stream.history) >= count:
                    return True
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return False
                self._changed.wait(remaining)


# -- the collector endpoint ------------------------------------------------

class _CollectorHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def do_POST(self) -> None:  # noqa: N802 (http.server naming)
        if self.path != "/watch":
            self._respond(404)
            return
        try:
            length = int(self.headers.get("Content-Length", ""))
            body = json.loads(self.rfile.read(length))
        except (ValueError, TypeError):
            self._respond(400)
            return
        if not isinstance(body, dict) or not isinstance(body.get("id"), int):
            self._respond(400)
            return
        # JSON.stringify drops members whose value is undefined, so a
        # missing "e" is a legitimate event carrying null
        self.server.registry.deliver(body["id"], body.get("e"))
        self._respond(204)

    def _respond(self, code: int) -> None:
        self.send_response(code)
        self.send_header("Content-Length", "0")
        self.end_headers()

    def log_message(self, fmt: str, *args: Any) -> None:
        log.debug("collector: " + fmt, *args)


class _CollectorServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], registry: StreamRegistry) -> None:
        super().__init__(address, _CollectorHandler)
        self.registry = registry


class ValueCollector:
    """Loopback HTTP endpoint the instrumented program posts values to.

    POST /watch with body {"id": <int>, "e": <value>} answers 204 and
    routes the value; malformed bodies answer 400 and change nothing.
    """

    def __init__(self, registry: StreamRegistry | None = None, *,
                 host: str = "127.0.0.1", port: int = DEFAULT_PORT) -> None:
        self.registry = registry if registry is not None else StreamRegistry()
        self._host = host
        self._port = port
        self._server: _CollectorServer | None = None
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        port = self._server.server_port if self._server else self._port
        return f"http://{self._host}:{port}/watch"

    def start(self) -> "ValueCollector":
        if self._server is not None:
            return self
        self._server = _CollectorServer((self._host, self._port), self.registry)
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        name="value-collector", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._server is None:
            return
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)
        self._server = None
        self._thread = None

    def __enter__(self) -> "ValueCollector":
        return self.start()

    def __exit__(self, *exc: object) -> None:
        self.stop()
