"""Wire protocol: framing, message schemas, state snapshots, replay scripts.

Frames are a 4-byte big-endian length followed by a UTF-8 JSON body.  The
same payloads travel over a local socket or stdio; docs/protocol.md holds
the schema reference.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from typing import Any, BinaryIO

from .errors import FragmentOrphaned, ProtocolError
from .fragments import display_text

MAX_FRAME = 64 * 1024 * 1024

# error codes, one per failure family
UNKNOWN_SESSION = "unknown_session"
MALFORMED = "malformed"
STALE_VERSION = "stale_version"
STALE_INSTANCE = "stale_instance"
UNKNOWN_ACTION = "unknown_action"
INVALID_REQUEST = "invalid_request"


def write_frame(stream: BinaryIO, payload: dict) -> None:
    body = json.dumps(payload, separators=(",", ":")).encode("utf-8")
    stream.write(struct.pack(">I", len(body)) + body)
    stream.flush()


def read_frame(stream: BinaryIO) -> dict | None:
    """Next message, or None at end of stream."""
    header = _read_exact(stream, 4)
    if header is None:
        return None
    (length,) = struct.unpack(">I", header)
    if length > MAX_FRAME:
        raise ProtocolError(f"frame of {length} bytes exceeds the limit")
    body = _read_exact(stream, length)
    if body is None:
        raise ProtocolError("stream ended inside a frame")
    try:
        message = json.loads(body)
    except ValueError as exc:
        raise ProtocolError(f"frame is not valid JSON: {exc}") from exc
    if not isinstance(message, dict):
        raise ProtocolError("frame body must be an object")
    return message


def _read_exact(stream: BinaryIO, n: int) -> bytes | None:
    """n bytes, None on clean end of stream, error mid-block."""
    chunks = b""
    while len(chunks) < n:
        part = stream.read(n - len(chunks))
        if not part:
            if chunks:
                raise ProtocolError("stream ended inside a frame")
            return None
        chunks += part
    return chunks


def error_payload(request_id: Any, code: str, message: str) -> dict:
    return {"id": request_id, "type": "error", "code": code, "message": message}


def state_payload(session, host, *, session_id: int, request_id: Any = None) -> dict:
    """Snapshot of everything a frontend needs to redraw."""
    fragments = []
    for fragment in session.fragments.live():
        try:
            fragments.append(display_text(fragment, session).to_wire())
        except FragmentOrphaned:
            continue  # will be pruned at the next commit
    tools = host.render_views(session) if host is not None else []
    outcome = session.last_outcome.value if session.last_outcome else None
    ops = len(session.last_script.ops) if session.last_script else 0
    payload = {
        "type": "state",
        "sessionId": session_id,
        "version": session.version,
        "frozen": session.frozen,
        "pendingCount": len(session.pending),
        "violations": list(session.last_violations),
        "outcome": outcome,
        "opCount": ops,
        "tools": tools,
        "fragments": fragments,
        "text": session.text,
    }
    if request_id is not None:
        payload["id"] = request_id
    return payload


def state_hash(state: dict) -> str:
    """Stable digest of a state snapshot for traces and golden files."""
    scrubbed = {k: v for k, v in state.items() if k != "id"}
    blob = json.dumps(scrubbed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


# -- replay scripts --------------------------------------------------------

STEP_KINDS = ("change", "action", "revert", "assert")


@dataclass(frozen=True, slots=True)
class ReplayScript:
    """Deterministic step list: same script, same final state hash."""

    language: str
    text: str
    steps: tuple[dict, ...] = field(default_factory=tuple)

    @staticmethod
    def from_dict(doc: dict) -> "ReplayScript":
        if not isinstance(doc, dict) or "language" not in doc or "text" not in doc:
            raise ProtocolError("replay script needs 'language' and 'text'")
        steps = doc.get("steps", [])
        if not isinstance(steps, list):
            raise ProtocolError("'steps' must be a list")
        for i, step in enumerate(steps):
            if not isinstance(step, dict) or len(step) != 1:
                raise ProtocolError(f"step {i} must be a single-key object")
            kind = next(iter(step))
            if kind not in STEP_KINDS:
                raise ProtocolError(f"step {i} has unknown kind {kind!r}")
        return ReplayScript(doc["language"], doc["text"], tuple(steps))

    @staticmethod
    def from_text(text: str) -> "ReplayScript":
        try:
            return ReplayScript.from_dict(json.loads(text))
        except ValueError as exc:
            raise ProtocolError(f"replay script is not valid JSON: {exc}") from exc
