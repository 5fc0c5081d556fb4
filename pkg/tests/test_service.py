import io
import json
import socket
import struct
import threading

import pytest

from stet.protocol import ReplayScript, read_frame, state_hash, write_frame
from stet.service import EngineService, SocketServer, replay_script, serve_stdio

WATCH_DOC = 'var a = 1\nvar b = ["__watch", a + 1][1]\n'

STATE_KEYS = {"type", "sessionId", "version", "frozen", "pendingCount",
              "violations", "outcome", "opCount", "tools", "fragments", "text"}


def _open(service, text="var a = 1\n", language="javascript", request_id=1):
    return service.handle_message({"id": request_id, "type": "open",
                                   "text": text, "languageId": language})


def _change(service, state, changes, request_id=2, **extra):
    return service.handle_message({"id": request_id, "type": "change",
                                   "sessionId": state["sessionId"],
                                   "version": state["version"],
                                   "changes": changes, **extra})


# -- request handling ------------------------------------------------------

def test_open_returns_a_full_state_snapshot():
    state = _open(EngineService())
    assert set(state) == STATE_KEYS | {"id"}
    assert state["type"] == "state" and state["id"] == 1
    assert state["text"] == "var a = 1\n"
    assert state["frozen"] is False and state["pendingCount"] == 0


def test_open_rejects_unknown_language():
    reply = _open(EngineService(), language="cobol")
    assert reply["type"] == "error" and reply["code"] == "malformed"


def test_change_round_trip():
    service = EngineService()
    state = _open(service)
    reply = _change(service, state, [{"from": 8, "to": 9, "insert": "5 + 6"}])
    assert reply["text"] == "var a = 5 + 6\n"
    assert reply["outcome"] == "Accepted"
    assert reply["version"] == state["version"] + 1
    assert reply["opCount"] > 0


def test_change_freeze_and_revert():
    service = EngineService()
    state = _open(service, text=WATCH_DOC)
    pos = WATCH_DOC.index("__watch")
    frozen = _change(service, state, [{"from": pos, "to": pos + 2}])
    assert frozen["frozen"] is True and frozen["outcome"] == "Frozen"
    assert frozen["pendingCount"] == 1
    assert frozen["violations"] == [state["tools"][0]["instanceId"]]
    reply = service.handle_message({"id": 3, "type": "revert",
                                    "sessionId": state["sessionId"]})
    assert reply["text"] == WATCH_DOC
    assert reply["outcome"] == "Reverted" and reply["frozen"] is False
    again = service.handle_message({"id": 4, "type": "revert",
                                    "sessionId": state["sessionId"]})
    assert again["type"] == "error" and again["code"] == "invalid_request"


def test_change_force_apply():
    service = EngineService()
    state = _open(service, text=WATCH_DOC)
    assert len(state["tools"]) == 1
    pos = WATCH_DOC.index("__watch")
    frozen = _change(service, state, [{"from": pos, "to": pos + 2}])
    assert frozen["outcome"] == "Frozen"
    forced = _change(service, frozen, [], request_id=3, forceApply=True)
    assert forced["outcome"] == "ForceApplied"
    assert forced["tools"] == []


def test_stale_version_is_refused():
    service = EngineService()
    state = _open(service)
    reply = _change(service, state, [{"from": 0, "to": 0, "insert": ";"}],
                    version=state["version"] - 1)
    assert reply["type"] == "error" and reply["code"] == "stale_version"
    # the session did not move
    follow = _change(service, state, [])
    assert follow["type"] == "state"


def test_unknown_session():
    reply = EngineService().handle_message(
        {"id": 1, "type": "revert", "sessionId": 99})
    assert reply["type"] == "error" and reply["code"] == "unknown_session"


def test_action_and_its_error_codes():
    service = EngineService()
    state = _open(service, text=WATCH_DOC)
    iid = state["tools"][0]["instanceId"]
    reply = service.handle_message({"id": 2, "type": "action",
                                    "sessionId": state["sessionId"],
                                    "instanceId": iid, "actionId": "remove",
                                    "payload": {}})
    assert reply["text"] == "var a = 1\nvar b = a + 1\n"
    stale = service.handle_message({"id": 3, "type": "action",
                                    "sessionId": state["sessionId"],
                                    "instanceId": iid, "actionId": "remove"})
    assert stale["type"] == "error" and stale["code"] == "stale_instance"

    state = service.handle_message({"id": 4, "type": "open",
                                    "text": WATCH_DOC,
                                    "languageId": "javascript"})
    bad = service.handle_message({"id": 5, "type": "action",
                                  "sessionId": state["sessionId"],
                                  "instanceId": state["tools"][0]["instanceId"],
                                  "actionId": "explode"})
    assert bad["type"] == "error" and bad["code"] == "unknown_action"


def test_malformed_requests():
    service = EngineService()
    assert service.handle_message({"id": 1, "type": "noSuchThing",
                                   "sessionId": 1})["code"] == "unknown_session"
    assert service.handle_message({"id": 1, "type": "open"})["code"] == "malformed"
    state = _open(service)
    reply = _change(service, state, [{"from": 0}])
    assert reply["code"] == "malformed"
    reply = _change(service, state, "nope")
    assert reply["code"] == "malformed"
    # offsets that split a code point are invalid, not fatal
    state = _open(service, text="var s = 'é'\n", request_id=2)
    reply = _change(service, state, [{"from": 10, "to": 10, "insert": "x"}])
    assert reply["code"] == "malformed"


def test_subscribers_get_id_less_pushes():
    service = EngineService()
    pushed = []
    state = _open(service)
    sub = service.handle_message({"id": 2, "type": "subscribeState",
                                  "sessionId": state["sessionId"]},
                                 sink=pushed.append)
    assert sub["type"] == "state" and sub["id"] == 2
    reply = _change(service, state, [{"from": 8, "to": 9, "insert": "2"}])
    assert len(pushed) == 1
    assert "id" not in pushed[0]
    assert pushed[0]["text"] == reply["text"]
    assert state_hash(pushed[0]) == state_hash(reply)


# -- transports ------------------------------------------------------------

def _rpc(sock_file_pair, payload):
    rfile, wfile = sock_file_pair
    write_frame(wfile, payload)
    return read_frame(rfile)


@pytest.fixture()
def server():
    srv = SocketServer(EngineService())
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def _connect(server):
    sock = socket.create_connection(("127.0.0.1", server.port), timeout=5)
    return sock, (sock.makefile("rb"), sock.makefile("wb"))


def test_socket_two_clients_share_a_session(server):
    sock_a, files_a = _connect(server)
    sock_b, files_b = _connect(server)
    try:
        state = _rpc(files_a, {"id": 1, "type": "open", "languageId": "js",
                               "text": "var a = 1\n"})
        assert state["type"] == "state"
        sid = state["sessionId"]
        sub = _rpc(files_b, {"id": 1, "type": "subscribeState",
                             "sessionId": sid})
        assert sub["type"] == "state"
        reply = _rpc(files_a, {"id": 2, "type": "change", "sessionId": sid,
                               "version": state["version"],
                               "changes": [{"from": 8, "to": 9, "insert": "7"}]})
        assert reply["text"] == "var a = 7\n"
        push = read_frame(files_b[0])
        assert push["text"] == "var a = 7\n" and "id" not in push
    finally:
        sock_a.close()
        sock_b.close()


def test_socket_malformed_frame_gets_an_error(server):
    sock, (rfile, wfile) = _connect(server)
    try:
        body = b"this is not json"
        wfile.write(struct.pack(">I", len(body)) + body)
        wfile.flush()
        reply = read_frame(rfile)
        assert reply["type"] == "error" and reply["code"] == "malformed"
    finally:
        sock.close()


def test_stdio_transport_round_trip():
    requests = io.BytesIO()
    write_frame(requests, {"id": 1, "type": "open", "languageId": "js",
                           "text": "1\n"})
    write_frame(requests, {"id": 2, "type": "change", "sessionId": 1,
                           "version": 0,
                           "changes": [{"from": 0, "to": 1, "insert": "2"}]})
    requests.seek(0)
    responses = io.BytesIO()
    serve_stdio(EngineService(), requests, responses)
    responses.seek(0)
    first = read_frame(responses)
    second = read_frame(responses)
    assert first["id"] == 1 and first["text"] == "1\n"
    assert second["id"] == 2 and second["text"] == "2\n"
    assert read_frame(responses) is None


# -- replay ----------------------------------------------------------------

_POS = WATCH_DOC.index("__watch")
FREEZE_SCRIPT = {
    "language": "javascript",
    "text": WATCH_DOC,
    "steps": [
        {"change": {"changes": [{"from": _POS, "to": _POS + 2}]}},
        {"assert": {"frozen": True, "pendingCount": 1}},
        {"revert": {}},
        {"assert": {"frozen": False, "text": WATCH_DOC}},
    ],
}


def test_replay_is_deterministic():
    script = ReplayScript.from_dict(FREEZE_SCRIPT)
    first = replay_script(script)
    second = replay_script(script)
    assert first == second
    assert len(first) == len(FREEZE_SCRIPT["steps"]) + 2  # init and final


def test_replay_trace_tags():
    trace = replay_script(ReplayScript.from_dict(FREEZE_SCRIPT))
    tags = [line.split()[1] for line in trace[1:-1]]
    assert tags == ["Frozen", "AssertOk", "Reverted", "AssertOk"]
    assert trace[0].startswith("init ")
    assert trace[-1].startswith("final ")


def test_replay_force_apply_run():
    script = ReplayScript.from_dict({
        "language": "javascript",
        "text": WATCH_DOC,
        "steps": [
            {"change": {"changes": [
                {"from": WATCH_DOC.index("__watch"),
                 "to": WATCH_DOC.index("__watch") + 2}]}},
            {"change": {"forceApply": True, "changes": []}},
            {"assert": {"toolCount": 0, "frozen": False}},
        ],
    })
    trace = replay_script(script)
    tags = [line.split()[1] for line in trace[1:-1]]
    assert tags == ["Frozen", "ForceApplied", "AssertOk"]


def test_replay_marks_failed_asserts_and_errors():
    script = ReplayScript.from_dict({
        "language": "javascript",
        "text": "1\n",
        "steps": [
            {"assert": {"text": "wrong"}},
            {"change": {"version": 99, "changes": []}},
            {"assert": {"version": 0}},
        ],
    })
    trace = replay_script(script)
    tags = [line.split()[1] for line in trace[1:-1]]
    assert tags == ["AssertFailed", "Error", "AssertOk"]


def test_replay_script_validation():
    from stet.errors import ProtocolError
    with pytest.raises(ProtocolError):
        ReplayScript.from_text("not json")
    with pytest.raises(ProtocolError):
        ReplayScript.from_dict({"language": "js"})
    with pytest.raises(ProtocolError):
        ReplayScript.from_dict({"language": "js", "text": "",
                                "steps": [{"jump": {}}]})
    with pytest.raises(ProtocolError):
        ReplayScript.from_dict({"language": "js", "text": "",
                                "steps": [{"change": {}, "revert": {}}]})
    script = ReplayScript.from_text(json.dumps(FREEZE_SCRIPT))
    assert script.language == "javascript" and len(script.steps) == 4
