import json
import struct
import subprocess
import sys

from stet.cli import main
from stet.diff import EditScript


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_edit_insert_prints_without_touching_the_file(tmp_path, capsys):
    path = tmp_path / "doc.js"
    path.write_text("var xs = [1, 2]\n")
    code, out, err = _run(capsys, "edit", str(path), "--lang", "js",
                          "--op", "insert", "--at", "9:15", "--text", "3")
    assert code == 0 and err == ""
    assert out == "var xs = [1, 2, 3]\n"
    assert path.read_text() == "var xs = [1, 2]\n"


def test_edit_insert_at_index(tmp_path, capsys):
    path = tmp_path / "doc.js"
    path.write_text("var xs = [1, 2]\n")
    code, out, _ = _run(capsys, "edit", str(path), "--lang", "js",
                        "--op", "insert", "--at", "9:15", "--text", "0",
                        "--index", "0")
    assert code == 0
    assert out == "var xs = [0, 1, 2]\n"


def test_edit_delete_write_rewrites_the_file(tmp_path, capsys):
    path = tmp_path / "doc.py"
    path.write_text("xs = [1, 2, 3]\n")
    code, out, _ = _run(capsys, "edit", str(path), "--lang", "python",
                        "--op", "delete", "--at", "6:7", "--write")
    assert code == 0 and out == ""
    assert path.read_text() == "xs = [2, 3]\n"


def test_edit_replace_adds_parens_when_needed(tmp_path, capsys):
    path = tmp_path / "doc.js"
    path.write_text("var a = a * 4\n")
    code, out, _ = _run(capsys, "edit", str(path), "--lang", "js",
                        "--op", "replace", "--at", "8:9", "--text", "2 + 3")
    assert code == 0
    assert out == "var a = (2 + 3) * 4\n"


def test_edit_wrap(tmp_path, capsys):
    path = tmp_path / "doc.js"
    path.write_text("var a = 4\n")
    code, out, _ = _run(capsys, "edit", str(path), "--lang", "js",
                        "--op", "wrap", "--at", "8:9",
                        "--prefix", "f(", "--suffix", ")")
    assert code == 0
    assert out == "var a = f(4)\n"


def test_edit_errors_exit_one(tmp_path, capsys):
    path = tmp_path / "doc.js"
    path.write_text("var a = 4\n")
    code, out, err = _run(capsys, "edit", str(path), "--lang", "js",
                          "--op", "insert", "--at", "nope", "--text", "1")
    assert code == 1 and out == ""
    assert err.startswith("engine: ")

    code, _, err = _run(capsys, "edit", str(tmp_path / "missing.js"),
                        "--lang", "js", "--op", "delete", "--at", "0:1")
    assert code == 1 and err.startswith("engine: ")

    code, _, err = _run(capsys, "edit", str(path), "--lang", "js",
                        "--op", "replace", "--at", "8:9")
    assert code == 1 and "replace needs --text" in err


def test_diff_emits_a_parseable_script(tmp_path, capsys):
    old = tmp_path / "old.js"
    new = tmp_path / "new.js"
    old.write_text("var a = 1\n")
    new.write_text("var a = 1 + 2\n")
    code, out, _ = _run(capsys, "diff", str(old), str(new), "--lang", "js")
    assert code == 0
    header = json.loads(out.splitlines()[0])
    assert header["degenerate"] is False
    script = EditScript.from_text(out)
    assert script.ops


def test_replay_prints_and_writes_the_trace(tmp_path, capsys):
    script = {"language": "javascript", "text": "var a = 1\n",
              "steps": [{"change": {"changes":
                                    [{"from": 8, "to": 9, "insert": "2"}]}},
                        {"assert": {"text": "var a = 2\n"}}]}
    path = tmp_path / "script.json"
    path.write_text(json.dumps(script))
    trace_path = tmp_path / "trace.txt"
    code, out, _ = _run(capsys, "replay", str(path),
                        "--trace", str(trace_path))
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("init ")
    assert lines[1].split()[1] == "Accepted"
    assert lines[2].split()[1] == "AssertOk"
    assert lines[3].startswith("final ")
    assert trace_path.read_text() == out


def test_replay_rejects_bad_scripts(tmp_path, capsys):
    path = tmp_path / "script.json"
    path.write_text("{}")
    code, _, err = _run(capsys, "replay", str(path))
    assert code == 1 and err.startswith("engine: ")


def test_serve_stdio_subprocess():
    def frame(payload):
        body = json.dumps(payload).encode()
        return struct.pack(">I", len(body)) + body

    stdin = (frame({"id": 1, "type": "open", "languageId": "js",
                    "text": "var a = 1\n"})
             + frame({"id": 2, "type": "change", "sessionId": 1, "version": 0,
                      "changes": [{"from": 8, "to": 9, "insert": "9"}]}))
    proc = subprocess.run([sys.executable, "-m", "stet.cli", "serve", "--stdio"],
                          input=stdin, capture_output=True, timeout=60)
    assert proc.returncode == 0
    data = proc.stdout
    replies = []
    while data:
        (length,) = struct.unpack(">I", data[:4])
        replies.append(json.loads(data[4:4 + length]))
        data = data[4 + length:]
    assert [r["id"] for r in replies] == [1, 2]
    assert replies[1]["text"] == "var a = 9\n"
