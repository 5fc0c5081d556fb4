"""Command-line surface: serve, replay, edit, diff."""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

from .diff import compute_edit_script
from .errors import EngineError, ProtocolError
from .languages import parse_document
from .protocol import ReplayScript
from .structedit import (GrammarAdapter, delete_node, insert_element,
                         replace_with, wrap_with)
from .textchange import apply_changes
from .tree import node_at


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="engine",
        description="Hybrid structured-editing engine over plain text files.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="host sessions behind the wire protocol")
    p.add_argument("--port", type=int, default=0,
                   help="TCP port (0 picks a free one)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--stdio", action="store_true",
                   help="serve a single client over stdin/stdout instead")

    p = sub.add_parser("replay", help="run a script and print its trace")
    p.add_argument("script", type=pathlib.Path)
    p.add_argument("--trace", type=pathlib.Path,
                   help="also write the trace to this file")

    p = sub.add_parser("edit", help="apply one structured edit to a file")
    p.add_argument("file", type=pathlib.Path)
    p.add_argument("--lang", required=True)
    p.add_argument("--op", required=True,
                   choices=("insert", "delete", "replace", "wrap"))
    p.add_argument("--at", required=True, metavar="START:END",
                   help="byte range selecting the target node")
    p.add_argument("--text", help="element or replacement text")
    p.add_argument("--index", type=int, help="list position (default: append)")
    p.add_argument("--prefix", default="", help="wrap text before the node")
    p.add_argument("--suffix", default="", help="wrap text after the node")
    p.add_argument("--write", action="store_true",
                   help="rewrite the file instead of printing")

    p = sub.add_parser("diff", help="edit script between two files")
    p.add_argument("old", type=pathlib.Path)
    p.add_argument("new", type=pathlib.Path)
    p.add_argument("--lang", required=True)

    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (EngineError, OSError) as exc:
        print(f"engine: {exc}", file=sys.stderr)
        return 1


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import EngineService, SocketServer, serve_stdio
    service = EngineService()
    if args.stdio:
        serve_stdio(service, sys.stdin.buffer, sys.stdout.buffer)
        return 0
    server = SocketServer(service, args.host, args.port)
    print(f"listening on {args.host}:{server.port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    from .service import replay_script
    script = ReplayScript.from_text(args.script.read_text("utf-8"))
    trace = replay_script(script)
    text = "\n".join(trace) + "\n"
    sys.stdout.write(text)
    if args.trace:
        args.trace.write_text(text, "utf-8")
    return 0


def _parse_range(spec: str) -> tuple[int, int]:
    try:
        start, _, end = spec.partition(":")
        return int(start), int(end)
    except ValueError:
        raise ProtocolError(f"--at wants START:END, got {spec!r}") from None


def _cmd_edit(args: argparse.Namespace) -> int:
    text = args.file.read_text("utf-8")
    tree = parse_document(text, args.lang)
    start, end = _parse_range(args.at)
    target = node_at(tree, start, end)
    adapter = GrammarAdapter.for_language(args.lang)

    if args.op == "insert":
        if args.text is None:
            raise ProtocolError("insert needs --text")
        index = args.index
        if index is None:
            index = len(adapter.find_list(target).elements)
        change = insert_element(adapter, text, target, args.text, index)
    elif args.op == "delete":
        change = delete_node(adapter, text, target)
    elif args.op == "replace":
        if args.text is None:
            raise ProtocolError("replace needs --text")
        change = replace_with(adapter, text, target, args.text)
    else:
        change = wrap_with(adapter, text, target, args.prefix, args.suffix)

    result, _ = apply_changes(text, [change])
    if args.write:
        args.file.write_text(result, "utf-8")
    else:
        sys.stdout.write(result)
    return 0


def _cmd_diff(args: argparse.Namespace) -> int:
    old = parse_document(args.old.read_text("utf-8"), args.lang)
    new_text = args.new.read_text("utf-8")
    script = compute_edit_script(old, new_text)
    sys.stdout.write(script.to_text())
    return 0


_COMMANDS = {
    "serve": _cmd_serve,
    "replay": _cmd_replay,
    "edit": _cmd_edit,
    "diff": _cmd_diff,
}


if __name__ == "__main__":
    raise SystemExit(main())
