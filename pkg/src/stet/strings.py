"""String literal escaping with offset maps for nested editing.

A tool that edits string content works on the unescaped ("plain") text; its
changes come back through the offset map as document changes on the raw
literal. Round-tripping is exact for canonically escaped literals: escape
always writes \\n \\t \\r \\0, escapes the backslash and the active quote,
and inside backtick strings keeps newlines literal and escapes $ only when
a { follows.
"""

from __future__ import annotations

from dataclasses import dataclass

from .tree import SyntaxNode
from .textchange import TextChange

_DECODE = {"n": "\n", "t": "\t", "r": "\r", "0": "\0",
           "\\": "\\", "'": "'", '"': '"', "`": "`", "$": "$"}
_ENCODE = {"\n": "\\n", "\t": "\\t", "\r": "\\r", "\0": "\\0", "\\": "\\\\"}


def unescape_string(raw: str) -> tuple[str, list[int]]:
    """Plain text and a map from plain byte offset to raw byte offset.

    The map has one extra entry for the end position; multi-byte code points
    repeat their start so every boundary present in the plain text resolves.
    Backslash sequences outside the recognized set are kept verbatim.
    """
    plain: list[str] = []
    to_raw: list[int] = []

    def emit(ch: str, raw_at: int) -> None:
        plain.append(ch)
        to_raw.extend([raw_at] * len(ch.encode("utf-8")))

    i = 0   # char index into raw
    bi = 0  # byte offset into raw
    while i < len(raw):
        ch = raw[i]
        if ch == "\\" and i + 1 < len(raw):
            nxt = raw[i + 1]
            decoded = _DECODE.get(nxt)
            if decoded is not None:
                emit(decoded, bi)
            else:
                emit("\\", bi)
                emit(nxt, bi + 1)
            i += 2
            bi += 1 + len(nxt.encode("utf-8"))
            continue
        emit(ch, bi)
        i += 1
        bi += len(ch.encode("utf-8"))
    to_raw.append(bi)
    return "".join(plain), to_raw


def escape_string(plain: str, *, quote: str) -> str:
    out: list[str] = []
    for i, ch in enumerate(plain):
        if ch == quote:
            out.append("\\" + ch)
        elif quote == "`" and ch == "\n":
            out.append(ch)
        elif quote == "`" and ch == "$":
            nxt = plain[i + 1] if i + 1 < len(plain) else ""
            out.append("\\$" if nxt == "{" else "$")
        elif ch in _ENCODE:
            out.append(_ENCODE[ch])
        else:
            out.append(ch)
    return "".join(out)


@dataclass(frozen=True)
class PlainStringBinding:
    """Unescaped view of a string literal plus the writeback path."""

    fragment: SyntaxNode  # the content leaf inside the literal
    quote: str
    plain: str
    to_raw: list[int]

    def change_for(self, start: int, end: int, insert: str) -> TextChange:
        """Document change realizing a plain-text edit [start, end) -> insert."""
        base = self.fragment.start
        return TextChange(base + self.to_raw[start], base + self.to_raw[end],
                          escape_string(insert, quote=self.quote))


def bind_plain_string(node: SyntaxNode) -> PlainStringBinding | None:
    """Binding for a string/template-string node or its content fragment."""
    if node.kind == "string_fragment":
        fragment = node
        literal = node.parent
    elif node.kind in ("string", "template_string"):
        literal = node
        frags = [c for c in node.children if c.kind == "string_fragment"]
        if not frags:
            return None
        fragment = frags[0]
    else:
        return None
    quote = literal.children[0].text if literal is not None and literal.children else '"'
    plain, to_raw = unescape_string(fragment.text)
    return PlainStringBinding(fragment, quote, plain, to_raw)
