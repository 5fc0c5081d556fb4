"""Shared machinery for the bundled grammars.

Parsers build a lightweight draft tree, then `finalize` turns it into a
SyntaxTree: spans are computed, whitespace between siblings becomes "ws"
leaves, comments are interleaved as extras, and ids are assigned in preorder.
Error recovery never drops source text; skipped tokens are captured in opaque
ERROR leaves, so the leaf concatenation always equals the input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from ..errors import EngineError
from ..tree import (COMMENT_KIND, ERROR_KIND, WS_KIND, IdAllocator, SyntaxNode,
                    SyntaxTree)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # named kinds like "number"; punctuation uses its own text
    start: int
    end: int
    text: str
    newline_before: bool = False


@dataclass(slots=True)
class Draft:
    """Mutable node under construction; becomes a SyntaxNode in finalize."""

    kind: str
    children: list[Draft] = field(default_factory=list)
    token: Token | None = None
    named: bool = False
    is_error: bool = False
    is_missing: bool = False
    start: int = -1  # filled by _assign_spans
    end: int = -1

    @staticmethod
    def from_token(token: Token, *, named: bool = False, kind: str | None = None) -> Draft:
        return Draft(kind or token.kind, token=token, named=named)

    @staticmethod
    def missing(kind: str, pos: int) -> Draft:
        d = Draft(kind, named=True, is_missing=True, is_error=True)
        d.start = d.end = pos
        return d

    @staticmethod
    def error_span(start: int, end: int) -> Draft:
        d = Draft(ERROR_KIND, named=True, is_error=True)
        d.start, d.end = start, end
        return d

    def add(self, *children: Draft | None) -> Draft:
        for child in children:
            if child is not None:
                self.children.append(child)
        return self


def _rebase_spans(root: SyntaxNode, text: str) -> None:
    """Remap character spans to UTF-8 byte spans.

    Tokenizers index into the decoded string; the public contract is byte
    offsets.  Cheap prefix table, one walk.  No-op for pure ASCII input.
    """
    if text.isascii():
        return
    byte_at = [0] * (len(text) + 1)
    total = 0
    for i, ch in enumerate(text):
        total += len(ch.encode("utf-8"))
        byte_at[i + 1] = total
    stack = [root]
    while stack:
        node = stack.pop()
        node.start = byte_at[node.start]
        node.end = byte_at[node.end]
        stack.extend(node.children)


def _assign_spans(draft: Draft) -> None:
    if draft.token is not None:
        draft.start, draft.end = draft.token.start, draft.token.end
        return
    if not draft.children:
        if draft.start < 0:
            raise EngineError(f"internal: empty draft {draft.kind} without position")
        return
    for child in draft.children:
        _assign_spans(child)
    draft.start = draft.children[0].start
    draft.end = draft.children[-1].end


class _Finalizer:
    def __init__(self, text: str, extras: list[Token], allocator: IdAllocator) -> None:
        self.text = text
        self.extras = sorted(extras, key=lambda t: t.start)
        self.alloc = allocator

    def build(self, draft: Draft, gap_end: int | None = None) -> SyntaxNode:
        node_id = self.alloc.take()
        if draft.token is not None or (not draft.children and gap_end is None):
            text = draft.token.text if draft.token else self.text[draft.start : draft.end]
            return SyntaxNode(
                node_id, draft.kind, draft.start, draft.end,
                text=text, named=draft.named,
                is_error=draft.is_error, is_missing=draft.is_missing,
            )
        children: list[SyntaxNode] = []
        cursor = draft.start
        for child in draft.children:
            if child.start > cursor:
                children.extend(self.fill_gap(cursor, child.start))
            children.append(self.build(child))
            cursor = child.end
        if gap_end is not None and gap_end > cursor:
            children.extend(self.fill_gap(cursor, gap_end))
        return SyntaxNode(
            node_id, draft.kind, draft.start, draft.end if gap_end is None else gap_end,
            children=tuple(children), named=draft.named, is_error=draft.is_error,
        )

    def fill_gap(self, start: int, end: int) -> list[SyntaxNode]:
        leaves: list[SyntaxNode] = []
        cursor = start
        for extra in self.extras:
            if extra.start >= end:
                break
            if extra.start < start:
                continue
            if extra.start > cursor:
                leaves.append(self.ws_leaf(cursor, extra.start))
            leaves.append(
                SyntaxNode(self.alloc.take(), COMMENT_KIND, extra.start, extra.end,
                           text=extra.text, named=True)
            )
            cursor = extra.end
        if cursor < end:
            leaves.append(self.ws_leaf(cursor, end))
        return leaves

    def ws_leaf(self, start: int, end: int) -> SyntaxNode:
        slice_ = self.text[start:end]
        if not slice_.isspace():
            raise EngineError(f"internal: parser dropped non-space text {slice_!r} at {start}")
        return SyntaxNode(self.alloc.take(), WS_KIND, start, end, text=slice_)


class Grammar:
    """A bundled language: parser plus the metadata other modules consult."""

    language_id: str = ""
    aliases: tuple[str, ...] = ()
    root_kind: str = ""
    identifier_kind: str = "identifier"
    expression_kinds: frozenset[str] = frozenset()
    kind_aliases: dict[str, frozenset[str]] = {}
    rules_resource: str = ""
    exceptions_resource: str = ""

    def parse(self, text: str, *, version: int = 0, allocator: IdAllocator | None = None) -> SyntaxTree:
        allocator = allocator or IdAllocator()
        draft, extras = self._parse(text)
        if draft.children:
            _assign_spans(draft)
        draft.start = 0
        draft.end = draft.children[-1].end if draft.children else 0
        fin = _Finalizer(text, extras, allocator)
        root = fin.build(draft, gap_end=len(text))
        _rebase_spans(root, text)
        return SyntaxTree(root, self.language_id, version, text, allocator.peek())

    def _parse(self, text: str) -> tuple[Draft, list[Token]]:
        raise NotImplementedError

    def rules(self) -> dict:
        return _load_resource(self.rules_resource)

    def exceptions(self) -> dict:
        if not self.exceptions_resource:
            return {}
        return _load_resource(self.exceptions_resource)

    def parenthesizable(self, kind: str) -> bool:
        return kind in self.expression_kinds

    def rewrite_watch(self, source: str, node_id: int, url: str) -> str | None:
        """Instrumented form of an expression, or None when unsupported."""
        return None

    def is_watch_wrapped(self, source: str) -> bool:
        """True when the text already carries the instrumentation wrapper."""
        return False


_RULE_CACHE: dict[str, dict] = {}


def _load_resource(name: str) -> dict:
    if name not in _RULE_CACHE:
        path = resources.files("stet.languages") / "rules" / name
        _RULE_CACHE[name] = json.loads(path.read_text())
    return _RULE_CACHE[name]


class Cursor:
    """Token stream walker with backtracking for the hand-written parsers."""

    def __init__(self, tokens: list[Token], text_length: int) -> None:
        self.tokens = tokens
        self.i = 0
        self.text_length = text_length

    @property
    def at_end(self) -> bool:
        return self.i >= len(self.tokens)

    def peek(self, ahead: int = 0) -> Token | None:
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else None

    def at(self, *kinds: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind in kinds

    def take(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def pos(self) -> int:
        """Offset where a zero-width missing node should sit."""
        tok = self.peek()
        return tok.start if tok is not None else self.text_length

    def save(self) -> int:
        return self.i

    def restore(self, mark: int) -> None:
        self.i = mark
