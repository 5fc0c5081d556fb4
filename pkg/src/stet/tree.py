"""Concrete syntax trees with byte-exact round-tripping.

Every token is a leaf and whitespace between siblings becomes its own "ws"
leaf, so concatenating leaf texts in order reproduces the parsed document
exactly. Trees are immutable snapshots: readers on any thread may hold one,
mutation happens by building a successor snapshot (reparse or edit script)
inside the owning session.

Node ids are 64-bit and monotone per document; an id never changes while the
node remains in a tree, and is never reused after the node is removed.
"""

from __future__ import annotations

import itertools
from typing import Iterator

WS_KIND = "ws"
COMMENT_KIND = "comment"
ERROR_KIND = "ERROR"
MISSING_KIND = "missing"


class IdAllocator:
    """Hands out monotonically increasing node ids for one document."""

    def __init__(self, start: int = 0) -> None:
        self._counter = itertools.count(start)

    def take(self) -> int:
        return next(self._counter)

    def peek(self) -> int:
        value = next(self._counter)
        self._counter = itertools.count(value)
        return value


class SyntaxNode:
    """One tree node. Leaves carry source text, internal nodes carry children."""

    __slots__ = ("id", "kind", "start", "end", "children", "parent", "named",
                 "is_error", "is_missing", "_text")

    def __init__(
        self,
        id: int,
        kind: str,
        start: int,
        end: int,
        *,
        children: tuple[SyntaxNode, ...] = (),
        text: str | None = None,
        named: bool = False,
        is_error: bool = False,
        is_missing: bool = False,
    ) -> None:
        self.id = id
        self.kind = kind
        self.start = start
        self.end = end
        self.children = children
        self.parent: SyntaxNode | None = None
        self.named = named
        self.is_error = is_error
        self.is_missing = is_missing
        self._text = text
        for child in children:
            child.parent = self

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def is_trivia(self) -> bool:
        return self.kind == WS_KIND

    @property
    def is_extra(self) -> bool:
        return self.kind in (WS_KIND, COMMENT_KIND)

    @property
    def text(self) -> str:
        """Source text covered by this node, rebuilt from leaves."""
        if not self.children:
            return self._text or ""
        return "".join(leaf._text or "" for leaf in self.leaves())

    @property
    def range(self) -> tuple[int, int]:
        return (self.start, self.end)

    def structural_children(self) -> list[SyntaxNode]:
        """Children minus whitespace and comments."""
        return [c for c in self.children if not c.is_extra]

    def named_children(self) -> list[SyntaxNode]:
        return [c for c in self.children if c.named]

    def walk(self) -> Iterator[SyntaxNode]:
        """Preorder traversal including self."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> Iterator[SyntaxNode]:
        for node in self.walk():
            if not node.children:
                yield node

    def has_error(self) -> bool:
        return any(n.is_error for n in self.walk())

    def ancestors(self) -> Iterator[SyntaxNode]:
        node = self.parent
        while node is not None:
            yield node
            node = node.parent

    def __repr__(self) -> str:
        flag = "!" if self.is_error else ""
        return f"<{self.kind}{flag} #{self.id} [{self.start},{self.end})>"


class SyntaxTree:
    """An immutable parse result plus the id watermark for future nodes."""

    __slots__ = ("root", "language_id", "version", "text", "next_id", "_index",
                 "_prev", "_applied_script", "_sealed")

    def __init__(
        self,
        root: SyntaxNode,
        language_id: str,
        version: int,
        text: str,
        next_id: int,
    ) -> None:
        self.root = root
        self.language_id = language_id
        self.version = version
        self.text = text
        self.next_id = next_id
        self._index: dict[int, SyntaxNode] = {n.id: n for n in root.walk()}
        # rollback provenance, populated by the diff engine and cleared on commit
        self._prev = None
        self._applied_script = None
        self._sealed = False

    def node(self, node_id: int) -> SyntaxNode | None:
        return self._index.get(node_id)

    def __contains__(self, node_id: int) -> bool:
        return node_id in self._index

    def walk(self) -> Iterator[SyntaxNode]:
        return self.root.walk()

    def __repr__(self) -> str:
        return f"<SyntaxTree {self.language_id} v{self.version} {len(self._index)} nodes>"


def node_at(tree: SyntaxTree, start: int, end: int) -> SyntaxNode:
    """Smallest non-trivia node containing [start, end).

    Zero-width queries on a boundary prefer the node starting at the offset,
    then the node ending there. A range lying inside whitespace resolves to
    the enclosing parent.
    """
    node = tree.root
    while True:
        nxt = None
        if start == end:
            starting = containing = ending = None
            for child in node.children:
                if child.is_trivia:
                    continue
                if starting is None and child.start == start:
                    starting = child
                if child.start < start < child.end:
                    containing = child
                if ending is None and child.end == start and child.start < child.end:
                    ending = child
            nxt = starting or containing or ending
        else:
            for child in node.children:
                if child.is_trivia:
                    continue
                if child.start <= start and end <= child.end:
                    nxt = child
                    break
        if nxt is None:
            return node
        node = nxt


def structural_equal(
    a: SyntaxNode,
    b: SyntaxNode,
    *,
    include_ids: bool = False,
    include_ranges: bool = True,
) -> bool:
    """Compare shape, kinds, flags and leaf texts of two subtrees."""
    if (a.kind, a.named, a.is_error, a.is_missing) != (b.kind, b.named, b.is_error, b.is_missing):
        return False
    if include_ids and a.id != b.id:
        return False
    if include_ranges and (a.start, a.end) != (b.start, b.end):
        return False
    if a.is_leaf != b.is_leaf:
        return False
    if a.is_leaf:
        return a.text == b.text
    if len(a.children) != len(b.children):
        return False
    return all(
        structural_equal(x, y, include_ids=include_ids, include_ranges=include_ranges)
        for x, y in zip(a.children, b.children)
    )


def dump(node: SyntaxNode) -> str:
    """Readable tree listing for debugging and golden tests. Trivia omitted."""
    lines: list[str] = []

    def visit(n: SyntaxNode, depth: int) -> None:
        label = n.kind if n.named or n.is_error else repr(n.kind)
        detail = ""
        if n.is_leaf and n.named and not n.is_missing:
            detail = f" {n.text!r}"
        if n.is_missing:
            detail = " (missing)"
        elif n.is_error:
            detail = f" (error) {n.text!r}" if n.is_leaf else " (error)"
        lines.append("  " * depth + f"{label} [{n.start},{n.end}){detail}")
        for child in n.children:
            if not child.is_trivia:
                visit(child, depth + 1)

    visit(node, 0)
    return "\n".join(lines)
