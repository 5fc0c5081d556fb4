"""Grammar-aware edit planning: list insert/delete, replace, wrap.

Every operation is pure: it reads the document text and a node, consults the
grammar's machine-readable rules, and returns one TextChange. Execution goes
through the transaction engine like any other change, so tool constraints
still apply.

Separator whitespace is copied from the nearest existing separator occurrence
in the same list (so a ", "-styled list stays that way); with no occurrence to
copy, the bare separator is used. Inserts into a list that carries a trailing
separator keep the trailing style. The insert and delete span arithmetic is
aligned so that deleting a just-inserted element restores the document
byte-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import (CannotDelete, ListIndexOutOfRange, NotAList, ReplaceFailed)
from .grammar_rules import (ADJACENT, TRAILING_EVERY, ListShape, Match, RuleSet,
                            detect_separator)
from .languages import parse_document
from .languages.base import Grammar
from .textchange import TextChange, byte_length, byte_slice
from .tree import SyntaxNode, node_at

__all__ = [
    "GrammarAdapter", "ListContext", "detect_separator",
    "insert_element", "delete_node", "replace_with", "wrap_with",
]


@dataclass
class ListContext:
    """One repeating slot of a node, resolved against its actual children."""

    parent: SyntaxNode
    shape: ListShape
    span: tuple[int, int]  # structural-child index range of the shape
    elements: list[SyntaxNode]
    separators: list[SyntaxNode]
    exception: dict


class GrammarAdapter:
    """The per-grammar capability set for structured editing."""

    def __init__(self, grammar: Grammar) -> None:
        self.grammar = grammar
        self.ruleset = RuleSet(grammar.rules())
        self._exceptions = grammar.exceptions().get("rules", {})

    def match(self, node: SyntaxNode) -> Match | None:
        kinds = [c.kind for c in node.structural_children()]
        return self.ruleset.match_children(node.kind, kinds)

    def lists_of(self, node: SyntaxNode) -> list[ListContext]:
        match = self.match(node)
        if match is None:
            return []
        structural = node.structural_children()
        out: list[ListContext] = []
        for shape in self.ruleset.shapes(node.kind):
            span = match.spans.get(id(shape.root))
            if span is None:
                continue
            elements = [structural[i] for i in match.children_for(shape.element_atoms)]
            separators = [structural[i] for i in match.children_for(shape.separator_atoms)]
            out.append(ListContext(node, shape, span, elements, separators,
                                   self._exceptions.get(node.kind, {})))
        return out

    def find_list(self, node: SyntaxNode, reference_child: SyntaxNode | None = None,
                  selector: Callable[[list[ListContext]], ListContext] | None = None,
                  ) -> ListContext:
        contexts = self.lists_of(node)
        if not contexts:
            raise NotAList(f"{node.kind} has no repeating slot here")
        if reference_child is not None:
            containing = [c for c in contexts
                          if any(e is reference_child for e in c.elements)]
            if not containing:
                raise NotAList(
                    f"{reference_child.kind} is not a list element of {node.kind}")
            contexts = containing
        if selector is not None:
            return selector(contexts)
        return contexts[0]

    def list_info(self, node: SyntaxNode) -> tuple[bool, str]:
        """Is this node an element of a repeating slot, and what separates it."""
        if node.parent is None:
            return False, ""
        try:
            ctx = self.find_list(node.parent, reference_child=node)
        except NotAList:
            return False, ""
        return True, ctx.shape.separator

    def first_insert_position(self, list_node: SyntaxNode) -> int:
        """Byte offset where the first element of an empty list goes."""
        ctx = self.find_list(list_node)
        return self._empty_position(ctx)

    def parenthesizable(self, node: SyntaxNode) -> bool:
        return self.grammar.parenthesizable(node.kind)

    @staticmethod
    def _empty_position(ctx: ListContext) -> int:
        i = ctx.span[0]
        structural = ctx.parent.structural_children()
        if i > 0:
            return structural[i - 1].end
        return ctx.parent.start

    @staticmethod
    def for_language(language_id: str) -> "GrammarAdapter":
        from .languages import get_grammar
        return GrammarAdapter(get_grammar(language_id))


def _occurrence(text: str, ctx: ListContext, near: int = 0) -> str:
    """Separator text with surrounding whitespace, copied from the pair of
    elements nearest the insertion point. Bare separator when there is none."""
    elems = ctx.elements
    if len(elems) >= 2:
        i = min(max(near - 1, 0), len(elems) - 2)
        return byte_slice(text, elems[i].end, elems[i + 1].start)
    return ctx.shape.separator


def _has_trailing(ctx: ListContext) -> bool:
    if ctx.shape.style == TRAILING_EVERY:
        return bool(ctx.elements)
    return (bool(ctx.elements)
            and len(ctx.separators) == len(ctx.elements)
            and ctx.separators[-1].start >= ctx.elements[-1].end)


def insert_element(adapter: GrammarAdapter, text: str, target: SyntaxNode,
                   element_text: str, index: int,
                   selector=None) -> TextChange:
    """Insert element_text as the index-th element of target's list."""
    ctx = adapter.find_list(target, selector=selector)
    elems = ctx.elements
    if index < 0 or index > len(elems):
        raise ListIndexOutOfRange(
            f"index {index} not in [0, {len(elems)}] for {target.kind}")

    if not elems:
        pos = GrammarAdapter._empty_position(ctx)
        suffix = ctx.shape.separator if ctx.shape.style == TRAILING_EVERY else ""
        return TextChange(pos, pos, element_text + suffix)

    if index < len(elems):
        occ = _occurrence(text, ctx, index)
        pos = elems[index].start
        return TextChange(pos, pos, element_text + occ)

    # append
    if _has_trailing(ctx):
        last_sep = ctx.separators[-1]
        # whitespace that precedes an element after a separator, if the list
        # shows any; then the element with its own separator suffix
        lead = (byte_slice(text, ctx.separators[-2].end, elems[-1].start)
                if len(ctx.separators) > 1 else "")
        suffix = byte_slice(text, elems[-1].end, last_sep.end)
        return TextChange(last_sep.end, last_sep.end, lead + element_text + suffix)
    pos = elems[-1].end
    return TextChange(pos, pos, _occurrence(text, ctx, len(elems)) + element_text)


def delete_node(adapter: GrammarAdapter, text: str, target: SyntaxNode) -> TextChange:
    """Remove target from its list, taking one adjacent separator along."""
    parent = target.parent
    if parent is None:
        raise CannotDelete("cannot delete the document root")
    try:
        ctx = adapter.find_list(parent, reference_child=target)
    except NotAList:
        return _delete_optional(adapter, parent, target)

    elems = ctx.elements
    k = next(i for i, e in enumerate(elems) if e is target)
    n = len(elems)

    if n == 1:
        if not ctx.shape.empty_allowed:
            raise CannotDelete(
                f"{parent.kind} requires at least one {target.kind}")
        end = ctx.separators[0].end if _has_trailing(ctx) else target.end
        return TextChange(target.start, end, "")

    keep_singleton = ctx.exception.get("keep_separator_on_singleton", False)
    if keep_singleton and n == 2 and not _has_trailing(ctx):
        # dropping to one element must keep its separator, e.g. a 1-tuple
        if k == n - 1:
            return TextChange(ctx.separators[k - 1].end, target.end, "")
        other = elems[1]
        return TextChange(target.start, other.end,
                          byte_slice(text, other.start, other.end) + ctx.shape.separator)

    if k + 1 < n:
        # taking the following separator means cutting to the next element
        return TextChange(target.start, elems[k + 1].start, "")
    following = ctx.separators[k] if k < len(ctx.separators) else None
    if following is not None and following.start >= target.end:
        # last element of a trailing-style list: cut from the previous
        # separator so the whitespace that came with this element goes too
        start = ctx.separators[k - 1].end if k > 0 else target.start
        return TextChange(start, following.end, "")
    # last element of a no-trailing list: take the preceding separator run
    return TextChange(elems[k - 1].end, target.end, "")


def _delete_optional(adapter: GrammarAdapter, parent: SyntaxNode,
                     target: SyntaxNode) -> TextChange:
    """Delete a non-list child if the grammar allows its absence."""
    kinds = [c.kind for c in parent.structural_children() if c is not target]
    if adapter.ruleset.match_children(parent.kind, kinds) is None:
        raise CannotDelete(f"{target.kind} is mandatory inside {parent.kind}")
    return TextChange(target.start, target.end, "")


def _probe(adapter: GrammarAdapter, doc: str, start: int, end: int) -> bool:
    """Does doc parse cleanly with a node at exactly [start, end)?"""
    tree = parse_document(doc, adapter.grammar.language_id)
    if tree.root.has_error():
        return False
    node = node_at(tree, start, end)
    return node.start == start and node.end == end and not node.is_trivia


def replace_with(adapter: GrammarAdapter, text: str, target: SyntaxNode,
                 new_text: str) -> TextChange:
    """Put new_text at target's tree position, parenthesizing if needed."""
    start, end = target.start, target.end
    bare = TextChange(start, end, new_text).apply(text)
    if _probe(adapter, bare, start, start + byte_length(new_text)):
        return TextChange(start, end, new_text)
    if adapter.parenthesizable(target):
        wrapped = "(" + new_text + ")"
        doc = TextChange(start, end, wrapped).apply(text)
        if _probe(adapter, doc, start, start + byte_length(wrapped)):
            return TextChange(start, end, wrapped)
    raise ReplaceFailed(
        f"{new_text!r} does not form a node in place of {target.kind}")


def wrap_with(adapter: GrammarAdapter, text: str, target: SyntaxNode,
              prefix: str, suffix: str) -> TextChange:
    """Surround target with prefix/suffix; the payload must stay one node."""
    start, end = target.start, target.end
    payload = byte_slice(text, start, end)
    bare = TextChange(start, end, prefix + payload + suffix).apply(text)
    pstart = start + byte_length(prefix)
    plen = byte_length(payload)
    if _probe(adapter, bare, pstart, pstart + plen):
        return TextChange(start, end, prefix + payload + suffix)
    if adapter.parenthesizable(target):
        doc = TextChange(start, end, prefix + "(" + payload + ")" + suffix).apply(text)
        if _probe(adapter, doc, pstart + 1, pstart + 1 + plen):
            return TextChange(start, end, prefix + "(" + payload + ")" + suffix)
    raise ReplaceFailed(
        f"wrapping {target.kind} with {prefix!r}/{suffix!r} breaks the parse")
