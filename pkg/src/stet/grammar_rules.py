"""Machine-readable grammar rules: matching and list-shape discovery.

Rule files use a small combinator schema (SEQ, CHOICE, REPEAT, REPEAT1,
STRING, SYMBOL, BLANK). SYMBOL names starting with an underscore are hidden
helper rules and expand to the kinds they can produce; every other SYMBOL
matches a node kind directly. Anonymous node kinds equal their token text, so
a STRING atom matches the child whose kind is its value.

A "list shape" is a repetition subtree in one of five recognized forms:

    adjacent          A*                          separator ""
    separated         A ("S" A)*                  at least one element
    separated_opt     (A ("S" A)*)?               may be empty
    trailing_allowed  (A ("S" A)* "S"?)?          optional trailing separator
    trailing_every    (A "S")*                    separator after each element

Anything else raises NoHeuristic; callers may consult the per-grammar
exception table instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .errors import NoHeuristic

ADJACENT = "adjacent"
SEPARATED = "separated"
SEPARATED_OPT = "separated_opt"
TRAILING_ALLOWED = "trailing_allowed"
TRAILING_EVERY = "trailing_every"


def _members(node: dict) -> list[dict]:
    return node.get("members", [])


def _rule_eq(a: dict, b: dict) -> bool:
    if a["type"] != b["type"]:
        return False
    t = a["type"]
    if t == "STRING":
        return a["value"] == b["value"]
    if t == "SYMBOL":
        return a["name"] == b["name"]
    if t in ("SEQ", "CHOICE"):
        ma, mb = _members(a), _members(b)
        return len(ma) == len(mb) and all(_rule_eq(x, y) for x, y in zip(ma, mb))
    if t in ("REPEAT", "REPEAT1"):
        return _rule_eq(a["content"], b["content"])
    return t == b["type"]


def _atom_ids(node: dict) -> frozenset[int]:
    """ids of every STRING/SYMBOL atom in a rule subtree."""
    out: set[int] = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if n["type"] in ("STRING", "SYMBOL"):
            out.add(id(n))
        stack.extend(_members(n))
        if "content" in n:
            stack.append(n["content"])
    return frozenset(out)


@dataclass(frozen=True)
class ListShape:
    style: str
    separator: str
    root: dict  # the rule subtree forming this shape
    repeat: dict
    element_atoms: frozenset[int]
    separator_atoms: frozenset[int]

    @property
    def empty_allowed(self) -> bool:
        if self.style in (ADJACENT, TRAILING_EVERY):
            # the repeat IS the list here, so REPEAT1 forbids emptiness
            return self.repeat.get("type") != "REPEAT1"
        return self.style in (SEPARATED_OPT, TRAILING_ALLOWED)


def _try_separated(node: dict) -> tuple[dict, dict, dict, dict] | None:
    """Match SEQ[A, REPEAT(SEQ[S, A])]; returns (A, repeat, S, A2)."""
    if node["type"] != "SEQ" or len(_members(node)) != 2:
        return None
    first, rep = _members(node)
    if rep["type"] not in ("REPEAT", "REPEAT1"):
        return None
    inner = rep["content"]
    if inner["type"] != "SEQ" or len(_members(inner)) != 2:
        return None
    sep, second = _members(inner)
    if sep["type"] != "STRING" or not _rule_eq(first, second):
        return None
    return first, rep, sep, second


def classify_shape(node: dict) -> ListShape | None:
    """Recognize one list pattern rooted exactly at `node`."""
    t = node["type"]
    if t == "CHOICE" and len(_members(node)) == 2:
        body, blank = _members(node)
        if blank["type"] == "BLANK":
            if (hit := _try_separated(body)) is not None:
                a, rep, sep, a2 = hit
                return ListShape(SEPARATED_OPT, sep["value"], node, rep,
                                 _atom_ids(a) | _atom_ids(a2), frozenset({id(sep)}))
            inner = _try_trailing(body)
            if inner is not None:
                return ListShape(TRAILING_ALLOWED, inner[0], node, inner[1],
                                 inner[2], inner[3])
    if (inner := _try_trailing(node)) is not None:
        return ListShape(TRAILING_ALLOWED, inner[0], node, inner[1], inner[2], inner[3])
    if (hit := _try_separated(node)) is not None:
        a, rep, sep, a2 = hit
        return ListShape(SEPARATED, sep["value"], node, rep,
                         _atom_ids(a) | _atom_ids(a2), frozenset({id(sep)}))
    if t in ("REPEAT", "REPEAT1"):
        content = node["content"]
        if content["type"] == "SEQ" and len(_members(content)) == 2:
            elem, sep = _members(content)
            if sep["type"] == "STRING" and elem["type"] != "STRING":
                return ListShape(TRAILING_EVERY, sep["value"], node, node,
                                 _atom_ids(elem), frozenset({id(sep)}))
            return None
        if content["type"] == "SYMBOL" or (
            content["type"] == "CHOICE"
            and all(m["type"] == "SYMBOL" for m in _members(content))
        ):
            return ListShape(ADJACENT, "", node, node, _atom_ids(content), frozenset())
    return None


def _try_trailing(node: dict) -> tuple[str, dict, frozenset[int], frozenset[int]] | None:
    """Match SEQ[A, REPEAT(SEQ[S, A]), CHOICE[S, BLANK]]."""
    if node["type"] != "SEQ" or len(_members(node)) != 3:
        return None
    head = {"type": "SEQ", "members": _members(node)[:2]}
    hit = _try_separated(head)
    if hit is None:
        return None
    a, rep, sep, a2 = hit
    tail = _members(node)[2]
    if tail["type"] != "CHOICE" or len(_members(tail)) != 2:
        return None
    tsep, blank = _members(tail)
    if blank["type"] != "BLANK" or tsep["type"] != "STRING" or tsep["value"] != sep["value"]:
        return None
    return sep["value"], rep, _atom_ids(a) | _atom_ids(a2), frozenset({id(sep), id(tsep)})


def detect_separator(rule: dict) -> str:
    """Separator text for a repetition rule; NoHeuristic when unrecognized."""
    shape = classify_shape(rule)
    if shape is None:
        raise NoHeuristic(f"repetition rule matches no known list pattern: {rule!r}")
    return shape.separator


@dataclass
class Match:
    atoms: list[tuple[int, int]]  # (atom rule id, child index)
    spans: dict[int, tuple[int, int]]  # shape root id -> child index span

    def children_for(self, atom_ids: frozenset[int]) -> list[int]:
        return sorted(idx for aid, idx in self.atoms if aid in atom_ids)


class RuleSet:
    """One grammar's rule file with matching and shape caches."""

    def __init__(self, data: dict) -> None:
        self.rules: dict[str, dict] = data["rules"]
        self._expansion: dict[str, frozenset[str]] = {}
        self._shapes: dict[str, list[ListShape]] = {}

    def rule(self, kind: str) -> dict | None:
        return self.rules.get(kind)

    def expand(self, symbol: str) -> frozenset[str]:
        """Node kinds a SYMBOL atom can match."""
        if symbol in self._expansion:
            return self._expansion[symbol]
        if not symbol.startswith("_"):
            result = frozenset({symbol})
        else:
            body = self.rules.get(symbol)
            if body is None:
                result = frozenset()
            else:
                self._expansion[symbol] = frozenset()  # cycle guard
                kinds: set[str] = set()
                stack = [body]
                while stack:
                    n = stack.pop()
                    if n["type"] == "SYMBOL":
                        kinds |= self.expand(n["name"])
                    elif n["type"] == "CHOICE":
                        stack.extend(_members(n))
                result = frozenset(kinds)
        self._expansion[symbol] = result
        return result

    def shapes(self, kind: str) -> list[ListShape]:
        """All list shapes in a kind's rule, outermost first, no nesting."""
        if kind in self._shapes:
            return self._shapes[kind]
        found: list[ListShape] = []
        body = self.rules.get(kind)

        def visit(n: dict) -> None:
            shape = classify_shape(n)
            if shape is not None:
                found.append(shape)
                return
            for m in _members(n):
                visit(m)
            if "content" in n:
                visit(n["content"])

        if body is not None:
            visit(body)
        self._shapes[kind] = found
        return found

    def match_children(self, kind: str, child_kinds: list[str]) -> Match | None:
        """Assign a kind's structural children to its rule atoms."""
        body = self.rules.get(kind)
        if body is None:
            return None
        span_ids = {id(s.root) for s in self.shapes(kind)}

        def gen(node: dict, i: int) -> Iterator[tuple[int, list]]:
            produced = self._gen_inner(node, i, child_kinds, gen)
            if id(node) in span_ids:
                for j, trace in produced:
                    yield j, trace + [(id(node), i, j)]
            else:
                yield from produced

        for j, trace in gen(body, 0):
            if j == len(child_kinds):
                atoms = [t for t in trace if len(t) == 2]
                spans = {t[0]: (t[1], t[2]) for t in trace if len(t) == 3}
                return Match(atoms, spans)
        return None

    def _gen_inner(self, node: dict, i: int, kinds: list[str], gen) -> Iterator[tuple[int, list]]:
        t = node["type"]
        if t == "BLANK":
            yield i, []
        elif t == "STRING":
            if i < len(kinds) and kinds[i] == node["value"]:
                yield i + 1, [(id(node), i)]
        elif t == "SYMBOL":
            if i < len(kinds) and kinds[i] in self.expand(node["name"]):
                yield i + 1, [(id(node), i)]
        elif t == "SEQ":
            members = _members(node)

            def seq(k: int, idx: int) -> Iterator[tuple[int, list]]:
                if k == len(members):
                    yield idx, []
                    return
                for j, t1 in gen(members[k], idx):
                    for jj, t2 in seq(k + 1, j):
                        yield jj, t1 + t2

            yield from seq(0, i)
        elif t == "CHOICE":
            for m in _members(node):
                yield from gen(m, i)
        elif t in ("REPEAT", "REPEAT1"):
            content = node["content"]

            def rep(idx: int) -> Iterator[tuple[int, list]]:
                for j, t1 in gen(content, idx):
                    if j > idx:
                        for jj, t2 in rep(j):
                            yield jj, t1 + t2
                yield idx, []

            if t == "REPEAT1":
                for j, t1 in gen(content, i):
                    if j > i:
                        for jj, t2 in rep(j):
                            yield jj, t1 + t2
            else:
                yield from rep(i)
