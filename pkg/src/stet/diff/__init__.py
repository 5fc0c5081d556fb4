"""Structural diffing between a tree and the reparse of its edited text.

compute_edit_script matches nodes in two passes: exact subtree reuse by
structural hash (largest subtrees first, nearest preorder occurrence, ties
leftmost), then same-kind positional matching for the remainder. Matched
nodes keep their ids, so tools anchored to them survive the edit; changed
matched leaves get Update ops, everything else becomes Load/Attach/Detach/
Remove. Scripts apply mechanically, invert exactly, and carry the source
tree version so stale application fails loudly.

Whitespace leaves take part in hashing (exactness) but are never pass-1
reuse roots; pass 2 matches them by position, so a pure reindentation still
produces a small, local script.
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass

from ..errors import EngineError, InvalidRollback, StaleScript
from ..languages import parse_document
from ..tree import ERROR_KIND, WS_KIND, SyntaxNode, SyntaxTree, structural_equal
from . import kernels


@dataclass(frozen=True, slots=True)
class Load:
    id: int
    kind: str
    text: str | None  # None for internal nodes
    named: bool
    is_error: bool
    is_missing: bool


@dataclass(frozen=True, slots=True)
class Attach:
    id: int
    parent: int
    index: int


@dataclass(frozen=True, slots=True)
class Detach:
    id: int


@dataclass(frozen=True, slots=True)
class Remove:
    id: int


@dataclass(frozen=True, slots=True)
class Update:
    id: int
    text: str


EditOp = Load | Attach | Detach | Remove | Update


@dataclass(frozen=True, slots=True)
class EditScript:
    source_version: int
    ops: tuple[EditOp, ...]
    degenerate: bool = False

    @property
    def is_empty(self) -> bool:
        return not self.ops

    @property
    def load_count(self) -> int:
        return sum(1 for op in self.ops if isinstance(op, Load))

    def to_text(self) -> str:
        lines = [json.dumps({"v": self.source_version, "degenerate": self.degenerate})]
        for op in self.ops:
            if isinstance(op, Load):
                lines.append(json.dumps({
                    "op": "load", "id": op.id, "kind": op.kind, "text": op.text,
                    "named": op.named, "error": op.is_error, "missing": op.is_missing,
                }))
            elif isinstance(op, Attach):
                lines.append(json.dumps(
                    {"op": "attach", "id": op.id, "parent": op.parent, "index": op.index}))
            elif isinstance(op, Detach):
                lines.append(json.dumps({"op": "detach", "id": op.id}))
            elif isinstance(op, Remove):
                lines.append(json.dumps({"op": "remove", "id": op.id}))
            else:
                lines.append(json.dumps({"op": "update", "id": op.id, "text": op.text}))
        return "\n".join(lines)

    @staticmethod
    def from_text(text: str) -> EditScript:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = json.loads(lines[0])
        ops: list[EditOp] = []
        for ln in lines[1:]:
            o = json.loads(ln)
            kind = o["op"]
            if kind == "load":
                ops.append(Load(o["id"], o["kind"], o["text"], o["named"],
                                o["error"], o["missing"]))
            elif kind == "attach":
                ops.append(Attach(o["id"], o["parent"], o["index"]))
            elif kind == "detach":
                ops.append(Detach(o["id"]))
            elif kind == "remove":
                ops.append(Remove(o["id"]))
            elif kind == "update":
                ops.append(Update(o["id"], o["text"]))
            else:
                raise EngineError(f"unknown op in script: {kind!r}")
        return EditScript(header["v"], tuple(ops), header.get("degenerate", False))


def _flatten(root: SyntaxNode):
    nodes = list(root.walk())
    index = {id(n): i for i, n in enumerate(nodes)}
    parents = [0] * len(nodes)
    for i, n in enumerate(nodes):
        parents[i] = index[id(n.parent)] if n.parent is not None and id(n.parent) in index else 0
    return nodes, parents


def _codes(nodes: list[SyntaxNode], intern: dict) -> list[int]:
    out = []
    for n in nodes:
        key = (n.kind, n.named, n.is_error, n.is_missing)
        code = intern.setdefault(key, len(intern))
        out.append(code)
    return out


def _match_trees(old: SyntaxTree, new: SyntaxTree) -> dict[int, int]:
    """Preorder-index mapping from new nodes to old nodes."""
    old_nodes, old_parents = _flatten(old.root)
    new_nodes, new_parents = _flatten(new.root)
    intern: dict = {}
    old_codes = _codes(old_nodes, intern)
    new_codes = _codes(new_nodes, intern)
    old_leaf = [n.text.encode() if not n.children else None for n in old_nodes]
    new_leaf = [n.text.encode() if not n.children else None for n in new_nodes]
    old_hash = kernels.subtree_hashes(old_codes, old_parents, old_leaf)
    new_hash = kernels.subtree_hashes(new_codes, new_parents, new_leaf)

    sizes_old = _subtree_sizes(old_parents)
    sizes_new = _subtree_sizes(new_parents)

    old_matched = [False] * len(old_nodes)
    new_matched = [False] * len(new_nodes)
    mapping: dict[int, int] = {}

    buckets: dict[int, list[int]] = {}
    for i, n in enumerate(old_nodes):
        if n.kind != WS_KIND:
            buckets.setdefault(old_hash[i], []).append(i)

    def pair_slices(oi: int, ni: int, size: int) -> None:
        for k in range(size):
            old_matched[oi + k] = True
            new_matched[ni + k] = True
            mapping[ni + k] = oi + k

    order = sorted((i for i, n in enumerate(new_nodes) if n.kind != WS_KIND),
                   key=lambda i: (-sizes_new[i], i))
    for ni in order:
        if new_matched[ni]:
            continue
        candidates = buckets.get(new_hash[ni])
        if not candidates:
            continue
        size = sizes_new[ni]
        ranked = sorted((c for c in candidates if not old_matched[c]),
                        key=lambda c: (abs(c - ni), c))
        for oi in ranked:
            if sizes_old[oi] != size:
                continue
            if any(old_matched[oi + k] for k in range(size)):
                continue
            if not structural_equal(old_nodes[oi], new_nodes[ni], include_ranges=False):
                continue
            pair_slices(oi, ni, size)
            break

    # pass 2: remaining nodes by kind and arity class, nearest preorder index
    leftover_old: dict[tuple[int, bool], list[int]] = {}
    for i in range(len(old_nodes)):
        if not old_matched[i]:
            key = (old_codes[i], bool(old_nodes[i].children))
            leftover_old.setdefault(key, []).append(i)
    leftover_new: dict[tuple[int, bool], list[int]] = {}
    for i in range(len(new_nodes)):
        if not new_matched[i]:
            key = (new_codes[i], bool(new_nodes[i].children))
            leftover_new.setdefault(key, []).append(i)
    for key, new_list in leftover_new.items():
        old_list = leftover_old.get(key)
        if not old_list:
            continue
        for oj, nj in kernels.assign_nearest(old_list, new_list):
            oi, ni = old_list[oj], new_list[nj]
            old_matched[oi] = True
            new_matched[ni] = True
            mapping[ni] = oi

    if not new_matched[0]:
        if old_matched[0]:
            raise EngineError("internal: old root matched away from new root")
        mapping[0] = 0
        old_matched[0] = True
        new_matched[0] = True
    return mapping


def _subtree_sizes(parents: list[int]) -> list[int]:
    sizes = [1] * len(parents)
    for i in range(len(parents) - 1, 0, -1):
        sizes[parents[i]] += sizes[i]
    return sizes


def compute_edit_script(tree: SyntaxTree, new_text: str) -> EditScript:
    """Diff the tree against a fresh parse of new_text."""
    scratch = parse_document(new_text, tree.language_id)
    if new_text == tree.text:
        return EditScript(tree.version, (), is_degenerate(scratch))
    mapping = _match_trees(tree, scratch)

    old_nodes = list(tree.root.walk())
    new_nodes = list(scratch.root.walk())
    old_index = {id(n): i for i, n in enumerate(old_nodes)}
    new_index = {id(n): i for i, n in enumerate(new_nodes)}
    matched_old = {oi: ni for ni, oi in mapping.items()}

    result_id: list[int] = [0] * len(new_nodes)
    fresh = tree.next_id
    for ni in range(len(new_nodes)):
        if ni in mapping:
            result_id[ni] = old_nodes[mapping[ni]].id
        else:
            result_id[ni] = fresh
            fresh += 1

    updates: list[EditOp] = []
    detaches: list[EditOp] = []
    removes: list[EditOp] = []
    loads: list[EditOp] = []
    attaches: list[EditOp] = []

    for ni, oi in sorted(mapping.items()):
        o, n = old_nodes[oi], new_nodes[ni]
        if not n.children and not o.children and o.text != n.text:
            updates.append(Update(o.id, n.text))

    kept: set[int] = set()  # old node ids staying under the same parent
    for ni, oi in sorted(mapping.items()):
        o, n = old_nodes[oi], new_nodes[ni]
        if not o.children and not n.children:
            continue
        old_ids = [c.id for c in o.children]
        new_ids = [result_id[new_index[id(c)]] for c in n.children]
        sm = difflib.SequenceMatcher(None, old_ids, new_ids, autojunk=False)
        for block in sm.get_matching_blocks():
            kept.update(old_ids[block.a : block.a + block.size])

    for oi, o in enumerate(old_nodes):
        parent_matched = oi in matched_old
        for c in o.children:
            # children of dying regions fall with their removal top; only
            # survivors moving out of one need an explicit detach
            if c.id in kept:
                continue
            if parent_matched or old_index[id(c)] in matched_old:
                detaches.append(Detach(c.id))
        if oi != 0 and not parent_matched:
            parent = o.parent
            if parent is not None and old_index[id(parent)] in matched_old:
                removes.append(Remove(o.id))

    for ni, n in enumerate(new_nodes):
        if ni not in mapping:
            loads.append(Load(result_id[ni], n.kind, n.text if not n.children else None,
                              n.named, n.is_error, n.is_missing))
        for idx, c in enumerate(n.children):
            rid = result_id[new_index[id(c)]]
            if rid not in kept:
                attaches.append(Attach(rid, result_id[ni], idx))

    ops = tuple(updates + detaches + removes + loads + attaches)
    return EditScript(tree.version, ops, is_degenerate(scratch))


def is_degenerate(scratch: SyntaxTree) -> bool:
    """Whole document swallowed by a single error node."""
    sc = scratch.root.structural_children()
    if len(sc) != 1 or sc[0].kind != ERROR_KIND:
        return False
    data = scratch.text.encode("utf-8")
    left = len(data) - len(data.lstrip())
    right = len(data.rstrip())
    return sc[0].start <= left and sc[0].end >= right


class _Mut:
    __slots__ = ("kind", "text", "named", "is_error", "is_missing", "children", "parent")

    def __init__(self, kind, text, named, is_error, is_missing, children, parent):
        self.kind = kind
        self.text = text
        self.named = named
        self.is_error = is_error
        self.is_missing = is_missing
        self.children = children
        self.parent = parent


def _table_from(tree: SyntaxTree) -> dict[int, _Mut]:
    table: dict[int, _Mut] = {}
    for n in tree.walk():
        table[n.id] = _Mut(n.kind, n.text if not n.children else None, n.named,
                           n.is_error, n.is_missing, [c.id for c in n.children],
                           n.parent.id if n.parent else None)
    return table


def apply_edit_script(tree: SyntaxTree, script: EditScript) -> SyntaxTree:
    """Replay a script onto the tree it was computed for."""
    if script.source_version != tree.version:
        raise StaleScript(
            f"script for version {script.source_version}, tree is {tree.version}")
    if script.is_empty:
        return tree
    table = _table_from(tree)
    for op in script.ops:
        if isinstance(op, Update):
            node = table[op.id]
            if node.children:
                raise EngineError(f"update on internal node {op.id}")
            node.text = op.text
        elif isinstance(op, Detach):
            node = table[op.id]
            if node.parent is None:
                raise EngineError(f"detach of floating node {op.id}")
            table[node.parent].children.remove(op.id)
            node.parent = None
        elif isinstance(op, Remove):
            node = table[op.id]
            if node.parent is not None:
                raise EngineError(f"remove of attached node {op.id}")
            stack = [op.id]
            while stack:
                nid = stack.pop()
                stack.extend(table[nid].children)
                del table[nid]
        elif isinstance(op, Load):
            if op.id in table:
                raise EngineError(f"load of existing id {op.id}")
            table[op.id] = _Mut(op.kind, op.text, op.named, op.is_error,
                                op.is_missing, [], None)
        else:
            node = table[op.id]
            parent = table[op.parent]
            if node.parent is not None:
                raise EngineError(f"attach of already attached node {op.id}")
            if not 0 <= op.index <= len(parent.children):
                raise EngineError(f"attach index {op.index} out of range")
            parent.children.insert(op.index, op.id)
            node.parent = op.parent

    root_id = tree.root.id
    reachable = 0
    stack = [root_id]
    while stack:
        nid = stack.pop()
        reachable += 1
        stack.extend(table[nid].children)
    if reachable != len(table):
        raise EngineError("script left floating nodes behind")

    cursor = 0

    def build(nid: int) -> SyntaxNode:
        nonlocal cursor
        m = table[nid]
        if not m.children:
            start = cursor
            cursor += len(m.text or "")
            return SyntaxNode(nid, m.kind, start, cursor, text=m.text or "",
                              named=m.named, is_error=m.is_error, is_missing=m.is_missing)
        start = cursor
        children = tuple(build(c) for c in m.children)
        return SyntaxNode(nid, m.kind, start, cursor, children=children,
                          named=m.named, is_error=m.is_error, is_missing=m.is_missing)

    root = build(root_id)
    text = "".join(leaf.text for leaf in root.leaves())
    out = SyntaxTree(root, tree.language_id, tree.version + 1, text,
                     max(tree.next_id, _max_id(table) + 1))
    out._prev = tree
    out._applied_script = script
    return out


def _max_id(table: dict[int, _Mut]) -> int:
    return max(table) if table else 0


def rollback(tree: SyntaxTree, script: EditScript) -> SyntaxTree:
    """Undo the last applied script, restoring the prior snapshot, ids included."""
    if tree._applied_script is None or tree._prev is None:
        raise InvalidRollback("tree has no rollback provenance")
    if tree._sealed:
        raise InvalidRollback("tree was committed; rollback window closed")
    if tree._applied_script != script:
        raise InvalidRollback("script is not the one last applied to this tree")
    return tree._prev


def invert_script(before: SyntaxTree, script: EditScript) -> EditScript:
    """Script that maps apply(before, script) back to before, id-exact."""
    table = _table_from(before)
    inverse_rev: list[EditOp] = []  # built in forward order, reversed at the end
    for op in script.ops:
        if isinstance(op, Update):
            node = table[op.id]
            inverse_rev.append(Update(op.id, node.text or ""))
            node.text = op.text
        elif isinstance(op, Detach):
            node = table[op.id]
            idx = table[node.parent].children.index(op.id)
            inverse_rev.append(Attach(op.id, node.parent, idx))
            table[node.parent].children.remove(op.id)
            node.parent = None
        elif isinstance(op, Remove):
            restore: list[EditOp] = []
            order: list[int] = []
            stack = [op.id]
            while stack:
                nid = stack.pop()
                order.append(nid)
                stack.extend(reversed(table[nid].children))
            for nid in order:
                m = table[nid]
                restore.append(Load(nid, m.kind, m.text, m.named, m.is_error, m.is_missing))
            for nid in order:
                for idx, cid in enumerate(table[nid].children):
                    restore.append(Attach(cid, nid, idx))
            inverse_rev.append(restore)  # type: ignore[arg-type]
            for nid in order:
                del table[nid]
        elif isinstance(op, Load):
            table[op.id] = _Mut(op.kind, op.text, op.named, op.is_error,
                                op.is_missing, [], None)
            inverse_rev.append(Remove(op.id))
        else:
            table[op.id].parent = op.parent
            table[op.parent].children.insert(op.index, op.id)
            inverse_rev.append(Detach(op.id))
    flat: list[EditOp] = []
    for entry in reversed(inverse_rev):
        if isinstance(entry, list):
            flat.extend(entry)
        else:
            flat.append(entry)
    return EditScript(before.version + 1, tuple(flat))
