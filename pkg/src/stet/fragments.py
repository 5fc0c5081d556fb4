"""Nested-editor fragments: live ranges plus whitespace-normalized text.

A fragment names a run of consecutive sibling nodes that gets its own editor.
Node ranges live in last-valid-tree coordinates; views push them through the
session's pending changes, so a frozen session keeps showing exactly what the
user typed. Display text pulls in whitespace to the right of the run (up to
the end of the line), drops left-hand line indentation, and collapses the
common indentation of continuation lines to a single tab. Every adjustment is
recorded so the original document substring can be reconstructed byte-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FragmentOrphaned, RecursionLimit
from .textchange import map_range

DEPTH_LIMIT = 16


def _blank(ch: str) -> bool:
    return ch == " " or ch == "\t"


# Blank / newline as UTF-8 byte values; both are ASCII, so scanning the
# encoded document byte by byte cannot land inside a multi-byte sequence.
_BLANK_BYTES = (0x20, 0x09)
_NL_BYTE = 0x0A


@dataclass(frozen=True)
class Fragment:
    """A run of consecutive sibling nodes shown as a nested editor.

    include_left / include_right override the whitespace heuristic when set:
    True forces the adjacent run in, False keeps it out, None applies the
    default rules.
    """

    id: int
    node_ids: tuple[int, ...]
    parent_instance: str | None = None
    depth: int = 0
    include_left: bool | None = None
    include_right: bool | None = None


@dataclass(frozen=True)
class FragmentView:
    # start/end cover everything displayed, taken whitespace included;
    # node_start/node_end are the mapped range of the nodes alone.
    fragment_id: int
    start: int
    end: int
    node_start: int
    node_end: int
    display_text: str
    indent_prefix: str
    line_strips: tuple[int, ...]
    leading_take: int
    trailing_take: int

    def to_wire(self) -> dict:
        return {
            "fragmentId": self.fragment_id,
            "range": [self.start, self.end],
            "nodeRange": [self.node_start, self.node_end],
            "displayText": self.display_text,
            "indentPrefix": self.indent_prefix,
            "lineStrips": list(self.line_strips),
        }


def fragment_range(fragment: Fragment, session) -> tuple[int, int]:
    """Covering range of the fragment's nodes in current-text coordinates.

    Pending changes shift the range when they land before it and grow it when
    they land inside; an insertion exactly at the end counts as inside.
    """
    tree = session.tree
    nodes = []
    for nid in fragment.node_ids:
        if nid not in tree:
            raise FragmentOrphaned(f"fragment {fragment.id}: node {nid} left the tree")
        nodes.append(tree.node(nid))
    parent = nodes[0].parent
    for node in nodes[1:]:
        if node.parent is not parent:
            raise FragmentOrphaned(f"fragment {fragment.id}: nodes are no longer siblings")
    start, end = nodes[0].start, nodes[-1].end
    return map_range(start, end, session.pending_text_changes())


def _common_ws_prefix(lines: list[str]) -> str:
    k = 0
    first = lines[0]
    while k < len(first) and _blank(first[k]):
        k += 1
    prefix = first[:k]
    for line in lines[1:]:
        while prefix and not line.startswith(prefix):
            prefix = prefix[:-1]
    return prefix


def _normalize_indent(raw: str) -> tuple[str, str, tuple[int, ...]]:
    lines = raw.split("\n")
    if len(lines) == 1:
        return raw, "", (0,)
    nonempty = [ln for ln in lines[1:] if ln.strip()]
    prefix = _common_ws_prefix(nonempty) if nonempty else ""
    if not prefix:
        return raw, "", (0,) * len(lines)
    out = [lines[0]]
    strips = [0]
    for line in lines[1:]:
        if line.strip() and line.startswith(prefix):
            out.append("\t" + line[len(prefix):])
            strips.append(len(prefix))
        else:
            out.append(line)
            strips.append(0)
    return "\n".join(out), prefix, tuple(strips)


def display_text(fragment: Fragment, session) -> FragmentView:
    node_start, node_end = fragment_range(fragment, session)
    data = session.text.encode("utf-8")

    take_r = 0
    if fragment.include_right is not False:
        i = node_end
        while i < len(data) and data[i] in _BLANK_BYTES:
            i += 1
        take_r = i - node_end

    take_l = 0
    if fragment.include_left is not False:
        j = node_start
        while j > 0 and data[j - 1] in _BLANK_BYTES:
            j -= 1
        run = node_start - j
        at_line_start = j == 0 or data[j - 1] == _NL_BYTE
        if fragment.include_left is True:
            take_l = run
        elif run > 1 and not at_line_start:
            take_l = run

    start, end = node_start - take_l, node_end + take_r
    shown, prefix, strips = _normalize_indent(data[start:end].decode("utf-8"))
    return FragmentView(fragment.id, start, end, node_start, node_end,
                        shown, prefix, strips, take_l, take_r)


def reconstruct(view: FragmentView) -> str:
    """Invert display normalization; equals the document slice [start, end)."""
    out = []
    for line, k in zip(view.display_text.split("\n"), view.line_strips):
        if k:
            assert line.startswith("\t")
            out.append(view.indent_prefix + line[1:])
        else:
            out.append(line)
    return "\n".join(out)


class FragmentStore:
    """Per-session fragment registry. Mutated only on the session loop."""

    def __init__(self) -> None:
        self._fragments: dict[int, Fragment] = {}
        self._next_id = 0
        self.root_id: int | None = None

    def create(self, node_ids, *, parent_instance: str | None = None, depth: int = 0,
               include_left: bool | None = None,
               include_right: bool | None = None) -> Fragment:
        if depth > DEPTH_LIMIT:
            raise RecursionLimit(f"fragment depth {depth} exceeds limit {DEPTH_LIMIT}")
        fragment = Fragment(self._next_id, tuple(node_ids), parent_instance, depth,
                            include_left, include_right)
        self._next_id += 1
        self._fragments[fragment.id] = fragment
        return fragment

    def adopt_root(self, root_node_id: int) -> Fragment:
        root = self.create((root_node_id,), include_left=False, include_right=False)
        self.root_id = root.id
        return root

    def get(self, fragment_id: int) -> Fragment | None:
        return self._fragments.get(fragment_id)

    def live(self) -> list[Fragment]:
        return list(self._fragments.values())

    def dispose(self, fragment_id: int) -> None:
        if fragment_id == self.root_id:
            return
        self._fragments.pop(fragment_id, None)

    def dispose_for_instance(self, instance_id: str) -> None:
        for fid in [f.id for f in self._fragments.values()
                    if f.parent_instance == instance_id]:
            self.dispose(fid)

    def prune(self, session) -> list[int]:
        """Drop fragments whose nodes left the tree; returns disposed ids."""
        dead = []
        for fragment in list(self._fragments.values()):
            if fragment.id == self.root_id:
                continue
            try:
                fragment_range(fragment, session)
            except FragmentOrphaned:
                dead.append(fragment.id)
        for fid in dead:
            self.dispose(fid)
        return dead


def restore_selection(session, store: FragmentStore, previous_id: int,
                      interval: tuple[int, int],
                      changes=()) -> tuple[int, tuple[int, int], list[int]]:
    """Resolve a selection to a fragment after an update.

    Keeps the previous fragment when it still covers the (mapped) interval;
    otherwise picks the smallest covering fragment. The full candidate list,
    smallest range first, goes back to the caller so a frontend with layout
    data can override the choice. The root fragment covers everything, so
    resolution always succeeds.
    """
    start, end = map_range(interval[0], interval[1], changes)
    covering: list[tuple[int, int, int]] = []
    for fragment in store.live():
        try:
            fs, fe = fragment_range(fragment, session)
        except FragmentOrphaned:
            continue
        if fs <= start and end <= fe:
            covering.append((fe - fs, fragment.id, fs))
    covering.sort()
    candidates = [fid for _, fid, _ in covering]
    if previous_id in candidates:
        chosen = previous_id
    elif candidates:
        chosen = candidates[0]
    else:
        chosen = store.root_id
    return chosen, (start, end), candidates
