"""Tool registry and lifecycle.

A tool definition is data plus three pure functions: a query that extracts
bindings from a node (or rejects it), a view builder that turns an extraction
into a renderer-agnostic widget tree, and action handlers that run structure-
aware edits through the session. The host re-runs matching after every
committed edit, keeps instances stable while their anchor survives, and pairs
every instance with its registered constraints.

Instance identity is the chain (definition id, anchor node id) through parent
scopes, so a tool inside another tool's fragment gets a distinct id per
nesting level and the recursion guard can cut the chain at the depth limit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping

from ..errors import RecursionLimit, StaleInstance, UnknownAction
from ..fragments import DEPTH_LIMIT
from ..textchange import TextChange, map_range
from ..transactions import Constraint
from ..tree import SyntaxNode

log = logging.getLogger(__name__)

REPLACE = "Replace"
INSERT_BEFORE = "InsertBefore"
INSERT_AFTER = "InsertAfter"
MARKUP = "Markup"


@dataclass(frozen=True)
class ToolDefinition:
    id: str
    display_type: str
    query: Callable[[SyntaxNode, object], dict | None]
    view: Callable[[dict, object], list]
    constraints: tuple[Callable[["ToolInstance"], Callable], ...] = ()
    actions: Mapping[str, Callable] = field(default_factory=dict)
    fragment_tool_scope: frozenset[str] = frozenset()
    languages: frozenset[str] | None = None
    stream_keys: tuple[str, ...] = ()


@dataclass
class ToolInstance:
    instance_id: str
    definition_id: str
    anchor_id: int
    extraction: dict
    depth: int
    parent_instance: str | None = None
    # fragment objects materialized for this instance, keyed by node-id run
    fragment_ids: dict = field(default_factory=dict)


def _fragment_parts(spec: list) -> list[dict]:
    out = []
    stack = list(spec)
    while stack:
        part = stack.pop()
        if not isinstance(part, dict):
            continue
        if part.get("type") == "fragment":
            out.append(part)
        stack.extend(part.get("children", ()))
    return out


class ToolHost:
    """Per-session tool runtime. All mutation happens on the session loop."""

    def __init__(self, definitions, *, streams=None, depth_limit: int = DEPTH_LIMIT) -> None:
        self.definitions: dict[str, ToolDefinition] = {d.id: d for d in definitions}
        self.instances: dict[str, ToolInstance] = {}
        self.disabled: set[str] = set()
        self.streams = streams
        self.depth_limit = depth_limit

    # -- matching ----------------------------------------------------------

    def _query(self, definition: ToolDefinition, node: SyntaxNode, session) -> dict | None:
        try:
            return definition.query(node, session)
        except Exception:
            log.exception("query of %r failed; disabling for this session",
                          definition.id)
            self.disabled.add(definition.id)
            return None

    def instantiate(self, session) -> dict[str, ToolInstance]:
        """Run every in-scope query over every visible node."""
        found: dict[str, ToolInstance] = {}
        root_defs = [d for d in self.definitions.values()
                     if d.id not in self.disabled
                     and (d.languages is None or session.language_id in d.languages)]

        def scan(nodes, defs, depth, parent_iid):
            if depth > self.depth_limit:
                return
            for node in nodes:
                for d in defs:
                    if d.id in self.disabled:
                        continue
                    extraction = self._query(d, node, session)
                    if extraction is None:
                        continue
                    iid = f"{d.id}:{node.id}"
                    if parent_iid is not None:
                        iid = f"{parent_iid}/{iid}"
                    if iid in found:
                        continue
                    found[iid] = ToolInstance(iid, d.id, node.id, extraction,
                                              depth, parent_iid)
                    if not d.fragment_tool_scope:
                        continue
                    inner = [self.definitions[t] for t in sorted(d.fragment_tool_scope)
                             if t in self.definitions]
                    spec = d.view(extraction, session)
                    for part in _fragment_parts(spec):
                        inner_nodes = []
                        for nid in part.get("nodes", ()):
                            top = session.tree.node(nid)
                            if top is not None:
                                inner_nodes.extend(top.walk())
                        scan(inner_nodes, inner, depth + 1, iid)

        scan(list(session.tree.walk()), root_defs, 0, None)
        return found

    # -- lifecycle ---------------------------------------------------------

    def update(self, session) -> None:
        found = self.instantiate(session)
        for iid in [i for i in self.instances if i not in found]:
            inst = self.instances.pop(iid)
            session.deregister_constraints(iid)
            session.fragments.dispose_for_instance(iid)
        for iid, fresh in found.items():
            existing = self.instances.get(iid)
            if existing is None:
                self.instances[iid] = fresh
                self._register_constraints(session, fresh)
                self._ensure_streams(fresh)
            else:
                existing.extraction = fresh.extraction
                existing.depth = fresh.depth
                self._ensure_streams(existing)
        for inst in self.instances.values():
            self._sync_fragments(session, inst)

    def _register_constraints(self, session, inst: ToolInstance) -> None:
        definition = self.definitions[inst.definition_id]
        for factory in definition.constraints:
            session.register_constraint(
                Constraint(inst.instance_id, factory(inst, session), inst.anchor_id))

    def _ensure_streams(self, inst: ToolInstance) -> None:
        if self.streams is None:
            return
        definition = self.definitions[inst.definition_id]
        for key in definition.stream_keys:
            nid = inst.extraction.get(key)
            if isinstance(nid, int):
                self.streams.ensure(nid)

    def _sync_fragments(self, session, inst: ToolInstance) -> None:
        definition = self.definitions[inst.definition_id]
        spec = definition.view(inst.extraction, session)
        wanted = {}
        for part in _fragment_parts(spec):
            nodes = tuple(part.get("nodes", ()))
            if nodes:
                wanted[nodes] = part
        for key in [k for k in inst.fragment_ids if k not in wanted]:
            session.fragments.dispose(inst.fragment_ids.pop(key))
        for key, part in wanted.items():
            fid = inst.fragment_ids.get(key)
            if fid is not None and session.fragments.get(fid) is not None:
                continue
            try:
                fragment = session.fragments.create(
                    key, parent_instance=inst.instance_id, depth=inst.depth + 1,
                    include_left=part.get("includeLeft"),
                    include_right=part.get("includeRight"))
            except RecursionLimit:
                inst.fragment_ids.pop(key, None)
                continue
            inst.fragment_ids[key] = fragment.id

    # -- interaction -------------------------------------------------------

    def dispatch_action(self, session, instance_id: str, action_id: str, payload):
        inst = self.instances.get(instance_id)
        if inst is None:
            raise StaleInstance(f"no live instance {instance_id!r}")
        definition = self.definitions[inst.definition_id]
        handler = definition.actions.get(action_id)
        if handler is None:
            raise UnknownAction(f"{inst.definition_id} has no action {action_id!r}")
        return handler(self, session, inst, payload)

    # -- rendering ---------------------------------------------------------

    def render_views(self, session) -> list[dict]:
        """Wire form of every live instance, pending changes mapped in."""
        pending = session.pending_text_changes()
        out = []
        for iid in sorted(self.instances):
            inst = self.instances[iid]
            anchor = session.tree.node(inst.anchor_id)
            if anchor is None:
                continue
            definition = self.definitions[inst.definition_id]
            spec = definition.view(inst.extraction, session)
            rng = map_range(anchor.start, anchor.end, pending)
            out.append({
                "instanceId": iid,
                "definitionId": inst.definition_id,
                "displayType": definition.display_type,
                "anchorRange": list(rng),
                "depth": inst.depth,
                "view": [self._render_part(session, inst, p) for p in spec],
            })
        return out

    def _render_part(self, session, inst: ToolInstance, part: dict) -> dict:
        part = dict(part)
        if "children" in part:
            part["children"] = [self._render_part(session, inst, p)
                                for p in part["children"]]
        kind = part.get("type")
        if kind == "fragment":
            fid = inst.fragment_ids.get(tuple(part.get("nodes", ())))
            part["fragmentId"] = fid
        elif kind == "value" and self.streams is not None:
            part["value"] = self.streams.last(part.get("nodeId"))
        elif kind == "plainString":
            node = session.tree.node(part.get("nodeId"))
            if node is not None:
                from ..strings import bind_plain_string
                binding = bind_plain_string(node)
                if binding is not None:
                    part["text"] = binding.plain
                    part["quote"] = binding.quote
        elif kind == "color" and self.streams is not None:
            part["last"] = [self.streams.last(nid)
                            for nid in part.get("components", ())]
        return part


def mapped_change(session, change: TextChange) -> TextChange:
    """Rebase a change planned on the last valid tree onto the current text."""
    start, end = map_range(change.start, change.end, session.pending_text_changes())
    return TextChange(start, end, change.insert)
