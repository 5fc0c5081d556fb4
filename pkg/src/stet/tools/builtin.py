"""The bundled tools, built from the declarative manifest.

Each manifest entry names a match rule (structural template, identifier
prefix, or top-level-statement position), a constraint kind, a view layout
with binding references, and action behaviors. This module is the
interpreter: it compiles entries into ToolDefinition objects wired to the
structured-edit planners.
"""

from __future__ import annotations

import json
from importlib import resources

from ..errors import StaleInstance
from ..languages import get_grammar
from ..strings import bind_plain_string
from ..structedit import GrammarAdapter, replace_with
from ..templates import Template, match_template
from ..textchange import TextChange
from . import ToolDefinition, ToolHost, mapped_change

_ADAPTERS: dict[str, GrammarAdapter] = {}


def _adapter(language_id: str) -> GrammarAdapter:
    if language_id not in _ADAPTERS:
        _ADAPTERS[language_id] = GrammarAdapter(get_grammar(language_id))
    return _ADAPTERS[language_id]


def _node_or_stale(session, node_id):
    node = session.tree.node(node_id)
    if node is None:
        raise StaleInstance(f"node {node_id} left the tree")
    return node


def _number_text(value) -> str:
    v = float(value)
    return str(int(v)) if v.is_integer() else repr(v)


# -- match rules -----------------------------------------------------------

def _template_query(entry: dict):
    template = Template(entry["match"]["template"], entry["language"])
    number_bindings = entry["match"].get("numberBindings", ())
    grammar = get_grammar(entry["language"])
    numbers = grammar.kind_aliases.get("number", frozenset({"number"}))

    def query(node, session) -> dict | None:
        bindings = match_template(node, template)
        if bindings is None:
            return None
        extraction: dict = {}
        for name, bound in bindings.items():
            extraction[name] = bound.id
            if name in number_bindings:
                if bound.kind not in numbers:
                    return None
                extraction[name + "Value"] = float(bound.text)
        return extraction

    return query, template


def _prefix_query(prefix: str):
    def query(node, session) -> dict | None:
        if node.children or node.kind != get_grammar(session.language_id).identifier_kind:
            return None
        if not node.text.startswith(prefix):
            return None
        return {"label": node.text[len(prefix):].replace("_", " ")}
    return query


def _top_level_query():
    def query(node, session) -> dict | None:
        if node.parent is session.tree.root and node.named:
            return {}
        return None
    return query


# -- constraint kinds ------------------------------------------------------

def _constraint_factory(kind: str, template: Template | None):
    if kind == "template":
        def factory(inst, session):
            def predicate(script, tree, intents):
                node = tree.node(inst.anchor_id)
                return node is not None and match_template(node, template) is not None
            return predicate
        return factory
    if kind == "text-unchanged":
        # transition guard: an edit may not alter the anchor's text directly;
        # the tool's own rewrites carry an intent marker and skip this check
        def factory(inst, session):
            def predicate(script, tree, intents):
                node = tree.node(inst.anchor_id)
                before = session.tree.node(inst.anchor_id)
                return (node is not None and before is not None
                        and node.text == before.text)
            return predicate
        return factory
    if kind == "top-level":
        def factory(inst, session):
            def predicate(script, tree, intents):
                node = tree.node(inst.anchor_id)
                return node is not None and node.parent is tree.root
            return predicate
        return factory
    raise ValueError(f"unknown constraint kind {kind!r}")


# -- action behaviors ------------------------------------------------------

def _make_action(spec: dict):
    kind = spec["kind"]
    intents_anchor = spec.get("intentDeleteAnchor", False)
    continue_input = spec.get("requireContinueInput", False)

    def run(session, change, inst):
        return session.apply_changes(
            [mapped_change(session, change)],
            intent_delete_nodes={inst.anchor_id} if intents_anchor else (),
            require_continue_input=continue_input)

    if kind == "unwrap-binding":
        binding = spec["binding"]

        def handler(host, session, inst, payload):
            anchor = _node_or_stale(session, inst.anchor_id)
            bound = _node_or_stale(session, inst.extraction[binding])
            source = bound.text
            change = replace_with(_adapter(session.language_id),
                                  session.tree.text, anchor, source)
            return run(session, change, inst)
        return handler

    if kind == "replace-anchor-text":
        def handler(host, session, inst, payload):
            anchor = _node_or_stale(session, inst.anchor_id)
            return run(session, TextChange(anchor.start, anchor.end,
                                           str(payload.get("text", ""))), inst)
        return handler

    if kind == "plain-string-edit":
        binding = spec["binding"]

        def handler(host, session, inst, payload):
            node = _node_or_stale(session, inst.extraction[binding])
            bound = bind_plain_string(node)
            if bound is None:
                raise StaleInstance("binding is no longer a string literal")
            change = bound.change_for(int(payload["from"]), int(payload["to"]),
                                      str(payload["insert"]))
            return run(session, change, inst)
        return handler

    if kind == "replace-number":
        fixed = spec.get("binding")

        def handler(host, session, inst, payload):
            binding = fixed or payload["binding"]
            node = _node_or_stale(session, inst.extraction[binding])
            change = replace_with(_adapter(session.language_id),
                                  session.tree.text, node,
                                  _number_text(payload["value"]))
            return run(session, change, inst)
        return handler

    raise ValueError(f"unknown action kind {kind!r}")


# -- view layout -----------------------------------------------------------

def _view_builder(layout: list):
    def build(extraction: dict, session) -> list:
        parts = []
        for entry in layout:
            part = dict(entry)
            kind = part.get("type")
            if kind == "fragment":
                part["nodes"] = [extraction[part.pop("binding")]]
            elif kind in ("value", "plainString"):
                part["nodeId"] = extraction[part.pop("binding")]
            elif kind == "slider":
                binding = part.pop("binding")
                part["nodeId"] = extraction[binding]
                part["value"] = extraction[binding + "Value"]
                for attr in ("min", "max", "step"):
                    part[attr] = extraction[part[attr] + "Value"]
            elif kind == "color":
                bindings = part.pop("bindings")
                part["components"] = [extraction[b] for b in bindings]
                part["values"] = [extraction[b + "Value"] for b in bindings]
            elif kind == "input" and "labelBinding" in part:
                part["label"] = extraction.get(part.pop("labelBinding"), "")
            parts.append(part)
        return parts
    return build


# -- assembly --------------------------------------------------------------

def build_definition(entry: dict) -> ToolDefinition:
    match = entry["match"]
    template = None
    if "template" in match:
        query, template = _template_query(entry)
    elif "identifierPrefix" in match:
        query = _prefix_query(match["identifierPrefix"])
    elif match.get("topLevelStatement"):
        query = _top_level_query()
    else:
        raise ValueError(f"manifest entry {entry['id']!r} has no match rule")

    language = entry.get("language")
    return ToolDefinition(
        id=entry["id"],
        display_type=entry["displayType"],
        query=query,
        view=_view_builder(entry.get("view", [])),
        constraints=(_constraint_factory(entry["constraint"], template),),
        actions={aid: _make_action(spec)
                 for aid, spec in entry.get("actions", {}).items()},
        languages=None if language is None else frozenset({language}),
        stream_keys=tuple(entry.get("streams", ())),
    )


def load_manifest(enabled=None) -> list[ToolDefinition]:
    """Definitions from the bundled manifest.

    With `enabled` unset, entries marked default come back; otherwise exactly
    the named ids, in manifest order.
    """
    raw = json.loads(
        (resources.files("stet.tools") / "manifest.json").read_text())
    out = []
    for entry in raw["tools"]:
        if enabled is None:
            if entry.get("default", True):
                out.append(build_definition(entry))
        elif entry["id"] in set(enabled):
            out.append(build_definition(entry))
    return out


def default_tool_host(*, streams=None, tools=None) -> ToolHost:
    return ToolHost(load_manifest(tools), streams=streams)
