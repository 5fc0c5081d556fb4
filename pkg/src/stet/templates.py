"""Structural templates with dollar placeholders.

`$name` binds any node; `$_kind` additionally constrains the bound node's
kind (through the grammar's alias sets, so `$_string` also takes a template
string or its content fragment). Placeholders are encoded as identifiers
with the `__vi_tmpl_` prefix so the template source parses with the normal
grammar; whatever leaf carries the marker text becomes the hole, which lets
a placeholder sit inside string content.

Comparison ignores whitespace and comments. Non-placeholder leaves must
match by kind and exact text; error and missing nodes are bindable like any
other node (broken targets usually fail the structural comparison anyway).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import TemplateError
from .languages import get_grammar, parse_document
from .tree import SyntaxNode

PLACEHOLDER_PREFIX = "__vi_tmpl_"
_PLACEHOLDER_RE = re.compile(r"\$(_?[A-Za-z][A-Za-z0-9_]*)")


def encode_placeholders(source: str) -> str:
    return _PLACEHOLDER_RE.sub(lambda m: PLACEHOLDER_PREFIX + m.group(1), source)


def decode_marker(text: str) -> tuple[str, str | None] | None:
    """(bind name, kind constraint) for a placeholder marker, else None."""
    if not text.startswith(PLACEHOLDER_PREFIX):
        return None
    rest = text[len(PLACEHOLDER_PREFIX):]
    if rest.startswith("_"):
        return rest[1:], rest[1:]
    return rest, None


@dataclass
class Template:
    """A parsed pattern; construction fails loudly on malformed sources."""

    source: str
    language_id: str
    root: SyntaxNode = field(init=False, repr=False)
    placeholders: dict[int, tuple[str, str | None]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        encoded = encode_placeholders(self.source)
        tree = parse_document(encoded, self.language_id)
        self.placeholders = {}
        names: set[str] = set()
        for node in tree.walk():
            if node.children:
                continue
            decoded = decode_marker(node.text)
            if decoded is None:
                continue
            name = decoded[0]
            if name in names:
                raise TemplateError(f"duplicate placeholder ${name} in {self.source!r}")
            names.add(name)
            self.placeholders[node.id] = decoded
        for node in tree.walk():
            if node.is_error and node.id not in self.placeholders:
                raise TemplateError(f"template does not parse: {self.source!r}")
        root = tree.root
        while True:
            sc = root.structural_children()
            if len(sc) != 1:
                break
            root = sc[0]
        self.root = root


def match_template(node: SyntaxNode, template: Template) -> dict[str, SyntaxNode] | None:
    """Bindings when the subtree matches the template, else None."""
    grammar = get_grammar(template.language_id)
    aliases = grammar.kind_aliases
    bindings: dict[str, SyntaxNode] = {}

    def walk(tn: SyntaxNode, dn: SyntaxNode) -> bool:
        hole = template.placeholders.get(tn.id)
        if hole is not None:
            name, kind = hole
            if kind is not None and dn.kind not in aliases.get(kind, frozenset({kind})):
                return False
            bindings[name] = dn
            return True
        if tn.kind != dn.kind:
            return False
        ts, ds = tn.structural_children(), dn.structural_children()
        if not ts and not ds:
            return tn.text == dn.text
        if len(ts) != len(ds):
            return False
        return all(walk(a, b) for a, b in zip(ts, ds))

    return bindings if walk(template.root, node) else None
