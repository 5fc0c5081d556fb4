"""Grammar registry and the parse entrypoint."""

from __future__ import annotations

from ..errors import UnknownLanguage
from ..tree import IdAllocator, SyntaxTree
from .base import Grammar
from .javascript import JavaScriptGrammar
from .python_lang import PythonGrammar
from .toylist import ToyGrammar

_REGISTRY: dict[str, Grammar] = {}


def register_grammar(grammar: Grammar) -> None:
    _REGISTRY[grammar.language_id] = grammar
    for alias in grammar.aliases:
        _REGISTRY[alias] = grammar


def get_grammar(language_id: str) -> Grammar:
    try:
        return _REGISTRY[language_id]
    except KeyError:
        raise UnknownLanguage(
            f"no grammar registered for {language_id!r}; have {sorted(set(_REGISTRY))}"
        ) from None


def parse_document(
    text: str,
    language_id: str,
    *,
    version: int = 0,
    allocator: IdAllocator | None = None,
) -> SyntaxTree:
    """Full parse with error recovery; never raises on malformed input."""
    return get_grammar(language_id).parse(text, version=version, allocator=allocator)


for _g in (JavaScriptGrammar(), PythonGrammar(), ToyGrammar()):
    register_grammar(_g)
