"""Exception types shared across the engine."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for every error raised by this package."""


class UnknownLanguage(EngineError):
    pass


class InvalidChange(EngineError):
    """A text change has offsets outside the current document."""


class TemplateError(EngineError):
    """Template source failed to parse or declares duplicate placeholders."""


class StaleScript(EngineError):
    """Edit script was computed against a different tree version."""


class InvalidRollback(EngineError):
    """Tree has no recorded provenance for the given script."""


class NothingToRevert(EngineError):
    pass


class NotAList(EngineError):
    """Structured insert target has no repeating slot."""


class ListIndexOutOfRange(EngineError):
    pass


class CannotDelete(EngineError):
    """Node sits in a mandatory grammar slot."""


class ReplaceFailed(EngineError):
    """Replacement text failed the parse probe even after parenthesizing."""


class NoHeuristic(EngineError):
    """Repetition rule matches none of the known separator patterns."""


class NotAnExpression(EngineError):
    pass


class UnsupportedGrammar(EngineError):
    """Grammar has no instrumentation rewrite template."""


class UnknownAction(EngineError):
    pass


class StaleInstance(EngineError):
    """Action addressed a tool instance that no longer exists."""


class FragmentOrphaned(EngineError):
    """Fragment's nodes are gone from the current tree."""


class RecursionLimit(EngineError):
    """Nested fragment depth exceeded the configured bound."""


class ProtocolError(EngineError):
    """Malformed or out-of-sequence wire message."""
