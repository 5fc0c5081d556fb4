"""Hybrid structured editing over plain text.

Documents stay ordinary text; a trivia-preserving parse tree with stable
node identities rides along, kept current by structural diffing.  Tools
match tree patterns to project widgets, constraints freeze edits that would
break them, and a wire protocol exposes the whole session to any frontend.
"""

from .diff import EditScript, compute_edit_script, apply_edit_script, rollback
from .errors import EngineError
from .fragments import Fragment, FragmentStore, FragmentView, restore_selection
from .instrument import StreamRegistry, ValueCollector, build_instrumented_source
from .languages import get_grammar, parse_document
from .strings import bind_plain_string, escape_string, unescape_string
from .structedit import (GrammarAdapter, delete_node, insert_element,
                         replace_with, wrap_with)
from .templates import Template, match_template
from .textchange import TextChange, apply_changes, map_range
from .tools import ToolDefinition, ToolHost, ToolInstance
from .tools.builtin import default_tool_host, load_manifest
from .transactions import Constraint, Outcome, Session
from .tree import SyntaxNode, SyntaxTree, node_at

__all__ = [
    "Constraint", "EditScript", "EngineError", "Fragment", "FragmentStore",
    "FragmentView", "GrammarAdapter", "Outcome", "Session", "StreamRegistry",
    "SyntaxNode", "SyntaxTree", "Template", "TextChange", "ToolDefinition",
    "ToolHost", "ToolInstance", "ValueCollector", "apply_changes",
    "apply_edit_script", "bind_plain_string", "build_instrumented_source",
    "compute_edit_script", "default_tool_host", "delete_node", "escape_string",
    "get_grammar", "insert_element", "load_manifest", "map_range",
    "match_template", "node_at", "parse_document", "replace_with",
    "restore_selection", "rollback", "unescape_string", "wrap_with",
]

__version__ = "0.1.0"
