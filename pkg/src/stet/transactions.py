"""Freeze/reconcile/apply lifecycle around the structural diff.

Text always advances with the user's keystrokes. The tree advances only when
the candidate edit script is sound and every registered tool constraint holds;
otherwise the tree stays pinned at its last valid version and the changes
queue up as pending, to be folded into each later attempt until one
reconciles, the user force-applies, or the user reverts.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .diff import (EditScript, apply_edit_script, compute_edit_script,
                   is_degenerate, rollback)
from .errors import NothingToRevert
from .fragments import FragmentStore
from .languages import get_grammar, parse_document
from .textchange import TextChange, apply_changes as apply_text_changes
from .tree import SyntaxTree

log = logging.getLogger(__name__)


class Outcome(enum.Enum):
    ACCEPTED = "Accepted"
    FROZEN = "Frozen"
    FORCE_APPLIED = "ForceApplied"
    REVERTED = "Reverted"


@dataclass(frozen=True)
class PendingChange:
    """One queued text change with everything needed to undo or revalidate it."""

    change: TextChange
    inverse: TextChange  # against the text state the change applied to
    intent_delete_nodes: frozenset[int] = frozenset()
    require_continue_input: bool = False


@dataclass(frozen=True)
class Constraint:
    """Pure predicate over (edit script, candidate tree, intent ids).

    When anchor_id is set and appears among the intent-delete ids, the
    constraint passes without running: the edit announced it is deleting the
    owner on purpose.
    """

    owner: str
    predicate: Callable[[EditScript, SyntaxTree, frozenset[int]], bool]
    anchor_id: int | None = None


class Session:
    """One document's editing state. All mutation happens on one loop."""

    def __init__(self, text: str, language_id: str, *, tool_host=None) -> None:
        self.language_id = get_grammar(language_id).language_id
        self.tree: SyntaxTree = parse_document(text, self.language_id)
        self.text = text
        self.pending: list[PendingChange] = []
        self.constraints: list[Constraint] = []
        self.fragments = FragmentStore()
        self.fragments.adopt_root(self.tree.root.id)
        self.tool_host = tool_host
        self.last_outcome: Outcome | None = None
        self.last_script: EditScript | None = None
        self.last_violations: list[str] = []
        self._hold_tool_update = False
        if tool_host is not None:
            tool_host.update(self)

    # -- read side ---------------------------------------------------------

    @property
    def frozen(self) -> bool:
        return bool(self.pending)

    @property
    def version(self) -> int:
        return self.tree.version

    def pending_text_changes(self) -> list[TextChange]:
        return [p.change for p in self.pending]

    def intent_union(self) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for p in self.pending:
            out |= p.intent_delete_nodes
        return out

    # -- constraint registry ----------------------------------------------

    def register_constraint(self, constraint: Constraint) -> None:
        self.constraints.append(constraint)

    def deregister_constraints(self, owner: str) -> None:
        self.constraints = [c for c in self.constraints if c.owner != owner]

    # -- the lifecycle -----------------------------------------------------

    def apply_changes(
        self,
        changes: Sequence[TextChange],
        *,
        intent_delete_nodes: Iterable[int] = (),
        require_continue_input: bool = False,
        force_apply: bool = False,
    ) -> Outcome:
        """Advance the text, then try to advance the tree.

        Raises InvalidChange (session untouched) when a change's offsets do
        not fit the current text. Otherwise the text always moves, and the
        outcome says what happened to the tree.
        """
        changes = list(changes)
        new_text, inverses = apply_text_changes(self.text, changes)  # validates bounds
        self.text = new_text
        intents = frozenset(intent_delete_nodes)
        for change, inverse in zip(changes, inverses):
            self.pending.append(
                PendingChange(change, inverse, intents, require_continue_input))

        script = compute_edit_script(self.tree, self.text)
        candidate = apply_edit_script(self.tree, script)
        violations = self._run_constraints(script, candidate, self.intent_union())
        # a degenerate parse may not replace a healthy tree, force or not;
        # an already-degenerate document keeps advancing as plain text
        blocked = script.degenerate and not is_degenerate(self.tree)

        if not blocked and (not violations or force_apply):
            self.tree = candidate
            if not script.is_empty:
                candidate._sealed = True  # past commits cannot be rolled back
            self.pending.clear()
            self.fragments.prune(self)
            if require_continue_input:
                # structural edit plus the user's next input form one group;
                # hold instances steady until that next call completes
                self._hold_tool_update = True
            else:
                self._hold_tool_update = False
                if self.tool_host is not None:
                    self.tool_host.update(self)
            outcome = Outcome.ACCEPTED if not violations else Outcome.FORCE_APPLIED
        else:
            if not script.is_empty:
                restored = rollback(candidate, script)
                assert restored is self.tree
            outcome = Outcome.FROZEN  # pending already carries the new changes

        self.last_outcome = outcome
        self.last_script = script
        self.last_violations = violations
        return outcome

    def revert_pending(self) -> Outcome:
        """Undo every pending change; text returns to the last valid state."""
        if not self.pending:
            raise NothingToRevert("session is not frozen")
        for p in reversed(self.pending):
            self.text = p.inverse.apply(self.text)
        assert self.text == self.tree.text, "pending inverses did not close the loop"
        self.pending.clear()
        self.last_outcome = Outcome.REVERTED
        self.last_script = None
        self.last_violations = []
        return Outcome.REVERTED

    def _run_constraints(self, script: EditScript, candidate: SyntaxTree,
                         intents: frozenset[int]) -> list[str]:
        violations: list[str] = []
        for c in self.constraints:  # registration order, every one evaluated
            if c.anchor_id is not None and c.anchor_id in intents:
                continue
            try:
                ok = bool(c.predicate(script, candidate, intents))
            except Exception:
                log.exception("constraint of %s raised; treating as violation", c.owner)
                ok = False
            if not ok:
                violations.append(c.owner)
        return violations
