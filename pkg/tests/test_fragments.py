from __future__ import annotations

import pytest

from stet.errors import FragmentOrphaned, RecursionLimit
from stet.fragments import (FragmentStore, display_text, fragment_range,
                            reconstruct, restore_selection)
from stet.textchange import TextChange
from stet.transactions import Constraint, Outcome, Session

NESTED = "function f() {\n    return foo(1, {\n        bar: 2\n    })\n}\n"


def _node(session, kind, text=None):
    for n in session.tree.walk():
        if n.kind == kind and (text is None or n.text == text):
            return n
    raise AssertionError(f"no {kind} node")


def test_common_indent_collapses_to_one_tab():
    s = Session(NESTED, "javascript")
    frag = s.fragments.create((_node(s, "object").id,))
    view = display_text(frag, s)
    assert view.display_text == "{\n\t    bar: 2\n\t}"
    assert view.indent_prefix == "    "
    assert view.line_strips == (0, 4, 4)
    # every continuation line carries exactly one indent symbol
    for line in view.display_text.split("\n")[1:]:
        assert line.startswith("\t") and not line.startswith("\t\t")


def test_reconstruct_inverts_normalization():
    s = Session(NESTED, "javascript")
    data = s.text.encode("utf-8")
    for node_kind in ("object", "call_expression", "statement_block"):
        frag = s.fragments.create((_node(s, node_kind).id,))
        view = display_text(frag, s)
        assert reconstruct(view) == data[view.start:view.end].decode("utf-8")


def test_right_whitespace_is_pulled_in():
    s = Session("var x = 2 + 3  \nvar y = 1\n", "javascript")
    frag = s.fragments.create((_node(s, "number", "2").id,))
    view = display_text(frag, s)
    assert view.display_text == "2 "
    assert (view.leading_take, view.trailing_take) == (0, 1)


def test_single_leading_space_stays_out():
    s = Session("var x = 2 + 3  \nvar y = 1\n", "javascript")
    frag = s.fragments.create((_node(s, "number", "3").id,))
    view = display_text(frag, s)
    assert view.display_text == "3  "  # up to the newline, not past it
    assert (view.leading_take, view.trailing_take) == (0, 2)


def test_overrides_beat_the_heuristic():
    s = Session("var x = 2 + 3  \nvar y = 1\n", "javascript")
    forced = s.fragments.create((_node(s, "number", "3").id,),
                                include_left=True, include_right=False)
    view = display_text(forced, s)
    assert view.display_text == " 3"
    assert (view.leading_take, view.trailing_take) == (1, 0)


def test_multi_node_run_must_stay_siblings():
    s = Session("var a = 1\nvar b = 2\nvar c = 3\n", "javascript")
    decls = [n for n in s.tree.walk() if n.kind == "lexical_declaration"]
    frag = s.fragments.create((decls[0].id, decls[1].id))
    start, end = fragment_range(frag, s)
    assert s.text[start:end] == "var a = 1\nvar b = 2"


def test_range_maps_through_pending_changes():
    s = Session("var a = 1\n", "javascript")
    s.register_constraint(Constraint("t", lambda sc, tr, it: not tr.root.has_error()))
    num = _node(s, "number")
    frag = s.fragments.create((num.id,))
    assert s.apply_changes([TextChange(8, 8, '"')]) is Outcome.FROZEN
    start, end = fragment_range(frag, s)
    assert (start, end) == (9, 10)
    view = display_text(frag, s)
    assert view.display_text == "1"  # frozen view still shows the typed text


def test_multibyte_document_slices_cleanly():
    src = 'var s = "héé"\nvar t = 1\n'
    s = Session(src, "javascript")
    frag = s.fragments.create((_node(s, "string").id,))
    view = display_text(frag, s)
    assert view.display_text == '"héé"'
    assert reconstruct(view) == '"héé"'


def test_orphaned_fragment_raises_and_auto_prunes():
    s = Session("var a = [1, 2]\n", "javascript")
    one = _node(s, "number", "1")
    frag = s.fragments.create((one.id,))
    s.apply_changes([TextChange(8, 14, '"s"')])  # numbers leave the tree
    assert s.tree.node(one.id) is None
    with pytest.raises(FragmentOrphaned):
        fragment_range(frag, s)
    # the accepted commit already pruned the store
    assert s.fragments.get(frag.id) is None


def test_update_in_place_keeps_the_fragment():
    s = Session("var a = [1, 2]\n", "javascript")
    one = _node(s, "number", "1")
    frag = s.fragments.create((one.id,))
    s.apply_changes([TextChange(9, 10, "7")])
    assert display_text(frag, s).display_text == "7"


def test_root_fragment_is_permanent():
    s = Session("var a = 1\n", "javascript")
    root_id = s.fragments.root_id
    assert root_id is not None
    s.fragments.dispose(root_id)
    assert s.fragments.get(root_id) is not None


def test_dispose_for_instance():
    store = FragmentStore()
    kept = store.create((1,))
    owned = store.create((2,), parent_instance="tool:1")
    store.dispose_for_instance("tool:1")
    assert store.get(owned.id) is None
    assert store.get(kept.id) is not None


def test_depth_limit_enforced():
    store = FragmentStore()
    with pytest.raises(RecursionLimit):
        store.create((1,), depth=17)


def test_restore_selection_prefers_previous_then_smallest():
    s = Session(NESTED, "javascript")
    obj = _node(s, "object")
    call = _node(s, "call_expression")
    obj_frag = s.fragments.create((obj.id,))
    call_frag = s.fragments.create((call.id,))
    inside = (obj.start + 1, obj.start + 1)

    chosen, mapped, candidates = restore_selection(s, s.fragments,
                                                   obj_frag.id, inside)
    assert chosen == obj_frag.id and mapped == inside
    assert candidates[0] == obj_frag.id  # smallest covering first
    assert candidates[-1] == s.fragments.root_id

    # previous fragment no longer covers: smallest covering wins
    chosen2, _, candidates2 = restore_selection(s, s.fragments,
                                                obj_frag.id, (call.start, call.start))
    assert chosen2 == candidates2[0] != obj_frag.id

    # nothing but the root covers a selection outside every fragment
    chosen3, _, _ = restore_selection(s, s.fragments, 999, (0, 1))
    assert chosen3 == s.fragments.root_id


def test_restore_selection_maps_through_changes():
    s = Session("var a = 1\n", "javascript")
    chosen, mapped, _ = restore_selection(
        s, s.fragments, s.fragments.root_id, (8, 9),
        changes=[TextChange(0, 0, "xx")])
    assert mapped == (10, 11)
    assert chosen == s.fragments.root_id
