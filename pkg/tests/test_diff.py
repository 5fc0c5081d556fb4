from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from stet.diff import (Attach, Detach, EditScript, Load, Remove, Update,
                       apply_edit_script, compute_edit_script, invert_script,
                       is_degenerate, rollback)
from stet.diff import _match_py
from stet.errors import InvalidRollback, StaleScript
from stet.languages import parse_document
from stet.tree import WS_KIND, structural_equal


def _step(tree, new_text):
    script = compute_edit_script(tree, new_text)
    return apply_edit_script(tree, script), script


def _ops_for(script, node_id):
    return [op for op in script.ops if getattr(op, "id", None) == node_id]


def test_operator_append_keeps_number_identity():
    # "2" grows into "2 + 3" one keystroke at a time; the original number
    # moves under the new binary node instead of being destroyed
    tree = parse_document("2", "javascript")
    num = next(n for n in tree.walk() if n.kind == "number")
    num_id = num.id

    text = "2"
    all_ops = []
    for ch in " + 3":
        text += ch
        tree, script = _step(tree, text)
        all_ops.extend(script.ops)
        survivor = tree.node(num_id)
        assert survivor is not None and survivor.text == "2"

    assert any(isinstance(op, Detach) and op.id == num_id for op in all_ops)
    assert any(isinstance(op, Attach) and op.id == num_id for op in all_ops)
    assert not any(isinstance(op, Remove) and op.id == num_id for op in all_ops)


def test_swapped_statements_keep_their_ids():
    src = "var a = 1\nvar b = 2\n"
    tree = parse_document(src, "javascript")
    decls = [n for n in tree.walk() if n.kind == "lexical_declaration"]
    ids = [d.id for d in decls]

    swapped = "var b = 2\nvar a = 1\n"
    tree2, script = _step(tree, swapped)
    by_name = {d.text.split()[1]: d.id
               for d in tree2.walk() if d.kind == "lexical_declaration"}
    assert by_name == {"a": ids[0], "b": ids[1]}
    assert script.load_count == 0  # pure reordering loads nothing


def test_digit_append_is_an_update():
    tree = parse_document("var a = 5\n", "javascript")
    num = next(n for n in tree.walk() if n.kind == "number")
    tree2, script = _step(tree, "var a = 57\n")
    updates = [op for op in script.ops if isinstance(op, Update)]
    assert updates == [Update(num.id, "57")]
    assert tree2.node(num.id).text == "57"


def test_applied_tree_equals_fresh_parse():
    src = "function f(a) { return a + 1 }\n"
    tree = parse_document(src, "javascript")
    new_text = "function f(a, b) { return a + b }\n"
    tree2, _ = _step(tree, new_text)
    fresh = parse_document(new_text, "javascript")
    assert tree2.text == new_text
    assert structural_equal(tree2.root, fresh.root, include_ranges=False)


def test_stale_script_refused():
    tree = parse_document("var a = 1\n", "javascript")
    script = compute_edit_script(tree, "var a = 12\n")
    tree2 = apply_edit_script(tree, script)
    with pytest.raises(StaleScript):
        apply_edit_script(tree2, script)


def test_degenerate_flag_on_garbage():
    tree = parse_document("var a = 1\n", "javascript")
    script = compute_edit_script(tree, "= = =")
    assert script.degenerate
    assert not compute_edit_script(tree, "var a = 2\n").degenerate
    assert is_degenerate(parse_document("%%%", "javascript"))
    # an unterminated string recovers as a string node, not a dead parse
    assert not is_degenerate(parse_document("\"oops", "javascript"))
    assert not is_degenerate(parse_document("var ok = 1\n", "javascript"))


def test_rollback_restores_the_exact_snapshot():
    tree = parse_document("var a = 1\n", "javascript")
    script = compute_edit_script(tree, "var ab = 1\n")
    tree2 = apply_edit_script(tree, script)
    assert rollback(tree2, script) is tree
    with pytest.raises(InvalidRollback):
        rollback(tree, script)  # no provenance on a fresh parse


def test_rollback_window_closes_on_seal():
    tree = parse_document("var a = 1\n", "javascript")
    script = compute_edit_script(tree, "var ab = 1\n")
    tree2 = apply_edit_script(tree, script)
    tree2._sealed = True
    with pytest.raises(InvalidRollback):
        rollback(tree2, script)


def test_invert_script_is_id_exact():
    src = "var a = 1\nvar b = [1, 2]\n"
    tree = parse_document(src, "javascript")
    script = compute_edit_script(tree, "var b = [1, 2, 3]\n")
    tree2 = apply_edit_script(tree, script)
    inverse = invert_script(tree, script)
    back = apply_edit_script(tree2, inverse)
    assert back.text == src
    assert structural_equal(back.root, tree.root, include_ids=True)


def test_script_text_roundtrip():
    tree = parse_document("var xs = [1]\n", "javascript")
    script = compute_edit_script(tree, "var xs = [1, 2]\n")
    assert script.ops  # a real script, not the empty fast path
    assert EditScript.from_text(script.to_text()) == script


def test_trivia_only_edit_stays_on_whitespace_leaves():
    tree = parse_document("f(1,\n   2)\n", "javascript")
    tree2, script = _step(tree, "f(1,\n       2)\n")
    assert not script.is_empty
    for op in script.ops:
        node = tree2.node(op.id)
        assert node is not None and node.kind == WS_KIND
    named_before = sorted(n.id for n in tree.walk() if n.named)
    named_after = sorted(n.id for n in tree2.walk() if n.named)
    assert named_before == named_after


def test_unchanged_text_yields_empty_script():
    tree = parse_document("var a = 1\n", "javascript")
    script = compute_edit_script(tree, tree.text)
    assert script.is_empty
    assert apply_edit_script(tree, script) is tree


_DOC = st.sampled_from([
    "var a = 1\nvar b = a + 2\n",
    "function f(x) { return [x, 1] }\n",
    "def f(x):\n    return (x, 1)\n",
])


@st.composite
def _single_edit(draw):
    text = draw(_DOC)
    bounds = list(range(len(text) + 1))  # fixtures are ASCII
    a = draw(st.sampled_from(bounds))
    b = draw(st.sampled_from([p for p in bounds if p >= a]))
    insert = draw(st.text(alphabet="abx1 (\n)\"", max_size=4))
    return text, a, b, insert


@settings(max_examples=120, deadline=None)
@given(_single_edit())
def test_random_single_edit_applies_to_fresh_parse(case):
    text, a, b, insert = case
    lang = "python" if text.startswith("def") else "javascript"
    tree = parse_document(text, lang)
    new_text = text[:a] + insert + text[b:]
    script = compute_edit_script(tree, new_text)
    tree2 = apply_edit_script(tree, script)
    fresh = parse_document(new_text, lang)
    assert tree2.text == new_text
    assert structural_equal(tree2.root, fresh.root, include_ranges=False)
    if not script.is_empty:
        assert rollback(tree2, script) is tree


def test_kernels_python_and_compiled_agree():
    from stet.diff import kernels
    if kernels.KERNEL_IMPL != "compiled":
        pytest.skip("compiled kernel not built in this environment")
    from stet.diff import _match_cy
    rng = random.Random(7)
    for _ in range(50):
        n = rng.randrange(1, 60)
        parents = [0] + [rng.randrange(0, i) for i in range(1, n)]
        codes = [rng.randrange(0, 6) for _ in range(n)]
        leaves = [bytes(rng.randrange(256) for _ in range(rng.randrange(0, 5)))
                  if rng.random() < 0.5 else None for _ in range(n)]
        leaves[0] = None
        assert (_match_cy.subtree_hashes(codes, parents, leaves)
                == _match_py.subtree_hashes(codes, parents, leaves))
        old = sorted(rng.sample(range(200), rng.randrange(1, 20)))
        new = sorted(rng.sample(range(200), rng.randrange(1, 20)))
        assert (list(_match_cy.assign_nearest(old, new))
                == list(_match_py.assign_nearest(old, new)))
