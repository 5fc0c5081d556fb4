from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from stet.errors import UnknownLanguage
from stet.languages import parse_document
from stet.tree import node_at

LANGUAGES = ("javascript", "python", "toy")

FIXTURES = {
    "javascript": [
        "",
        "var a = 5\n",
        "var a = 5\nb",
        "2 +",
        'var y = ["__watch", list.map(n => n ** 3)][1]\n',
        "var q = sql`SELECT * FROM t`\n",
        "function f(a, b) { return a + b }\n",
        "// leading comment\nvar x = { a: 1, b: [2, 3] }\n",
        '(e => (f(), e))(1)\n',
    ],
    "python": [
        "",
        "x = 1\n",
        "def f(a, b):\n    return a + b\n",
        "t = (1, 2)\nu = (1,)\nv = ()\n",
        "if x:\n    y = [1, 2]\nelse:\n    y = []\n",
        "x = (2 +",
    ],
    "toy": [
        "",
        "void main(int, char,);\n",
        "int f();\n",
        "(a(b c)(d))\n",
    ],
}


def _leaf_concat(tree) -> str:
    return "".join(n.text for n in tree.root.walk() if n.is_leaf)


def test_unknown_language_is_rejected():
    with pytest.raises(UnknownLanguage):
        parse_document("x", "cobol")


def test_empty_input_gives_bare_root():
    for lang in LANGUAGES:
        tree = parse_document("", lang)
        assert tree.root.children == ()
        assert (tree.root.start, tree.root.end) == (0, 0)


def test_two_top_level_statements():
    tree = parse_document("var a = 5\nb", "javascript")
    assert len(tree.root.structural_children()) == 2


def test_incomplete_expression_keeps_error_marker():
    tree = parse_document("2 +", "javascript")
    assert any(n.is_error or n.is_missing for n in tree.root.walk())
    assert _leaf_concat(tree) == "2 +"


def test_roundtrip_on_fixtures():
    for lang, docs in FIXTURES.items():
        for doc in docs:
            tree = parse_document(doc, lang)
            assert _leaf_concat(tree) == doc, (lang, doc)


def test_containment_and_sibling_order():
    for lang, docs in FIXTURES.items():
        for doc in docs:
            tree = parse_document(doc, lang)
            for node in tree.root.walk():
                prev_end = node.start
                for child in node.children:
                    assert node.start <= child.start <= child.end <= node.end
                    assert child.start >= prev_end  # disjoint, sorted
                    prev_end = child.end


def test_ids_are_unique_and_fresh():
    tree = parse_document("var a = 5\n", "javascript")
    ids = [n.id for n in tree.root.walk()]
    assert len(ids) == len(set(ids))
    again = parse_document("var a = 5\n", "javascript")
    assert {n.id for n in again.root.walk()}  # fresh allocation per document


def test_node_at_picks_smallest_container():
    tree = parse_document("2 + 3", "javascript")
    two = node_at(tree, 0, 1)
    assert two.kind == "number" and two.text == "2"
    expr = node_at(tree, 0, 3)  # spans "2 +"
    assert expr.kind == "binary_expression"
    # zero-width boundary query resolves to the node starting there
    assert node_at(tree, 0, 0).text == "2"


def test_offsets_are_utf8_bytes():
    doc = 'var s = "\u00e9\u00e9"\n'
    tree = parse_document(doc, "javascript")
    string = node_at(tree, 8, 14)
    assert string.kind == "string"
    assert (string.start, string.end) == (8, 14)  # two 2-byte characters


def test_python_indentation_nests_blocks():
    tree = parse_document("def f():\n    if x:\n        y = 1\n", "python")
    kinds = [n.kind for n in tree.root.walk() if n.named]
    assert "function_definition" in kinds and "if_statement" in kinds


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(LANGUAGES),
       st.text(alphabet=st.sampled_from('abc123 =+*(){}[],.:"\n\t'), max_size=60))
def test_roundtrip_over_random_text(lang, doc):
    # error recovery must never drop bytes, whatever the input
    tree = parse_document(doc, lang)
    assert _leaf_concat(tree) == doc


@settings(max_examples=40, deadline=None)
@given(st.text(alphabet=st.sampled_from("ab1 =+\n\"`$[]"), max_size=40))
def test_javascript_strings_and_templates_roundtrip(doc):
    tree = parse_document(doc, "javascript")
    assert _leaf_concat(tree) == doc
