"""Tiny demonstration grammar with three list styles.

    program              := (function_declaration | sum_declaration | s_expression)*
    function_declaration := type identifier "(" (type ",")* ")" ";"
    sum_declaration      := "sum" number ("+" number)* ";"
    s_expression         := "(" (s_expression | atom)* ")"

Parameter lists carry a separator after every element, sums separate between
elements, s-expression children sit directly adjacent.
"""

from __future__ import annotations

from .base import Cursor, Draft, Grammar, Token

PUNCT = ("(", ")", ",", ";", "+")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(text)
    newline = False
    while i < n:
        ch = text[i]
        if ch.isspace():
            if ch == "\n":
                newline = True
            i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "sum" if word == "sum" else "word"
        elif ch.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            kind = "number"
        elif ch in PUNCT:
            j = i + 1
            kind = ch
        else:
            j = i + 1
            while j < n and not (text[j].isspace() or text[j].isalnum()
                                 or text[j] == "_" or text[j] in PUNCT):
                j += 1
            kind = "error_token"
        tokens.append(Token(kind, i, j, text[i:j], newline))
        newline = False
        i = j
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.cur = Cursor(tokenize(text), len(text))

    def parse_program(self) -> Draft:
        root = Draft("program", named=True)
        while not self.cur.at_end:
            if self.cur.at("sum"):
                root.add(self.parse_sum())
            elif self.cur.at("word"):
                root.add(self.parse_function())
            elif self.cur.at("("):
                root.add(self.parse_sexpr())
            else:
                root.add(self.recover())
        return root

    def recover(self) -> Draft:
        first = self.cur.take()
        last = first
        while not self.cur.at_end and not self.cur.peek().newline_before:
            last = self.cur.take()
            if last.kind == ";":
                break
        return Draft.error_span(first.start, last.end)

    def parse_function(self) -> Draft:
        fn = Draft("function_declaration", named=True)
        fn.add(self.word_leaf("type"))
        fn.add(self.expect_word("identifier"))
        fn.add(self.expect_anon("("))
        while self.cur.at("word"):
            fn.add(self.word_leaf("type"))
            fn.add(self.expect_anon(","))
        fn.add(self.expect_anon(")"))
        fn.add(self.expect_anon(";"))
        return fn

    def parse_sum(self) -> Draft:
        node = Draft("sum_declaration", named=True).add(self.anon())
        node.add(self.expect_number())
        while self.cur.at("+"):
            node.add(self.anon())
            node.add(self.expect_number())
        node.add(self.expect_anon(";"))
        return node

    def parse_sexpr(self) -> Draft:
        node = Draft("s_expression", named=True).add(self.anon())
        while not self.cur.at_end:
            if self.cur.at("("):
                node.add(self.parse_sexpr())
            elif self.cur.at("word", "number"):
                node.add(self.word_leaf("atom"))
            else:
                break
        node.add(self.expect_anon(")"))
        return node

    def anon(self) -> Draft:
        return Draft.from_token(self.cur.take())

    def word_leaf(self, kind: str) -> Draft:
        return Draft.from_token(self.cur.take(), named=True, kind=kind)

    def expect_word(self, kind: str) -> Draft:
        if self.cur.at("word"):
            return self.word_leaf(kind)
        return Draft.missing(kind, self.cur.pos())

    def expect_number(self) -> Draft:
        if self.cur.at("number"):
            return Draft.from_token(self.cur.take(), named=True)
        return Draft.missing("number", self.cur.pos())

    def expect_anon(self, kind: str) -> Draft:
        if self.cur.at(kind):
            return self.anon()
        return Draft.missing(kind, self.cur.pos())


class ToyGrammar(Grammar):
    language_id = "toylist"
    aliases = ("toy",)
    root_kind = "program"
    identifier_kind = "identifier"
    expression_kinds = frozenset()
    kind_aliases = {"number": frozenset({"number"})}
    rules_resource = "toylist.rules.json"

    def _parse(self, text: str) -> tuple[Draft, list[Token]]:
        return _Parser(text).parse_program(), []
