"""Indentation-sensitive grammar subset: defs, ifs, assignments, expressions.

The lexer groups physical lines into logical lines (bracket depth keeps a
statement open across newlines); the parser tracks blocks by comparing the
literal indent prefix of each logical line. Unsupported or malformed lines
degrade to opaque ERROR leaves, never lost text.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .base import Cursor, Draft, Grammar, Token

KEYWORDS = frozenset({
    "def", "return", "if", "else", "pass", "and", "or", "not", "in", "is",
    "None", "True", "False",
})
KEYWORD_KINDS = {"None": "none", "True": "true", "False": "false"}

PUNCT = ["**", "//", "==", "!=", "<=", ">=",
         "+", "-", "*", "/", "%", "(", ")", "[", "]", ",", ":", ".", "<", ">", "="]

BINARY_OPS = {
    "or": (4, "boolean_operator"), "and": (5, "boolean_operator"),
    "==": (7, "comparison_operator"), "!=": (7, "comparison_operator"),
    "<": (7, "comparison_operator"), ">": (7, "comparison_operator"),
    "<=": (7, "comparison_operator"), ">=": (7, "comparison_operator"),
    "in": (7, "comparison_operator"), "is": (7, "comparison_operator"),
    "+": (10, "binary_operator"), "-": (10, "binary_operator"),
    "*": (11, "binary_operator"), "/": (11, "binary_operator"),
    "%": (11, "binary_operator"), "//": (11, "binary_operator"),
    "**": (16, "binary_operator"),
}
RIGHT_ASSOC = frozenset({"**"})
UNARY_BP = 12

EXPR_START = frozenset({
    "identifier", "integer", "float", "string", "string_unterminated",
    "(", "[", "not", "-", "+", "None", "True", "False", "error_token",
})


@dataclass(slots=True)
class LogicalLine:
    indent: str  # literal leading whitespace of the first physical line
    tokens: list[Token] = field(default_factory=list)

    @property
    def end(self) -> int:
        return self.tokens[-1].end if self.tokens else 0


def tokenize(text: str) -> tuple[list[LogicalLine], list[Token]]:
    lines: list[LogicalLine] = []
    extras: list[Token] = []
    current: LogicalLine | None = None
    depth = 0
    i = 0
    n = len(text)
    while i < n:
        line_start = i
        eol = text.find("\n", i)
        eol = n if eol < 0 else eol
        j = i
        while j < eol and text[j] in " \t":
            j += 1
        if depth == 0:
            if j >= eol:
                i = eol + 1
                continue
            if text[j] == "#":
                extras.append(Token("comment", j, eol, text[j:eol]))
                i = eol + 1
                continue
            current = LogicalLine(text[line_start:j])
            lines.append(current)
        while j < eol:
            ch = text[j]
            if ch in " \t":
                j += 1
                continue
            if ch == "#":
                extras.append(Token("comment", j, eol, text[j:eol]))
                break
            tok = _scan_token(text, j, eol)
            assert current is not None
            current.tokens.append(tok)
            if tok.kind in ("(", "["):
                depth += 1
            elif tok.kind in (")", "]"):
                depth = max(0, depth - 1)
            j = tok.end
        if depth == 0:
            current = None
        i = eol + 1
    return [ln for ln in lines if ln.tokens], extras


def _scan_token(text: str, i: int, eol: int) -> Token:
    ch = text[i]
    if ch in "'\"":
        j = i + 1
        terminated = False
        while j < eol:
            if text[j] == "\\" and j + 1 < eol:
                j += 2
                continue
            if text[j] == ch:
                j += 1
                terminated = True
                break
            j += 1
        return Token("string" if terminated else "string_unterminated", i, j, text[i:j])
    if ch.isdigit():
        j = i + 1
        isfloat = False
        while j < eol and text[j].isdigit():
            j += 1
        if j < eol and text[j] == "." and j + 1 < eol and text[j + 1].isdigit():
            isfloat = True
            j += 1
            while j < eol and text[j].isdigit():
                j += 1
        return Token("float" if isfloat else "integer", i, j, text[i:j])
    if ch.isalpha() or ch == "_":
        j = i + 1
        while j < eol and (text[j].isalnum() or text[j] == "_"):
            j += 1
        word = text[i:j]
        return Token(word if word in KEYWORDS else "identifier", i, j, word)
    for p in PUNCT:
        if text.startswith(p, i):
            return Token(p, i, i + len(p), p)
    j = i + 1
    while j < eol and not (text[j].isspace() or text[j].isalnum() or text[j] in "_'\""
                           or any(text.startswith(p, j) for p in PUNCT)):
        j += 1
    return Token("error_token", i, j, text[i:j])


class _Parser:
    def __init__(self, text: str) -> None:
        self.lines, self.extras = tokenize(text)
        self.li = 0
        self.cur = Cursor([], 0)

    def peek_line(self) -> LogicalLine | None:
        return self.lines[self.li] if self.li < len(self.lines) else None

    def parse_module(self) -> Draft:
        root = Draft("module", named=True)
        for stmt in self.parse_statements(""):
            root.add(stmt)
        while (line := self.peek_line()) is not None:  # stray dedent levels
            self.li += 1
            root.add(Draft.error_span(line.tokens[0].start, line.end))
        return root

    def parse_statements(self, indent: str) -> list[Draft]:
        out: list[Draft] = []
        while (line := self.peek_line()) is not None:
            if line.indent == indent:
                out.append(self.parse_statement())
            elif line.indent.startswith(indent):
                self.li += 1  # unexpected deeper line
                out.append(Draft.error_span(line.tokens[0].start, line.end))
            else:
                break
        return out

    def parse_statement(self) -> Draft:
        line = self.lines[self.li]
        self.li += 1
        self.cur = Cursor(line.tokens, line.end)
        if self.cur.at("def"):
            stmt = self.parse_def(line)
        elif self.cur.at("if"):
            stmt = self.parse_if(line)
        elif self.cur.at("return"):
            stmt = Draft("return_statement", named=True).add(self.anon())
            if self.cur.at(*EXPR_START):
                stmt.add(self.parse_expression(0))
        elif self.cur.at("pass"):
            stmt = Draft("pass_statement", named=True).add(self.anon())
        else:
            expr = self.parse_expression(0)
            if self.cur.at("="):
                assign = Draft("assignment", named=True).add(expr, self.anon())
                assign.add(self.parse_expression(0))
                expr = assign
            stmt = Draft("expression_statement", named=True).add(expr)
        if not self.cur.at_end:  # leftovers on the line are recovery fodder
            first = self.cur.take()
            while not self.cur.at_end:
                self.cur.take()
            stmt.add(Draft.error_span(first.start, line.end))
        return stmt

    def parse_def(self, line: LogicalLine) -> Draft:
        fn = Draft("function_definition", named=True).add(self.anon())
        fn.add(self.expect_named("identifier"))
        params = Draft("parameters", named=True)
        params.add(self.expect_anon("("))
        while self.cur.at("identifier", ","):
            if self.cur.at("identifier"):
                params.add(self.named_leaf())
            if self.cur.at(","):
                params.add(self.anon())
        params.add(self.expect_anon(")"))
        fn.add(params)
        fn.add(self.expect_anon(":"))
        self.finish_line(fn, line)
        fn.add(self.parse_suite(line))
        return fn

    def parse_if(self, line: LogicalLine) -> Draft:
        node = Draft("if_statement", named=True).add(self.anon())
        node.add(self.parse_expression(0))
        node.add(self.expect_anon(":"))
        self.finish_line(node, line)
        node.add(self.parse_suite(line))
        nxt = self.peek_line()
        if nxt is not None and nxt.indent == line.indent and nxt.tokens[0].kind == "else":
            self.li += 1
            self.cur = Cursor(nxt.tokens, nxt.end)
            clause = Draft("else_clause", named=True).add(self.anon())
            clause.add(self.expect_anon(":"))
            self.finish_line(clause, nxt)
            clause.add(self.parse_suite(nxt))
            node.add(clause)
        return node

    def parse_suite(self, header: LogicalLine) -> Draft:
        nxt = self.peek_line()
        if nxt is None or not (nxt.indent.startswith(header.indent)
                               and len(nxt.indent) > len(header.indent)):
            return Draft.missing("block", header.end)
        block = Draft("block", named=True)
        for stmt in self.parse_statements(nxt.indent):
            block.add(stmt)
        if not block.children:
            return Draft.missing("block", header.end)
        return block

    def finish_line(self, node: Draft, line: LogicalLine) -> None:
        """Sweep tokens left between a `:` header and its suite into an ERROR."""
        if not self.cur.at_end:
            first = self.cur.take()
            while not self.cur.at_end:
                self.cur.take()
            node.add(Draft.error_span(first.start, line.end))

    # --- expressions ---

    def parse_expression(self, min_bp: int) -> Draft:
        left = self.parse_prefix()
        while True:
            tok = self.cur.peek()
            if tok is None:
                return left
            if tok.kind == "(":
                args = Draft("argument_list", named=True).add(self.anon())
                while not self.cur.at_end and not self.cur.at(")"):
                    before = self.cur.i
                    args.add(self.parse_expression(0))
                    if self.cur.at(","):
                        args.add(self.anon())
                    if self.cur.i == before:
                        break
                args.add(self.expect_anon(")"))
                left = Draft("call", named=True).add(left, args)
                continue
            if tok.kind == ".":
                node = Draft("attribute", named=True).add(left, self.anon())
                node.add(self.expect_named("identifier"))
                left = node
                continue
            if tok.kind == "[":
                node = Draft("subscript", named=True).add(left, self.anon())
                node.add(self.parse_expression(0))
                node.add(self.expect_anon("]"))
                left = node
                continue
            if tok.kind in BINARY_OPS:
                lbp, kind = BINARY_OPS[tok.kind]
                if lbp <= min_bp:
                    return left
                node = Draft(kind, named=True).add(left, self.anon())
                node.add(self.parse_expression(lbp - 1 if tok.kind in RIGHT_ASSOC else lbp))
                left = node
                continue
            return left

    def parse_prefix(self) -> Draft:
        tok = self.cur.peek()
        if tok is None:
            return Draft.missing("missing", self.cur.pos())
        if tok.kind in ("identifier", "integer", "float"):
            return self.named_leaf()
        if tok.kind in KEYWORD_KINDS:
            return Draft.from_token(self.cur.take(), named=True, kind=KEYWORD_KINDS[tok.kind])
        if tok.kind in ("string", "string_unterminated"):
            return self.parse_string()
        if tok.kind == "(":
            return self.parse_parens()
        if tok.kind == "[":
            return self.parse_list()
        if tok.kind == "not":
            node = Draft("not_operator", named=True).add(self.anon())
            node.add(self.parse_expression(6))
            return node
        if tok.kind in ("-", "+"):
            node = Draft("unary_operator", named=True).add(self.anon())
            node.add(self.parse_expression(UNARY_BP))
            return node
        if tok.kind == "error_token":
            t = self.cur.take()
            return Draft.error_span(t.start, t.end)
        return Draft.missing("missing", self.cur.pos())

    def parse_parens(self) -> Draft:
        children: list[Draft] = [self.anon()]
        elements = 0
        commas = 0
        while not self.cur.at_end and not self.cur.at(")"):
            before = self.cur.i
            children.append(self.parse_expression(0))
            elements += 1
            if self.cur.at(","):
                children.append(self.anon())
                commas += 1
            if self.cur.i == before:
                break
        children.append(self.expect_anon(")"))
        kind = "parenthesized_expression" if elements == 1 and commas == 0 else "tuple"
        node = Draft(kind, named=True)
        node.add(*children)
        return node

    def parse_list(self) -> Draft:
        node = Draft("list", named=True).add(self.anon())
        while not self.cur.at_end and not self.cur.at("]"):
            before = self.cur.i
            node.add(self.parse_expression(0))
            if self.cur.at(","):
                node.add(self.anon())
            if self.cur.i == before:
                break
        node.add(self.expect_anon("]"))
        return node

    def parse_string(self) -> Draft:
        tok = self.cur.take()
        terminated = tok.kind == "string"
        node = Draft("string", named=True, is_error=not terminated)
        quote = tok.text[0]
        node.add(self.synthetic(quote, tok.start, tok.start + 1))
        inner_end = tok.end - 1 if terminated else tok.end
        if inner_end > tok.start + 1:
            frag = self.synthetic(tok.text[1 : inner_end - tok.start], tok.start + 1, inner_end,
                                  kind="string_fragment")
            frag.named = True
            node.add(frag)
        if terminated:
            node.add(self.synthetic(quote, tok.end - 1, tok.end))
        return node

    # --- helpers ---

    def anon(self) -> Draft:
        return Draft.from_token(self.cur.take())

    def named_leaf(self) -> Draft:
        return Draft.from_token(self.cur.take(), named=True)

    def expect_anon(self, kind: str) -> Draft:
        if self.cur.at(kind):
            return self.anon()
        return Draft.missing(kind, self.cur.pos())

    def expect_named(self, kind: str) -> Draft:
        if self.cur.at(kind):
            return self.named_leaf()
        return Draft.missing(kind, self.cur.pos())

    def synthetic(self, text: str, start: int, end: int, *, kind: str | None = None) -> Draft:
        d = Draft(kind or text)
        d.token = Token(kind or text, start, end, text)
        return d


class PythonGrammar(Grammar):
    language_id = "python"
    aliases = ("py",)
    root_kind = "module"
    identifier_kind = "identifier"
    expression_kinds = frozenset({
        "identifier", "integer", "float", "string", "true", "false", "none",
        "list", "tuple", "call", "attribute", "subscript", "binary_operator",
        "boolean_operator", "comparison_operator", "not_operator",
        "unary_operator", "parenthesized_expression",
    })
    kind_aliases = {
        "string": frozenset({"string", "string_fragment"}),
        "number": frozenset({"integer", "float"}),
    }
    rules_resource = "python.rules.json"
    exceptions_resource = "python.exceptions.json"

    def _parse(self, text: str) -> tuple[Draft, list[Token]]:
        parser = _Parser(text)
        return parser.parse_module(), parser.extras
