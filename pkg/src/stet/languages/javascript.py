"""C-like grammar: declarations, functions, arrows, literals, operators.

Statement boundaries follow automatic-semicolon style: an expression keeps
absorbing operators and call/member suffixes across newlines for as long as
the next token can continue it, so `var a = 5` followed by a line holding `b`
is two statements, and typing `+` at the end of the first line merges them.
"""

from __future__ import annotations

from ..tree import ERROR_KIND
from .base import Cursor, Draft, Grammar, Token

KEYWORDS = frozenset({
    "var", "let", "const", "function", "return", "if", "else", "typeof",
    "true", "false", "null",
})

PUNCT = [
    "===", "!==", "**", "=>", "==", "!=", "<=", ">=", "&&", "||",
    "+", "-", "*", "/", "%", "<", ">", "=", "!",
    "(", ")", "[", "]", "{", "}", ",", ";", ".", ":", "?",
]

# operator -> (binding power, right associative)
BINARY_OPS = {
    "=": (2, True),
    "||": (4, False), "&&": (5, False),
    "==": (8, False), "!=": (8, False), "===": (8, False), "!==": (8, False),
    "<": (9, False), ">": (9, False), "<=": (9, False), ">=": (9, False),
    "+": (10, False), "-": (10, False),
    "*": (11, False), "/": (11, False), "%": (11, False),
    "**": (13, True),
}
UNARY_OPS = frozenset({"!", "-", "+", "typeof"})
UNARY_BP = 14

EXPR_START = frozenset({
    "number", "identifier", "string", "string_unterminated",
    "template_string", "template_unterminated",
    "(", "[", "{", "true", "false", "null", "error_token",
}) | UNARY_OPS

STMT_KEYWORDS = frozenset({"var", "let", "const", "function", "return", "if"})


def tokenize(text: str) -> tuple[list[Token], list[Token]]:
    """Returns (syntax tokens, comment tokens). Whitespace is implicit."""
    tokens: list[Token] = []
    extras: list[Token] = []
    i = 0
    n = len(text)
    newline = False

    def push(kind: str, start: int, end: int) -> None:
        nonlocal newline
        tokens.append(Token(kind, start, end, text[start:end], newline))
        newline = False

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            if ch == "\n":
                newline = True
            i += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            j = n if j < 0 else j
            extras.append(Token("comment", i, j, text[i:j]))
            i = j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            j = n if j < 0 else j + 2
            extras.append(Token("comment", i, j, text[i:j]))
            i = j
            continue
        if ch in "'\"":
            j = i + 1
            terminated = False
            while j < n and text[j] != "\n":
                if text[j] == "\\" and j + 1 < n:
                    j += 2
                    continue
                if text[j] == ch:
                    j += 1
                    terminated = True
                    break
                j += 1
            push("string" if terminated else "string_unterminated", i, j)
            i = j
            continue
        if ch == "`":
            j = i + 1
            terminated = False
            while j < n:
                if text[j] == "\\" and j + 1 < n:
                    j += 2
                    continue
                if text[j] == "`":
                    j += 1
                    terminated = True
                    break
                j += 1
            push("template_string" if terminated else "template_unterminated", i, j)
            i = j
            continue
        if ch.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k + 1
                    while j < n and text[j].isdigit():
                        j += 1
            push("number", i, j)
            i = j
            continue
        if ch.isalpha() or ch in "_$":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] in "_$"):
                j += 1
            word = text[i:j]
            push(word if word in KEYWORDS else "identifier", i, j)
            i = j
            continue
        for p in PUNCT:
            if text.startswith(p, i):
                push(p, i, i + len(p))
                i += len(p)
                break
        else:
            j = i + 1
            while j < n and not (text[j].isspace() or text[j].isalnum() or text[j] in "_$'\"`"
                                 or any(text.startswith(p, j) for p in PUNCT)):
                j += 1
            push("error_token", i, j)
            i = j
    return tokens, extras


class _Parser:
    def __init__(self, text: str) -> None:
        tokens, self.extras = tokenize(text)
        self.cur = Cursor(tokens, len(text))

    def parse_program(self) -> Draft:
        root = Draft("program", named=True)
        while not self.cur.at_end:
            before = self.cur.i
            root.add(self.parse_statement())
            if self.cur.i == before:
                root.add(self.recover())
        return root

    # --- statements ---

    def parse_statement(self) -> Draft | None:
        if self.cur.at("var", "let", "const"):
            return self.parse_declaration()
        if self.cur.at("function"):
            return self.parse_function()
        if self.cur.at("return"):
            return self.parse_return()
        if self.cur.at("if"):
            return self.parse_if()
        if self.cur.at("{"):
            return self.parse_block()
        if self.cur.at(";"):
            return Draft("empty_statement", named=True).add(self.anon())
        if self.cur.at(*EXPR_START):
            stmt = Draft("expression_statement", named=True)
            stmt.add(self.parse_expression(0))
            if self.cur.at(";"):
                stmt.add(self.anon())
            return stmt
        return None

    def recover(self) -> Draft:
        """Swallow tokens until a plausible statement boundary."""
        first = self.cur.take()
        last = first
        while not self.cur.at_end:
            tok = self.cur.peek()
            if tok.newline_before or tok.kind in STMT_KEYWORDS or tok.kind == "}":
                break
            last = self.cur.take()
            if last.kind == ";":
                break
        return Draft.error_span(first.start, last.end)

    def parse_declaration(self) -> Draft:
        decl = Draft("lexical_declaration", named=True).add(self.anon())
        while True:
            decl.add(self.parse_declarator())
            if self.cur.at(","):
                decl.add(self.anon())
                continue
            break
        if self.cur.at(";"):
            decl.add(self.anon())
        return decl

    def parse_declarator(self) -> Draft:
        d = Draft("variable_declarator", named=True)
        d.add(self.expect_named("identifier"))
        if self.cur.at("="):
            d.add(self.anon())
            d.add(self.parse_expression(0))
        return d

    def parse_function(self) -> Draft:
        fn = Draft("function_declaration", named=True).add(self.anon())
        if self.cur.at("identifier"):
            fn.add(self.named_leaf())
        fn.add(self.parse_params())
        fn.add(self.parse_block())
        return fn

    def parse_params(self) -> Draft:
        params = Draft("formal_parameters", named=True)
        if not self.cur.at("("):
            params.add(Draft.missing("(", self.cur.pos()))
            return params
        params.add(self.anon())
        while self.cur.at("identifier", ","):
            if self.cur.at("identifier"):
                params.add(self.named_leaf())
            if self.cur.at(","):
                params.add(self.anon())
        params.add(self.expect_anon(")"))
        return params

    def parse_return(self) -> Draft:
        ret = Draft("return_statement", named=True).add(self.anon())
        tok = self.cur.peek()
        if tok is not None and not tok.newline_before and tok.kind in EXPR_START:
            ret.add(self.parse_expression(0))
        if self.cur.at(";"):
            ret.add(self.anon())
        return ret

    def parse_if(self) -> Draft:
        node = Draft("if_statement", named=True).add(self.anon())
        cond = Draft("parenthesized_expression", named=True)
        cond.add(self.expect_anon("("))
        cond.add(self.parse_expression(0))
        cond.add(self.expect_anon(")"))
        node.add(cond)
        node.add(self.parse_statement() or Draft.missing("statement", self.cur.pos()))
        if self.cur.at("else"):
            alt = Draft("else_clause", named=True).add(self.anon())
            alt.add(self.parse_statement() or Draft.missing("statement", self.cur.pos()))
            node.add(alt)
        return node

    def parse_block(self) -> Draft:
        block = Draft("statement_block", named=True).add(self.expect_anon("{"))
        while not self.cur.at_end and not self.cur.at("}"):
            before = self.cur.i
            block.add(self.parse_statement())
            if self.cur.i == before:
                block.add(self.recover())
        block.add(self.expect_anon("}"))
        return block

    # --- expressions ---

    def parse_expression(self, min_bp: int) -> Draft:
        left = self.parse_prefix()
        while True:
            tok = self.cur.peek()
            if tok is None:
                return left
            if tok.kind == "(":
                left = Draft("call_expression", named=True).add(left, self.parse_arguments())
                continue
            if tok.kind == ".":
                node = Draft("member_expression", named=True).add(left, self.anon())
                node.add(self.expect_named("identifier", as_kind="property_identifier"))
                left = node
                continue
            if tok.kind == "[":
                node = Draft("subscript_expression", named=True).add(left, self.anon())
                node.add(self.parse_expression(0))
                node.add(self.expect_anon("]"))
                left = node
                continue
            if tok.kind in ("template_string", "template_unterminated"):
                left = Draft("call_expression", named=True).add(left, self.parse_string())
                continue
            if tok.kind in BINARY_OPS:
                lbp, right_assoc = BINARY_OPS[tok.kind]
                if lbp <= min_bp:
                    return left
                kind = "assignment_expression" if tok.kind == "=" else "binary_expression"
                node = Draft(kind, named=True).add(left, self.anon())
                node.add(self.parse_expression(lbp - 1 if right_assoc else lbp))
                left = node
                continue
            return left

    def parse_prefix(self) -> Draft:
        tok = self.cur.peek()
        if tok is None:
            return Draft.missing("missing", self.cur.pos())
        if tok.kind == "number":
            return self.named_leaf()
        if tok.kind == "identifier":
            if (nxt := self.cur.peek(1)) is not None and nxt.kind == "=>":
                return self.parse_arrow(self.named_leaf())
            return self.named_leaf()
        if tok.kind in ("true", "false", "null"):
            return Draft.from_token(self.cur.take(), named=True)
        if tok.kind in ("string", "string_unterminated",
                        "template_string", "template_unterminated"):
            return self.parse_string()
        if tok.kind == "(":
            arrow = self.try_arrow_params()
            if arrow is not None:
                return arrow
            node = Draft("parenthesized_expression", named=True).add(self.anon())
            node.add(self.parse_sequence())
            node.add(self.expect_anon(")"))
            return node
        if tok.kind == "[":
            return self.parse_array()
        if tok.kind == "{":
            return self.parse_object()
        if tok.kind in UNARY_OPS:
            node = Draft("unary_expression", named=True).add(self.anon())
            node.add(self.parse_expression(UNARY_BP))
            return node
        if tok.kind == "error_token":
            t = self.cur.take()
            return Draft.error_span(t.start, t.end)
        return Draft.missing("missing", self.cur.pos())

    def parse_sequence(self) -> Draft:
        """Comma operator, allowed only inside parentheses."""
        left = self.parse_expression(0)
        if not self.cur.at(","):
            return left
        node = Draft("sequence_expression", named=True).add(left, self.anon())
        node.add(self.parse_sequence())
        return node

    def try_arrow_params(self) -> Draft | None:
        """Reparse `( ident, ... ) =>` as an arrow; None if it is not one."""
        mark = self.cur.save()
        depth = 0
        i = mark
        while i < len(self.cur.tokens):
            kind = self.cur.tokens[i].kind
            if kind == "(":
                depth += 1
            elif kind == ")":
                depth -= 1
                if depth == 0:
                    break
            elif kind not in ("identifier", ","):
                return None
            i += 1
        else:
            return None
        if i + 1 >= len(self.cur.tokens) or self.cur.tokens[i + 1].kind != "=>":
            return None
        params = Draft("formal_parameters", named=True).add(self.anon())
        while self.cur.at("identifier", ","):
            if self.cur.at("identifier"):
                params.add(self.named_leaf())
            if self.cur.at(","):
                params.add(self.anon())
        params.add(self.expect_anon(")"))
        return self.parse_arrow(params)

    def parse_arrow(self, params: Draft) -> Draft:
        node = Draft("arrow_function", named=True).add(params)
        node.add(self.expect_anon("=>"))
        if self.cur.at("{"):
            node.add(self.parse_block())
        else:
            node.add(self.parse_expression(0))
        return node

    def parse_arguments(self) -> Draft:
        args = Draft("arguments", named=True).add(self.anon())
        while not self.cur.at_end and not self.cur.at(")"):
            before = self.cur.i
            args.add(self.parse_expression(0))
            if self.cur.at(","):
                args.add(self.anon())
            if self.cur.i == before:
                break
        args.add(self.expect_anon(")"))
        return args

    def parse_array(self) -> Draft:
        arr = Draft("array", named=True).add(self.anon())
        while not self.cur.at_end and not self.cur.at("]"):
            before = self.cur.i
            arr.add(self.parse_expression(0))
            if self.cur.at(","):
                arr.add(self.anon())
            if self.cur.i == before:
                break
        arr.add(self.expect_anon("]"))
        return arr

    def parse_object(self) -> Draft:
        obj = Draft("object", named=True).add(self.anon())
        while not self.cur.at_end and not self.cur.at("}"):
            before = self.cur.i
            obj.add(self.parse_pair())
            if self.cur.at(","):
                obj.add(self.anon())
            if self.cur.i == before:
                break
        obj.add(self.expect_anon("}"))
        return obj

    def parse_pair(self) -> Draft:
        if self.cur.at("identifier") and (
                (nxt := self.cur.peek(1)) is None or nxt.kind != ":"):
            # { id: 7, e } style shorthand member
            return self.expect_named(
                "identifier", as_kind="shorthand_property_identifier")
        pair = Draft("pair", named=True)
        if self.cur.at("identifier"):
            pair.add(self.expect_named("identifier", as_kind="property_identifier"))
        elif self.cur.at("string", "number"):
            pair.add(self.parse_string() if self.cur.at("string") else self.named_leaf())
        else:
            pair.add(Draft.missing("property_identifier", self.cur.pos()))
        pair.add(self.expect_anon(":"))
        pair.add(self.parse_expression(0))
        return pair

    def parse_string(self) -> Draft:
        tok = self.cur.take()
        template = tok.kind.startswith("template")
        terminated = tok.kind in ("string", "template_string")
        kind = "template_string" if template else "string"
        node = Draft(kind, named=True, is_error=not terminated)
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

    def expect_named(self, kind: str, *, as_kind: str | None = None) -> Draft:
        if self.cur.at(kind):
            return Draft.from_token(self.cur.take(), named=True, kind=as_kind)
        return Draft.missing(as_kind or kind, self.cur.pos())

    def synthetic(self, text: str, start: int, end: int, *, kind: str | None = None) -> Draft:
        d = Draft(kind or text)
        d.token = Token(kind or text, start, end, text)
        return d


WATCH_WRAPPER = (
    '(e => (fetch("{url}", {{ method: "POST", body: JSON.stringify({{ id: {id}, e }}), '
    'headers: {{ "Content-Type": "application/json" }} }}), e))({expr})'
)


class JavaScriptGrammar(Grammar):
    language_id = "javascript"
    aliases = ("js",)
    root_kind = "program"
    identifier_kind = "identifier"
    expression_kinds = frozenset({
        "number", "identifier", "string", "template_string", "true", "false",
        "null", "array", "object", "binary_expression", "unary_expression",
        "assignment_expression", "parenthesized_expression", "call_expression",
        "member_expression", "subscript_expression", "arrow_function",
        "sequence_expression",
    })
    kind_aliases = {
        "string": frozenset({"string", "template_string", "string_fragment"}),
        "number": frozenset({"number"}),
    }
    rules_resource = "javascript.rules.json"
    exceptions_resource = "javascript.exceptions.json"

    def _parse(self, text: str) -> tuple[Draft, list[Token]]:
        parser = _Parser(text)
        return parser.parse_program(), parser.extras

    def rewrite_watch(self, source: str, node_id: int, url: str) -> str:
        return WATCH_WRAPPER.format(url=url, id=node_id, expr=source)

    def is_watch_wrapped(self, source: str) -> bool:
        return source.startswith('(e => (fetch("')
