"""Lexer and recursive-descent parser for ``.dtp`` policy sources.

Grammar::

    policy  := "policy" STRING "{" node "}"
    node    := ACTION | "if" expr block ("elif" expr block)* "else" block
    block   := "{" node "}"
    expr    := or
    or      := and ("or" and)*
    and     := not ("and" not)*
    not     := "not" not | compare
    compare := additive (CMP additive)?
    additive:= mult (("+" | "-") mult)*
    mult    := unary (("*" | "/") unary)*
    unary   := "-" unary | primary
    primary := NUMBER | "INF" | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"

Comments run from ``#`` to end of line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from treedrive.actions import ACTION_NAMES, Action
from treedrive.dsl.ast import (
    Arm,
    BinOp,
    BoolOp,
    Call,
    Compare,
    Decision,
    Expr,
    Inf,
    Leaf,
    Neg,
    Node,
    Not,
    Num,
    PolicyTree,
    Var,
)

KEYWORDS = frozenset({"policy", "if", "elif", "else", "and", "or", "not", "INF"})
COMPARISONS = frozenset({"<", "<=", ">", ">=", "==", "!="})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|==|!=|[<>+\-*/(){},])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "number" | "string" | "ident" | "action" | "keyword" | "op" | "eof"
    text: str
    line: int
    col: int

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        return repr(self.text)


class ParseError(Exception):
    """A lexical or syntactic error with a 1-based source position."""

    def __init__(self, message: str, line: int, col: int,
                 expected: frozenset[str] = frozenset(), source: str | None = None):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected
        self.source = source

    def render(self, filename: str = "<policy>") -> str:
        """Format as ``file:line:col: message`` followed by the source line and a caret."""
        out = [f"{filename}:{self.line}:{self.col}: error: {self.message}"]
        if self.expected:
            out.append("  expected one of: " + ", ".join(sorted(self.expected)))
        if self.source is not None:
            lines = self.source.split("\n")
            if 1 <= self.line <= len(lines):
                text = lines[self.line - 1].replace("\t", " ")
                out.append("  " + text)
                out.append("  " + " " * (self.col - 1) + "^")
        return "\n".join(out)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, i = 1, 0, 0
    n = len(source)
    while i < n:
        m = _TOKEN_RE.match(source, i)
        col = i - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {source[i]!r}", line, col, source=source)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            if text in KEYWORDS:
                kind = "keyword"
            elif text in ACTION_NAMES:
                kind = "action"
            tokens.append(Token(kind, text, line, col))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, col))
        i = m.end()
    tokens.append(Token("eof", "", line, n - line_start + 1))
    return tokens


def _unescape(literal: str) -> str:
    body = literal[1:-1]
    return re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t"}.get(m.group(1), m.group(1)), body)


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def _fail(self, expected: set[str], what: str | None = None):
        tok = self.tok
        msg = what or f"unexpected {tok.describe()}"
        raise ParseError(msg, tok.line, tok.col, frozenset(expected), self.source)

    def _at(self, text: str) -> bool:
        tok = self.tok
        return tok.kind in ("keyword", "op") and tok.text == text

    def _expect(self, text: str) -> Token:
        if not self._at(text):
            self._fail({repr(text)}, f"expected {text!r}, found {self.tok.describe()}")
        tok = self.tok
        self.i += 1
        return tok

    def policy(self) -> PolicyTree:
        self._expect("policy")
        if self.tok.kind != "string":
            self._fail({"STRING"}, f"expected policy name string, found {self.tok.describe()}")
        name = _unescape(self.tok.text)
        self.i += 1
        self._expect("{")
        root = self.node()
        self._expect("}")
        if self.tok.kind != "eof":
            self._fail({"end of input"})
        return PolicyTree(name, root)

    def node(self) -> Node:
        tok = self.tok
        if tok.kind == "action":
            self.i += 1
            return Leaf(Action[tok.text], pos=(tok.line, tok.col))
        if self._at("if"):
            return self.decision()
        self._fail({"ACTION", "'if'"}, f"expected an action or 'if', found {tok.describe()}")

    def decision(self) -> Decision:
        start = self._expect("if")
        arms = [self.arm(start)]
        while self._at("elif"):
            arms.append(self.arm(self._expect("elif")))
        if not self._at("else"):
            self._fail({"'elif'", "'else'"},
                       f"missing 'else' branch, found {self.tok.describe()}")
        self.i += 1
        else_child = self.block()
        return Decision(tuple(arms), else_child, pos=(start.line, start.col))

    def arm(self, kw: Token) -> Arm:
        cond = self.expr()
        return Arm(cond, self.block(), pos=(kw.line, kw.col))

    def block(self) -> Node:
        self._expect("{")
        node = self.node()
        self._expect("}")
        return node

    def expr(self) -> Expr:
        return self.or_expr()

    def or_expr(self) -> Expr:
        left = self.and_expr()
        while self._at("or"):
            tok = self.tok
            self.i += 1
            left = BoolOp("or", left, self.and_expr(), pos=(tok.line, tok.col))
        return left

    def and_expr(self) -> Expr:
        left = self.not_expr()
        while self._at("and"):
            tok = self.tok
            self.i += 1
            left = BoolOp("and", left, self.not_expr(), pos=(tok.line, tok.col))
        return left

    def not_expr(self) -> Expr:
        if self._at("not"):
            tok = self.tok
            self.i += 1
            return Not(self.not_expr(), pos=(tok.line, tok.col))
        return self.compare()

    def compare(self) -> Expr:
        left = self.additive()
        tok = self.tok
        if tok.kind == "op" and tok.text in COMPARISONS:
            self.i += 1
            left = Compare(tok.text, left, self.additive(), pos=(tok.line, tok.col))
            nxt = self.tok
            if nxt.kind == "op" and nxt.text in COMPARISONS:
                self._fail(set(), "chained comparisons are not allowed; use 'and'")
        return left

    def additive(self) -> Expr:
        left = self.mult()
        while self._at("+") or self._at("-"):
            tok = self.tok
            self.i += 1
            left = BinOp(tok.text, left, self.mult(), pos=(tok.line, tok.col))
        return left

    def mult(self) -> Expr:
        left = self.unary()
        while self._at("*") or self._at("/"):
            tok = self.tok
            self.i += 1
            left = BinOp(tok.text, left, self.unary(), pos=(tok.line, tok.col))
        return left

    def unary(self) -> Expr:
        if self._at("-"):
            tok = self.tok
            self.i += 1
            return Neg(self.unary(), pos=(tok.line, tok.col))
        return self.primary()

    def primary(self) -> Expr:
        tok = self.tok
        pos = (tok.line, tok.col)
        if tok.kind == "number":
            self.i += 1
            return Num(float(tok.text), pos=pos)
        if self._at("INF"):
            self.i += 1
            return Inf(pos=pos)
        if tok.kind == "ident":
            self.i += 1
            if self._at("("):
                self.i += 1
                args = [self.expr()]
                while self._at(","):
                    self.i += 1
                    args.append(self.expr())
                self._expect(")")
                return Call(tok.text, tuple(args), pos=pos)
            return Var(tok.text, pos=pos)
        if self._at("("):
            self.i += 1
            inner = self.expr()
            self._expect(")")
            return inner
        self._fail({"NUMBER", "'INF'", "IDENT", "'('", "'-'"},
                   f"expected an expression, found {tok.describe()}")


def parse(source: str) -> PolicyTree:
    """Parse policy source text; raise :class:`ParseError` on malformed input."""
    return _Parser(source).policy()
