"""Recursive-descent parser for the temporal-logic surface syntax.

Surface grammar (lowest to highest precedence): <->, ->, or, and, then
not / always / eventually / until and parenthesized formulas. Predicates
are affine comparisons over signal names, e.g. ``gripper_diff*1000 > 9``.
Unicode aliases are accepted for the common operators.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    Always,
    And,
    AtomExpr,
    Eventually,
    Formula,
    Iff,
    Implies,
    Interval,
    Not,
    Or,
    Predicate,
    Until,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.col = col
        self.expected = expected
        detail = f"{message} at line {line}, column {col}"
        if expected:
            detail += " (expected " + " or ".join(expected) + ")"
        super().__init__(detail)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_KEYWORDS = {
    "always": "ALWAYS",
    "eventually": "EVENTUALLY",
    "until": "UNTIL",
    "not": "NOT",
    "and": "AND",
    "or": "OR",
}

_ALIASES = {
    "□": "ALWAYS",  # box
    "◇": "EVENTUALLY",  # diamond
    "¬": "NOT",
    "∧": "AND",
    "∨": "OR",
    "→": "ARROW",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(\.\d*)?([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<iff><->)
  | (?P<arrow>->)
  | (?P<cmp>>=|<=|>|<)
  | (?P<punct>[()\[\],+\-*])
  | (?P<alias>[□◇¬∧∨→])
    """,
    re.VERBOSE,
)

_PUNCT_KINDS = {
    "(": "LPAREN",
    ")": "RPAREN",
    "[": "LBRACKET",
    "]": "RBRACKET",
    ",": "COMMA",
    "+": "PLUS",
    "-": "MINUS",
    "*": "STAR",
}


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        text = m.group(0)
        if m.lastgroup == "ws":
            pass
        elif m.lastgroup == "number":
            tokens.append(Token("NUMBER", text, line, col))
        elif m.lastgroup == "name":
            tokens.append(Token(_KEYWORDS.get(text, "NAME"), text, line, col))
        elif m.lastgroup == "iff":
            tokens.append(Token("IFF", text, line, col))
        elif m.lastgroup == "arrow":
            tokens.append(Token("ARROW", text, line, col))
        elif m.lastgroup == "cmp":
            tokens.append(Token("CMP", text, line, col))
        elif m.lastgroup == "punct":
            tokens.append(Token(_PUNCT_KINDS[text], text, line, col))
        elif m.lastgroup == "alias":
            tokens.append(Token(_ALIASES[text], text, line, col))
        for ch in text:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            got = repr(tok.text) if tok.text else "end of input"
            raise ParseError(f"unexpected {got}", tok.line, tok.col, (what,))
        return self.advance()

    def error(self, message: str, expected: tuple[str, ...] = ()):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col, expected)

    # -- formula levels -----------------------------------------------------

    def formula(self) -> Formula:
        node = self.implies()
        while self.peek().kind == "IFF":
            self.advance()
            node = Iff(node, self.implies())
        return node

    def implies(self) -> Formula:
        node = self.or_()
        if self.peek().kind == "ARROW":
            self.advance()
            node = Implies(node, self.implies())  # right-associative
        return node

    def or_(self) -> Formula:
        node = self.and_()
        while self.peek().kind == "OR":
            self.advance()
            node = Or(node, self.and_())
        return node

    def and_(self) -> Formula:
        node = self.unary()
        while self.peek().kind == "AND":
            self.advance()
            node = And(node, self.unary())
        return node

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "NOT":
            self.advance()
            return Not(self.unary())
        if tok.kind in ("ALWAYS", "EVENTUALLY"):
            self.advance()
            interval = self.maybe_interval()
            child = self.unary()
            cls = Always if tok.kind == "ALWAYS" else Eventually
            return cls(child, interval)
        if tok.kind == "LPAREN":
            # Could be a parenthesized formula or a parenthesized arithmetic
            # expression inside a predicate; try the predicate first.
            mark = self.pos
            try:
                return self.predicate()
            except ParseError:
                self.pos = mark
            self.advance()  # LPAREN
            node = self.formula()
            self.expect("RPAREN", "')'")
            if self.peek().kind == "UNTIL":
                self.advance()
                interval = self.maybe_interval()
                self.expect("LPAREN", "'('")
                right = self.formula()
                self.expect("RPAREN", "')'")
                return Until(node, right, interval)
            return node
        return self.predicate()

    def maybe_interval(self) -> Interval:
        if self.peek().kind != "LBRACKET":
            return None
        open_tok = self.advance()
        a = float(self.expect("NUMBER", "number").text)
        self.expect("COMMA", "','")
        b = float(self.expect("NUMBER", "number").text)
        self.expect("RBRACKET", "']'")
        if not (0 <= a < b):
            raise ParseError(
                f"interval bounds must satisfy 0 <= a < b, got [{a}, {b}]",
                open_tok.line,
                open_tok.col,
            )
        return (a, b)

    # -- predicates ---------------------------------------------------------

    def predicate(self) -> Predicate:
        left = self.expr()
        tok = self.peek()
        if tok.kind != "CMP":
            self.error("expected comparison", (">", ">=", "<", "<="))
        self.advance()
        right = self.expr()
        if tok.text in (">", ">="):
            h = left - right
        else:
            h = right - left
        return Predicate(h)

    def expr(self) -> AtomExpr:
        node = self.term()
        while self.peek().kind in ("PLUS", "MINUS"):
            op = self.advance()
            rhs = self.term()
            node = node + rhs if op.kind == "PLUS" else node - rhs
        return node

    def term(self) -> AtomExpr:
        node = self.factor()
        while self.peek().kind == "STAR":
            star = self.advance()
            rhs = self.factor()
            if node.signal_names and rhs.signal_names:
                raise ParseError(
                    "only affine expressions are supported: at most one factor"
                    " of '*' may reference a signal",
                    star.line,
                    star.col,
                )
            node = rhs.scale(node.const) if rhs.signal_names else node.scale(rhs.const)
        return node

    def factor(self) -> AtomExpr:
        tok = self.peek()
        if tok.kind == "MINUS":
            self.advance()
            return self.factor().scale(-1.0)
        if tok.kind == "NUMBER":
            self.advance()
            return AtomExpr({}, float(tok.text))
        if tok.kind == "NAME":
            self.advance()
            return AtomExpr({tok.text: 1.0})
        if tok.kind == "LPAREN":
            self.advance()
            node = self.expr()
            self.expect("RPAREN", "')'")
            return node
        self.error("expected number, signal name or '('", ("number", "signal name", "'('"))
        raise AssertionError("unreachable")


def parse_formula(source: str) -> Formula:
    """Parse surface syntax into a Formula AST.

    Raises ParseError with line/column information on malformed input.
    """
    parser = _Parser(tokenize(source))
    node = parser.formula()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise ParseError(f"unexpected trailing {tok.text!r}", tok.line, tok.col)
    return node
