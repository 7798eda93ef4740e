"""Recursive-descent parser for the expression grammar.

    expr     := ["+"|"-"] term (("+"|"-") term)*
    term     := factor (("*"|"/") factor)*
    factor   := atom ("^" exponent)?
    atom     := NUMBER | IDENT | "(" expr ")" | "sqrt" "(" expr ")"
    exponent := NUMBER | "(" ["-"|"+"] NUMBER ["/" NUMBER] ")"

A single leading sign is accepted at the start of ``expr`` (and therefore
inside parentheses) so that printed negative expressions parse back.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .core import Expr, Symbol, add, const, mul, power


class ExprError(Exception):
    """Base class for expression-kernel errors."""


class ParseError(ExprError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.message = message
        self.position = position
        self.text = text
        super().__init__(f"{message} at column {position + 1}")


class UnknownSymbolError(ParseError):
    def __init__(self, name: str, position: int, text: str = ""):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", position, text)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num" | "ident" | "op" | "end"
    text: str
    pos: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(Token(kind, m.group(kind), start))
        pos = m.end()
    tokens.append(Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, table):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.table = table

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: Token = None):
        tok = tok or self.tok
        raise ParseError(message, tok.pos, self.text)

    def expect(self, text: str) -> Token:
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        what = repr(self.tok.text) if self.tok.kind != "end" else "end of input"
        self.error(f"expected {text!r} but found {what}")

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        negate = False
        if self.at("-") or self.at("+"):
            negate = self.advance().text == "-"
        terms = [self.term()]
        if negate:
            terms[0] = -terms[0]
        while self.at("+") or self.at("-"):
            op = self.advance().text
            t = self.term()
            terms.append(t if op == "+" else -t)
        return add(*terms)

    def term(self) -> Expr:
        factors = [self.factor()]
        while self.at("*") or self.at("/"):
            op = self.advance().text
            f = self.factor()
            factors.append(f if op == "*" else power(f, -1))
        return mul(*factors)

    def factor(self) -> Expr:
        base = self.atom()
        if self.at("^"):
            self.advance()
            return power(base, self.exponent())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return const(Fraction(tok.text))
        if tok.kind == "ident":
            self.advance()
            if tok.text == "sqrt" and self.at("("):
                self.advance()
                inner = self.expr()
                self.expect(")")
                return power(inner, Fraction(1, 2))
            if self.table is not None and tok.text not in self.table:
                raise UnknownSymbolError(tok.text, tok.pos, self.text)
            return Symbol(tok.text)
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if tok.kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected {tok.text!r}")

    def exponent(self) -> Fraction:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Fraction(tok.text)
        if not self.at("("):
            self.error("malformed exponent")
        self.advance()
        sign = 1
        if self.at("-") or self.at("+"):
            sign = -1 if self.advance().text == "-" else 1
        if self.tok.kind != "num":
            self.error("malformed rational exponent")
        num = Fraction(self.advance().text)
        if self.at("/"):
            self.advance()
            if self.tok.kind != "num":
                self.error("malformed rational exponent")
            den_tok = self.advance()
            den = Fraction(den_tok.text)
            if den == 0:
                self.error("malformed rational exponent (zero denominator)", den_tok)
            num = num / den
        if not self.at(")"):
            self.error("malformed rational exponent")
        self.advance()
        return sign * num


def parse(text: str, table=None) -> Expr:
    """Parse ``text`` into a normalized expression.

    ``table`` is any container of admissible identifier names (a
    ``SymbolTable`` works); ``None`` accepts every identifier.
    """
    return _Parser(text, table).parse()
