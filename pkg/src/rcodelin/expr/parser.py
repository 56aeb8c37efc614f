"""Recursive-descent parser for the expression grammar::

    expr   := term (("+"|"-") term)* ;
    term   := factor (("*"|"/") factor)* ;
    factor := ("-")? power ;
    power  := atom ("^" factor)? ;
    atom   := NUMBER | "i" | IDENT | IDENT "(" expr ("," expr)? ")" | "(" expr ")" ;

Identifiers followed by ``(`` that are not elementary functions become
uninterpreted function symbols; ``w__2(...)`` denotes the second derivative
of ``w``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ExprSyntaxError, UnknownSymbol
from .nodes import (
    IMAGINARY_UNIT,
    KNOWN_FUNCTIONS,
    Add,
    Call,
    Const,
    Div,
    Mul,
    Neg,
    Pow,
    Sub,
    UFunc,
    Var,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)

_DERIVATIVE_NAME = re.compile(r"^(?P<base>[A-Za-z_][A-Za-z0-9_]*?)__(?P<order>\d+)$")


@dataclass
class _Token:
    kind: str
    text: str
    offset: int  # bytes


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or not text[pos].isascii():
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", byte_pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), byte_pos))
        byte_pos += len(m.group().encode("utf-8"))
        pos = m.end()
    tokens.append(_Token("end", "", byte_pos))
    return tokens


class _Parser:
    def __init__(self, text: str, symbols):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.symbols = symbols

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at(self, *ops: str) -> bool:
        tok = self.current
        return tok.kind == "op" and tok.text in ops

    def expect(self, op: str):
        if not self.at(op):
            self.fail(f"expected {op!r}")
        self.advance()

    def fail(self, message: str):
        tok = self.current
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"{message}, found {found}", tok.offset)

    def parse(self):
        node = self.expr()
        if self.current.kind != "end":
            self.fail("unexpected token")
        return node

    def expr(self):
        node = self.term()
        while self.at("+", "-"):
            op = self.advance().text
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.at("*", "/"):
            op = self.advance().text
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self):
        if self.at("-"):
            self.advance()
            return Neg(self.power())
        return self.power()

    def power(self):
        base = self.atom()
        if self.at("^"):
            self.advance()
            return Pow(base, self.factor())
        return base

    def atom(self):
        tok = self.current
        if tok.kind == "number":
            self.advance()
            return Const(tok.text)
        if tok.kind == "ident":
            self.advance()
            if self.at("("):
                return self.call(tok)
            if tok.text == IMAGINARY_UNIT:
                return Const(0, 1)
            if tok.text in self.symbols:
                return Var(tok.text)
            raise UnknownSymbol(tok.text, tok.offset)
        if self.at("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.fail("expected a number, symbol or '('")

    def call(self, name_tok: _Token):
        self.expect("(")
        args = [self.expr()]
        if self.at(","):
            self.advance()
            args.append(self.expr())
        self.expect(")")
        name = name_tok.text
        if name in KNOWN_FUNCTIONS:
            if len(args) != KNOWN_FUNCTIONS[name]:
                raise ExprSyntaxError(
                    f"{name} takes {KNOWN_FUNCTIONS[name]} argument(s)", name_tok.offset
                )
            return Call(name, tuple(args))
        if name == IMAGINARY_UNIT or name in self.symbols:
            raise ExprSyntaxError(
                f"{name!r} is not a function (implicit multiplication is not supported)",
                name_tok.offset,
            )
        if len(args) != 1:
            raise ExprSyntaxError("uninterpreted functions take one argument", name_tok.offset)
        m = _DERIVATIVE_NAME.match(name)
        if m:
            return UFunc(m.group("base"), args[0], int(m.group("order")))
        return UFunc(name, args[0])


def check_symbols(symbols) -> frozenset:
    symbols = frozenset(symbols)
    if not symbols:
        raise ValueError("at least one symbol must be declared")
    for s in symbols:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", s):
            raise ValueError(f"invalid symbol name {s!r}")
        if s == IMAGINARY_UNIT or s in KNOWN_FUNCTIONS:
            raise ValueError(f"{s!r} is reserved and cannot be declared as a symbol")
    return symbols


def parse(text: str, symbols):
    """Parse ``text`` over the declared ``symbols``.

    Raises ExprSyntaxError on malformed input and UnknownSymbol for
    undeclared identifiers; both carry the byte offset of the culprit.
    """
    return _Parser(text, check_symbols(symbols)).parse()
