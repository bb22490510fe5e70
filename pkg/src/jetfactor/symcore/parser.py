"""Pratt parser for the expression language.

Grammar: variables ``t``, ``y``, ``y1``..``y9`` (also ``y'``, ``y''``, ...),
binary ``+ - * / ^`` (``^`` right-associative), unary minus, functions
``exp ln sin cos sqrt atan abs`` and ``|x|`` for absolute value, numeric
literals (integers, decimals; ratios come out of ``/``).  Implicit
multiplication is rejected.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, List, NamedTuple

from .expr import (
    FUNCTIONS,
    MINUS_ONE,
    Add,
    Const,
    Expr,
    Fun,
    Mul,
    Neg,
    Pow,
    Var,
    T,
    Y,
    simplify,
    sym,
)


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.message = message
        self.offset = offset


class UnknownIdentifier(ParseError):
    pass


class OrderTooHigh(ParseError):
    pass


class Token(NamedTuple):
    kind: str  # num | name | op | end
    text: str
    offset: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d*)?|\.\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*'*)
  | (?P<op>[-+*/^()|,])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> List[Token]:
    out = []
    pos = 0
    data = text.encode("utf-8")
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", len(text[:pos].encode("utf-8")))
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, m.group(), len(text[:pos].encode("utf-8"))))
        pos = m.end()
    out.append(Token("end", "", len(data)))
    return out


_FUNC_NAMES = set(FUNCTIONS) | {"sqrt"}

# binding powers
_INFIX = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_PREFIX_MINUS = 25


class _Parser:
    def __init__(self, text: str, max_order: int, symbols: Iterable[str]):
        self.tokens = tokenize(text)
        self.i = 0
        self.max_order = max_order
        self.symbols = set(symbols)
        self.bars = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            found = tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", tok.offset)
        return tok

    def parse(self) -> Expr:
        e = self.expr(0)
        tok = self.peek()
        if tok.kind != "end":
            raise self._trailing(tok)
        return e

    def _trailing(self, tok: Token) -> ParseError:
        if tok.kind in ("num", "name") or tok.text == "(":
            return ParseError(
                f"unexpected {tok.text!r}: implicit multiplication is not allowed, write '*' explicitly",
                tok.offset,
            )
        if tok.text == "|":
            return ParseError("unmatched '|'", tok.offset)
        return ParseError(f"unexpected {tok.text!r}", tok.offset)

    def expr(self, rbp: int) -> Expr:
        left = self.prefix()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in _INFIX:
                lbp = _INFIX[tok.text]
                if lbp <= rbp:
                    break
                self.next()
                if tok.text == "^":
                    right = self.expr(lbp - 1)
                    left = Pow(left, right)
                else:
                    right = self.expr(lbp)
                    if tok.text == "+":
                        left = Add((left, right))
                    elif tok.text == "-":
                        left = Add((left, Neg(right)))
                    elif tok.text == "*":
                        left = Mul((left, right))
                    else:
                        left = Mul((left, Pow(right, MINUS_ONE)))
                continue
            if tok.kind in ("num", "name") or tok.text == "(" or (tok.text == "|" and self.bars == 0):
                raise self._trailing(tok)
            break
        return left

    def prefix(self) -> Expr:
        tok = self.next()
        if tok.kind == "num":
            return Const(Fraction(tok.text))
        if tok.kind == "name":
            return self.name(tok)
        if tok.text == "-":
            return Neg(self.expr(_PREFIX_MINUS))
        if tok.text == "+":
            return self.expr(_PREFIX_MINUS)
        if tok.text == "(":
            e = self.expr(0)
            self.expect(")")
            return e
        if tok.text == "|":
            self.bars += 1
            e = self.expr(0)
            self.bars -= 1
            self.expect("|")
            return Fun("abs", e)
        found = tok.text or "end of input"
        raise ParseError(f"unexpected {found!r}, expected an operand", tok.offset)

    def name(self, tok: Token) -> Expr:
        text = tok.text
        if text in _FUNC_NAMES:
            self.expect("(")
            saved, self.bars = self.bars, 0
            arg = self.expr(0)
            self.bars = saved
            self.expect(")")
            if text == "sqrt":
                return Pow(arg, Const(Fraction(1, 2)))
            return Fun(text, arg)
        if text == "t":
            return Var(T)
        m = re.fullmatch(r"y(\d*)('*)", text)
        if m and not (m.group(1) and m.group(2)):
            k = int(m.group(1)) if m.group(1) else len(m.group(2))
            if k > self.max_order:
                raise OrderTooHigh(f"derivative order {k} of {text!r} exceeds maximum {self.max_order}", tok.offset)
            return Var(Y(k))
        if text in self.symbols:
            return Var(sym(text))
        raise UnknownIdentifier(f"unknown identifier {text!r}", tok.offset)


def parse_raw(text: str, max_order: int = 9, symbols: Iterable[str] = ()) -> Expr:
    """Parse without canonicalising."""
    return _Parser(text, max_order, symbols).parse()


def parse_expr(text: str, max_order: int = 9, symbols: Iterable[str] = ()) -> Expr:
    """Parse ``text`` into a canonical expression."""
    return simplify(parse_raw(text, max_order, symbols))
