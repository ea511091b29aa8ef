"""Recursive-descent parser for the concrete LTL syntax.

Grammar, loosest binding first::

    impl  := or ( '->' impl )?              right-associative
    or    := and ( '|' and )*               left-associative
    and   := until ( '&' until )*           left-associative
    until := unary ( ('U' | 'R') until )?   right-associative
    unary := ('!' | 'X' | 'F' | 'G') unary | primary
    primary := IDENT | 'true' | 'false' | '(' impl ')'

A run of operator letters such as ``GF`` or ``XXG`` is read as the
corresponding prefix operators, so ``GF p`` means ``G (F p)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .formula import (FALSE, TRUE, And, Atom, Finally, Formula, Globally,
                      Implies, Next, Not, Or, Release, Until)

_TOKEN_RE = re.compile(r"\s*(?:(->)|([!&|()])|([A-Za-z_][A-Za-z0-9_]*))")
_PREFIX_RUN = re.compile(r"[XFG]{2,}\Z")


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 1, col: int = 1):
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line = line
        self.col = col


@dataclass
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, line_start = 1, 0
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch == "\n":
            line += 1
            line_start = pos + 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unknown token {ch!r}", line, pos - line_start + 1)
        start = m.start(m.lastindex)
        word = m.group(m.lastindex)
        col = start - line_start + 1
        if _PREFIX_RUN.match(word):
            toks.extend(_Tok(c, line, col + i) for i, c in enumerate(word))
        else:
            toks.append(_Tok(word, line, col))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        # position reported for unexpected end of input
        lines = text.split("\n")
        self.eof = (len(lines), len(lines[-1]) + 1)

    def peek(self) -> str | None:
        return self.toks[self.i].text if self.i < len(self.toks) else None

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str) -> ParseError:
        if self.i < len(self.toks):
            t = self.toks[self.i]
            return ParseError(f"{msg}, found {t.text!r}", t.line, t.col)
        return ParseError(f"{msg}, found end of input", *self.eof)

    def expect(self, text: str) -> None:
        if self.peek() != text:
            raise self.error(f"expected {text!r}")
        self.i += 1

    def parse(self) -> Formula:
        if not self.toks:
            raise self.error("empty formula")
        f = self.impl()
        if self.i != len(self.toks):
            raise self.error("unexpected token")
        return f

    def impl(self) -> Formula:
        lhs = self.disj()
        if self.peek() == "->":
            self.i += 1
            return Implies(lhs, self.impl())
        return lhs

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.until()
        while self.peek() == "&":
            self.i += 1
            f = And(f, self.until())
        return f

    def until(self) -> Formula:
        lhs = self.unary()
        op = self.peek()
        if op in ("U", "R"):
            self.i += 1
            rhs = self.until()
            return Until(lhs, rhs) if op == "U" else Release(lhs, rhs)
        return lhs

    def unary(self) -> Formula:
        op = self.peek()
        if op == "!":
            self.i += 1
            return Not(self.unary())
        if op == "X":
            self.i += 1
            return Next(self.unary())
        if op == "F":
            self.i += 1
            return Finally(self.unary())
        if op == "G":
            self.i += 1
            return Globally(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        op = self.peek()
        if op is None:
            raise self.error("expected a formula")
        if op == "(":
            self.i += 1
            f = self.impl()
            self.expect(")")
            return f
        if op == "true":
            self.i += 1
            return TRUE
        if op == "false":
            self.i += 1
            return FALSE
        if op in ("U", "R", "&", "|", "->", ")"):
            raise self.error("expected a formula")
        tok = self.take()
        return Atom(tok.text)


def parse(text: str) -> Formula:
    """Parse one LTL formula. Raises :class:`ParseError` with line/column."""
    return _Parser(text).parse()
