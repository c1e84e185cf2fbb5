"""Lexer and token-cursor helpers shared by the text configuration dialects.

All configuration files (campaign specs, evaluator files) use the same
lexical conventions: whitespace-insensitive, ``#`` line comments, double
quoted strings, and ``key = value;`` style statements.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NoReturn


class SpecError(Exception):
    """Diagnostic for malformed configuration text (1-based line/column)."""

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self) -> str:
        if self.line:
            return f"line {self.line}, column {self.column}: {self.message}"
        return self.message


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "number" | "string" | "punct" | "eof"
    text: str
    value: int | float | str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<string>"[^"\n]*")
    | (?P<punct>->|[{}\[\](),;=:])
    """,
    re.VERBOSE,
)

_INT_RE = re.compile(r"[+-]?\d+")


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens, raising :class:`SpecError` on bad input."""
    tokens: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise SpecError(f"unexpected character {text[pos]!r}", line, col)
        lexeme = match.group(0)
        kind = match.lastgroup
        if kind == "number":
            value: int | float | str
            if _INT_RE.fullmatch(lexeme):
                value = int(lexeme)
            else:
                value = float(lexeme)
            tokens.append(Token("number", lexeme, value, line, col))
        elif kind == "ident":
            tokens.append(Token("ident", lexeme, lexeme, line, col))
        elif kind == "string":
            tokens.append(Token("string", lexeme, lexeme[1:-1], line, col))
        elif kind == "punct":
            tokens.append(Token("punct", lexeme, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = match.end()
    tokens.append(Token("eof", "", "", line, col))
    return tokens


def _describe(token: Token) -> str:
    if token.kind == "eof":
        return "end of input"
    return repr(token.text)


class Cursor:
    """Sequential reader over a token stream with expectation helpers."""

    def __init__(self, tokens: list[Token]) -> None:
        self._tokens = tokens
        self._pos = 0

    def peek(self) -> Token:
        return self._tokens[self._pos]

    def advance(self) -> Token:
        token = self._tokens[self._pos]
        if token.kind != "eof":
            self._pos += 1
        return token

    def at_end(self) -> bool:
        return self.peek().kind == "eof"

    def at_punct(self, text: str) -> bool:
        token = self.peek()
        return token.kind == "punct" and token.text == text

    def at_ident(self, *names: str) -> bool:
        token = self.peek()
        return token.kind == "ident" and (not names or token.value in names)

    def fail(self, message: str, token: Token | None = None) -> NoReturn:
        token = token or self.peek()
        raise SpecError(message, token.line, token.column)

    def take_punct(self, text: str) -> Token:
        if not self.at_punct(text):
            self.fail(f"expected {text!r} (found {_describe(self.peek())})")
        return self.advance()

    def take_ident(self, what: str = "identifier") -> Token:
        if self.peek().kind != "ident":
            self.fail(f"expected {what} (found {_describe(self.peek())})")
        return self.advance()

    def take_keyword(self, *names: str) -> Token:
        if not self.at_ident(*names):
            expected = " or ".join(repr(n) for n in names)
            self.fail(f"expected {expected} (found {_describe(self.peek())})")
        return self.advance()

    def take_number(self, what: str = "number") -> Token:
        if self.peek().kind != "number":
            self.fail(f"expected {what} (found {_describe(self.peek())})")
        return self.advance()

    def take_string(self, what: str = "quoted string") -> Token:
        if self.peek().kind != "string":
            self.fail(f"expected {what} (found {_describe(self.peek())})")
        return self.advance()

    def take_real(self, what: str = "number") -> tuple[float, Token]:
        token = self.take_number(what)
        return float(token.value), token

    def take_int(self, what: str = "integer") -> tuple[int, Token]:
        token = self.take_number(what)
        value = token.value
        if isinstance(value, float):
            if value != int(value):
                self.fail(f"expected {what}, got non-integral {token.text}", token)
            value = int(value)
        return int(value), token
