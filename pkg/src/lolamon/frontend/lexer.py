"""Tokenizer for specification source text."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import Loc


class ParseError(Exception):
    """Syntax error with a position and the set of tokens that would have fit."""

    def __init__(self, message: str, loc: Loc, expected: frozenset[str] = frozenset()):
        self.message = message
        self.loc = loc
        self.expected = frozenset(expected)
        detail = message
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(f"{loc.line}:{loc.col}: {detail}")

    @property
    def line(self) -> int:
        return self.loc.line

    @property
    def col(self) -> int:
        return self.loc.col


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, NUMBER, STRING, KEYWORD, OP, EOF
    text: str
    loc: Loc

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        return repr(self.text)


KEYWORDS = frozenset(
    {"import", "input", "output", "trigger", "if", "then", "else", "true", "false"}
)
WORD_OPERATORS = frozenset({"and", "or"})

# alias spelling -> canonical operator
OPERATOR_ALIASES = {
    "∧": "and",
    "&&": "and",
    "∨": "or",
    "||": "or",
    "¬": "!",
    "≠": "!=",
    "≤": "<=",
    "≥": ">=",
    "==": "=",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<newline>\n)
  | (?P<comment>//[^\n]*)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[^\W\d]\w*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<op>:=|==|!=|<=|>=|&&|\|\||[:@(),.+\-*/=<>!∧∨¬≠≤≥∫∞])
    """,
    re.VERBOSE,
)


def unescape(body: str) -> str:
    return re.sub(r"\\(.)", r"\1", body)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        loc = Loc(line, pos - line_start + 1)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", loc)
        kind = m.lastgroup
        text = m.group()
        pos = m.end()
        if kind == "newline":
            line, line_start = line + 1, pos
        elif kind == "ident":
            if text in WORD_OPERATORS:
                tokens.append(Token("OP", text, loc))
            else:
                tokens.append(Token("KEYWORD" if text in KEYWORDS else "IDENT", text, loc))
        elif kind == "number":
            tokens.append(Token("NUMBER", text, loc))
        elif kind == "string":
            tokens.append(Token("STRING", unescape(text[1:-1]), loc))
        elif kind == "op":
            tokens.append(Token("OP", OPERATOR_ALIASES.get(text, text), loc))
        # whitespace and comments are dropped
    tokens.append(Token("EOF", "", Loc(line, pos - line_start + 1)))
    return tokens
