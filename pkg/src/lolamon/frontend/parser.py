"""Recursive-descent parser.

Grammar (lowest to highest precedence inside expressions)::

    spec     := { "import" IDENT | input | output | trigger }
    input    := "input" IDENT ":" TYPE
    output   := "output" IDENT [":" TYPE] [freq] ":=" expr
    trigger  := "trigger" [freq] expr STRING
    freq     := "@" NUMBER "Hz"
    expr     := "if" expr "then" expr "else" expr | or
    or       := and { "or" and }
    and      := cmp { "and" cmp }
    cmp      := add [ ("=" | "!=" | "<" | "<=" | ">" | ">=") add ]
    add      := mul { ("+" | "-") mul }
    mul      := unary { ("*" | "/") unary }
    unary    := ("-" | "!") unary | postfix
    postfix  := IDENT ".offset(by: -N).defaults(to: expr)"
              | IDENT ".hold().defaults(to: expr)"
              | IDENT ".aggregate(over: DUR | ∞, using: FN)" [".defaults(to: expr)"]
              | primary
    primary  := NUMBER | "true" | "false" | IDENT | FUNC "(" expr ")" | "(" expr ")"

Unicode spellings (∧ ∨ ¬ ≠ ≤ ≥ Σ ∫ ∞) and their ASCII counterparts are
interchangeable.
"""

from __future__ import annotations

from . import ast
from .ast import (
    DURATION_UNITS,
    FUNCTIONS,
    Duration,
    Frequency,
    Loc,
    SpecificationAst,
    WindowFunction,
)
from .lexer import ParseError, Token, tokenize
from ..types import SemType

_COMPARISONS = frozenset(ast.COMPARISON_OPS)
_INFINITY = frozenset({"∞", "infinity"})


def parse_spec(source: str) -> SpecificationAst:
    """Parse specification text; raises :class:`ParseError` on malformed input."""
    return _Parser(tokenize(source)).spec()


def parse_expression(source: str) -> ast.Expr:
    parser = _Parser(tokenize(source))
    expr = parser.expr()
    parser.expect_kind("EOF")
    return expr


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def fail(self, expected, what: str | None = None):
        tok = self.tok
        raise ParseError(what or f"unexpected {tok.describe()}", tok.loc, frozenset(expected))

    def at(self, text: str) -> bool:
        return self.tok.kind in ("OP", "KEYWORD") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail({repr(text)})
        return self.advance()

    def expect_kind(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self.fail({kind})
        return self.advance()

    def expect_word(self, word: str) -> Token:
        if self.tok.kind == "IDENT" and self.tok.text == word:
            return self.advance()
        self.fail({repr(word)})

    # -- declarations --------------------------------------------------------

    def spec(self) -> SpecificationAst:
        result = SpecificationAst()
        seen: dict[str, Loc] = {}
        while self.tok.kind != "EOF":
            if self.accept("import"):
                self.expect_kind("IDENT")
                continue
            if self.at("input"):
                decl = self.input_decl()
                result.inputs.append(decl)
            elif self.at("output"):
                decl = self.output_decl()
                result.outputs.append(decl)
            elif self.at("trigger"):
                result.triggers.append(self.trigger_decl())
                continue
            else:
                self.fail({"'import'", "'input'", "'output'", "'trigger'"})
            if decl.name in seen:
                raise ParseError(
                    f"duplicate declaration of {decl.name!r} (first declared at {seen[decl.name]})",
                    decl.loc,
                )
            seen[decl.name] = decl.loc
        return result

    def type_name(self) -> SemType:
        tok = self.tok
        sem = SemType.by_name(tok.text) if tok.kind == "IDENT" else None
        if sem is None:
            self.fail({"type name"})
        self.advance()
        return sem

    def frequency(self) -> Frequency:
        self.expect("@")
        number = self.expect_kind("NUMBER")
        self.expect_word("Hz")
        freq = Frequency(number.text)
        if freq.hz <= 0:
            raise ParseError("frequency must be strictly positive", number.loc)
        return freq

    def input_decl(self) -> ast.InputDecl:
        loc = self.expect("input").loc
        name = self.expect_kind("IDENT").text
        self.expect(":")
        return ast.InputDecl(name, self.type_name(), loc)

    def output_decl(self) -> ast.OutputDecl:
        loc = self.expect("output").loc
        name = self.expect_kind("IDENT").text
        sem = None
        freq = None
        if self.accept(":"):
            sem = self.type_name()
        if self.at("@"):
            freq = self.frequency()
        if not self.at(":="):
            expected = {"':='", "'@'"} if freq is None else {"':='"}
            if sem is None and freq is None:
                expected.add("':'")
            self.fail(expected)
        self.advance()
        return ast.OutputDecl(name, sem, freq, self.expr(), loc)

    def trigger_decl(self) -> ast.TriggerDecl:
        loc = self.expect("trigger").loc
        freq = self.frequency() if self.at("@") else None
        expr = self.expr()
        if self.tok.kind != "STRING":
            self.fail({"STRING", "operator"})
        message = self.advance().text
        return ast.TriggerDecl(freq, expr, message, loc)

    # -- expressions ---------------------------------------------------------

    def expr(self) -> ast.Expr:
        if self.at("if"):
            loc = self.advance().loc
            cond = self.expr()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            return ast.If(cond, then, self.expr(), loc)
        return self.disjunction()

    def disjunction(self) -> ast.Expr:
        left = self.conjunction()
        while self.at("or"):
            loc = self.advance().loc
            left = ast.Binary("or", left, self.conjunction(), loc)
        return left

    def conjunction(self) -> ast.Expr:
        left = self.comparison()
        while self.at("and"):
            loc = self.advance().loc
            left = ast.Binary("and", left, self.comparison(), loc)
        return left

    def comparison(self) -> ast.Expr:
        left = self.additive()
        if self.tok.kind == "OP" and self.tok.text in _COMPARISONS:
            tok = self.advance()
            left = ast.Binary(tok.text, left, self.additive(), tok.loc)
            if self.tok.kind == "OP" and self.tok.text in _COMPARISONS:
                self.fail(set(), "comparisons do not chain; add parentheses")
        return left

    def additive(self) -> ast.Expr:
        left = self.multiplicative()
        while self.at("+") or self.at("-"):
            tok = self.advance()
            left = ast.Binary(tok.text, left, self.multiplicative(), tok.loc)
        return left

    def multiplicative(self) -> ast.Expr:
        left = self.unary()
        while self.at("*") or self.at("/"):
            tok = self.advance()
            left = ast.Binary(tok.text, left, self.unary(), tok.loc)
        return left

    def unary(self) -> ast.Expr:
        if self.at("-") or self.at("!"):
            tok = self.advance()
            return ast.Unary(tok.text, self.unary(), tok.loc)
        return self.postfix()

    def postfix(self) -> ast.Expr:
        base = self.primary()
        if not self.at("."):
            return base
        if not isinstance(base, ast.StreamRef):
            self.fail(set(), "stream methods apply to stream names only")
        self.advance()
        method = self.tok
        if method.kind != "IDENT" or method.text not in ("offset", "hold", "aggregate"):
            self.fail({"'offset'", "'hold'", "'aggregate'"})
        self.advance()
        self.expect("(")
        if method.text == "offset":
            self.expect_word("by")
            self.expect(":")
            neg = self.accept("-")
            number = self.expect_kind("NUMBER")
            if not number.text.isdigit():
                raise ParseError("offset must be an integer", number.loc)
            offset = -int(number.text) if neg else int(number.text)
            if offset >= 0:
                raise ParseError("offsets must be strictly negative", number.loc)
            self.expect(")")
            return ast.Offset(base.name, offset, self.defaults(), base.loc)
        if method.text == "hold":
            self.expect(")")
            return ast.Hold(base.name, self.defaults(), base.loc)
        self.expect_word("over")
        self.expect(":")
        duration = self.duration()
        self.expect(",")
        self.expect_word("using")
        self.expect(":")
        fn_tok = self.tok
        function = WindowFunction.lookup(fn_tok.text) if fn_tok.kind in ("IDENT", "OP") else None
        if function is None:
            self.fail({"aggregation function"})
        self.advance()
        self.expect(")")
        window = ast.Window(base.name, duration, function, base.loc)
        if self.at("."):
            return ast.Default(window, self.defaults(), window.loc)
        return window

    def defaults(self) -> ast.Expr:
        self.expect(".")
        self.expect_word("defaults")
        self.expect("(")
        self.expect_word("to")
        self.expect(":")
        value = self.expr()
        self.expect(")")
        return value

    def duration(self) -> Duration | None:
        if self.tok.text in _INFINITY and self.tok.kind in ("OP", "IDENT"):
            self.advance()
            return None
        number = self.expect_kind("NUMBER")
        unit = self.tok
        if unit.kind != "IDENT" or unit.text not in DURATION_UNITS:
            self.fail({repr(u) for u in DURATION_UNITS})
        self.advance()
        duration = Duration(number.text, unit.text)
        if duration.seconds <= 0:
            raise ParseError("window duration must be positive", number.loc)
        return duration

    def primary(self) -> ast.Expr:
        tok = self.tok
        if tok.kind == "NUMBER":
            self.advance()
            return number_literal(tok.text, tok.loc)
        if tok.kind == "KEYWORD" and tok.text in ("true", "false"):
            self.advance()
            return ast.Literal(tok.text == "true", tok.text, tok.loc)
        if tok.kind == "IDENT":
            self.advance()
            if self.at("("):
                if tok.text not in FUNCTIONS:
                    raise ParseError(f"unknown function {tok.text!r}", tok.loc)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return ast.Call(tok.text, arg, tok.loc)
            return ast.StreamRef(tok.text, tok.loc)
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        self.fail({"NUMBER", "IDENT", "'('", "'-'", "'!'", "'if'", "'true'", "'false'"})


def number_literal(text: str, loc: Loc = ast.NOWHERE) -> ast.Literal:
    if text.isdigit():
        return ast.Literal(int(text), text, loc)
    return ast.Literal(float(text), text, loc)
