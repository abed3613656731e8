"""Specification language frontend: tokenizer, parser, formatter."""

from .ast import SpecificationAst
from .formatter import format_expr, format_spec
from .lexer import ParseError
from .parser import parse_expression, parse_spec

__all__ = [
    "ParseError",
    "SpecificationAst",
    "format_expr",
    "format_spec",
    "parse_expression",
    "parse_spec",
]
