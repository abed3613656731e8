"""Canonical rendering of syntax trees.

Output uses ASCII operator spellings, one declaration per line, and the
minimal parenthesization that reparses to the same tree. Literal text is
reproduced exactly as it was written.
"""

from __future__ import annotations

from . import ast
from .ast import SpecificationAst

_PREC = {"or": 1, "and": 2, "+": 4, "-": 4, "*": 5, "/": 5}
_PREC.update({op: 3 for op in ast.COMPARISON_OPS})
_UNARY = 6
_ATOM = 7


def _prec(expr: ast.Expr) -> int:
    if isinstance(expr, ast.If):
        return 0
    if isinstance(expr, ast.Binary):
        return _PREC[expr.op]
    if isinstance(expr, ast.Unary):
        return _UNARY
    return _ATOM


def _wrap(expr: ast.Expr, parens: bool) -> str:
    text = format_expr(expr)
    return f"({text})" if parens else text


def format_expr(expr: ast.Expr) -> str:
    if isinstance(expr, ast.Literal):
        return expr.text
    if isinstance(expr, ast.StreamRef):
        return expr.name
    if isinstance(expr, ast.Offset):
        return f"{expr.stream}.offset(by: {expr.offset}).defaults(to: {format_expr(expr.default)})"
    if isinstance(expr, ast.Hold):
        return f"{expr.stream}.hold().defaults(to: {format_expr(expr.default)})"
    if isinstance(expr, ast.Window):
        over = "infinity" if expr.duration is None else str(expr.duration)
        return f"{expr.stream}.aggregate(over: {over}, using: {expr.function.value})"
    if isinstance(expr, ast.Default):
        return f"{format_expr(expr.expr)}.defaults(to: {format_expr(expr.default)})"
    if isinstance(expr, ast.Call):
        return f"{expr.func}({format_expr(expr.arg)})"
    if isinstance(expr, ast.Unary):
        return expr.op + _wrap(expr.operand, _prec(expr.operand) < _UNARY)
    if isinstance(expr, ast.Binary):
        prec = _PREC[expr.op]
        chained = prec == 3  # comparisons do not associate
        left = _wrap(expr.left, _prec(expr.left) < prec or (chained and _prec(expr.left) == prec))
        right = _wrap(expr.right, _prec(expr.right) <= prec)
        return f"{left} {expr.op} {right}"
    if isinstance(expr, ast.If):
        cond = _wrap(expr.cond, isinstance(expr.cond, ast.If))
        then = _wrap(expr.then, isinstance(expr.then, ast.If))
        return f"if {cond} then {then} else {format_expr(expr.orelse)}"
    raise TypeError(f"not an expression: {expr!r}")


def _quote(message: str) -> str:
    return '"' + message.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_decl(decl) -> str:
    if isinstance(decl, ast.InputDecl):
        return f"input {decl.name}: {decl.type}"
    if isinstance(decl, ast.OutputDecl):
        head = f"output {decl.name}"
        if decl.type is not None:
            head += f": {decl.type}"
        if decl.frequency is not None:
            head += f" {decl.frequency}"
        return f"{head} := {format_expr(decl.expr)}"
    head = "trigger"
    if decl.frequency is not None:
        head += f" {decl.frequency}"
    return f"{head} {format_expr(decl.expr)} {_quote(decl.message)}"


def format_spec(spec: SpecificationAst) -> str:
    lines = [format_decl(d) for d in (*spec.inputs, *spec.outputs, *spec.triggers)]
    return "".join(line + "\n" for line in lines)
