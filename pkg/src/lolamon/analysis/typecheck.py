"""Type inference for stream expressions.

Numeric literals (and the ``Int``/``Float`` conversions) carry a flexible
type that adopts the type of whatever they are combined with. Concrete
types combine only within one kind, widening to the larger width; mixing
kinds or narrowing needs an explicit conversion.
"""

from __future__ import annotations

import enum
from typing import Optional, Union

from ..frontend import ast
from ..frontend.ast import WindowFunction
from ..types import Kind, SemType
from .model import AnalysisError


class Lit(enum.Enum):
    INT = "integer literal"
    FLOAT = "float literal"

    def __str__(self) -> str:
        return self.value


TypeLike = Union[SemType, Lit, None]  # None: not yet known


class _Mismatch(Exception):
    pass


def resolve(t: TypeLike) -> Optional[SemType]:
    """Default concrete type of a flexible literal type."""
    if t is Lit.INT:
        return SemType.Int64
    if t is Lit.FLOAT:
        return SemType.Float64
    return t


def is_numeric(t: TypeLike) -> bool:
    return isinstance(t, Lit) or (isinstance(t, SemType) and t.is_numeric)


def is_float(t: TypeLike) -> bool:
    return t is Lit.FLOAT or (isinstance(t, SemType) and t.is_float)


def is_integer(t: TypeLike) -> bool:
    return t is Lit.INT or (isinstance(t, SemType) and t.is_integer)


def join(a: TypeLike, b: TypeLike) -> TypeLike:
    """Common type of two operands; raises _Mismatch when there is none."""
    if a is None:
        return b
    if b is None or a == b:
        return a
    if isinstance(a, Lit) and isinstance(b, Lit):
        return Lit.FLOAT
    if isinstance(b, Lit):
        a, b = b, a
    if isinstance(a, Lit):
        if b.kind is Kind.BOOL:
            raise _Mismatch
        if a is Lit.FLOAT and not b.is_float:
            raise _Mismatch
        return b
    if a.kind is not b.kind:
        raise _Mismatch
    return a if a.width >= b.width else b


def assignable(t: TypeLike, target: SemType) -> bool:
    if t is None or t == target:
        return True
    if t is Lit.INT:
        return target.is_numeric
    if t is Lit.FLOAT:
        return target.is_float
    return t.widens_to(target)


def window_result(function: WindowFunction, value: TypeLike) -> TypeLike:
    """Result type of an aggregation; raises _Mismatch on unsupported values."""
    if function is WindowFunction.COUNT:
        return SemType.UInt64
    if value is None:
        return None
    value = resolve(value)
    if not value.is_numeric:
        raise _Mismatch
    if function in (WindowFunction.AVG, WindowFunction.INTEGRAL):
        return value if value.is_float else SemType.Float64
    return value


class Typer:
    def __init__(self, env: dict[str, TypeLike]):
        self.env = env
        self.errors: list[AnalysisError] = []
        self.node_types: dict[int, TypeLike] = {}

    def error(self, message: str, node) -> None:
        self.errors.append(AnalysisError("TypeError", message, node.loc))

    def combine(self, a: TypeLike, b: TypeLike, node, what: str) -> TypeLike:
        try:
            return join(a, b)
        except _Mismatch:
            self.error(f"{what}: incompatible types {a} and {b}", node)
            return None

    def infer(self, expr: ast.Expr, expected: Optional[SemType] = None) -> TypeLike:
        t = self._infer(expr, expected)
        self.node_types[id(expr)] = t
        return t

    def _infer(self, expr: ast.Expr, expected: Optional[SemType]) -> TypeLike:
        if isinstance(expr, ast.Literal):
            if isinstance(expr.value, bool):
                return SemType.Bool
            return Lit.INT if isinstance(expr.value, int) else Lit.FLOAT
        if isinstance(expr, ast.StreamRef):
            return self.env.get(expr.name)
        if isinstance(expr, (ast.Offset, ast.Hold)):
            target = self.env.get(expr.stream)
            return self.combine(target, self.infer(expr.default), expr, f"default of {expr.stream}")
        if isinstance(expr, ast.Window):
            try:
                return window_result(expr.function, self.env.get(expr.stream))
            except _Mismatch:
                self.error(
                    f"cannot aggregate {expr.stream} of type {self.env.get(expr.stream)} "
                    f"using {expr.function.value}",
                    expr,
                )
                return None
        if isinstance(expr, ast.Default):
            inner = self.infer(expr.expr)
            return self.combine(inner, self.infer(expr.default), expr, "window default")
        if isinstance(expr, ast.Unary):
            operand = self.infer(expr.operand, expected)
            if operand is None:
                return None
            if expr.op == "!":
                if operand is not SemType.Bool:
                    self.error(f"'!' needs Bool, got {operand}", expr)
                return SemType.Bool
            if not is_numeric(operand):
                self.error(f"'-' needs a number, got {operand}", expr)
                return None
            if isinstance(operand, SemType) and operand.kind is Kind.UINT:
                self.error(f"cannot negate unsigned {operand}", expr)
            return operand
        if isinstance(expr, ast.Binary):
            return self._binary(expr)
        if isinstance(expr, ast.Call):
            return self._call(expr, expected)
        if isinstance(expr, ast.If):
            cond = self.infer(expr.cond)
            if cond is not None and cond is not SemType.Bool:
                self.error(f"condition must be Bool, got {cond}", expr.cond)
            then = self.infer(expr.then, expected)
            orelse = self.infer(expr.orelse, expected)
            return self.combine(then, orelse, expr, "if branches")
        raise TypeError(expr)

    def _binary(self, expr: ast.Binary) -> TypeLike:
        left = self.infer(expr.left)
        right = self.infer(expr.right)
        op = expr.op
        if op in ast.LOGICAL_OPS:
            for side in (left, right):
                if side is not None and side is not SemType.Bool:
                    self.error(f"'{op}' needs Bool operands, got {side}", expr)
            return SemType.Bool
        common = self.combine(left, right, expr, f"operator '{op}'")
        if op in ast.ARITHMETIC_OPS:
            if common is not None and not is_numeric(common):
                self.error(f"'{op}' needs numbers, got {common}", expr)
                return None
            return common
        if op not in ("=", "!=") and common is not None and not is_numeric(common):
            self.error(f"'{op}' needs numbers, got {common}", expr)
        return SemType.Bool

    def _call(self, expr: ast.Call, expected: Optional[SemType]) -> TypeLike:
        func = expr.func
        if func in ("abs", "sqrt"):
            arg = self.infer(expr.arg, expected if func == "abs" else None)
            if arg is None:
                return None
            if not is_numeric(arg):
                self.error(f"{func} needs a number, got {arg}", expr)
                return None
            if func == "sqrt" and not is_float(arg):
                return SemType.Float64
            return arg
        arg = self.infer(expr.arg)
        if arg is not None and not (is_numeric(arg) or arg is SemType.Bool):
            self.error(f"cannot convert {arg}", expr)
        if func == "Int":
            return Lit.INT
        if func == "Float":
            return Lit.FLOAT
        if func == "cast":
            if expected is None:
                self.error("cast needs a declared target type", expr)
                return None
            return expected
        return SemType.by_name(func)


def _names_known(expr: ast.Expr, env: dict) -> bool:
    for node in ast.walk(expr):
        name = getattr(node, "name", None) if isinstance(node, ast.StreamRef) else getattr(node, "stream", None)
        if name is not None and name not in env:
            return False
    return True


def check_types(spec: ast.SpecificationAst) -> tuple[dict[str, SemType], dict[int, TypeLike], list[AnalysisError]]:
    """Infer stream types; returns (types, per-node types, errors)."""
    env: dict[str, TypeLike] = {d.name: d.type for d in spec.inputs}
    for out in spec.outputs:
        env[out.name] = out.type
    undeclared = [o for o in spec.outputs if o.type is None]
    # undeclared outputs may reference each other in any order
    for _ in range(len(undeclared) + 1):
        changed = False
        for out in undeclared:
            t = Typer(env).infer(out.expr)
            if t is not None and t != env[out.name]:
                env[out.name] = t
                changed = True
        if not changed:
            break
    for out in undeclared:
        env[out.name] = resolve(env[out.name])

    typer = Typer(env)
    for out in spec.outputs:
        t = typer.infer(out.expr, out.type)
        if out.type is not None:
            if t is not None and not assignable(t, out.type):
                typer.error(
                    f"cannot assign {t} to {out.name}: {out.type} without an explicit conversion",
                    out,
                )
        elif t is None and not typer.errors and _names_known(out.expr, env):
            typer.error(f"cannot infer the type of {out.name}", out)
    for trig in spec.triggers:
        t = typer.infer(trig.expr)
        if t is not None and t is not SemType.Bool:
            typer.error(f"trigger condition must be Bool, got {t}", trig)
    types = {name: t for name, t in env.items() if isinstance(t, SemType)}
    return types, typer.node_types, typer.errors


def infer_types(spec: ast.SpecificationAst) -> dict[str, SemType]:
    from .model import SpecificationError

    types, _, errors = check_types(spec)
    if errors:
        raise SpecificationError(errors)
    return types
