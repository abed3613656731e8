"""Syntax tree of a specification.

Nodes are immutable. Source locations ride along for diagnostics but are
excluded from equality, so a reparsed tree compares equal to the original.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from ..types import SemType

NS_PER_SECOND = 1_000_000_000


@dataclass(frozen=True)
class Loc:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOWHERE = Loc(0, 0)


def _loc():
    return field(default=NOWHERE, compare=False, repr=False)


class WindowFunction(enum.Enum):
    COUNT = "count"
    SUM = "sum"
    AVG = "avg"
    MIN = "min"
    MAX = "max"
    INTEGRAL = "integral"

    @classmethod
    def lookup(cls, spelling: str) -> Optional[WindowFunction]:
        return _FUNCTION_SPELLINGS.get(spelling)


_FUNCTION_SPELLINGS = {f.value: f for f in WindowFunction}
_FUNCTION_SPELLINGS.update({"Σ": WindowFunction.SUM, "∫": WindowFunction.INTEGRAL})

DURATION_UNITS = {"s": 1, "min": 60, "h": 3600}


@dataclass(frozen=True)
class Duration:
    """A real-time length such as ``2min``; ``text`` keeps the literal digits."""

    text: str
    unit: str

    @property
    def seconds(self) -> Fraction:
        return Fraction(self.text) * DURATION_UNITS[self.unit]

    @property
    def ns(self) -> int:
        ns = self.seconds * NS_PER_SECOND
        if ns.denominator != 1:
            raise ValueError(f"duration {self} is not a whole number of nanoseconds")
        return int(ns)

    def __str__(self) -> str:
        return f"{self.text}{self.unit}"


@dataclass(frozen=True)
class Frequency:
    text: str

    @property
    def hz(self) -> Fraction:
        return Fraction(self.text)

    @property
    def period_ns(self) -> Optional[int]:
        """Period in nanoseconds, or None if it is not a whole number."""
        hz = self.hz
        if hz <= 0:
            return None
        period = Fraction(NS_PER_SECOND) / hz
        return int(period) if period.denominator == 1 else None

    def __str__(self) -> str:
        return f"@{self.text}Hz"


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: Union[bool, int, float]
    text: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class StreamRef:
    name: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class Offset:
    """``stream.offset(by: -n).defaults(to: default)``; ``offset`` is negative."""

    stream: str
    offset: int
    default: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Hold:
    stream: str
    default: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Window:
    """Sliding window; ``duration`` None stands for the unbounded window."""

    stream: str
    duration: Optional[Duration]
    function: WindowFunction
    loc: Loc = _loc()


@dataclass(frozen=True)
class Default:
    expr: Expr
    default: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "!"
    operand: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Binary:
    op: str
    left: Expr
    right: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Call:
    func: str
    arg: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Expr
    orelse: Expr
    loc: Loc = _loc()


Expr = Union[Literal, StreamRef, Offset, Hold, Window, Default, Unary, Binary, Call, If]

ARITHMETIC_OPS = ("+", "-", "*", "/")
COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")
LOGICAL_OPS = ("and", "or")
BINARY_OPS = ARITHMETIC_OPS + COMPARISON_OPS + LOGICAL_OPS

# functions applied with call syntax; type names double as conversions
FUNCTIONS = ("abs", "sqrt", "cast", "Int", "Float") + tuple(SemType.__members__)


def children(expr: Expr) -> tuple:
    if isinstance(expr, (Offset, Hold)):
        return (expr.default,)
    if isinstance(expr, Default):
        return (expr.expr, expr.default)
    if isinstance(expr, Unary):
        return (expr.operand,)
    if isinstance(expr, Binary):
        return (expr.left, expr.right)
    if isinstance(expr, Call):
        return (expr.arg,)
    if isinstance(expr, If):
        return (expr.cond, expr.then, expr.orelse)
    return ()


def walk(expr: Expr):
    """Pre-order traversal."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


# -- declarations -------------------------------------------------------------


@dataclass(frozen=True)
class InputDecl:
    name: str
    type: SemType
    loc: Loc = _loc()


@dataclass(frozen=True)
class OutputDecl:
    name: str
    type: Optional[SemType]
    frequency: Optional[Frequency]
    expr: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class TriggerDecl:
    frequency: Optional[Frequency]
    expr: Expr
    message: str
    loc: Loc = _loc()


@dataclass
class SpecificationAst:
    inputs: list[InputDecl] = field(default_factory=list)
    outputs: list[OutputDecl] = field(default_factory=list)
    triggers: list[TriggerDecl] = field(default_factory=list)

    @property
    def declaration_count(self) -> int:
        return len(self.inputs) + len(self.outputs) + len(self.triggers)
