"""Translate expressions into Python closures.

Each expression becomes a zero-argument function reading the monitor's
buffers. Floats are computed in 64 bit whatever their declared width.
A missing value (empty avg/min/max window without a default, or a stream
that produced nothing this instant) raises :class:`NoValue`, which makes
the enclosing stream skip the instant.
"""

from __future__ import annotations

import math
from typing import Callable

from ..frontend import ast
from ..types import Kind, SemType


class NoValue(Exception):
    """The expression has no value at this instant."""


class LayeringViolation(AssertionError):
    """A same-instant value was read before it was computed."""


def _fault_div(a, b, integer: bool):
    if integer:
        return 0
    if a != a or a == 0:
        return math.nan
    return math.copysign(math.inf, a) * math.copysign(1.0, b)


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def converter(target: SemType) -> Callable:
    if target.kind is Kind.BOOL:
        return bool
    if target.is_float:
        return float
    return int


class Compiler:
    """Compiles the expressions of one monitor.

    ``runtime`` supplies the shared mutable state: ``bufs``, ``stamps``,
    ``failed``, ``clock`` (with ``tick`` and ``now``), ``window_for``
    and ``fault``.
    """

    def __init__(self, runtime, index: dict[str, int], expr_types: dict[int, SemType], debug: bool = False):
        self.rt = runtime
        self.index = index
        self.expr_types = expr_types
        self.debug = debug
        self.owner = ""

    def compile(self, expr: ast.Expr, owner: str) -> Callable:
        self.owner = owner
        return self._compile(expr)

    def _type(self, node) -> SemType | None:
        return self.expr_types.get(id(node))

    def _compile(self, e: ast.Expr) -> Callable:
        method = getattr(self, "_" + type(e).__name__.lower())
        return method(e)

    def _literal(self, e: ast.Literal):
        value = e.value
        t = self._type(e)
        if t is not None and t.is_float and not isinstance(value, bool):
            value = float(value)
        return lambda: value

    def _streamref(self, e: ast.StreamRef):
        i = self.index[e.name]
        buf = self.rt.bufs[i]
        stamps = self.rt.stamps
        clock = self.rt.clock
        if not self.debug:

            def read():
                if stamps[i] != clock.tick:
                    raise NoValue
                return buf[0]

            return read
        failed = self.rt.failed
        name = e.name

        def checked_read():
            if stamps[i] != clock.tick:
                if failed[i] == clock.tick:
                    raise NoValue
                raise LayeringViolation(f"{name} read at tick {clock.tick} before it was computed")
            return buf[0]

        return checked_read

    def _offset(self, e: ast.Offset):
        i = self.index[e.stream]
        buf = self.rt.bufs[i]
        stamps = self.rt.stamps
        clock = self.rt.clock
        depth = -e.offset
        default = self._compile(e.default)

        def read():
            k = depth if stamps[i] == clock.tick else depth - 1
            if k < len(buf):
                return buf[k]
            return default()

        return read

    def _hold(self, e: ast.Hold):
        buf = self.rt.bufs[self.index[e.stream]]
        default = self._compile(e.default)

        def read():
            if buf:
                return buf[0]
            return default()

        return read

    def _window(self, e: ast.Window):
        window = self.rt.window_for(self.owner, e)
        clock = self.rt.clock

        def read():
            value = window.evaluate(clock.now)
            if value is None:
                raise NoValue
            return value

        return read

    def _default(self, e: ast.Default):
        default = self._compile(e.default)
        if isinstance(e.expr, ast.Window):
            window = self.rt.window_for(self.owner, e.expr)
            clock = self.rt.clock

            def read_window():
                value = window.evaluate(clock.now)
                return default() if value is None else value

            return read_window
        inner = self._compile(e.expr)

        def read():
            try:
                return inner()
            except NoValue:
                return default()

        return read

    def _unary(self, e: ast.Unary):
        f = self._compile(e.operand)
        if e.op == "!":
            return lambda: not f()
        return lambda: -f()

    def _if(self, e: ast.If):
        c, t, o = self._compile(e.cond), self._compile(e.then), self._compile(e.orelse)
        return lambda: t() if c() else o()

    def _call(self, e: ast.Call):
        f = self._compile(e.arg)
        func = e.func
        if func == "abs":
            return lambda: abs(f())
        if func == "sqrt":
            fault = self.rt.fault
            owner = self.owner

            def sqrt():
                x = f()
                if x < 0:
                    fault(owner, "square root of a negative number")
                    return math.nan
                return math.sqrt(x)

            return sqrt
        target = self._type(e)
        if target is None:
            return f
        convert = converter(target)
        if convert is int:
            fault = self.rt.fault
            owner = self.owner

            def to_int():
                x = f()
                try:
                    return int(x)
                except (ValueError, OverflowError):
                    fault(owner, f"cannot convert {x} to {target}")
                    return 0

            return to_int
        return lambda: convert(f())

    def _binary(self, e: ast.Binary):
        lf, rf = self._compile(e.left), self._compile(e.right)
        op = e.op
        if op == "+":
            return lambda: lf() + rf()
        if op == "-":
            return lambda: lf() - rf()
        if op == "*":
            return lambda: lf() * rf()
        if op == "/":
            t = self._type(e)
            integer = t is not None and t.is_integer
            fault = self.rt.fault
            owner = self.owner

            def div():
                a = lf()
                b = rf()
                if b == 0:
                    fault(owner, "division by zero")
                    return _fault_div(a, b, integer)
                return _trunc_div(a, b) if integer else a / b

            return div
        if op == "and":

            def conj():
                a = lf()
                b = rf()
                return a and b

            return conj
        if op == "or":

            def disj():
                a = lf()
                b = rf()
                return a or b

            return disj
        if op == "=":
            return lambda: lf() == rf()
        if op == "!=":
            return lambda: lf() != rf()
        if op == "<":
            return lambda: lf() < rf()
        if op == "<=":
            return lambda: lf() <= rf()
        if op == ">":
            return lambda: lf() > rf()
        if op == ">=":
            return lambda: lf() >= rf()
        raise ValueError(f"unknown operator {op}")
