"""Data produced by static analysis."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from ..frontend import ast
from ..frontend.ast import Frequency, Loc, SpecificationAst, WindowFunction
from ..types import SemType

INPUT, OUTPUT, TRIGGER = "input", "output", "trigger"


@dataclass(frozen=True)
class AnalysisError:
    """One diagnostic; ``kind`` is NameError, TypeError, PacingError or CycleError."""

    kind: str
    message: str
    loc: Loc = ast.NOWHERE

    def __str__(self) -> str:
        where = f"{self.loc}: " if self.loc != ast.NOWHERE else ""
        return f"{where}{self.kind}: {self.message}"


class SpecificationError(Exception):
    """Raised by :func:`analyze` with every error it collected."""

    def __init__(self, errors: list[AnalysisError]):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))

    def kinds(self) -> set[str]:
        return {e.kind for e in self.errors}


@dataclass(frozen=True)
class EventBased:
    """Evaluated whenever all of ``inputs`` receive a value in the same event."""

    inputs: frozenset[str]

    def __str__(self) -> str:
        return "event(" + " & ".join(sorted(self.inputs)) + ")"


@dataclass(frozen=True)
class Periodic:
    frequency: Frequency

    @property
    def hz(self) -> Fraction:
        return self.frequency.hz

    @property
    def period_ns(self) -> int:
        return self.frequency.period_ns

    def __eq__(self, other) -> bool:
        return isinstance(other, Periodic) and self.hz == other.hz

    def __hash__(self) -> int:
        return hash(self.hz)

    def __str__(self) -> str:
        return f"periodic({self.frequency.text}Hz)"


PacingType = Union[EventBased, Periodic]


@dataclass
class StreamInfo:
    name: str
    kind: str  # input, output or trigger
    index: int  # declaration order: inputs, outputs, then triggers
    type: SemType
    pacing: PacingType
    layer: int
    expr: Optional[ast.Expr] = None
    message: Optional[str] = None
    trigger_id: Optional[int] = None
    loc: Loc = ast.NOWHERE

    @property
    def is_periodic(self) -> bool:
        return isinstance(self.pacing, Periodic)


@dataclass(frozen=True)
class WindowDescriptor:
    target: str
    duration: Optional[ast.Duration]  # None: unbounded
    function: WindowFunction
    evaluator: str
    value_type: SemType
    result_type: SemType
    node: ast.Window = field(compare=False, repr=False, default=None)

    @property
    def duration_ns(self) -> Optional[int]:
        return None if self.duration is None else self.duration.ns


@dataclass(frozen=True)
class StreamRecord:
    name: str
    type: SemType
    slots: int

    @property
    def bytes(self) -> int:
        return self.slots * self.type.width


@dataclass(frozen=True)
class WindowRecord:
    evaluator: str
    target: str
    function: WindowFunction
    duration: Optional[ast.Duration]
    panes: int
    pane_bytes: int
    fixed_bytes: int

    @property
    def bytes(self) -> int:
        return self.panes * self.pane_bytes + self.fixed_bytes


@dataclass
class ResourceReport:
    streams: list[StreamRecord]
    windows: list[WindowRecord]

    @property
    def stream_bytes(self) -> int:
        return sum(r.bytes for r in self.streams)

    @property
    def window_bytes(self) -> int:
        return sum(r.bytes for r in self.windows)

    @property
    def total_bytes(self) -> int:
        return self.stream_bytes + self.window_bytes

    def slots(self, name: str) -> int:
        for record in self.streams:
            if record.name == name:
                return record.slots
        raise KeyError(name)


@dataclass
class AnalyzedSpec:
    ast: SpecificationAst
    streams: list[StreamInfo]
    layers: list[list[str]]
    windows: list[WindowDescriptor]
    report: ResourceReport
    expr_types: dict = field(repr=False, default_factory=dict)  # id(node) -> SemType

    def __post_init__(self):
        self._by_name = {s.name: s for s in self.streams}

    def stream(self, name: str) -> StreamInfo:
        return self._by_name[name]

    @property
    def types(self) -> dict[str, SemType]:
        return {s.name: s.type for s in self.streams if s.kind != TRIGGER}

    @property
    def pacing(self) -> dict[str, PacingType]:
        return {s.name: s.pacing for s in self.streams}

    @property
    def inputs(self) -> list[StreamInfo]:
        return [s for s in self.streams if s.kind == INPUT]

    @property
    def outputs(self) -> list[StreamInfo]:
        return [s for s in self.streams if s.kind == OUTPUT]

    @property
    def triggers(self) -> list[StreamInfo]:
        return [s for s in self.streams if s.kind == TRIGGER]

    @property
    def periodic_streams(self) -> list[StreamInfo]:
        return [s for s in self.streams if s.is_periodic]


def trigger_name(index: int) -> str:
    """Internal stream name of the ``index``-th trigger (not a valid identifier)."""
    return f"trigger#{index}"
