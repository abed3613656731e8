"""Online evaluation of an analyzed specification.

Time is integer nanoseconds. Work happens in *ticks*: one per incoming
event and one per distinct periodic deadline. Inside a tick the scheduled
streams are evaluated layer by layer; streams in one layer never read each
other at the same instant, so their relative order is irrelevant.

Ordering rules:

* deadlines due at or before an event's timestamp are processed before
  the event, so periodic windows never see same-instant samples;
* the first deadline of a stream with period ``p`` is ``start + p``;
* verdicts of one tick are reported in trigger declaration order.
"""

from __future__ import annotations

import heapq
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from ..analysis import INPUT, OUTPUT, TRIGGER, AnalyzedSpec, EventBased
from ..analysis.memory import window_record
from ..frontend import ast
from ..types import Kind, SemType
from ..windows import WindowState, new_window
from .compile import Compiler, NoValue

EVENT_BASED = "event-based"
PERIODIC = "periodic"
RUNTIME = "runtime"
RUNTIME_TRIGGER_ID = -1


class MonitorError(ValueError):
    """Malformed input: time going backwards, unknown stream, bad value."""


@dataclass(frozen=True)
class Event:
    """Values for some input streams at one instant."""

    t: int
    updates: Mapping[str, Any]

    def __post_init__(self):
        if not self.updates:
            raise MonitorError(f"event at {self.t} ns carries no update")
        if self.t < 0:
            raise MonitorError("timestamps are unsigned")


@dataclass(frozen=True, order=True)
class Verdict:
    t: int
    trigger_id: int
    message: str
    kind: str = field(default=EVENT_BASED, compare=False)


class _Clock:
    __slots__ = ("tick", "now")

    def __init__(self, now: int):
        self.tick = 0
        self.now = now


_INT_RANGES = {
    t: ((0, 2 ** (8 * t.width) - 1) if t.kind is Kind.UINT else (-(2 ** (8 * t.width - 1)), 2 ** (8 * t.width - 1) - 1))
    for t in SemType
    if t.is_integer
}


def coerce_input(sem: SemType, value, name: str = "?"):
    """Check and normalize an input value against its declared type."""
    if sem is SemType.Bool:
        if isinstance(value, bool):
            return value
    elif isinstance(value, bool):
        pass
    elif sem.is_float:
        if isinstance(value, (int, float)):
            return float(value)
    elif isinstance(value, int) or (isinstance(value, float) and value.is_integer()):
        value = int(value)
        lo, hi = _INT_RANGES[sem]
        if lo <= value <= hi:
            return value
        raise MonitorError(f"value {value} out of range for {name}: {sem}")
    raise MonitorError(f"value {value!r} does not fit {name}: {sem}")


class Monitor:
    """Evaluation state for one specification.

    ``shuffle`` (a :class:`random.Random`) permutes the streams inside each
    layer on every tick; ``debug`` turns on layering and memory assertions.
    """

    def __init__(
        self,
        spec: AnalyzedSpec,
        start: int = 0,
        *,
        debug: bool = False,
        shuffle: Optional[random.Random] = None,
    ):
        self.spec = spec
        self.start = start
        self.debug = debug
        self.shuffle = shuffle
        self.clock = _Clock(start)
        self.streams = spec.streams
        self.index = {s.name: s.index for s in spec.streams}
        n = len(self.streams)
        report = spec.report
        self.bufs: list[Optional[deque]] = [
            None if s.kind == TRIGGER else deque(maxlen=report.slots(s.name)) for s in self.streams
        ]
        self.stamps = [-1] * n
        self.failed = [-1] * n
        self._faults: list[tuple[str, str]] = []

        self.windows: dict[tuple[str, ast.Window], WindowState] = {}
        self.window_records = {}
        self._targets: list[list[WindowState]] = [[] for _ in range(n)]
        for desc in spec.windows:
            evaluator = spec.stream(desc.evaluator)
            zero = 0.0 if desc.result_type.is_float else 0
            state = new_window(desc.function, desc.duration_ns, evaluator.pacing.period_ns, start, zero)
            self.windows[(desc.evaluator, desc.node)] = state
            self.window_records[(desc.evaluator, desc.node)] = window_record(desc, evaluator)
            self._targets[self.index[desc.target]].append(state)

        compiler = Compiler(self, self.index, spec.expr_types, debug)
        self._steps = [None] * n
        self._verdicts: list[Verdict] = []
        for s in self.streams:
            if s.kind == OUTPUT:
                self._steps[s.index] = self._output_step(s, compiler.compile(s.expr, s.name))
            elif s.kind == TRIGGER:
                self._steps[s.index] = self._trigger_step(s, compiler.compile(s.expr, s.name))

        self._layer_of = [s.layer for s in self.streams]
        self._plans: dict[frozenset, list[list[int]]] = {}
        self.deadlines: list[tuple[int, int]] = []
        for s in spec.periodic_streams:
            heapq.heappush(self.deadlines, (start + s.pacing.period_ns, s.index))
        self._input_types = {s.name: (s.index, s.type) for s in self.streams if s.kind == INPUT}

        self.peak_storage = self.storage_bytes()
        self.events_processed = 0

    # -- plumbing used by compiled closures -------------------------------------

    def window_for(self, owner: str, node: ast.Window) -> WindowState:
        return self.windows[(owner, node)]

    def fault(self, owner: str, reason: str) -> None:
        self._faults.append((owner, reason))

    @property
    def now(self) -> int:
        return self.clock.now

    # -- compiled stream steps -------------------------------------------------------

    def _output_step(self, s, fn):
        i = s.index
        buf = self.bufs[i]
        stamps, failed, clock = self.stamps, self.failed, self.clock
        targets = self._targets[i]
        store = fn
        if s.type.is_float and not self._is_float_expr(s.expr):
            store = lambda: float(fn())  # noqa: E731

        def step():
            try:
                value = store()
            except NoValue:
                failed[i] = clock.tick
                return
            buf.appendleft(value)
            stamps[i] = clock.tick
            for window in targets:
                window.insert(clock.now, value)

        return step

    def _is_float_expr(self, expr) -> bool:
        t = self.spec.expr_types.get(id(expr))
        return t is not None and t.is_float

    def _trigger_step(self, s, fn):
        verdicts = self._verdicts
        clock = self.clock
        trigger_id = s.trigger_id
        message = s.message
        kind = PERIODIC if s.is_periodic else EVENT_BASED

        def step():
            try:
                fired = fn()
            except NoValue:
                return
            if fired:
                verdicts.append(Verdict(clock.now, trigger_id, message, kind))

        return step

    # -- scheduling ------------------------------------------------------------------

    def _layered(self, members: list[int]) -> list[list[int]]:
        layers: dict[int, list[int]] = {}
        for i in sorted(members, key=lambda i: (self._layer_of[i], i)):
            layers.setdefault(self._layer_of[i], []).append(i)
        return [layers[k] for k in sorted(layers)]

    def _event_plan(self, key: frozenset) -> list[list[int]]:
        plan = self._plans.get(key)
        if plan is None:
            members = [
                s.index
                for s in self.streams
                if s.kind != INPUT and isinstance(s.pacing, EventBased) and s.pacing.inputs <= key
            ]
            plan = self._plans[key] = self._layered(members)
        return plan

    def _run_tick(self, plan: list[list[int]]) -> list[Verdict]:
        steps = self._steps
        rng = self.shuffle
        for layer in plan:
            if rng is not None and len(layer) > 1:
                layer = layer[:]
                rng.shuffle(layer)
            for i in layer:
                steps[i]()
        return self._collect()

    def _collect(self) -> list[Verdict]:
        out = self._verdicts[:]
        self._verdicts.clear()
        if self._faults:
            now = self.clock.now
            for owner, reason in sorted(set(self._faults)):
                out.append(
                    Verdict(now, RUNTIME_TRIGGER_ID, f"RUNTIME: {reason} in {owner.replace('#', ' ')}", RUNTIME)
                )
            self._faults.clear()
        if len(out) > 1:
            out.sort(key=lambda v: (v.trigger_id, v.message))
        return out

    def _run_deadlines(self, limit: int) -> list[Verdict]:
        verdicts: list[Verdict] = []
        heap = self.deadlines
        while heap and heap[0][0] <= limit:
            due = heap[0][0]
            group = []
            while heap and heap[0][0] == due:
                group.append(heapq.heappop(heap)[1])
            self._observe_storage()
            self.clock.tick += 1
            self.clock.now = due
            verdicts.extend(self._run_tick(self._layered(group)))
            for i in group:
                heapq.heappush(heap, (due + self.streams[i].pacing.period_ns, i))
        return verdicts

    # -- public API ----------------------------------------------------------------------

    def accept_event(self, event: Event) -> list[Verdict]:
        t = event.t
        if t < self.clock.now:
            raise MonitorError(f"event at {t} ns precedes current time {self.clock.now} ns")
        updates = event.updates
        resolved = []
        for name, value in updates.items():
            entry = self._input_types.get(name)
            if entry is None:
                raise MonitorError(f"unknown input stream {name!r}")
            resolved.append((entry[0], coerce_input(entry[1], value, name)))

        verdicts = self._run_deadlines(t) if self.deadlines else []
        clock = self.clock
        clock.tick += 1
        clock.now = t
        tick = clock.tick
        bufs, stamps, targets = self.bufs, self.stamps, self._targets
        for i, value in resolved:
            bufs[i].appendleft(value)
            stamps[i] = tick
            for window in targets[i]:
                window.insert(t, value)
        plan = self._event_plan(frozenset(updates))
        verdicts.extend(self._run_tick(plan))
        self.events_processed += 1
        return verdicts

    def next_deadline(self) -> Optional[int]:
        return self.deadlines[0][0] if self.deadlines else None

    def advance_to(self, t: int) -> list[Verdict]:
        """Process every deadline due at or before ``t`` without new input."""
        if t < self.clock.now:
            raise MonitorError(f"cannot move back from {self.clock.now} ns to {t} ns")
        verdicts = self._run_deadlines(t)
        self.clock.now = t
        self._observe_storage()
        return verdicts

    # -- memory accounting ---------------------------------------------------------------

    def occupancy(self) -> tuple[dict[str, int], dict[tuple[str, ast.Window], int]]:
        """Live buffer slots per stream and live panes per window."""
        slots = {s.name: len(self.bufs[s.index]) for s in self.streams if s.kind != TRIGGER}
        panes = {key: w.live_panes for key, w in self.windows.items()}
        return slots, panes

    def storage_bytes(self) -> int:
        total = 0
        for s in self.streams:
            if s.kind != TRIGGER:
                total += len(self.bufs[s.index]) * s.type.width
        for key, window in self.windows.items():
            rec = self.window_records[key]
            total += window.live_panes * rec.pane_bytes + rec.fixed_bytes
        return total

    def _observe_storage(self) -> None:
        current = self.storage_bytes()
        if current > self.peak_storage:
            self.peak_storage = current
        if self.debug:
            assert current <= self.spec.report.total_bytes, (current, self.spec.report.total_bytes)
            for key, window in self.windows.items():
                assert window.live_panes <= self.window_records[key].panes or window.unbounded


def new_monitor(spec: AnalyzedSpec, start: int = 0, **options) -> Monitor:
    return Monitor(spec, start, **options)


def accept_event(monitor: Monitor, event: Event) -> list[Verdict]:
    return monitor.accept_event(event)


def advance_to(monitor: Monitor, t: int) -> list[Verdict]:
    return monitor.advance_to(t)


def seconds(value: float) -> int:
    """Convenience: seconds to integer nanoseconds."""
    return int(round(value * 1_000_000_000))


__all__ = [
    "EVENT_BASED",
    "PERIODIC",
    "RUNTIME",
    "Event",
    "Monitor",
    "MonitorError",
    "Verdict",
    "accept_event",
    "advance_to",
    "coerce_input",
    "new_monitor",
    "seconds",
]
