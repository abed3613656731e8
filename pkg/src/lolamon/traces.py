"""Trace files, replay and verdict sinks.

Traces are delimiter-separated text with a header row. One column holds
the timestamp; the others are bound to input streams. An empty cell means
"no update for that stream", and a row with no values at all is skipped.
Rows are read lazily, so memory does not grow with the trace length.

Replay runs in one of two modes:

``fast``
    events are fed back to back;
``realtime``
    the replayer sleeps to reproduce the recorded gaps and also wakes for
    periodic deadlines that fall between events.

Both modes call the same monitor operations in the same order, so their
verdicts are identical; only wall-clock timing differs.
"""

from __future__ import annotations

import csv
import json
import math
import random
import time
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Callable, Iterable, Iterator, Optional, Sequence, TextIO

from .analysis import AnalyzedSpec
from .engine import Event, Monitor, Verdict, new_monitor
from .types import Kind, SemType

TIME_UNITS = {"s": 1_000_000_000, "ms": 1_000_000, "us": 1_000, "ns": 1}
FAST = "fast"
REALTIME = "realtime"


class FormatError(ValueError):
    """A trace row that cannot be turned into an event."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.row = row
        self.column = column


class ConfigError(ValueError):
    """Trace schema and specification do not fit together."""


@dataclass
class TraceSchema:
    """Which column is time, in what unit, and which columns feed which inputs.

    ``bindings`` maps column name to input stream name; None binds every
    non-time column to the input of the same name.
    """

    time_column: str = "time"
    time_unit: str = "s"
    bindings: Optional[dict[str, str]] = None
    delimiter: str = ","

    def __post_init__(self):
        if self.time_unit not in TIME_UNITS:
            raise ConfigError(f"unknown time unit {self.time_unit!r}; use one of {', '.join(TIME_UNITS)}")

    def resolve(self, header: Sequence[str], spec: AnalyzedSpec) -> dict[str, tuple[int, str, SemType]]:
        """Column bindings as ``column -> (position, input, type)``."""
        if self.time_column not in header:
            raise ConfigError(f"time column {self.time_column!r} missing from header")
        inputs = {s.name: s.type for s in spec.inputs}
        columns = [c for c in header if c != self.time_column]
        bindings = self.bindings if self.bindings is not None else {c: c for c in columns}
        resolved = {}
        for column, stream in bindings.items():
            if column not in header:
                raise ConfigError(f"bound column {column!r} missing from header")
            if stream not in inputs:
                raise ConfigError(f"column {column!r} is bound to {stream!r}, which is not an input")
            resolved[column] = (header.index(column), stream, inputs[stream])
        unbound = sorted(set(inputs) - {stream for _, stream, _ in resolved.values()})
        if unbound:
            raise ConfigError(f"no column feeds input(s) {', '.join(unbound)}")
        return resolved


def parse_bindings(items: Iterable[str]) -> dict[str, str]:
    """``column=stream`` pairs; a bare name binds a column to itself."""
    out = {}
    for item in items:
        column, _, stream = item.partition("=")
        column = column.strip()
        if not column:
            raise ConfigError(f"bad binding {item!r}")
        out[column] = stream.strip() or column
    return out


_TRUE = {"true", "1", "t", "yes"}
_FALSE = {"false", "0", "f", "no"}


def value_parser(sem: SemType) -> Callable[[str], object]:
    if sem.kind is Kind.BOOL:

        def parse_bool(text: str) -> bool:
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(f"not a boolean: {text!r}")

        return parse_bool
    if sem.is_float:
        return float
    return int


def parse_time(text: str, unit: str) -> int:
    try:
        value = Decimal(text) * TIME_UNITS[unit]
    except InvalidOperation:
        raise ValueError(f"not a timestamp: {text!r}") from None
    if not value.is_finite() or value < 0:
        raise ValueError(f"timestamp must be finite and non-negative: {text!r}")
    return int(value.to_integral_value())


class TraceReader:
    """Lazily turns the rows of an open text file into :class:`Event` objects."""

    def __init__(self, stream: TextIO, schema: TraceSchema, spec: AnalyzedSpec):
        self.schema = schema
        self._rows = csv.reader(stream, delimiter=schema.delimiter)
        try:
            header = [h.strip() for h in next(self._rows)]
        except StopIteration:
            raise FormatError("trace has no header row") from None
        self.header = header
        self._time_index = header.index(schema.time_column) if schema.time_column in header else -1
        self.columns = [
            (pos, column, stream, value_parser(sem))
            for column, (pos, stream, sem) in schema.resolve(header, spec).items()
        ]
        self.row = 1
        self.last_t: Optional[int] = None

    def __iter__(self) -> Iterator[Event]:
        while True:
            event = read_trace_row(self)
            if event is None:
                return
            yield event


def read_trace_row(reader: TraceReader) -> Optional[Event]:
    """Next event, or None at the end of the trace."""
    unit = reader.schema.time_unit
    for cells in reader._rows:
        reader.row += 1
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) > len(reader.header):
            raise FormatError(f"expected {len(reader.header)} cells, got {len(cells)}", reader.row)
        updates = {}
        for pos, column, stream, parse in reader.columns:
            text = cells[pos].strip() if pos < len(cells) else ""
            if not text:
                continue
            try:
                updates[stream] = parse(text)
            except ValueError as exc:
                raise FormatError(str(exc), reader.row, column) from None
        if not updates:
            continue
        try:
            t = parse_time(cells[reader._time_index].strip(), unit)
        except (ValueError, IndexError) as exc:
            raise FormatError(str(exc), reader.row, reader.schema.time_column) from None
        if reader.last_t is not None and t < reader.last_t:
            raise FormatError(f"time goes backwards ({t} ns after {reader.last_t} ns)", reader.row)
        reader.last_t = t
        return Event(t, updates)
    return None


# -- sinks --------------------------------------------------------------------------

VERDICT_FIELDS = ("t_ns", "trigger_id", "message", "kind")


def verdict_record(v: Verdict) -> str:
    """One JSON object per line, fields in the order t_ns, trigger_id, message, kind."""
    return json.dumps(dict(zip(VERDICT_FIELDS, (v.t, v.trigger_id, v.message, v.kind))), ensure_ascii=False)


def parse_verdict_line(line: str) -> Verdict:
    data = json.loads(line)
    return Verdict(int(data["t_ns"]), int(data["trigger_id"]), data["message"], data["kind"])


def read_verdicts(stream: TextIO) -> list[Verdict]:
    return [parse_verdict_line(line) for line in stream if line.strip()]


class JsonlSink:
    def __init__(self, stream: TextIO):
        self.stream = stream

    def __call__(self, verdict: Verdict) -> None:
        self.stream.write(verdict_record(verdict) + "\n")


class ListSink(list):
    def __call__(self, verdict: Verdict) -> None:
        self.append(verdict)


# -- replay -------------------------------------------------------------------------


@dataclass
class ReplaySummary:
    events: int
    verdicts: int
    by_trigger: dict[int, int]
    peak_storage: int
    last_t: Optional[int]
    wall_seconds: float = field(default=0.0, compare=False)
    worst_jitter_ns: Optional[int] = field(default=None, compare=False)

    def table(self, spec: Optional[AnalyzedSpec] = None) -> str:
        lines = [
            f"events:        {self.events}",
            f"verdicts:      {self.verdicts}",
            f"peak storage:  {self.peak_storage} B",
            f"wall time:     {self.wall_seconds:.3f} s",
        ]
        if self.worst_jitter_ns is not None:
            lines.append(f"worst jitter:  {self.worst_jitter_ns / 1e6:.3f} ms")
        messages = {}
        if spec is not None:
            messages = {s.trigger_id: s.message for s in spec.triggers}
        for tid in sorted(self.by_trigger):
            label = messages.get(tid, "runtime fault" if tid < 0 else "")
            lines.append(f"  trigger {tid:>3} x{self.by_trigger[tid]:<7} {label}")
        return "\n".join(lines) + "\n"


_SPIN_NS = 1_500_000  # busy-wait the last stretch before a deadline


def _wait_until(target_ns: int) -> int:
    """Sleep until the perf-counter reaches ``target_ns``; returns the lateness."""
    now = time.perf_counter_ns()
    remaining = target_ns - now
    if remaining > _SPIN_NS:
        time.sleep((remaining - _SPIN_NS) / 1e9)
    while time.perf_counter_ns() < target_ns:
        pass
    return time.perf_counter_ns() - target_ns


def replay(
    spec: AnalyzedSpec,
    events: Iterable[Event],
    mode: str = FAST,
    sinks: Sequence[Callable[[Verdict], None]] = (),
    *,
    start: int = 0,
    until: Optional[int] = None,
    monitor: Optional[Monitor] = None,
) -> ReplaySummary:
    """Feed ``events`` to a fresh monitor and finish at the last timestamp.

    ``until`` extends the run past the last event (deadlines keep firing).
    """
    if mode not in (FAST, REALTIME):
        raise ConfigError(f"unknown replay mode {mode!r}")
    m = monitor if monitor is not None else new_monitor(spec, start)
    counts: Counter = Counter()
    total = 0
    worst = 0 if mode == REALTIME else None

    def emit(verdicts: list[Verdict]) -> None:
        nonlocal total
        for v in verdicts:
            counts[v.trigger_id] += 1
            total += 1
            for sink in sinks:
                sink(v)

    wall0 = time.perf_counter_ns()
    n = 0
    last_t: Optional[int] = None

    if mode == FAST:
        for event in events:
            emit(m.accept_event(event))
            n += 1
            last_t = event.t
    else:

        def wall_for(t: int) -> int:
            return wall0 + (t - start)

        for event in events:
            # Deadlines between events are served on time.
            due = m.next_deadline()
            while due is not None and due < event.t:
                late = _wait_until(wall_for(due))
                worst = max(worst, late)
                emit(m.advance_to(due))
                due = m.next_deadline()
            late = _wait_until(wall_for(event.t))
            worst = max(worst, late)
            emit(m.accept_event(event))
            n += 1
            last_t = event.t

    end = until if until is not None else last_t
    if end is not None and end >= m.now:
        if mode == REALTIME:
            due = m.next_deadline()
            while due is not None and due <= end:
                worst = max(worst, _wait_until(wall_for(due)))
                emit(m.advance_to(due))
                due = m.next_deadline()
        emit(m.advance_to(end))
    wall = (time.perf_counter_ns() - wall0) / 1e9
    return ReplaySummary(
        events=n,
        verdicts=total,
        by_trigger=dict(sorted(counts.items())),
        peak_storage=m.peak_storage,
        last_t=last_t,
        wall_seconds=wall,
        worst_jitter_ns=worst,
    )


def replay_file(
    spec: AnalyzedSpec,
    path: str,
    schema: Optional[TraceSchema] = None,
    mode: str = FAST,
    sinks: Sequence[Callable[[Verdict], None]] = (),
    **kwargs,
) -> ReplaySummary:
    schema = schema or TraceSchema()
    with open(path, newline="", encoding="utf-8") as fh:
        return replay(spec, TraceReader(fh, schema, spec), mode, sinks, **kwargs)


# -- synthetic traces -----------------------------------------------------------------


def write_trace(stream: TextIO, columns: Sequence[str], rows: Iterable[Sequence], time_column: str = "time") -> int:
    """Write rows ``(t_seconds, v1, v2, ...)``; None cells stay empty."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([time_column, *columns])
    count = 0
    for row in rows:
        writer.writerow(["" if c is None else (repr(c) if isinstance(c, float) else c) for c in row])
        count += 1
    return count


def events_from_rows(columns: Sequence[str], rows: Iterable[Sequence]) -> Iterator[Event]:
    """Events from rows ``(t_seconds, v1, ...)`` without going through text."""
    for row in rows:
        updates = {c: v for c, v in zip(columns, row[1:]) if v is not None}
        if updates:
            yield Event(int(round(row[0] * TIME_UNITS["s"])), updates)


def _grid(rate_hz: float, duration_s: float) -> Iterator[tuple[int, float]]:
    n = int(round(duration_s * rate_hz))
    for k in range(1, n + 1):
        yield k, k / rate_hz


def ramp_rows(columns: Sequence[str], rate_hz: float = 100.0, duration_s: float = 10.0, slope: float = 0.01):
    """Every column rises linearly from 0 at ``slope`` per second."""
    for _, t in _grid(rate_hz, duration_s):
        yield (t, *([slope * t] * len(columns)))


SPEED_COLUMNS = ("speed_h", "speed_v")


def spike_rows(
    rate_hz: float = 10.0,
    duration_s: float = 60.0,
    spike_times: Sequence[float] = (20.0, 40.0),
    spike: float = 1.0,
    seed: int = 7,
):
    """Calm GPS speeds with small noise plus horizontal spikes at ``spike_times``.

    Yields ``(t, speed_h, speed_v)``; spike instants are snapped to the grid.
    """
    rng = random.Random(seed)
    spikes = {int(round(s * rate_hz)) for s in spike_times}
    for k, t in _grid(rate_hz, duration_s):
        h = 0.5 + rng.uniform(-0.05, 0.05)
        v = 0.2 + rng.uniform(-0.05, 0.05)
        if k in spikes:
            h += spike
        yield (t, round(h, 6), round(v, 6))


CROSS_COLUMNS = ("speed_h", "speed_v", "acc_x", "acc_y", "acc_z")


def cross_validation_rows(rate_hz: float = 100.0, duration_s: float = 3600.0, seed: int = 11):
    """Smooth GPS speeds and IMU accelerations with noise, all columns every sample."""
    rng = random.Random(seed)
    for _, t in _grid(rate_hz, duration_s):
        yield (
            t,
            1.0 + 0.5 * math.sin(t / 30.0) + rng.gauss(0.0, 0.01),
            0.1 * math.cos(t / 20.0) + rng.gauss(0.0, 0.01),
            0.2 * math.sin(t / 10.0) + rng.gauss(0.0, 0.02),
            0.2 * math.cos(t / 10.0) + rng.gauss(0.0, 0.02),
            9.81 + rng.gauss(0.0, 0.02),
        )


FENCE_COLUMNS = ("lat_in_degree", "lon_in_degree")


def crossing_waypoints(poly, depth: float = 0.15) -> list[tuple[float, float]]:
    """Waypoints that cross every face exactly once, alternating out and in.

    Around each face midpoint ``M`` with outward unit normal ``u`` the
    points ``I = M - depth*r*u`` and ``O = M + depth*r*u`` lie just inside
    and just outside (``r`` is the mean vertex distance from the centroid).
    The tour ``I0 O0 O1 I1 I2 O2 O3 I3 ...`` crosses face ``k`` on the leg
    between its own ``I`` and ``O`` and nowhere else for convex fences.
    """
    vertices = poly.vertices
    n = len(vertices)
    cx = sum(v[0] for v in vertices) / n
    cy = sum(v[1] for v in vertices) / n
    r = sum(math.hypot(v[0] - cx, v[1] - cy) for v in vertices) / n
    inner, outer = [], []
    for k in range(n):
        (ax, ay), (bx, by) = vertices[k], vertices[(k + 1) % n]
        mx, my = (ax + bx) / 2, (ay + by) / 2
        nx, ny = mx - cx, my - cy
        norm = math.hypot(nx, ny)
        ux, uy = nx / norm, ny / norm
        inner.append((mx - depth * r * ux, my - depth * r * uy))
        outer.append((mx + depth * r * ux, my + depth * r * uy))
    tour = []
    for k in range(n):
        tour += [inner[k], outer[k]] if k % 2 == 0 else [outer[k], inner[k]]
    return tour


def sample_path(waypoints: Sequence[tuple[float, float]], samples_per_leg: int = 25) -> list[tuple[float, float]]:
    """Straight-line samples between waypoints, starting at the first one."""
    path = [tuple(waypoints[0])]
    for (ax, ay), (bx, by) in zip(waypoints, waypoints[1:]):
        for j in range(1, samples_per_leg + 1):
            f = j / samples_per_leg
            path.append((ax + f * (bx - ax), ay + f * (by - ay)))
    return path


def trajectory_rows(path: Sequence[tuple[float, float]], rate_hz: float = 100.0):
    """Rows ``(t, lat, lon)`` for a sampled path, one sample per period."""
    for k, (lat, lon) in enumerate(path):
        yield ((k + 1) / rate_hz, lat, lon)
