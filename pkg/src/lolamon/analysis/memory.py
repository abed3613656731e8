"""Static memory bounds.

Accounting covers stored stream values only, at declared widths:

* a stream keeps ``1 + d`` values where ``d`` is the deepest negative
  offset anyone reads it with (triggers keep nothing);
* a finite window of length ``d`` evaluated at ``f`` Hz keeps
  ``ceil(d * f)`` panes; an unbounded window keeps no panes, only one
  running state.

Per-pane state by aggregation: count 8 bytes; sum and min/max one value;
avg one value-width sum plus an 8 byte count; integral two areas (the pane
interior and the trapezoid linking it to the previous pane). Integral
windows additionally cache the previous sample: value, 8 byte timestamp
and a 1 byte validity flag.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Iterable, Optional

from ..frontend import ast
from ..frontend.ast import WindowFunction
from ..types import SemType
from .model import (
    TRIGGER,
    AnalyzedSpec,
    Periodic,
    ResourceReport,
    StreamInfo,
    StreamRecord,
    WindowDescriptor,
    WindowRecord,
)

COUNTER_BYTES = 8
TIMESTAMP_BYTES = 8
FLAG_BYTES = 1


def pane_count(duration: Optional[ast.Duration], hz: Fraction) -> int:
    if duration is None:
        return 0
    return math.ceil(duration.seconds * hz)


def pane_state_bytes(function: WindowFunction, value: SemType, result: SemType) -> int:
    if function is WindowFunction.COUNT:
        return COUNTER_BYTES
    if function is WindowFunction.AVG:
        return value.width + COUNTER_BYTES
    if function is WindowFunction.INTEGRAL:
        return 2 * result.width
    return value.width


def window_record(desc: WindowDescriptor, evaluator: StreamInfo) -> WindowRecord:
    assert isinstance(evaluator.pacing, Periodic)
    panes = pane_count(desc.duration, evaluator.pacing.hz)
    pane_bytes = pane_state_bytes(desc.function, desc.value_type, desc.result_type)
    fixed = 0
    if desc.duration is None:
        # a single running state; an unbounded integral needs one area only
        fixed = desc.result_type.width if desc.function is WindowFunction.INTEGRAL else pane_bytes
    if desc.function is WindowFunction.INTEGRAL:
        fixed += desc.value_type.width + TIMESTAMP_BYTES + FLAG_BYTES
    return WindowRecord(
        evaluator=desc.evaluator,
        target=desc.target,
        function=desc.function,
        duration=desc.duration,
        panes=panes,
        pane_bytes=pane_bytes,
        fixed_bytes=fixed,
    )


def offset_depths(streams: Iterable[StreamInfo]) -> dict[str, int]:
    depth: dict[str, int] = {}
    for s in streams:
        if s.expr is None:
            continue
        for node in ast.walk(s.expr):
            if isinstance(node, ast.Offset):
                depth[node.stream] = max(depth.get(node.stream, 0), -node.offset)
    return depth


def build_report(streams: list[StreamInfo], windows: list[WindowDescriptor]) -> ResourceReport:
    depths = offset_depths(streams)
    by_name = {s.name: s for s in streams}
    records = [
        StreamRecord(s.name, s.type, 1 + depths.get(s.name, 0)) for s in streams if s.kind != TRIGGER
    ]
    return ResourceReport(records, [window_record(w, by_name[w.evaluator]) for w in windows])


def compute_memory_bounds(analyzed: AnalyzedSpec) -> ResourceReport:
    return build_report(analyzed.streams, analyzed.windows)


# -- rendering -----------------------------------------------------------------


def _display(name: str) -> str:
    return name.replace("trigger#", "trigger ")


def format_report_table(report: ResourceReport) -> str:
    lines = [f"{'stream':<28} {'type':<8} {'slots':>5} {'bytes':>6}"]
    for r in report.streams:
        lines.append(f"{r.name:<28} {r.type.name:<8} {r.slots:>5} {r.bytes:>6}")
    if report.windows:
        lines.append("")
        lines.append(
            f"{'window':<40} {'evaluated by':<22} {'panes':>5} {'pane B':>6} {'fixed B':>7} {'bytes':>6}"
        )
        for w in report.windows:
            over = "inf" if w.duration is None else str(w.duration)
            label = f"{w.target}[{over}, {w.function.value}]"
            lines.append(
                f"{label:<40} {_display(w.evaluator):<22} {w.panes:>5} {w.pane_bytes:>6} "
                f"{w.fixed_bytes:>7} {w.bytes:>6}"
            )
    lines.append("")
    lines.append(f"stream storage: {report.stream_bytes} B")
    lines.append(f"window storage: {report.window_bytes} B")
    lines.append(f"total:          {report.total_bytes} B")
    return "\n".join(lines) + "\n"


def report_records(report: ResourceReport) -> list[dict]:
    """Structured form: one record per stream, per window, and a closing total.

    Stream records: ``{"record": "stream", "name", "type", "slots", "width", "bytes"}``.
    Window records: ``{"record": "window", "evaluator", "target", "function",
    "duration_s" (null when unbounded), "panes", "pane_bytes", "fixed_bytes", "bytes"}``.
    Total: ``{"record": "total", "stream_bytes", "window_bytes", "bytes"}``.
    """
    records = [
        {
            "record": "stream",
            "name": r.name,
            "type": r.type.name,
            "slots": r.slots,
            "width": r.type.width,
            "bytes": r.bytes,
        }
        for r in report.streams
    ]
    for w in report.windows:
        records.append(
            {
                "record": "window",
                "evaluator": _display(w.evaluator),
                "target": w.target,
                "function": w.function.value,
                "duration_s": None if w.duration is None else str(w.duration.seconds),
                "panes": w.panes,
                "pane_bytes": w.pane_bytes,
                "fixed_bytes": w.fixed_bytes,
                "bytes": w.bytes,
            }
        )
    records.append(
        {
            "record": "total",
            "stream_bytes": report.stream_bytes,
            "window_bytes": report.window_bytes,
            "bytes": report.total_bytes,
        }
    )
    return records


def format_report_jsonl(report: ResourceReport) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in report_records(report))
