import json
from fractions import Fraction
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lolamon.analysis import (
    EventBased,
    Periodic,
    SpecificationError,
    analyze_source,
    format_report_jsonl,
    format_report_table,
    infer_pacing,
    infer_types,
)
from lolamon.analysis.memory import pane_count
from lolamon.fence import face_scaling_report, generate_fence_spec, synthetic_fence
from lolamon.frontend import ast, parse_spec
from lolamon.types import SemType

HEIGHT = """\
input height: Float32
output avg_height @1Hz := height.aggregate(over: 2min, using: avg)
output δheight := abs(avg_height.hold().defaults(to: height) - height)
trigger δheight > 50.0 "WARNING: Suspicious jump in height."
"""


def corpus(name):
    return resources.files("lolamon.corpus").joinpath(f"{name}.lola").read_text(encoding="utf-8")


def error_kinds(source):
    with pytest.raises(SpecificationError) as info:
        analyze_source(source)
    return info.value.kinds(), info.value.errors


def test_height_pacing_and_layers():
    spec = analyze_source(HEIGHT)
    assert spec.pacing["avg_height"] == Periodic(ast.Frequency("1"))
    assert spec.pacing["δheight"] == EventBased(frozenset({"height"}))
    assert spec.layers[0] == ["height"]
    layer = {s.name: s.layer for s in spec.streams}
    assert layer["avg_height"] < layer["δheight"] < layer["trigger#0"]


def test_unknown_name():
    kinds, errors = error_kinds("output a := b")
    assert kinds == {"NameError"}
    assert "'b'" in errors[0].message


def test_offset_breaks_cycle():
    spec = analyze_source("input x: Int64\noutput a := a.offset(by: -1).defaults(to: 0) + x")
    assert spec.types["a"] is SemType.Int64
    assert spec.report.slots("a") == 2


def test_direct_cycle_rejected():
    kinds, _ = error_kinds("input x: Int64\noutput a := a + x")
    assert "CycleError" in kinds


def test_longer_cycle_names_members():
    kinds, errors = error_kinds("input x: Int8\noutput a := b + x\noutput b := c\noutput c := a")
    assert "CycleError" in kinds
    message = next(e.message for e in errors if e.kind == "CycleError")
    assert all(n in message for n in "abc")


def test_all_errors_collected():
    source = "input x: Float32\noutput a: UInt8 := x\noutput b := zz\noutput c := c + x"
    kinds, errors = error_kinds(source)
    assert {"TypeError", "NameError", "CycleError"} <= kinds
    assert len(errors) >= 3


def test_few_sat_conversion():
    types = infer_types(parse_spec("input num_sat: UInt8\noutput few_sat: UInt8 := Int(num_sat < 9)"))
    assert types["few_sat"] is SemType.UInt8


def test_narrowing_rejected():
    kinds, errors = error_kinds("input x: Float32\noutput a: UInt8 := x")
    assert kinds == {"TypeError"}
    assert "Float32" in errors[0].message and "UInt8" in errors[0].message


def test_cast_to_declared_type():
    spec = analyze_source(corpus("cross_validation"))
    assert spec.types["speed_h_diff"] is SemType.Float32


@pytest.mark.parametrize(
    "source, ok",
    [
        ("input a: UInt8\ninput b: UInt16\noutput c := a + b", True),
        ("input a: Float16\noutput c: Float32 := a", True),
        ("input a: Float64\noutput c: Float32 := a", False),
        ("input a: Int8\ninput b: UInt8\noutput c := a + b", False),
        ("input a: Int8\noutput c := a + 1.5", False),
        ("input a: Float32\noutput c := a + 1", True),
        ("input a: Float32\noutput c := a + 1.0", True),
        ("input a: Bool\noutput c := a + 1", False),
        ("input a: UInt8\noutput c := -a", False),
        ("input a: Int8\noutput c: Float32 := Float(a)", True),
        ("input a: Int8\noutput c := cast(a)", False),
        ("input a: Int8\noutput c: Float32 := Float32(a)", True),
        ("input a: Int8\ntrigger a \"x\"", False),
        ("input a: Int8\noutput c := if a > 0 then a else 0", True),
        ("input a: Int8\noutput c := if a then 1 else 0", False),
    ],
)
def test_type_rules(source, ok):
    if ok:
        analyze_source(source)
    else:
        assert "TypeError" in error_kinds(source)[0]


def test_hold_required_for_periodic_access():
    bad = HEIGHT.replace("avg_height.hold().defaults(to: height)", "avg_height")
    kinds, errors = error_kinds(bad)
    assert kinds == {"PacingError"}
    assert "hold" in errors[0].message


def test_periodic_trigger_pacing():
    spec = analyze_source("input gps_x: Float16\ntrigger @1Hz gps_x.aggregate(over: 3s, using: count) < 10 \"few\"")
    assert spec.pacing["trigger#0"] == Periodic(ast.Frequency("1"))


@pytest.mark.parametrize(
    "source",
    [
        "input x: Int8\noutput a := x.aggregate(over: 2s, using: count)",
        "input x: Int8\noutput a @1Hz := x\n",
        "input x: Int8\noutput a @1Hz := x.aggregate(over: 2s, using: count)\noutput b @2Hz := a",
        "input x: Int8\noutput a @3Hz := x.hold().defaults(to: 0)",
        "output a := 1",
    ],
)
def test_pacing_errors(source):
    assert "PacingError" in error_kinds(source)[0]


def test_event_conjunction():
    pacing = infer_pacing(parse_spec("input a: Int8\ninput b: Int8\noutput c := a + b\noutput d := c + a"))
    assert pacing["c"] == EventBased(frozenset({"a", "b"}))
    assert pacing["d"] == EventBased(frozenset({"a", "b"}))


# -- memory -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "seconds, hz, expected",
    [(120, 1, 120), (3, 1, 3), (10, 1, 10), (5, 1, 5), (Fraction(5, 2), 1, 3), (1, 10, 10), (3, Fraction(1, 2), 2)],
)
def test_pane_count(seconds, hz, expected):
    text = str(seconds) if isinstance(seconds, int) else f"{float(seconds)}"
    assert pane_count(ast.Duration(text, "s"), Fraction(hz)) == expected


# Byte figures worked out by hand from declared widths:
# slots * width per stream; panes * pane bytes + fixed bytes per window.
HAND_TOTALS = {
    # height 4, avg_height 4, δheight 4; 120 panes * (4 + 8)
    "height": 12 + 120 * 12,
    # streams 2+1+4+1+4+4; count 3*8, sum 5*1, two unbounded integrals 4 + (4+8+1)
    "gps_imu": 16 + 24 + 5 + 2 * 17,
    # streams 29 (behavior_num_sats keeps 2 slots); count 24, sum 5, three avg 10*(2+8)
    "validation": 29 + 24 + 5 + 3 * 100,
    # speed_h/speed_v 2 slots of 2 B, 7 Float32 streams; two avg 10*(4+8)
    "cross_validation": 8 + 28 + 8 + 240,
}


@pytest.mark.parametrize("name, total", sorted(HAND_TOTALS.items()))
def test_report_matches_hand_totals(name, total):
    assert analyze_source(corpus(name)).report.total_bytes == total


def test_two_minute_avg_has_120_panes():
    report = analyze_source(HEIGHT).report
    (window,) = report.windows
    assert window.panes == 120
    assert window.pane_bytes == 12


def test_unbounded_integral_is_constant():
    report = analyze_source(corpus("gps_imu")).report
    integrals = [w for w in report.windows if w.function is ast.WindowFunction.INTEGRAL]
    assert len(integrals) == 2
    assert all(w.panes == 0 and w.fixed_bytes == 17 for w in integrals)


def test_plain_spec_one_slot_each():
    report = analyze_source("input a: Int32\ninput b: Float64\noutput c := a + 1\ntrigger b > 1.0 \"m\"").report
    assert {r.name: r.slots for r in report.streams} == {"a": 1, "b": 1, "c": 1}
    assert report.total_bytes == 4 + 8 + 4


def test_report_total_is_sum_of_parts():
    report = analyze_source(corpus("validation")).report
    assert report.total_bytes == sum(r.bytes for r in report.streams) + sum(w.bytes for w in report.windows)


def test_report_renderings():
    report = analyze_source(corpus("gps_imu")).report
    table = format_report_table(report)
    assert table.rstrip().endswith(f"{report.total_bytes} B")
    records = [json.loads(line) for line in format_report_jsonl(report).splitlines()]
    assert records[-1] == {
        "record": "total",
        "stream_bytes": report.stream_bytes,
        "window_bytes": report.window_bytes,
        "bytes": report.total_bytes,
    }
    assert sum(r["bytes"] for r in records[:-1]) == report.total_bytes


@pytest.mark.parametrize("name", ["height", "gps_imu", "validation", "cross_validation", "geofence"])
def test_analysis_is_deterministic(name):
    a, b = analyze_source(corpus(name)), analyze_source(corpus(name))
    assert format_report_jsonl(a.report) == format_report_jsonl(b.report)
    assert a.layers == b.layers


def test_scaling_row_matches_corpus_fence():
    (row,) = face_scaling_report([12])
    assert row.total_bytes == analyze_source(corpus("geofence")).report.total_bytes
    assert analyze_source(generate_fence_spec(synthetic_fence(12))).report.total_bytes == row.total_bytes


def test_zero_faces_keeps_vehicle_streams():
    (row,) = face_scaling_report([0])
    assert row.triggers == 0
    # two Float32 inputs and eleven Float32 / one Bool vehicle streams; lat and lon keep 2 slots
    assert row.total_bytes == 2 * 4 + 2 * 8 + 10 * 4 + 1


# -- layering -----------------------------------------------------------------------


def _same_instant(expr):
    for node in ast.walk(expr):
        if isinstance(node, ast.StreamRef):
            yield node.name
        elif isinstance(node, (ast.Hold, ast.Window)):
            yield node.stream


@pytest.mark.parametrize("name", ["height", "gps_imu", "validation", "cross_validation", "geofence"])
def test_layers_respect_same_instant_reads(name):
    spec = analyze_source(corpus(name))
    layer = {s.name: s.layer for s in spec.streams}
    flat = [n for group in spec.layers for n in group]
    assert sorted(flat) == sorted(layer)
    for s in spec.streams:
        if s.expr is not None:
            for target in _same_instant(s.expr):
                assert layer[target] < s.layer


@st.composite
def chain_specs(draw):
    """Random acyclic event-based specs over two inputs."""
    n = draw(st.integers(1, 8))
    lines = ["input i0: Int64", "input i1: Int64"]
    names = ["i0", "i1"]
    for k in range(n):
        refs = draw(st.lists(st.sampled_from(names), min_size=1, max_size=3))
        past = draw(st.lists(st.sampled_from(names + [f"o{k}"]), max_size=2))
        terms = refs + [f"{p}.offset(by: -{draw(st.integers(1, 3))}).defaults(to: 0)" for p in past]
        lines.append(f"output o{k} := " + " + ".join(terms))
        names.append(f"o{k}")
    return "\n".join(lines)


@settings(max_examples=60, deadline=None)
@given(chain_specs())
def test_generated_specs_layer_soundly(source):
    spec = analyze_source(source)
    layer = {s.name: s.layer for s in spec.streams}
    for s in spec.streams:
        if s.expr is not None:
            for target in _same_instant(s.expr):
                assert layer[target] < s.layer
    for record in spec.report.streams:
        depth = max(
            [-n.offset for o in spec.outputs for n in ast.walk(o.expr) if isinstance(n, ast.Offset) and n.stream == record.name],
            default=0,
        )
        assert record.slots == 1 + depth
