import json
import subprocess
import sys

import pytest

from lolamon.cli import EXIT_OK, EXIT_SPEC, EXIT_STRICT, EXIT_USAGE, main
from lolamon.fence import format_polygon, synthetic_fence
from lolamon.traces import (
    FENCE_COLUMNS,
    crossing_waypoints,
    sample_path,
    trajectory_rows,
    write_trace,
)


@pytest.fixture
def fence_files(tmp_path):
    poly = synthetic_fence(12)
    poly_path = tmp_path / "fence.poly"
    poly_path.write_text(format_polygon(poly) + "\n")
    trace = tmp_path / "path.csv"
    with open(trace, "w") as fh:
        write_trace(fh, FENCE_COLUMNS, trajectory_rows(sample_path(crossing_waypoints(poly))))
    return poly_path, trace


def test_analyze_corpus(capsys):
    assert main(["analyze", "corpus:validation"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("6 inputs")
    assert out.rstrip().endswith("358 B")


def test_analyze_jsonl(capsys):
    assert main(["analyze", "corpus:height", "--format", "jsonl"]) == EXIT_OK
    last = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert last["bytes"] == 1452


@pytest.mark.parametrize(
    "source, kind",
    [("output a := b\n", "NameError"), ("input x: Int8\noutput a := (x\n", "ParseError")],
)
def test_spec_errors_exit_1(tmp_path, capsys, source, kind):
    path = tmp_path / "bad.lola"
    path.write_text(source)
    assert main(["analyze", str(path)]) == EXIT_SPEC
    err = capsys.readouterr().err
    assert err.startswith(f"{path}:") and kind in err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["analyze"],
        ["analyze", "/nonexistent/spec.lola"],
        ["report"],
        ["report", "--faces", "3..1"],
        ["report", "--faces", "x"],
        ["report", "--faces", "1..3", "--eps", "abc"],
        ["replay", "corpus:height", "/nonexistent.csv"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == EXIT_USAGE


def test_fence_gen_then_analyze(fence_files, tmp_path, capsys):
    poly_path, _ = fence_files
    out = tmp_path / "fence.lola"
    assert main(["fence-gen", str(poly_path), "-o", str(out)]) == EXIT_OK
    assert main(["analyze", str(out)]) == EXIT_OK
    assert capsys.readouterr().out.startswith("2 inputs, 49 outputs, 12 triggers")


def test_fence_gen_rejects_two_vertices(tmp_path, capsys):
    path = tmp_path / "line.poly"
    path.write_text("1,2\n3,4\n")
    assert main(["fence-gen", str(path)]) == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_scaling_report_rows(capsys):
    assert main(["report", "--faces", "1..14", "--format", "jsonl"]) == EXIT_OK
    rows = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert [r["faces"] for r in rows] == list(range(1, 15))
    assert len({b["total_bytes"] - a["total_bytes"] for a, b in zip(rows, rows[1:])}) == 1


def test_check_strict_on_crossings(fence_files, tmp_path, capsys):
    poly_path, trace = fence_files
    spec = tmp_path / "fence.lola"
    main(["fence-gen", str(poly_path), "-o", str(spec)])
    capsys.readouterr()
    assert main(["check", str(spec), str(trace)]) == EXIT_STRICT
    captured = capsys.readouterr()
    verdicts = [json.loads(line) for line in captured.out.splitlines()]
    assert len(verdicts) == 12
    assert "verdicts:      12" in captured.err
    # replay without --strict reports the same but exits 0
    assert main(["replay", str(spec), str(trace)]) == EXIT_OK


def test_check_clean_trace_exits_0(tmp_path, capsys):
    trace = tmp_path / "calm.csv"
    trace.write_text("time,height\n0.5,100.0\n1.5,101.0\n")
    assert main(["check", "corpus:height", str(trace)]) == EXIT_OK
    assert capsys.readouterr().out == ""


def test_verdicts_file_moves_summary_to_stdout(tmp_path, capsys):
    trace = tmp_path / "empty.csv"
    trace.write_text("time,gps_x,num_sat,imu_acc_x\n")
    out = tmp_path / "v.jsonl"
    args = ["replay", "corpus:gps_imu", str(trace), "--until", "3", "--verdicts", str(out), "--summary-json"]
    assert main(args) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["events"] == 0
    assert summary["verdicts"] == len(out.read_text().splitlines())


def test_environment_and_flag_precedence(tmp_path, capsys, monkeypatch):
    trace = tmp_path / "t.csv"
    trace.write_text("ts,height\n500,1.0\n")
    monkeypatch.setenv("LOLAMON_TIME_COLUMN", "ts")
    monkeypatch.setenv("LOLAMON_TIME_UNIT", "ms")
    assert main(["replay", "corpus:height", str(trace), "--summary-json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().err)["last_t"] == 500_000_000
    # a flag beats the environment
    assert main(["replay", "corpus:height", str(trace), "--time-unit", "s", "--summary-json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().err)["last_t"] == 500_000_000_000
    monkeypatch.setenv("LOLAMON_MODE", "bogus")
    assert main(["replay", "corpus:height", str(trace)]) == EXIT_USAGE


def test_bad_trace_row_exit_2(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    trace.write_text("time,height\n0.1,oops\n")
    assert main(["replay", "corpus:height", str(trace)]) == EXIT_USAGE
    assert "row 2" in capsys.readouterr().err


def test_module_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "lolamon", "analyze", "corpus:gps_imu"], capture_output=True, text=True
    )
    assert result.returncode == 0
    assert result.stdout.rstrip().endswith("79 B")
