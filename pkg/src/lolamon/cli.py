"""Command line entry point.

Exit status: 0 success, 1 specification errors, 2 usage or I/O problems,
3 a violation fired under ``--strict``.

Settings resolve as command-line flag, then environment variable, then
built-in default:

=================  ======================  ========
setting            environment             default
=================  ======================  ========
replay mode        ``LOLAMON_MODE``        fast
time column        ``LOLAMON_TIME_COLUMN`` time
time unit          ``LOLAMON_TIME_UNIT``   s
fence epsilon      ``LOLAMON_EPSILON``     1e-9
=================  ======================  ========
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from importlib import resources
from typing import Optional, Sequence

from . import __version__
from .engine import MonitorError
from .analysis import SpecificationError, analyze, format_report_jsonl, format_report_table
from .frontend import ParseError, parse_spec
from .traces import (
    FAST,
    REALTIME,
    ConfigError,
    FormatError,
    JsonlSink,
    TraceReader,
    TraceSchema,
    parse_bindings,
    replay,
)

EXIT_OK = 0
EXIT_SPEC = 1
EXIT_USAGE = 2
EXIT_STRICT = 3

ENV = {
    "mode": ("LOLAMON_MODE", FAST),
    "time_column": ("LOLAMON_TIME_COLUMN", "time"),
    "time_unit": ("LOLAMON_TIME_UNIT", "s"),
    "epsilon": ("LOLAMON_EPSILON", "1e-9"),
}

CORPUS_PREFIX = "corpus:"
VIOLATION_PREFIX = "VIOLATION"


class UsageError(Exception):
    pass


def setting(args: argparse.Namespace, name: str, environ=None) -> str:
    environ = os.environ if environ is None else environ
    value = getattr(args, name, None)
    if value is not None:
        return value
    var, default = ENV[name]
    return environ.get(var, default)


def read_source(path: str) -> str:
    """File contents; ``corpus:NAME`` reads a bundled specification."""
    try:
        if path.startswith(CORPUS_PREFIX):
            name = path[len(CORPUS_PREFIX):]
            return resources.files("lolamon.corpus").joinpath(f"{name}.lola").read_text(encoding="utf-8")
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def load_spec(path: str):
    """Parse and analyze; diagnostics go to stderr and raise SystemExit(1)."""
    source = read_source(path)
    try:
        return analyze(parse_spec(source))
    except ParseError as exc:
        print(f"{path}:{exc.line}:{exc.col}: ParseError: {exc}", file=sys.stderr)
    except SpecificationError as exc:
        for err in exc.errors:
            loc = f"{err.loc.line}:{err.loc.col}" if err.loc is not None else "?"
            print(f"{path}:{loc}: {err.kind}: {err.message}", file=sys.stderr)
    raise SystemExit(EXIT_SPEC)


def _write(path: Optional[str], text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


# -- subcommands ------------------------------------------------------------------


def cmd_analyze(args) -> int:
    spec = load_spec(args.spec)
    report = spec.report
    if args.format == "jsonl":
        _write(args.out, format_report_jsonl(report))
    else:
        counts = (
            f"{len(spec.inputs)} inputs, {len(spec.outputs)} outputs, "
            f"{len(spec.triggers)} triggers, {len(spec.layers)} layers\n\n"
        )
        _write(args.out, counts + format_report_table(report))
    return EXIT_OK


def cmd_replay(args) -> int:
    spec = load_spec(args.spec)
    mode = setting(args, "mode")
    if mode not in (FAST, REALTIME):
        raise UsageError(f"unknown mode {mode!r}")
    schema = TraceSchema(
        time_column=setting(args, "time_column"),
        time_unit=setting(args, "time_unit"),
        bindings=parse_bindings(args.bind) if args.bind else None,
        delimiter=args.delimiter,
    )
    until = None if args.until is None else int(round(args.until * 1e9))

    to_stdout = args.verdicts in (None, "-")
    try:
        out = sys.stdout if to_stdout else open(args.verdicts, "w", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {args.verdicts}: {exc}") from None
    violations = []

    def watch(verdict) -> None:
        if verdict.message.startswith(VIOLATION_PREFIX):
            violations.append(verdict)

    try:
        with open(args.trace, newline="", encoding="utf-8") as fh:
            reader = TraceReader(fh, schema, spec)
            summary = replay(spec, reader, mode, [JsonlSink(out), watch], until=until)
    except OSError as exc:
        raise UsageError(f"cannot read {args.trace}: {exc}") from None
    finally:
        if not to_stdout:
            out.close()

    summary_stream = sys.stderr if to_stdout else sys.stdout
    if args.summary_json:
        record = asdict(summary)
        record["by_trigger"] = {str(k): v for k, v in summary.by_trigger.items()}
        summary_stream.write(json.dumps(record, sort_keys=True) + "\n")
    else:
        summary_stream.write(summary.table(spec))
    if args.strict and violations:
        return EXIT_STRICT
    return EXIT_OK


def _epsilon(args) -> float:
    try:
        eps = float(setting(args, "epsilon"))
    except ValueError:
        raise UsageError("epsilon must be a number") from None
    if not eps >= 0:
        raise UsageError("epsilon must be non-negative")
    return eps


def cmd_fence_gen(args) -> int:
    from .fence import FenceError, generate_fence_spec, parse_polygon

    eps = _epsilon(args)
    text = read_source(args.polygon)
    try:
        spec = generate_fence_spec(parse_polygon(text), eps)
    except FenceError as exc:
        raise UsageError(f"{args.polygon}: {exc}") from None
    _write(args.out, spec)
    return EXIT_OK


def _face_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    try:
        first = int(lo)
        last = int(hi) if sep else first
    except ValueError:
        raise UsageError(f"face range must look like 1..14, got {text!r}") from None
    if first < 0 or last < first:
        raise UsageError(f"bad face range {text!r}")
    return range(first, last + 1)


def cmd_report(args) -> int:
    if args.faces is not None:
        from .fence import face_scaling_report, format_scaling_table

        eps = _epsilon(args)
        rows = face_scaling_report(_face_range(args.faces), eps)
        if args.format == "jsonl":
            _write(args.out, "".join(json.dumps(asdict(r)) + "\n" for r in rows))
        else:
            _write(args.out, format_scaling_table(rows))
        return EXIT_OK
    if args.spec is None:
        raise UsageError("report needs a specification or --faces")
    spec = load_spec(args.spec)
    text = format_report_jsonl(spec.report) if args.format == "jsonl" else format_report_table(spec.report)
    _write(args.out, text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lolamon", description="Stream-based runtime monitoring.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    spec_help = "specification file, '-' for stdin, or corpus:NAME"

    p = sub.add_parser("analyze", help="check a specification and print its memory report")
    p.add_argument("spec", help=spec_help)
    p.add_argument("--format", choices=("table", "jsonl"), default="table")
    p.add_argument("-o", "--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_analyze)

    for name, strict in (("replay", False), ("check", True)):
        p = sub.add_parser(
            name,
            help="replay a trace" if not strict else "replay a trace; exit 3 on any violation",
        )
        p.add_argument("spec", help=spec_help)
        p.add_argument("trace", help="CSV trace with a header row")
        p.add_argument("--mode", choices=(FAST, REALTIME), default=None)
        p.add_argument("--time-column", dest="time_column", default=None)
        p.add_argument("--time-unit", dest="time_unit", choices=("s", "ms", "us", "ns"), default=None)
        p.add_argument(
            "--bind",
            action="append",
            metavar="COLUMN=INPUT",
            help="bind a column to an input (repeatable); default binds columns by name",
        )
        p.add_argument("--delimiter", default=",")
        p.add_argument("--until", type=float, metavar="SECONDS", help="keep time running until this instant")
        p.add_argument("--verdicts", metavar="PATH", help="verdict JSONL destination (default stdout)")
        p.add_argument("--summary-json", action="store_true", help="print the summary as one JSON object")
        if strict:
            p.set_defaults(strict=True)
        else:
            p.add_argument("--strict", action="store_true", help="exit 3 if any VIOLATION trigger fired")
        p.set_defaults(func=cmd_replay)

    p = sub.add_parser("fence-gen", help="generate a geo-fence specification from a polygon file")
    p.add_argument("polygon", help="file with one 'lat,lon' vertex (degrees) per line")
    p.add_argument("--eps", dest="epsilon", default=None, help="slope tolerance (radians)")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_fence_gen)

    p = sub.add_parser("report", help="memory report for a spec, or a face-scaling table")
    p.add_argument("spec", nargs="?", help=spec_help)
    p.add_argument("--faces", metavar="LO..HI", help="scaling report over generated fences")
    p.add_argument("--eps", dest="epsilon", default=None)
    p.add_argument("--format", choices=("table", "jsonl"), default="table")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as exc:
        print(f"error: {args.trace}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MonitorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
