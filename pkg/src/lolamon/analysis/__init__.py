"""Static analysis: names, types, pacing, evaluation order and memory."""

from __future__ import annotations

from ..frontend import ast
from ..frontend.ast import SpecificationAst
from ..types import SemType
from .dependencies import check_cycles, compute_layers, dependency_graph
from .memory import build_report, compute_memory_bounds, format_report_jsonl, format_report_table
from .model import (
    INPUT,
    OUTPUT,
    TRIGGER,
    AnalysisError,
    AnalyzedSpec,
    EventBased,
    PacingType,
    Periodic,
    ResourceReport,
    SpecificationError,
    StreamInfo,
    WindowDescriptor,
    trigger_name,
)
from .pacing import check_pacing, infer_pacing
from .typecheck import check_types, infer_types, resolve, window_result


def _referenced(expr: ast.Expr):
    for node in ast.walk(expr):
        if isinstance(node, ast.StreamRef):
            yield node.name, node
        elif isinstance(node, (ast.Offset, ast.Hold, ast.Window)):
            yield node.stream, node


def check_names(spec: SpecificationAst) -> list[AnalysisError]:
    declared = {d.name for d in spec.inputs} | {d.name for d in spec.outputs}
    errors = []
    exprs = [(o.name, o.expr) for o in spec.outputs]
    exprs += [(f"trigger {i}", t.expr) for i, t in enumerate(spec.triggers)]
    for owner, expr in exprs:
        for name, node in _referenced(expr):
            if name not in declared:
                errors.append(
                    AnalysisError("NameError", f"unknown stream {name!r} in {owner}", node.loc)
                )
    return errors


def analyze(spec: SpecificationAst) -> AnalyzedSpec:
    """Run every check; raises :class:`SpecificationError` listing all problems."""
    errors = check_names(spec)
    types, node_types, type_errors = check_types(spec)
    errors += type_errors
    pacing, pacing_errors = check_pacing(spec)
    errors += pacing_errors

    exprs = {o.name: o.expr for o in spec.outputs}
    exprs.update({trigger_name(i): t.expr for i, t in enumerate(spec.triggers)})
    locs = {o.name: o.loc for o in spec.outputs}
    locs.update({trigger_name(i): t.loc for i, t in enumerate(spec.triggers)})
    graph = dependency_graph(exprs)
    errors += check_cycles(graph, locs)
    if errors:
        raise SpecificationError(errors)

    input_names = [d.name for d in spec.inputs]
    layer = compute_layers(graph, input_names, list(exprs))

    streams: list[StreamInfo] = []
    for d in spec.inputs:
        streams.append(StreamInfo(d.name, INPUT, len(streams), d.type, pacing[d.name], 0, loc=d.loc))
    for o in spec.outputs:
        streams.append(
            StreamInfo(o.name, OUTPUT, len(streams), types[o.name], pacing[o.name], layer[o.name], o.expr, loc=o.loc)
        )
    for i, t in enumerate(spec.triggers):
        name = trigger_name(i)
        streams.append(
            StreamInfo(
                name,
                TRIGGER,
                len(streams),
                SemType.Bool,
                pacing[name],
                layer[name],
                t.expr,
                message=t.message,
                trigger_id=i,
                loc=t.loc,
            )
        )

    depth = max((s.layer for s in streams), default=-1)
    layers = [[s.name for s in streams if s.layer == k] for k in range(depth + 1)]

    windows: list[WindowDescriptor] = []
    for s in streams:
        if s.expr is None:
            continue
        seen = set()
        for node in ast.walk(s.expr):
            if isinstance(node, ast.Window) and node not in seen:
                seen.add(node)
                value = types[node.stream]
                windows.append(
                    WindowDescriptor(
                        node.stream,
                        node.duration,
                        node.function,
                        s.name,
                        value,
                        resolve(window_result(node.function, value)),
                        node,
                    )
                )

    resolved = {k: resolve(v) for k, v in node_types.items()}
    return AnalyzedSpec(
        ast=spec,
        streams=streams,
        layers=layers,
        windows=windows,
        report=build_report(streams, windows),
        expr_types=resolved,
    )


def analyze_source(source: str) -> AnalyzedSpec:
    from ..frontend import parse_spec

    return analyze(parse_spec(source))


__all__ = [
    "AnalysisError",
    "AnalyzedSpec",
    "EventBased",
    "PacingType",
    "Periodic",
    "ResourceReport",
    "SpecificationError",
    "StreamInfo",
    "WindowDescriptor",
    "analyze",
    "analyze_source",
    "check_names",
    "compute_memory_bounds",
    "format_report_jsonl",
    "format_report_table",
    "infer_pacing",
    "infer_types",
    "trigger_name",
]
