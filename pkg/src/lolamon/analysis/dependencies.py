"""Dependency graph, cycle detection and evaluation layers.

Edges point from a stream to the streams it reads at the current instant:
plain reads, sample-and-hold and window targets. Negative offsets read the
past and therefore carry no ordering constraint.
"""

from __future__ import annotations

from ..frontend import ast
from .model import AnalysisError


def same_instant_targets(expr: ast.Expr) -> list[str]:
    names = []
    for node in ast.walk(expr):
        if isinstance(node, ast.StreamRef):
            names.append(node.name)
        elif isinstance(node, (ast.Hold, ast.Window)):
            names.append(node.stream)
    return list(dict.fromkeys(names))


def dependency_graph(exprs: dict[str, ast.Expr]) -> dict[str, list[str]]:
    return {name: same_instant_targets(expr) for name, expr in exprs.items()}


def find_cycles(graph: dict[str, list[str]]) -> list[list[str]]:
    """Strongly connected components that form cycles (Tarjan, iterative)."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    cycles: list[list[str]] = []
    counter = 0

    for root in graph:
        if root in index:
            continue
        work = [(root, iter(graph.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, successors = work[-1]
            advanced = False
            for succ in successors:
                if succ not in graph:
                    continue
                if succ not in index:
                    index[succ] = low[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(graph.get(succ, ()))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                if len(component) > 1 or node in graph.get(node, ()):
                    cycles.append(sorted(component))
    return cycles


def check_cycles(graph: dict[str, list[str]], locs: dict[str, ast.Loc]) -> list[AnalysisError]:
    errors = []
    for component in find_cycles(graph):
        members = " -> ".join(component + [component[0]])
        errors.append(
            AnalysisError(
                "CycleError",
                f"streams depend on themselves at the same instant: {members}; "
                "break the cycle with .offset(by: -n)",
                locs.get(component[0], ast.NOWHERE),
            )
        )
    return errors


def compute_layers(graph: dict[str, list[str]], inputs: list[str], order: list[str]) -> dict[str, int]:
    """Longest-path layering; inputs sit in layer 0. ``graph`` must be acyclic."""
    layer = {name: 0 for name in inputs}

    def visit(name: str) -> int:
        if name in layer:
            return layer[name]
        deps = [d for d in graph.get(name, ()) if d in layer or d in graph]
        layer[name] = 1 + max((visit(d) for d in deps), default=0)
        return layer[name]

    for name in order:
        visit(name)
    return layer
