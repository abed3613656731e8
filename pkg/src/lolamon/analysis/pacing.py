"""Pacing inference: when is each stream evaluated.

Inputs are evaluated when they receive a value. An ``@fHz`` annotation
makes a stream periodic. An unannotated stream takes its pacing from its
synchronous accesses (plain reads and offsets): event-based accesses
conjoin their input sets, periodic accesses must share one frequency.
Sample-and-hold and window reads impose no pacing constraint, but a window
is only legal in a periodic stream.
"""

from __future__ import annotations

from typing import Iterable, Optional

from ..frontend import ast
from .model import AnalysisError, EventBased, PacingType, Periodic, trigger_name


def sync_targets(expr: ast.Expr) -> list[tuple[str, ast.Expr]]:
    """Synchronously accessed streams with the accessing node."""
    found = []
    for node in ast.walk(expr):
        if isinstance(node, ast.StreamRef):
            found.append((node.name, node))
        elif isinstance(node, ast.Offset):
            found.append((node.stream, node))
    return found


def windows_in(expr: ast.Expr) -> list[ast.Window]:
    return [n for n in ast.walk(expr) if isinstance(n, ast.Window)]


def _combine(pacings: Iterable[PacingType]) -> Optional[PacingType]:
    pacings = list(pacings)
    if not pacings:
        return None
    if all(isinstance(p, EventBased) for p in pacings):
        return EventBased(frozenset().union(*(p.inputs for p in pacings)))
    if all(isinstance(p, Periodic) for p in pacings) and len({p.hz for p in pacings}) == 1:
        return pacings[0]
    return None


def check_pacing(spec: ast.SpecificationAst) -> tuple[dict[str, PacingType], list[AnalysisError]]:
    errors: list[AnalysisError] = []
    pacing: dict[str, Optional[PacingType]] = {d.name: EventBased(frozenset({d.name})) for d in spec.inputs}
    decls = [(o.name, o.frequency, o.expr, o) for o in spec.outputs]
    decls += [(trigger_name(i), t.frequency, t.expr, t) for i, t in enumerate(spec.triggers)]
    for name, freq, _, decl in decls:
        pacing[name] = None
        if freq is not None:
            if freq.period_ns is None:
                errors.append(
                    AnalysisError(
                        "PacingError",
                        f"frequency {freq.text}Hz has no whole-nanosecond period",
                        decl.loc,
                    )
                )
            else:
                pacing[name] = Periodic(freq)

    inferred = [(name, expr) for name, freq, expr, _ in decls if freq is None]
    for _ in range(len(inferred) + 1):
        changed = False
        for name, expr in inferred:
            known = [pacing[t] for t, _ in sync_targets(expr) if t != name and pacing.get(t) is not None]
            combined = _combine(known)
            if combined is not None and combined != pacing[name]:
                pacing[name] = combined
                changed = True
        if not changed:
            break

    for name, freq, expr, decl in decls:
        label = _label(name)
        own = pacing[name]
        if own is None:
            if freq is not None:
                continue  # bad frequency already reported
            targets = {t: pacing.get(t) for t, _ in sync_targets(expr) if t != name}
            if any(t not in pacing for t in targets):
                continue  # unknown names are reported by the name check
            if not targets:
                msg = f"cannot infer the pacing of {label}: it reads no stream synchronously; add an @<n>Hz annotation"
            else:
                listed = ", ".join(f"{t} is {p}" for t, p in targets.items() if p is not None)
                msg = f"{label} mixes incompatible pacings ({listed}); use .hold() for the periodic ones"
            errors.append(AnalysisError("PacingError", msg, decl.loc))
            continue
        for target, node in sync_targets(expr):
            other = pacing.get(target)
            if other is None or target == name:
                continue
            if isinstance(own, EventBased):
                if isinstance(other, Periodic):
                    errors.append(
                        AnalysisError(
                            "PacingError",
                            f"event-based {label} accesses periodic {target} synchronously; "
                            f"use {target}.hold().defaults(to: ...)",
                            node.loc,
                        )
                    )
                elif not other.inputs <= own.inputs:
                    errors.append(
                        AnalysisError(
                            "PacingError",
                            f"{label} ({own}) accesses {target} ({other}) which may lack a value",
                            node.loc,
                        )
                    )
            elif other != own:
                errors.append(
                    AnalysisError(
                        "PacingError",
                        f"{label} ({own}) accesses {target} ({other}) synchronously; "
                        f"use {target}.hold().defaults(to: ...)",
                        node.loc,
                    )
                )
        if isinstance(own, EventBased):
            for window in windows_in(expr):
                errors.append(
                    AnalysisError(
                        "PacingError",
                        f"window over {window.stream} in event-based {label}; "
                        "a window needs an evaluation frequency (@<n>Hz)",
                        window.loc,
                    )
                )
    return {k: v for k, v in pacing.items() if v is not None}, errors


def infer_pacing(spec: ast.SpecificationAst, types=None) -> dict[str, PacingType]:
    """Pacing of every stream; triggers are keyed ``trigger#<i>``."""
    from .model import SpecificationError

    pacing, errors = check_pacing(spec)
    if errors:
        raise SpecificationError(errors)
    return pacing


def _label(name: str) -> str:
    if name.startswith("trigger#"):
        return f"trigger {name[8:]}"
    return name
