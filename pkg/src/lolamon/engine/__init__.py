"""Online monitor: compiled expressions, scheduling and verdicts."""

from .compile import LayeringViolation, NoValue
from .monitor import (
    EVENT_BASED,
    PERIODIC,
    RUNTIME,
    Event,
    Monitor,
    MonitorError,
    Verdict,
    accept_event,
    advance_to,
    new_monitor,
    seconds,
)

__all__ = [
    "EVENT_BASED",
    "PERIODIC",
    "RUNTIME",
    "Event",
    "LayeringViolation",
    "Monitor",
    "MonitorError",
    "NoValue",
    "Verdict",
    "accept_event",
    "advance_to",
    "new_monitor",
    "seconds",
]
