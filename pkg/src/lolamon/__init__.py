"""Stream-based runtime monitoring: specification language, static
analysis, bounded-memory evaluation and geofence generation."""

from .analysis import SpecificationError, analyze, analyze_source
from .engine import Event, Monitor, Verdict, new_monitor
from .frontend import ParseError, parse_spec

__version__ = "0.1.0"

__all__ = [
    "Event",
    "Monitor",
    "ParseError",
    "SpecificationError",
    "Verdict",
    "analyze",
    "analyze_source",
    "new_monitor",
    "parse_spec",
]
