"""Geo-fence specifications and a reference crossing oracle.

A fence is a closed polygon of (lat, lon) vertices in degrees. The
generated specification converts the vehicle position to radians, derives
the line through the previous and current position, and checks it against
every face. A face is described by constants inlined as literals: slope
``m`` and intercept ``b`` of ``lon = m * lat + b`` plus its bounding box.

Faces with (nearly) constant latitude have no finite slope and use a
variant of the face block that intersects the vehicle line with
``lat = const``.

Coordinates are planar; no great-circle correction is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

DEFAULT_EPSILON = 1e-9
# The truncated pi used by the fence template; kept verbatim so the
# generated text and the precomputed face constants agree.
PI_TEXT = "3.14159265359"

Point = tuple[float, float]


class FenceError(ValueError):
    """Invalid polygon or face."""


@dataclass(frozen=True)
class FaceParams:
    p1: Point
    p2: Point
    slope: Optional[float]
    intercept: Optional[float]
    min_lat: float
    max_lat: float
    min_lon: float
    max_lon: float
    vertical: bool

    @property
    def lat(self) -> float:
        """Latitude of a vertical face."""
        return self.p1[0]


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[Point, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple((float(a), float(b)) for a, b in self.vertices))
        n = len(self.vertices)
        if n < 3:
            raise FenceError(f"a fence needs at least 3 vertices, got {n}")
        for i, v in enumerate(self.vertices):
            if v == self.vertices[(i + 1) % n]:
                raise FenceError(f"vertices {i + 1} and {(i + 1) % n + 1} coincide")

    def faces(self) -> list[tuple[Point, Point]]:
        n = len(self.vertices)
        return [(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]

    def __len__(self) -> int:
        return len(self.vertices)


def to_radians(p: Point) -> Point:
    return (p[0] * 3.14159265359 / 180.0, p[1] * 3.14159265359 / 180.0)


def precompute_face(p1: Point, p2: Point, eps: float = DEFAULT_EPSILON) -> FaceParams:
    """Face constants for endpoints given in radians.

    Slope and intercept are computed exactly from the float endpoints and
    rounded once, so swapping the endpoints gives identical constants.
    """
    if tuple(p1) == tuple(p2):
        raise FenceError(f"face endpoints coincide: {p1}")
    lat1, lon1 = (Fraction(c) for c in p1)
    lat2, lon2 = (Fraction(c) for c in p2)
    vertical = abs(lat2 - lat1) <= Fraction(eps)
    slope = intercept = None
    if not vertical:
        m = (lon2 - lon1) / (lat2 - lat1)
        slope = float(m)
        intercept = float(lon1 - m * lat1)
    return FaceParams(
        p1=(float(p1[0]), float(p1[1])),
        p2=(float(p2[0]), float(p2[1])),
        slope=slope,
        intercept=intercept,
        min_lat=float(min(lat1, lat2)),
        max_lat=float(max(lat1, lat2)),
        min_lon=float(min(lon1, lon2)),
        max_lon=float(max(lon1, lon2)),
        vertical=vertical,
    )


# -- specification text ---------------------------------------------------------

_HEADER = """\
import math

// Declaring Inputs
input lat_in_degree: Float32
input lon_in_degree: Float32

// Transform Degree in Radian
output lat := lat_in_degree * {pi} / 180.0
output lon := lon_in_degree * {pi} / 180.0

// Vehicle Line
output lat_pre := lat.offset(by: -1).defaults(to: lat)
output delta_lat := lat - lat_pre

output lon_pre := lon.offset(by: -1).defaults(to: lon)
output delta_lon := lon - lon_pre

output is_fnc := abs(delta_lat) > {eps}

output m_v := if is_fnc then (delta_lon) / (delta_lat) else 0.0
output b_v := if is_fnc then lon - (m_v * lat) else 0.0

output min_lat_v := if lat < lat_pre then lat else lat_pre
output max_lat_v := if lat > lat_pre then lat else lat_pre

output min_lon_v := if lon < lon_pre then lon else lon_pre
output max_lon_v := if lon > lon_pre then lon else lon_pre
"""

_FACE = """\
// Polygonline {a}{b}
output intersect_{a}{b} := abs(m_v - {m}) > {eps}
output intersect_lat_{a}{b}
  := if is_fnc and intersect_{a}{b} then (b_v - {bl}) / ({m} - m_v) else lat
output intersect_lon_{a}{b} := {m} * intersect_lat_{a}{b} + {bl}
trigger intersect_{a}{b}
  and ((intersect_lat_{a}{b} > min_lat_v and intersect_lat_{a}{b} < max_lat_v)
  and (intersect_lon_{a}{b} > min_lon_v and intersect_lon_{a}{b} < max_lon_v))
  and ((intersect_lat_{a}{b} > {min_lat} and intersect_lat_{a}{b} < {max_lat})
  and (intersect_lon_{a}{b} > {min_lon} and intersect_lon_{a}{b} < {max_lon}))
  "VIOLATION: line crossing between {pa} and {pb}"
"""

# Constant-latitude face: the crossing latitude is the face's own.
_VERTICAL_FACE = """\
// Polygonline {a}{b} (constant latitude)
output intersect_{a}{b} := is_fnc
output intersect_lat_{a}{b} := if is_fnc then {lat} else lat
output intersect_lon_{a}{b} := m_v * intersect_lat_{a}{b} + b_v
trigger intersect_{a}{b}
  and ((intersect_lat_{a}{b} > min_lat_v and intersect_lat_{a}{b} < max_lat_v)
  and (intersect_lon_{a}{b} > min_lon_v and intersect_lon_{a}{b} < max_lon_v))
  and (intersect_lon_{a}{b} > {min_lon} and intersect_lon_{a}{b} < {max_lon})
  "VIOLATION: line crossing between {pa} and {pb}"
"""


def _lit(x: float) -> str:
    text = repr(float(x))
    return f"({text})" if x < 0 else text


def face_block(face: FaceParams, a: str, b: str, eps: float = DEFAULT_EPSILON) -> str:
    fields = dict(
        a=a,
        b=b,
        pa=a,
        pb=b,
        eps=_lit(eps),
        min_lat=_lit(face.min_lat),
        max_lat=_lit(face.max_lat),
        min_lon=_lit(face.min_lon),
        max_lon=_lit(face.max_lon),
    )
    if face.vertical:
        return _VERTICAL_FACE.format(lat=_lit(face.lat), **fields)
    return _FACE.format(m=_lit(face.slope), bl=_lit(face.intercept), **fields)


def generate_faces_spec(faces: Sequence[tuple[Point, Point]], eps: float = DEFAULT_EPSILON) -> str:
    """Specification for arbitrary faces given in degrees (need not close).

    Face ``k`` (0-based) is named ``p{k+1}p{k+2}``, except that the last
    face of a closed ring wraps around to ``p1``. With no faces only the
    vehicle-line streams remain.
    """
    if eps <= 0:
        raise FenceError("epsilon must be positive")
    closed = len(faces) >= 3 and tuple(faces[-1][1]) == tuple(faces[0][0])
    parts = [_HEADER.format(pi=PI_TEXT, eps=_lit(eps))]
    for k, (p1, p2) in enumerate(faces):
        face = precompute_face(to_radians(p1), to_radians(p2), eps)
        j = 1 if closed and k == len(faces) - 1 else k + 2
        parts.append(face_block(face, f"p{k + 1}", f"p{j}", eps))
    return "\n".join(parts)


def generate_fence_spec(poly: Polygon, eps: float = DEFAULT_EPSILON) -> str:
    if not isinstance(poly, Polygon):
        poly = Polygon(tuple(poly))
    return generate_faces_spec(poly.faces(), eps)


def face_names(n: int, closed: bool = True) -> list[str]:
    return [f"p{k + 1}p{1 if closed and k == n - 1 and n >= 3 else k + 2}" for k in range(n)]


# -- polygons ---------------------------------------------------------------------


def regular_polygon(n: int, center: Point, radius: float, rotation_deg: float = 0.0) -> Polygon:
    rot = math.radians(rotation_deg)
    return Polygon(
        tuple(
            (
                center[0] + radius * math.cos(rot + 2 * math.pi * k / n),
                center[1] + radius * math.sin(rot + 2 * math.pi * k / n),
            )
            for k in range(n)
        )
    )


# An odd rotation keeps every face away from both axis directions, where the
# strict bounding-box tests of the face block would have an empty interior.
SYNTHETIC_CENTER = (52.3, 10.5)
SYNTHETIC_RADIUS = 0.01
SYNTHETIC_ROTATION = 7.3


def synthetic_fence(n: int = 12) -> Polygon:
    return regular_polygon(n, SYNTHETIC_CENTER, SYNTHETIC_RADIUS, SYNTHETIC_ROTATION)


def scaling_faces(n: int) -> list[tuple[Point, Point]]:
    """``n`` faces for scaling studies; a closed synthetic fence when n >= 3."""
    if n < 0:
        raise FenceError("face count must be non-negative")
    if n >= 3:
        return synthetic_fence(n).faces()
    return synthetic_fence(3).faces()[:n]


def parse_polygon(text: str) -> Polygon:
    """Parse ``lat,lon`` lines in degrees; ``#`` starts a comment."""
    vertices = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != 2:
            raise FenceError(f"line {lineno}: expected 'lat,lon', got {raw.strip()!r}")
        try:
            lat, lon = float(cells[0]), float(cells[1])
        except ValueError:
            raise FenceError(f"line {lineno}: not a number in {raw.strip()!r}") from None
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise FenceError(f"line {lineno}: coordinates must be finite")
        vertices.append((lat, lon))
    return Polygon(tuple(vertices))


def read_polygon(path: Union[str, Path]) -> Polygon:
    return parse_polygon(Path(path).read_text(encoding="utf-8"))


def format_polygon(poly: Polygon) -> str:
    return "".join(f"{lat!r},{lon!r}\n" for lat, lon in poly.vertices)


# -- oracle -------------------------------------------------------------------------

Exact = tuple[Fraction, Fraction]


def _exact(p) -> Exact:
    return Fraction(p[0]), Fraction(p[1])


def intersection_parameters(a1, a2, b1, b2) -> Optional[tuple[Fraction, Fraction]]:
    """Exact ``(s, t)`` with ``a1 + s(a2-a1) = b1 + t(b2-b1)``; None if parallel."""
    (ax, ay), (bx, by) = _exact(a1), _exact(b1)
    dax, day = Fraction(a2[0]) - ax, Fraction(a2[1]) - ay
    dbx, dby = Fraction(b2[0]) - bx, Fraction(b2[1]) - by
    denom = dax * dby - day * dbx
    if denom == 0:
        return None
    ex, ey = bx - ax, by - ay
    return (ex * dby - ey * dbx) / denom, (ex * day - ey * dax) / denom


def _strictly_inside(v: Fraction, p: Fraction, q: Fraction) -> bool:
    return min(p, q) < v < max(p, q)


def segment_intersection_oracle(a1, a2, b1, b2, level_face: bool = False) -> Optional[Exact]:
    """Exact crossing point of two segments, or None.

    The point must lie strictly inside both segments' bounding boxes in
    both coordinates, so touching endpoints, parallel and collinear
    segments, and axis-aligned segments never count. With ``level_face``
    the second segment is a constant-latitude face and only its longitude
    range is checked, as the generated specification does.
    """
    params = intersection_parameters(a1, a2, b1, b2)
    if params is None:
        return None
    s, t = params
    if not (0 < s < 1 and 0 < t < 1):
        return None
    (ax, ay), (bx, by) = _exact(a1), _exact(a2)
    x = ax + s * (bx - ax)
    y = ay + s * (by - ay)
    for p, q, check_lat in ((a1, a2, True), (b1, b2, not level_face)):
        (px, py), (qx, qy) = _exact(p), _exact(q)
        if check_lat and not _strictly_inside(x, px, qx):
            return None
        if not _strictly_inside(y, py, qy):
            return None
    return x, y


@dataclass(frozen=True)
class Crossing:
    step: int  # index of the sample that completes the step
    face: int
    point: Exact


@dataclass
class CrossingReport:
    crossings: list[Crossing]
    degenerate_steps: list[int]  # steps with (nearly) constant latitude

    def faces_for(self, step: int) -> list[int]:
        return [c.face for c in self.crossings if c.step == step]


def trajectory_crossings(
    poly: Union[Polygon, Sequence[tuple[Point, Point]]],
    path: Sequence[Point],
    eps: float = DEFAULT_EPSILON,
) -> CrossingReport:
    """All face crossings of a piecewise-linear path, in path order.

    Steps whose latitude change is at most ``eps`` radians are listed in
    ``degenerate_steps``: the generated specification cannot represent
    them as a function and never reports a crossing there.
    """
    faces = poly.faces() if isinstance(poly, Polygon) else list(poly)
    crossings, degenerate = [], []
    for i in range(1, len(path)):
        a1, a2 = path[i - 1], path[i]
        if abs(to_radians(a2)[0] - to_radians(a1)[0]) <= eps:
            degenerate.append(i)
        for k, (b1, b2) in enumerate(faces):
            level = abs(to_radians(b2)[0] - to_radians(b1)[0]) <= eps
            point = segment_intersection_oracle(a1, a2, b1, b2, level)
            if point is not None:
                crossings.append(Crossing(i, k, point))
    return CrossingReport(crossings, degenerate)


# -- scaling ------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingRow:
    faces: int
    streams: int
    triggers: int
    stream_bytes: int
    total_bytes: int


def face_scaling_report(counts: Iterable[int], eps: float = DEFAULT_EPSILON) -> list[ScalingRow]:
    from .analysis import analyze_source

    rows = []
    for n in counts:
        analyzed = analyze_source(generate_faces_spec(scaling_faces(n), eps))
        report = analyzed.report
        rows.append(
            ScalingRow(
                faces=n,
                streams=len(analyzed.streams),
                triggers=len(analyzed.triggers),
                stream_bytes=report.stream_bytes,
                total_bytes=report.total_bytes,
            )
        )
    return rows


def format_scaling_table(rows: Sequence[ScalingRow]) -> str:
    lines = [f"{'faces':>5} {'streams':>7} {'triggers':>8} {'bytes':>6}"]
    for r in rows:
        lines.append(f"{r.faces:>5} {r.streams:>7} {r.triggers:>8} {r.total_bytes:>6}")
    return "\n".join(lines) + "\n"
