"""Spherical directions, the equirectangular projection, and a Delaunay
triangulation of projected directions with rotation fallback for queries
that land outside the mesh.

Triangulation is done in the (azimuth, elevation) plane. The plane is not
periodic, so a query near the azimuth seam or a pole can fall outside every
triangle; ``find_enclosing_triangle`` then retries in rotated frames.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InsufficientPointsError,
    InvalidArgumentError,
    NoEnclosingTriangleError,
)

# Directions closer than this (great-circle degrees) count as the same point.
MERGE_TOLERANCE_DEG = 0.01

# Slack on barycentric coordinates when testing point-in-triangle. Keeps
# queries that sit exactly on an edge or vertex from being rejected by
# rounding noise, while staying well inside the 1e-9 acceptance tolerance.
_BARY_SLACK = 1e-12

# Super-triangle vertices, far outside the data rectangle. Data coordinates
# never exceed a few hundred degrees so these never interfere with any
# circumcircle a covering set can produce.
_SUPER = ((180.0, 300000.0), (-300000.0, -200000.0), (300360.0, -200000.0))

_FRAME_ORDER = ((False, False), (True, False), (False, True), (True, True))


@dataclass(frozen=True)
class Direction:
    """A direction on the sphere.

    Azimuth is in [0, 360) with 0 straight ahead and positive values turning
    counter-clockwise (to the listener's left). Elevation is in [-90, 90].
    Use :func:`normalize_direction` to construct from arbitrary angles.
    """

    azimuth_deg: float
    elevation_deg: float


@dataclass(frozen=True)
class EnclosingTriangle:
    """Result of a mesh query: vertex indices plus the frame that matched."""

    vertex_indices: tuple[int, int, int]
    rotated_azimuth: bool
    rotated_elevation: bool


def normalize_direction(azimuth_deg: float, elevation_deg: float) -> Direction:
    """Map any (azimuth, elevation) pair to the canonical ranges.

    Elevation folds over the poles: (az, 100) is the same physical point as
    (az + 180, 80), applied modularly. Directions at |elevation| == 90
    collapse to azimuth 0 so each pole is a single point.
    """
    if not (math.isfinite(azimuth_deg) and math.isfinite(elevation_deg)):
        raise InvalidArgumentError(
            f"direction ({azimuth_deg}, {elevation_deg}) is not finite"
        )
    # exact idempotence: in-range values pass through untouched
    if 0.0 <= azimuth_deg < 360.0 and -90.0 < elevation_deg < 90.0:
        return Direction(azimuth_deg + 0.0, elevation_deg + 0.0)
    el = elevation_deg % 360.0
    az = azimuth_deg
    if el > 270.0:
        el -= 360.0
    elif el > 90.0:
        el = 180.0 - el
        az += 180.0
    az %= 360.0
    if abs(el) == 90.0:
        az = 0.0
    # + 0.0 normalizes a possible -0.0
    return Direction(az + 0.0, el + 0.0)


def to_cartesian(d: Direction) -> np.ndarray:
    """Unit vector for a direction: x front, y left, z up."""
    az = math.radians(d.azimuth_deg)
    el = math.radians(d.elevation_deg)
    ce = math.cos(el)
    return np.array([ce * math.cos(az), ce * math.sin(az), math.sin(el)])


def from_cartesian(v: Sequence[float]) -> Direction:
    """Direction for a (not necessarily unit) cartesian vector."""
    x, y, z = float(v[0]), float(v[1]), float(v[2])
    norm = math.sqrt(x * x + y * y + z * z)
    if norm == 0.0 or not math.isfinite(norm):
        raise InvalidArgumentError(f"cannot normalize vector ({x}, {y}, {z})")
    az = math.degrees(math.atan2(y, x))
    el = math.degrees(math.asin(max(-1.0, min(1.0, z / norm))))
    return normalize_direction(az, el)


def angular_distance(a: Direction, b: Direction) -> float:
    """Great-circle distance in degrees via arccos of the dot product."""
    na = normalize_direction(a.azimuth_deg, a.elevation_deg)
    nb = normalize_direction(b.azimuth_deg, b.elevation_deg)
    if na == nb:
        # arccos loses ~1e-6 deg of precision near 0; equal directions are 0
        return 0.0
    dot = float(np.dot(to_cartesian(na), to_cartesian(nb)))
    return math.degrees(math.acos(max(-1.0, min(1.0, dot))))


def apply_frame(d: Direction, rotated_azimuth: bool, rotated_elevation: bool) -> Direction:
    """Map a direction into one of the fallback projection frames.

    The azimuth rotation shifts every azimuth by 180 degrees, moving the
    projection seam to the other side of the sphere. The elevation rotation
    is a half-turn of the sphere about the (0, 1, 1) diagonal axis, which
    moves both poles onto the equator so polar queries land in the interior
    of the rotated projection. When both flags are set the azimuth shift is
    applied first.
    """
    if rotated_azimuth:
        d = normalize_direction(d.azimuth_deg + 180.0, d.elevation_deg)
    if rotated_elevation:
        x, y, z = to_cartesian(d)
        d = from_cartesian((-x, z, y))
    return d


# ---------------------------------------------------------------------------
# exact predicates
#
# Coordinates are floats, hence exact binary rationals. Scaling every operand
# by the largest power-of-two denominator turns the orientation and in-circle
# determinants into exact integer arithmetic. A cheap float circumcircle test
# prefilters candidates; every positive classification is confirmed exactly.


def _as_scaled_ints(values: Iterable[float]) -> list[int]:
    ratios = [float(v).as_integer_ratio() for v in values]
    common = max(den for _, den in ratios)
    return [num * (common // den) for num, den in ratios]


def _orient_sign(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = _as_scaled_ints((ax, ay, bx, by, cx, cy))
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (det > 0) - (det < 0)


def _incircle_strict(ax, ay, bx, by, cx, cy, px, py) -> bool:
    """Exact test: is p strictly inside the circumcircle of triangle abc?"""
    ax, ay, bx, by, cx, cy, px, py = _as_scaled_ints(
        (ax, ay, bx, by, cx, cy, px, py)
    )
    adx = ax - px
    ady = ay - py
    bdx = bx - px
    bdy = by - py
    cdx = cx - px
    cdy = cy - py
    det = (
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        - (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    )
    orient = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if orient == 0:
        return False
    return det > 0 if orient > 0 else det < 0


def circumcircle(ax, ay, bx, by, cx, cy) -> tuple[float, float, float]:
    """Float circumcenter and squared radius; (0, 0, inf) when degenerate."""
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return 0.0, 0.0, math.inf
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    r2 = (ax - ux) ** 2 + (ay - uy) ** 2
    return ux, uy, r2


# ---------------------------------------------------------------------------
# Bowyer-Watson


def _triangulate_plane(coords: np.ndarray) -> list[tuple[int, int, int]]:
    """Incremental Bowyer-Watson over planar coordinates.

    coords must hold pairwise-distinct rows. Returns triangles as sorted
    index triples in sorted order. Raises InsufficientPointsError when the
    points are all collinear.
    """
    n = len(coords)
    if n < 3:
        raise InsufficientPointsError(f"need at least 3 points, got {n}")
    x0, y0 = coords[0]
    x1, y1 = coords[1]
    if all(
        _orient_sign(x0, y0, x1, y1, coords[k][0], coords[k][1]) == 0
        for k in range(2, n)
    ):
        raise InsufficientPointsError(
            f"all {n} points are collinear in the projection plane"
        )

    pts = np.vstack([coords, np.array(_SUPER)])
    cap = 256
    tris: list[tuple[int, int, int]] = [(0, 0, 0)] * cap
    ccx = np.empty(cap)
    ccy = np.empty(cap)
    rr2 = np.empty(cap)
    alive = np.zeros(cap, dtype=bool)
    count = 0

    def add_triangle(i: int, j: int, k: int) -> None:
        nonlocal cap, tris, ccx, ccy, rr2, alive, count
        if count == cap:
            cap *= 2
            tris = tris + [(0, 0, 0)] * (cap - count)
            ccx = np.resize(ccx, cap)
            ccy = np.resize(ccy, cap)
            rr2 = np.resize(rr2, cap)
            grown = np.zeros(cap, dtype=bool)
            grown[:count] = alive[:count]
            alive = grown
        ux, uy, r2 = circumcircle(
            pts[i][0], pts[i][1], pts[j][0], pts[j][1], pts[k][0], pts[k][1]
        )
        tris[count] = (i, j, k)
        ccx[count] = ux
        ccy[count] = uy
        rr2[count] = r2
        alive[count] = True
        count += 1

    add_triangle(n, n + 1, n + 2)

    for p in range(n):
        px, py = float(pts[p][0]), float(pts[p][1])
        d2 = (ccx[:count] - px) ** 2 + (ccy[:count] - py) ** 2
        # generous float prefilter; exact predicate confirms each candidate
        candidates = np.nonzero(alive[:count] & (d2 <= rr2[:count] * 1.0001 + 1e-4))[0]
        bad: list[int] = []
        for t in candidates:
            i, j, k = tris[t]
            if _incircle_strict(
                pts[i][0], pts[i][1],
                pts[j][0], pts[j][1],
                pts[k][0], pts[k][1],
                px, py,
            ):
                bad.append(int(t))
        if not bad:
            raise RuntimeError(
                f"no triangle circumcircle contains point {p}; "
                "super-triangle too small or duplicate input"
            )
        edge_count: dict[tuple[int, int], int] = {}
        for t in bad:
            i, j, k = tris[t]
            for u, v in ((i, j), (j, k), (k, i)):
                key = (u, v) if u < v else (v, u)
                edge_count[key] = edge_count.get(key, 0) + 1
            alive[t] = False
        for u, v in sorted(e for e, c in edge_count.items() if c == 1):
            add_triangle(p, u, v)

    result = sorted(
        tuple(sorted(tris[t]))
        for t in range(count)
        if alive[t] and max(tris[t]) < n
    )
    return result  # type: ignore[return-value]


def _merge_duplicates(dirs: list[Direction]) -> list[Direction]:
    """Drop directions within MERGE_TOLERANCE_DEG of an earlier one."""
    kept: list[Direction] = []
    carts = np.empty((len(dirs), 3))
    cos_tol = math.cos(math.radians(MERGE_TOLERANCE_DEG))
    dropped = 0
    for d in dirs:
        v = to_cartesian(d)
        m = len(kept)
        if m and float(np.max(carts[:m] @ v)) > cos_tol:
            dropped += 1
            continue
        carts[m] = v
        kept.append(d)
    if dropped:
        warnings.warn(
            f"merged {dropped} duplicate point(s) within "
            f"{MERGE_TOLERANCE_DEG} degrees",
            stacklevel=3,
        )
    return kept


class Triangulation:
    """Delaunay triangulation of directions in one equirectangular frame.

    ``vertices`` are the (normalized, distinct) input directions and
    ``triangles`` index into them. Rotated sibling frames are built lazily
    and cached when :func:`find_enclosing_triangle` needs them.
    """

    def __init__(
        self,
        vertices: Sequence[Direction],
        triangles: Sequence[tuple[int, int, int]],
        rotated_azimuth: bool = False,
        rotated_elevation: bool = False,
    ):
        self.vertices: tuple[Direction, ...] = tuple(vertices)
        self.triangles: tuple[tuple[int, int, int], ...] = tuple(
            tuple(t) for t in triangles
        )
        self.rotated_azimuth = bool(rotated_azimuth)
        self.rotated_elevation = bool(rotated_elevation)
        frame_dirs = [
            apply_frame(v, self.rotated_azimuth, self.rotated_elevation)
            for v in self.vertices
        ]
        self.frame_coords = np.array(
            [[d.azimuth_deg, d.elevation_deg] for d in frame_dirs]
        )
        self._frames: dict[tuple[bool, bool], Triangulation | None] = {
            (self.rotated_azimuth, self.rotated_elevation): self
        }
        self._bary = None

    def edges(self) -> list[tuple[int, int]]:
        out = set()
        for i, j, k in self.triangles:
            for u, v in ((i, j), (j, k), (k, i)):
                out.add((u, v) if u < v else (v, u))
        return sorted(out)

    def _locate(self, az: float, el: float) -> int | None:
        """Index of the first triangle (canonical order) containing (az, el)."""
        if not self.triangles:
            return None
        if self._bary is None:
            tri = np.array(self.triangles)
            a = self.frame_coords[tri[:, 0]]
            b = self.frame_coords[tri[:, 1]]
            c = self.frame_coords[tri[:, 2]]
            m00 = b[:, 0] - a[:, 0]
            m01 = c[:, 0] - a[:, 0]
            m10 = b[:, 1] - a[:, 1]
            m11 = c[:, 1] - a[:, 1]
            det = m00 * m11 - m01 * m10
            self._bary = (a, m00, m01, m10, m11, det)
        a, m00, m01, m10, m11, det = self._bary
        rx = az - a[:, 0]
        ry = el - a[:, 1]
        u = (m11 * rx - m01 * ry) / det
        v = (-m10 * rx + m00 * ry) / det
        inside = (u >= -_BARY_SLACK) & (v >= -_BARY_SLACK) & (u + v <= 1.0 + _BARY_SLACK)
        hits = np.nonzero(inside)[0]
        return int(hits[0]) if hits.size else None


def build_triangulation(points: Iterable[Direction]) -> Triangulation:
    """Triangulate directions in the base (unrotated) projection frame.

    Inputs are normalized first; near-duplicates (within 0.01 degrees) are
    merged with a warning, so ``vertices`` of the result equals the surviving
    point list in input order.
    """
    dirs = [normalize_direction(p.azimuth_deg, p.elevation_deg) for p in points]
    kept = _merge_duplicates(dirs)
    if len(kept) < 3:
        raise InsufficientPointsError(
            f"need at least 3 distinct points, got {len(kept)}"
        )
    coords = np.array([[d.azimuth_deg, d.elevation_deg] for d in kept])
    triangles = _triangulate_plane(coords)
    return Triangulation(kept, triangles)


def rotated_frame(t: Triangulation, rotated_azimuth: bool, rotated_elevation: bool) -> Triangulation | None:
    """The sibling triangulation of ``t`` in a rotated frame (cached).

    Returns None when the rotated projection is degenerate (all points
    collinear there).
    """
    key = (bool(rotated_azimuth), bool(rotated_elevation))
    if key not in t._frames:
        dirs = [apply_frame(v, key[0], key[1]) for v in t.vertices]
        coords = np.array([[d.azimuth_deg, d.elevation_deg] for d in dirs])
        try:
            triangles = _triangulate_plane(coords)
            t._frames[key] = Triangulation(t.vertices, triangles, key[0], key[1])
        except InsufficientPointsError:
            t._frames[key] = None
    return t._frames[key]


def find_enclosing_triangle(t: Triangulation, query: Direction) -> EnclosingTriangle:
    """Find a triangle containing the query, rotating the projection if needed.

    Frames are tried in a fixed order: the original projection, azimuth
    shifted, elevation rotated, then both. The returned flags record the
    frame that matched; applying :func:`apply_frame` with them to the query
    and the triangle vertices reproduces the containment in that frame.
    """
    q0 = normalize_direction(query.azimuth_deg, query.elevation_deg)
    for raz, rel in _FRAME_ORDER:
        frame = rotated_frame(t, raz, rel)
        if frame is None:
            continue
        q = apply_frame(q0, raz, rel)
        idx = frame._locate(q.azimuth_deg, q.elevation_deg)
        if idx is not None:
            return EnclosingTriangle(frame.triangles[idx], raz, rel)
    raise NoEnclosingTriangleError(
        f"no enclosing triangle for direction "
        f"({q0.azimuth_deg:.4f}, {q0.elevation_deg:.4f}) in any projection frame"
    )
