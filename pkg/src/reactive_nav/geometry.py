"""2D geometric primitives: frames, convex regions, inflation and intersection tests.

All regions are closed sets: points exactly on a boundary count as inside,
which keeps every collision test conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Union

import numpy as np


class GeometryError(ValueError):
    """Invalid geometric input (degenerate frame, non-convex polygon, ...)."""


class EmptyFilteredRegionError(GeometryError):
    """A region filter left nothing to take extremes over."""


class Point2(NamedTuple):
    x: float
    y: float


def sign_convention(value: float) -> int:
    """Sign with the tie broken downward: +1 for positive, -1 for zero or negative."""
    return 1 if value > 0 else -1


# ---------------------------------------------------------------------------
# coordinate frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Frame:
    """Local coordinate frame anchored at ``origin`` and rotated by ``angle``.

    ``to_local`` maps global coordinates into the frame, ``to_global`` maps
    back; the pair is an exact isometry.
    """

    origin: Point2
    angle: float

    @cached_property
    def _cos(self) -> float:
        return math.cos(self.angle)

    @cached_property
    def _sin(self) -> float:
        return math.sin(self.angle)

    def to_local(self, p: Point2) -> Point2:
        dx = p[0] - self.origin[0]
        dy = p[1] - self.origin[1]
        return Point2(self._cos * dx + self._sin * dy, -self._sin * dx + self._cos * dy)

    def to_global(self, p: Point2) -> Point2:
        x = self._cos * p[0] - self._sin * p[1] + self.origin[0]
        y = self._sin * p[0] + self._cos * p[1] + self.origin[1]
        return Point2(x, y)

    def to_local_many(self, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dx = xs - self.origin[0]
        dy = ys - self.origin[1]
        return self._cos * dx + self._sin * dy, -self._sin * dx + self._cos * dy


def frame_from_endpoints(s: Point2, g: Point2) -> Frame:
    """Frame whose x-axis runs from ``s`` toward ``g``.

    The returned frame maps ``s`` to the origin and ``g`` onto the positive
    x-axis at distance ``|g - s|``.
    """
    dx = g[0] - s[0]
    dy = g[1] - s[1]
    if dx == 0.0 and dy == 0.0:
        raise GeometryError("frame endpoints coincide: %r" % (s,))
    if dx == 0.0:
        angle = 0.5 * math.pi * sign_convention(dy)
    else:
        angle = math.atan2(dy, dx)
    return Frame(Point2(float(s[0]), float(s[1])), angle)


# ---------------------------------------------------------------------------
# convex regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Disc:
    center: Point2
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0) or not math.isfinite(self.radius):
            raise GeometryError("disc radius must be positive, got %r" % (self.radius,))


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with vertices in counterclockwise order."""

    vertices: tuple[Point2, ...]

    def __post_init__(self):
        verts = tuple(Point2(float(v[0]), float(v[1])) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        n = len(verts)
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            cx, cy = verts[(i + 2) % n]
            cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if cross < 0.0:
                raise GeometryError("polygon is not convex and counterclockwise")

    @cached_property
    def _arrays(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.array([v.x for v in self.vertices])
        ys = np.array([v.y for v in self.vertices])
        return xs, ys


ConvexRegion = Union[Disc, ConvexPolygon]


@dataclass(frozen=True)
class EnlargedRegion:
    """A convex region inflated by the robot size so the robot becomes a point."""

    source: ConvexRegion
    inflation: float
    boundary: ConvexRegion


def region_extent(region: ConvexRegion) -> float:
    """Largest distance between two points of the region (its overall size)."""
    if isinstance(region, Disc):
        return 2.0 * region.radius
    xs, ys = region._arrays
    dx = xs[:, None] - xs[None, :]
    dy = ys[:, None] - ys[None, :]
    return float(np.sqrt(dx * dx + dy * dy).max())


def region_x_range(region: ConvexRegion | EnlargedRegion) -> tuple[float, float]:
    region = _boundary_of(region)
    if isinstance(region, Disc):
        return region.center.x - region.radius, region.center.x + region.radius
    xs, _ = region._arrays
    return float(xs.min()), float(xs.max())


def region_y_range(region: ConvexRegion | EnlargedRegion) -> tuple[float, float]:
    region = _boundary_of(region)
    if isinstance(region, Disc):
        return region.center.y - region.radius, region.center.y + region.radius
    _, ys = region._arrays
    return float(ys.min()), float(ys.max())


def _boundary_of(region: ConvexRegion | EnlargedRegion) -> ConvexRegion:
    return region.boundary if isinstance(region, EnlargedRegion) else region


def transform_region(frame: Frame, region: ConvexRegion) -> ConvexRegion:
    """Map a region into the frame's local coordinates (rotation preserves shape)."""
    if isinstance(region, Disc):
        return Disc(frame.to_local(region.center), region.radius)
    return ConvexPolygon(tuple(frame.to_local(v) for v in region.vertices))


# ---------------------------------------------------------------------------
# inflation
# ---------------------------------------------------------------------------

def enlarge(region: ConvexRegion, r: float, arc_points: int = 8) -> EnlargedRegion:
    """Inflate a region by ``r``, covering every point within that distance.

    Discs grow exactly. Polygon corners acquire circular arcs; each arc is
    replaced by its circumscribing tangent polyline with ``arc_points``
    intermediate vertices, so the result is a convex polygon that contains
    the exact offset region (outer approximation).
    """
    if r < 0.0:
        raise GeometryError("inflation must be non-negative, got %r" % (r,))
    if isinstance(region, Disc):
        if r == 0.0:
            return EnlargedRegion(region, 0.0, region)
        return EnlargedRegion(region, r, Disc(region.center, region.radius + r))
    if r == 0.0:
        return EnlargedRegion(region, 0.0, region)

    verts = region.vertices
    n = len(verts)
    normals = []
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        length = math.hypot(ex, ey)
        if length == 0.0:
            raise GeometryError("polygon has a zero-length edge")
        normals.append((ey / length, -ex / length))  # outward for CCW order

    out: list[Point2] = []
    for i in range(n):
        vx, vy = verts[i]
        nx_in, ny_in = normals[(i - 1) % n]   # normal of the incoming edge
        nx_out, ny_out = normals[i]           # normal of the outgoing edge
        a0 = math.atan2(ny_in, nx_in)
        a1 = math.atan2(ny_out, nx_out)
        sweep = (a1 - a0) % (2.0 * math.pi)
        out.append(Point2(vx + r * nx_in, vy + r * ny_in))
        if sweep > 1e-12 and arc_points > 0:
            step = sweep / arc_points
            bulge = r / math.cos(0.5 * step)
            for j in range(arc_points):
                ang = a0 + (j + 0.5) * step
                out.append(Point2(vx + bulge * math.cos(ang), vy + bulge * math.sin(ang)))
        out.append(Point2(vx + r * nx_out, vy + r * ny_out))

    deduped: list[Point2] = []
    for p in out:
        if not deduped or math.hypot(p.x - deduped[-1].x, p.y - deduped[-1].y) > 1e-12:
            deduped.append(p)
    if math.hypot(deduped[0].x - deduped[-1].x, deduped[0].y - deduped[-1].y) <= 1e-12:
        deduped.pop()
    return EnlargedRegion(region, r, ConvexPolygon(tuple(deduped)))


# ---------------------------------------------------------------------------
# membership and distance
# ---------------------------------------------------------------------------

def contains_points(region: ConvexRegion | EnlargedRegion,
                    xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized closed-region membership test."""
    region = _boundary_of(region)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if isinstance(region, Disc):
        dx = xs - region.center.x
        dy = ys - region.center.y
        return dx * dx + dy * dy <= region.radius * region.radius
    vx, vy = region._arrays
    ex = np.roll(vx, -1) - vx
    ey = np.roll(vy, -1) - vy
    cross = (ex[None, :] * (ys[..., None] - vy[None, :])
             - ey[None, :] * (xs[..., None] - vx[None, :]))
    return np.all(cross >= -1e-12, axis=-1)


def contains_point(region: ConvexRegion | EnlargedRegion, p: Point2) -> bool:
    return bool(contains_points(region, np.array([p[0]]), np.array([p[1]]))[0])


def dist_points_region(region: ConvexRegion | EnlargedRegion,
                       xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized Euclidean distance to a closed region (0 inside)."""
    region = _boundary_of(region)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if isinstance(region, Disc):
        d = np.hypot(xs - region.center.x, ys - region.center.y) - region.radius
        return np.maximum(d, 0.0)
    vx, vy = region._arrays
    ax, ay = vx, vy
    bx, by = np.roll(vx, -1), np.roll(vy, -1)
    ex, ey = bx - ax, by - ay
    ee = ex * ex + ey * ey
    px = xs[..., None] - ax[None, :]
    py = ys[..., None] - ay[None, :]
    t = np.clip((px * ex[None, :] + py * ey[None, :]) / ee[None, :], 0.0, 1.0)
    dx = px - t * ex[None, :]
    dy = py - t * ey[None, :]
    edge_dist = np.sqrt(dx * dx + dy * dy).min(axis=-1)
    inside = contains_points(region, xs, ys)
    return np.where(inside, 0.0, edge_dist)


def dist_point_region(p: Point2, region: ConvexRegion | EnlargedRegion) -> float:
    return float(dist_points_region(region, np.array([p[0]]), np.array([p[1]]))[0])


def vertical_slice(region: ConvexRegion | EnlargedRegion, x: float) -> tuple[float, float] | None:
    """Ordinate interval of the region on the vertical line at ``x`` (None if missed)."""
    region = _boundary_of(region)
    if isinstance(region, Disc):
        dx = x - region.center.x
        rem = region.radius * region.radius - dx * dx
        if rem < 0.0:
            return None
        h = math.sqrt(rem)
        return region.center.y - h, region.center.y + h
    ys: list[float] = []
    verts = region.vertices
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        if ax == bx:
            if ax == x:
                ys.extend((ay, by))
            continue
        if (ax - x) * (bx - x) <= 0.0:
            t = (x - ax) / (bx - ax)
            ys.append(ay + t * (by - ay))
    if not ys:
        return None
    return min(ys), max(ys)


# ---------------------------------------------------------------------------
# curve vs region intersection
# ---------------------------------------------------------------------------

def eval_cubic(coeffs: tuple[float, float, float, float], x):
    a, b, c, d = coeffs
    return ((a * x + b) * x + c) * x + d


def eval_cubic_slope(coeffs: tuple[float, float, float, float], x):
    a, b, c, _ = coeffs
    return (3.0 * a * x + 2.0 * b) * x + c


def curve_region_intersect(coeffs: tuple[float, float, float, float],
                           domain: tuple[float, float],
                           region: ConvexRegion | EnlargedRegion,
                           step: float | None = None) -> list[tuple[float, float]]:
    """x-intervals over ``domain`` where the cubic graph lies inside the region.

    Uniform sampling classifies points inside/outside; every sign change is
    then bisected to 1e-9 in x. Features narrower than the sampling step can
    be missed, which is the documented tolerance of this test.
    """
    x_lo, x_hi = domain
    if x_hi < x_lo:
        return []
    # restrict to the region's own x-span; the curve cannot be inside elsewhere
    rx_lo, rx_hi = region_x_range(region)
    lo = max(x_lo, rx_lo)
    hi = min(x_hi, rx_hi)
    if hi < lo:
        return []
    width = hi - lo
    if width == 0.0:
        inside = bool(contains_points(region, np.array([lo]),
                                      np.array([float(eval_cubic(coeffs, lo))]))[0])
        return [(lo, lo)] if inside else []
    if step is None:
        step = min(0.01, width / 100.0)
    n = max(2, int(math.ceil(width / step)) + 1)
    xs = np.linspace(lo, hi, n)
    flags = contains_points(region, xs, eval_cubic(coeffs, xs))

    def inside_at(x: float) -> bool:
        return bool(contains_points(region, np.array([x]),
                                     np.array([float(eval_cubic(coeffs, x))]))[0])

    def refine(x_out: float, x_in: float) -> float:
        # invariant: x_out is outside, x_in is inside
        while abs(x_in - x_out) > 1e-9:
            mid = 0.5 * (x_out + x_in)
            if inside_at(mid):
                x_in = mid
            else:
                x_out = mid
        return x_in

    intervals: list[tuple[float, float]] = []
    start: float | None = None
    for i in range(n):
        if flags[i] and start is None:
            start = xs[i] if i == 0 else refine(xs[i - 1], xs[i])
        elif not flags[i] and start is not None:
            intervals.append((start, refine(xs[i], xs[i - 1])))
            start = None
    if start is not None:
        intervals.append((start, xs[-1]))
    return intervals


# ---------------------------------------------------------------------------
# extremes of a (filtered) region
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegionExtremes:
    """Extremes of a region after an optional one-sided filter.

    ``peak_lo``/``peak_hi`` bound the abscissas attaining the largest |y| and
    ``peak_y`` is the signed ordinate attained there.
    """

    min_x: float
    max_x: float
    min_y: float
    max_y: float
    peak_lo: float
    peak_hi: float
    peak_y: float


_SAMPLES = 1024
_PLATEAU_EPS = 1e-9


def filtered_extremes(region: ConvexRegion | EnlargedRegion,
                      side: int,
                      level: Callable[[np.ndarray], np.ndarray],
                      samples: int = _SAMPLES) -> RegionExtremes:
    """Extremes of ``{p in region : side * (p.y - level(p.x)) >= 0}``.

    ``level`` is evaluated vectorized over abscissas. The filtered set is
    scanned by vertical slices; interval boundaries are bisected and the
    |y| peak is refined by golden-section search, so results are accurate to
    ~1e-9 in x away from plateau edges.
    """
    if side not in (-1, 1):
        raise GeometryError("filter side must be +1 or -1, got %r" % (side,))
    rx_lo, rx_hi = region_x_range(region)

    def filtered_slice(x: float) -> tuple[float, float] | None:
        sl = vertical_slice(region, x)
        if sl is None:
            return None
        y_lo, y_hi = sl
        lvl = float(level(np.array([x]))[0])
        if side > 0:
            if y_hi < lvl:
                return None
            return max(y_lo, lvl), y_hi
        if y_lo > lvl:
            return None
        return y_lo, min(y_hi, lvl)

    xs = np.linspace(rx_lo, rx_hi, samples)
    slices = [filtered_slice(float(x)) for x in xs]
    valid = [i for i, s in enumerate(slices) if s is not None]
    if not valid:
        raise EmptyFilteredRegionError("filter (side=%+d) removed the whole region" % side)

    def bisect_edge(x_empty: float, x_full: float) -> float:
        while abs(x_full - x_empty) > 1e-9:
            mid = 0.5 * (x_empty + x_full)
            if filtered_slice(mid) is None:
                x_empty = mid
            else:
                x_full = mid
        return x_full

    i0, i1 = valid[0], valid[-1]
    min_x = float(xs[i0]) if i0 == 0 else bisect_edge(float(xs[i0 - 1]), float(xs[i0]))
    max_x = float(xs[i1]) if i1 == samples - 1 else bisect_edge(float(xs[i1 + 1]), float(xs[i1]))

    def abs_peak(x: float) -> float:
        s = filtered_slice(x)
        if s is None:
            return -math.inf
        return max(abs(s[0]), abs(s[1]))

    f_vals = np.array([abs_peak(float(x)) for x in xs])
    best = int(np.argmax(f_vals))
    lo_bracket = float(xs[max(best - 1, 0)])
    hi_bracket = float(xs[min(best + 1, samples - 1)])
    lo_bracket = max(lo_bracket, min_x)
    hi_bracket = min(hi_bracket, max_x)
    x_star = _golden_max(abs_peak, lo_bracket, hi_bracket)
    peak_val = abs_peak(x_star)

    threshold = peak_val - _PLATEAU_EPS

    def in_plateau(x: float) -> bool:
        return abs_peak(x) >= threshold

    def bisect_plateau(x_out: float, x_in: float) -> float:
        # invariant: x_out below threshold, x_in at or above it
        while abs(x_in - x_out) > 1e-9:
            mid = 0.5 * (x_out + x_in)
            if in_plateau(mid):
                x_in = mid
            else:
                x_out = mid
        return x_in

    # the plateau is the contiguous above-threshold stretch containing x_star;
    # extend over qualifying grid samples, then refine the first drop-off
    i = int(np.searchsorted(xs, x_star)) - 1
    edge_in = x_star
    while i >= 0 and f_vals[i] >= threshold:
        edge_in = float(xs[i])
        i -= 1
    if i >= 0:
        peak_lo = bisect_plateau(float(xs[i]), edge_in)
    else:
        peak_lo = min_x if in_plateau(min_x) else bisect_plateau(min_x, edge_in)

    i = int(np.searchsorted(xs, x_star, side="right"))
    edge_in = x_star
    while i < samples and f_vals[i] >= threshold:
        edge_in = float(xs[i])
        i += 1
    if i < samples:
        peak_hi = bisect_plateau(float(xs[i]), edge_in)
    else:
        peak_hi = max_x if in_plateau(max_x) else bisect_plateau(max_x, edge_in)

    s_star = filtered_slice(x_star)
    assert s_star is not None
    peak_y = s_star[0] if abs(s_star[0]) >= abs(s_star[1]) else s_star[1]

    min_y = math.inf
    max_y = -math.inf
    for s in slices:
        if s is not None:
            min_y = min(min_y, s[0])
            max_y = max(max_y, s[1])
    for x_edge in (min_x, max_x, x_star, peak_lo, peak_hi):
        s = filtered_slice(x_edge)
        if s is not None:
            min_y = min(min_y, s[0])
            max_y = max(max_y, s[1])

    return RegionExtremes(min_x, max_x, min_y, max_y, peak_lo, peak_hi, float(peak_y))


def region_extremes(region: ConvexRegion | EnlargedRegion,
                    halfplane: tuple[int, float] | None = None) -> RegionExtremes:
    """Extremes of a region, optionally filtered to one side of a horizontal line.

    ``halfplane=(side, level)`` keeps points with ``side * (y - level) >= 0``.
    """
    side, level = (1, -math.inf) if halfplane is None else halfplane

    def lvl_fn(x: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(x, dtype=float), float(level))

    return filtered_extremes(region, side, lvl_fn)


def _golden_max(f: Callable[[float], float], lo: float, hi: float,
                tol: float = 1e-11) -> float:
    """Golden-section maximization on [lo, hi]."""
    if hi <= lo:
        return lo
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)
