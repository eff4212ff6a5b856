"""Planar domains, shrinking compact sets, and pole pairs.

Every public query works in *shifted* coordinates: the domain's anchor (the
concentration point of the shrinking family) is the origin.  Grids, compact
sets and local expansions all share that frame, so a segment "at the center of
the rectangle" is simply a segment at (0, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "Domain",
    "CompactSet",
    "PolePair",
    "FamilyResult",
    "rectangle",
    "disk",
    "polygon",
    "segment",
    "closed_disk",
    "polyline",
    "contains",
    "boundary_distance",
    "extents",
    "diameter",
    "concentrating_family",
]


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Domain:
    """A bounded open set: axis-aligned rectangle, disk, or simple polygon.

    ``params`` is shape specific: (width, height) for a rectangle anchored at
    its lower-left corner in native coordinates, (radius,) for a disk centered
    at the native origin, or the vertex tuple for a polygon.  ``anchor`` is
    the distinguished interior point, in native coordinates; all other
    functions in this module take and return shifted coordinates in which the
    anchor is (0, 0).  ``mirror_symmetric`` records symmetry with respect to
    the horizontal line through the anchor.
    """

    shape: str
    params: tuple
    anchor: tuple
    mirror_symmetric: bool

    def __post_init__(self):
        if self.shape not in ("rectangle", "disk", "polygon"):
            raise ValidationError(f"unknown domain shape {self.shape!r}")


def rectangle(a: float, b: float, anchor: tuple | None = None) -> Domain:
    """Open rectangle (0, a) x (0, b); default anchor is the center."""
    if not (a > 0 and b > 0):
        raise ValidationError("rectangle sides must be positive")
    if anchor is None:
        anchor = (a / 2.0, b / 2.0)
    ax, ay = float(anchor[0]), float(anchor[1])
    if not (0 < ax < a and 0 < ay < b):
        raise ValidationError("anchor must lie strictly inside the rectangle")
    mirror = abs(ay - b / 2.0) <= 1e-12 * max(1.0, b)
    return Domain("rectangle", (float(a), float(b)), (ax, ay), mirror)


def disk(R: float, anchor: tuple = (0.0, 0.0)) -> Domain:
    """Open disk of radius R about the native origin."""
    if not R > 0:
        raise ValidationError("disk radius must be positive")
    ax, ay = float(anchor[0]), float(anchor[1])
    if math.hypot(ax, ay) >= R:
        raise ValidationError("anchor must lie strictly inside the disk")
    mirror = abs(ay) <= 1e-12 * R
    return Domain("disk", (float(R),), (ax, ay), mirror)


def polygon(vertices, anchor: tuple) -> Domain:
    """Simple polygon given by its vertex loop (no repeated closing vertex)."""
    verts = tuple((float(x), float(y)) for x, y in vertices)
    if len(verts) < 3:
        raise ValidationError("polygon needs at least 3 vertices")
    area2 = 0.0
    for (x1, y1), (x2, y2) in zip(verts, verts[1:] + verts[:1]):
        area2 += x1 * y2 - x2 * y1
    if abs(area2) < 1e-14:
        raise ValidationError("degenerate polygon (zero area)")
    ax, ay = float(anchor[0]), float(anchor[1])
    if not bool(np.all(_polygon_contains(verts, np.asarray(ax), np.asarray(ay)))):
        raise ValidationError("anchor must lie strictly inside the polygon")
    # mirror symmetry about the horizontal line through the anchor
    reflected = {(round(x, 9), round(2 * ay - y, 9)) for x, y in verts}
    plain = {(round(x, 9), round(y, 9)) for x, y in verts}
    return Domain("polygon", verts, (ax, ay), reflected == plain)


def _to_native(domain: Domain, x, y):
    return x + domain.anchor[0], y + domain.anchor[1]


def contains(domain: Domain, x, y):
    """Strict interior test in shifted coordinates; accepts scalars or arrays."""
    xn, yn = _to_native(domain, np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if domain.shape == "rectangle":
        a, b = domain.params
        out = (xn > 0) & (xn < a) & (yn > 0) & (yn < b)
    elif domain.shape == "disk":
        (R,) = domain.params
        out = xn * xn + yn * yn < R * R
    else:
        out = _polygon_contains(domain.params, xn, yn)
    if np.isscalar(x) or (isinstance(x, np.ndarray) and x.ndim == 0):
        return bool(out)
    return out


def _polygon_contains(verts, x, y):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xint)
    return inside


def boundary_distance(domain: Domain, x: float, y: float) -> float:
    """Distance from a shifted-coordinate point to the domain boundary."""
    xn, yn = _to_native(domain, x, y)
    if domain.shape == "rectangle":
        a, b = domain.params
        return min(xn, a - xn, yn, b - yn)
    if domain.shape == "disk":
        (R,) = domain.params
        return R - math.hypot(xn, yn)
    best = math.inf
    verts = domain.params
    for i in range(len(verts)):
        p, q = verts[i], verts[(i + 1) % len(verts)]
        best = min(best, _point_segment_distance(xn, yn, p, q))
    return best


def _point_segment_distance(x, y, p, q):
    px, py = p
    qx, qy = q
    dx, dy = qx - px, qy - py
    L2 = dx * dx + dy * dy
    if L2 == 0:
        return math.hypot(x - px, y - py)
    t = max(0.0, min(1.0, ((x - px) * dx + (y - py) * dy) / L2))
    return math.hypot(x - (px + t * dx), y - (py + t * dy))


def extents(domain: Domain):
    """Bounding box (x_lo, x_hi, y_lo, y_hi) in shifted coordinates."""
    ax, ay = domain.anchor
    if domain.shape == "rectangle":
        a, b = domain.params
        return (-ax, a - ax, -ay, b - ay)
    if domain.shape == "disk":
        (R,) = domain.params
        return (-R - ax, R - ax, -R - ay, R - ay)
    xs = [v[0] for v in domain.params]
    ys = [v[1] for v in domain.params]
    return (min(xs) - ax, max(xs) - ax, min(ys) - ay, max(ys) - ay)


def sample_point(domain: Domain) -> tuple:
    """Designated interior point used to fix eigenvector signs (shifted coords).

    Halfway from the anchor toward the lower-left corner of the bounding box;
    backed off toward the anchor until contained.  Deterministic per domain.
    """
    x_lo, _, y_lo, _ = extents(domain)
    for f in (0.5, 0.25, 0.125, 0.0):
        p = (f * x_lo, f * y_lo)
        if contains(domain, p[0], p[1]):
            return p
    return (0.0, 0.0)


# ---------------------------------------------------------------------------
# compact sets


@dataclass(frozen=True)
class CompactSet:
    """A compact set shrinking with its parameter ``epsilon``.

    Variants: ``segment`` (half-length epsilon, midpoint ``center``, tilt
    ``angle``), ``closed_disk`` (radius epsilon about ``center``), and
    ``polyline`` (explicit vertex chain ``points``; epsilon is the scale the
    chain was built at, so rescaling a family multiplies the vertices by the
    ratio of the epsilons).
    """

    variant: str
    epsilon: float
    center: tuple = (0.0, 0.0)
    angle: float = 0.0
    points: tuple = ()

    def __post_init__(self):
        if self.variant not in ("segment", "closed_disk", "polyline", "point"):
            raise ValidationError(f"unknown compact set variant {self.variant!r}")
        if not self.epsilon > 0:
            raise ValidationError("epsilon must be positive")
        if self.variant == "polyline" and len(self.points) < 2:
            raise ValidationError("polyline needs at least 2 points")


def segment(half_length: float, center=(0.0, 0.0), angle: float = 0.0) -> CompactSet:
    return CompactSet("segment", float(half_length), (float(center[0]), float(center[1])), float(angle))


def closed_disk(radius: float, center=(0.0, 0.0)) -> CompactSet:
    return CompactSet("closed_disk", float(radius), (float(center[0]), float(center[1])))


def polyline(points, epsilon: float = 1.0) -> CompactSet:
    pts = tuple((float(x), float(y)) for x, y in points)
    return CompactSet("polyline", float(epsilon), points=pts)


def point_set(center=(0.0, 0.0)) -> CompactSet:
    """A single point: rasterizes to one grid node; capacity tends to 0 with h."""
    return CompactSet("point", 1.0, (float(center[0]), float(center[1])))


def _segment_endpoints(K: CompactSet):
    cx, cy = K.center
    dx = K.epsilon * math.cos(K.angle)
    dy = K.epsilon * math.sin(K.angle)
    return (cx - dx, cy - dy), (cx + dx, cy + dy)


def diameter(K: CompactSet) -> float:
    if K.variant == "point":
        return 0.0
    if K.variant == "segment":
        return 2.0 * K.epsilon
    if K.variant == "closed_disk":
        return 2.0 * K.epsilon
    pts = K.points
    best = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            best = max(best, math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]))
    return best


def sample_points(K: CompactSet, n: int = 64):
    """Points covering K, used for containment and margin checks."""
    if K.variant == "point":
        return np.array([[K.center[0], K.center[1]]])
    if K.variant == "segment":
        (x1, y1), (x2, y2) = _segment_endpoints(K)
        t = np.linspace(0.0, 1.0, n)
        return np.column_stack([x1 + t * (x2 - x1), y1 + t * (y2 - y1)])
    if K.variant == "closed_disk":
        t = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        cx, cy = K.center
        return np.column_stack([cx + K.epsilon * np.cos(t), cy + K.epsilon * np.sin(t)])
    chunks = []
    pts = K.points
    per = max(2, n // max(1, len(pts) - 1))
    for p, q in zip(pts[:-1], pts[1:]):
        t = np.linspace(0.0, 1.0, per)
        chunks.append(np.column_stack([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]))
    return np.vstack(chunks)


def rescale(K: CompactSet, eps: float) -> CompactSet:
    """The member of K's concentric family with parameter eps."""
    if K.variant == "polyline":
        s = eps / K.epsilon
        pts = tuple((x * s, y * s) for x, y in K.points)
        return CompactSet("polyline", float(eps), points=pts)
    return CompactSet(K.variant, float(eps), K.center, K.angle)


@dataclass(frozen=True)
class FamilyResult:
    """A concentric shrinking family plus its containment constant C:
    every member sits inside the closed ball of radius C*eps about the anchor."""

    sets: tuple
    containment_constant: float


def concentrating_family(
    template: CompactSet,
    eps_ladder,
    domain: Domain | None = None,
    h_rule: float | None = None,
) -> FamilyResult:
    """Scale ``template`` through ``eps_ladder`` (strictly decreasing, positive).

    With a domain (and optionally the spacing divisor used downstream) the
    members are checked to keep a margin of at least twice the grid spacing
    from the boundary.
    """
    ladder = [float(e) for e in eps_ladder]
    if len(ladder) < 1 or any(e <= 0 for e in ladder):
        raise ValidationError("eps ladder must be positive")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValidationError("eps ladder must be strictly decreasing")
    if template.variant != "polyline" and math.hypot(*template.center) > 0:
        # off-anchor centers do not concentrate at the anchor
        raise ValidationError("template must be centered at the anchor")
    sets = tuple(rescale(template, e) for e in ladder)
    C = 0.0
    for member in sets:
        pts = sample_points(member)
        radius = float(np.max(np.hypot(pts[:, 0], pts[:, 1])))
        C = max(C, radius / member.epsilon)
        if domain is not None:
            h = member.epsilon / (h_rule or 8.0)
            margin = min(boundary_distance(domain, float(px), float(py)) for px, py in pts)
            if margin < 2 * h:
                raise ValidationError(
                    f"compact set at eps={member.epsilon} leaves less than 2h margin to the boundary"
                )
    return FamilyResult(sets, C)


# ---------------------------------------------------------------------------
# pole pairs


@dataclass(frozen=True)
class PolePair:
    """Two symmetric poles (-a, 0) and (a, 0) in shifted coordinates."""

    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValidationError("pole half-distance must be positive")

    @property
    def minus_pole(self):
        return (-self.a, 0.0)

    @property
    def plus_pole(self):
        return (self.a, 0.0)

    def collision_segment(self) -> CompactSet:
        return segment(self.a)
