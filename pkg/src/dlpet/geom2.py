"""Exact convex polygons in the plane.

Points are pairs of Fractions.  Half-planes are triples ``(a, b, c)`` meaning
``a*x + b*y <= c``.  Clipping is Sutherland-Hodgman against one half-plane at a
time, which is exact because every intersection is a rational point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Point2 = tuple[Fraction, Fraction]
HalfPlane = tuple[Fraction, Fraction, Fraction]


def pt(x, y) -> Point2:
    return (Fraction(x), Fraction(y))


def vadd(p: Point2, q: Point2) -> Point2:
    return (p[0] + q[0], p[1] + q[1])


def vsub(p: Point2, q: Point2) -> Point2:
    return (p[0] - q[0], p[1] - q[1])


def vscale(k, p: Point2) -> Point2:
    return (k * p[0], k * p[1])


def cross2(u: Point2, v: Point2) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


def orient(a: Point2, b: Point2, c: Point2) -> Fraction:
    return cross2(vsub(b, a), vsub(c, a))


def signed_area(vertices: Sequence[Point2]) -> Fraction:
    n = len(vertices)
    total = Fraction(0)
    for i in range(n):
        total += cross2(vertices[i], vertices[(i + 1) % n])
    return total / 2


def _clean(vertices: Sequence[Point2]) -> list[Point2]:
    """Drop repeated and collinear vertices; keep counterclockwise order."""
    pts: list[Point2] = []
    for v in vertices:
        if not pts or pts[-1] != v:
            pts.append(v)
    while len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        for i in range(len(pts)):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % len(pts)]
            if orient(a, b, c) == 0:
                del pts[i]
                changed = True
                break
    if len(pts) >= 3 and signed_area(pts) < 0:
        pts.reverse()
    return pts


def _canonical(vertices: list[Point2]) -> tuple[Point2, ...]:
    if not vertices:
        return ()
    k = min(range(len(vertices)), key=lambda i: vertices[i])
    return tuple(vertices[k:] + vertices[:k])


class DegeneratePolygonError(ValueError):
    pass


@dataclass(frozen=True)
class ConvexPolygon2:
    """Strictly convex polygon, vertices counterclockwise from the least one."""

    vertices: tuple[Point2, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) < 3:
            raise DegeneratePolygonError("a polygon needs 3 vertices")
        n = len(self.vertices)
        for i in range(n):
            if orient(self.vertices[i - 1], self.vertices[i], self.vertices[(i + 1) % n]) <= 0:
                raise DegeneratePolygonError("vertices are not strictly convex and counterclockwise")

    @classmethod
    def from_points(cls, points: Iterable) -> "ConvexPolygon2":
        """Build from vertices given in cyclic order (either orientation)."""
        pts = _clean([pt(*p) for p in points])
        if len(pts) < 3:
            raise DegeneratePolygonError("degenerate polygon")
        return cls(_canonical(pts))

    @classmethod
    def hull(cls, points: Iterable) -> "ConvexPolygon2":
        pts = sorted(set(pt(*p) for p in points))
        if len(pts) < 3:
            raise DegeneratePolygonError("degenerate hull")
        lower: list[Point2] = []
        for p in pts:
            while len(lower) >= 2 and orient(lower[-2], lower[-1], p) <= 0:
                lower.pop()
            lower.append(p)
        upper: list[Point2] = []
        for p in reversed(pts):
            while len(upper) >= 2 and orient(upper[-2], upper[-1], p) <= 0:
                upper.pop()
            upper.append(p)
        return cls.from_points(lower[:-1] + upper[:-1])

    def __len__(self) -> int:
        return len(self.vertices)

    def area(self) -> Fraction:
        return signed_area(self.vertices)

    def centroid(self) -> Point2:
        a = Fraction(0)
        cx = Fraction(0)
        cy = Fraction(0)
        v = self.vertices
        for i in range(len(v)):
            p, q = v[i], v[(i + 1) % len(v)]
            w = cross2(p, q)
            a += w
            cx += (p[0] + q[0]) * w
            cy += (p[1] + q[1]) * w
        return (cx / (3 * a), cy / (3 * a))

    def edges(self) -> list[tuple[Point2, Point2]]:
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def halfplanes(self) -> list[HalfPlane]:
        out = []
        for p, q in self.edges():
            # interior is on the left of p->q
            a = q[1] - p[1]
            b = p[0] - q[0]
            out.append((a, b, a * p[0] + b * p[1]))
        return out

    def contains(self, p: Point2, strict: bool = True) -> bool:
        for a, b in self.edges():
            o = orient(a, b, p)
            if o < 0 or (strict and o == 0):
                return False
        return True

    def on_boundary(self, p: Point2) -> bool:
        return self.contains(p, strict=False) and not self.contains(p, strict=True)

    def translate(self, v: Point2) -> "ConvexPolygon2":
        return ConvexPolygon2(_canonical([vadd(p, v) for p in self.vertices]))

    def transform(self, m: Sequence[Sequence], t: Point2 = (Fraction(0), Fraction(0))) -> "ConvexPolygon2":
        pts = [
            (m[0][0] * x + m[0][1] * y + t[0], m[1][0] * x + m[1][1] * y + t[1])
            for x, y in self.vertices
        ]
        return ConvexPolygon2.from_points(pts)

    def clip(self, h: HalfPlane) -> "ConvexPolygon2 | None":
        pts = clip_halfplane(list(self.vertices), h)
        pts = _clean(pts)
        if len(pts) < 3:
            return None
        return ConvexPolygon2(_canonical(pts))

    def intersect(self, other: "ConvexPolygon2") -> "ConvexPolygon2 | None":
        cur: ConvexPolygon2 | None = self
        for h in other.halfplanes():
            cur = cur.clip(h)
            if cur is None:
                return None
        return cur

    def bbox(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def shape_key(self) -> tuple[Point2, ...]:
        """Translation-invariant key: vertices relative to the least vertex."""
        base = self.vertices[0]
        return tuple(vsub(p, base) for p in self.vertices)


def clip_halfplane(vertices: list[Point2], h: HalfPlane) -> list[Point2]:
    a, b, c = h

    def val(p: Point2) -> Fraction:
        return c - (a * p[0] + b * p[1])

    out: list[Point2] = []
    n = len(vertices)
    for i in range(n):
        p, q = vertices[i], vertices[(i + 1) % n]
        vp, vq = val(p), val(q)
        if vp >= 0:
            out.append(p)
        if (vp > 0 and vq < 0) or (vp < 0 and vq > 0):
            t = vp / (vp - vq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def subtract(poly: ConvexPolygon2, hole: ConvexPolygon2) -> list[ConvexPolygon2]:
    """Split ``poly - hole`` into interior-disjoint convex pieces."""
    if poly.intersect(hole) is None:
        return [poly]
    pieces = []
    rest: ConvexPolygon2 | None = poly
    for a, b, c in hole.halfplanes():
        if rest is None:
            break
        outside = rest.clip((-a, -b, -c))
        if outside is not None:
            pieces.append(outside)
        rest = rest.clip((a, b, c))
    return pieces


def interiors_overlap(p: ConvexPolygon2, q: ConvexPolygon2) -> bool:
    return p.intersect(q) is not None
