"""Periodic tiles and tilings at rational parameters.

A tile is grown from a periodic point p: every point q sharing p's symbolic
encoding satisfies q + D_k in F1 and q + D_k + V_k in F2, where D_k is the
displacement of the k-th orbit point.  Intersecting these parallelograms gives
the tile exactly, and its orbit is the set of translates T + D_k.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .exact import as_rational, format_rational
from .geom2 import ConvexPolygon2, DegeneratePolygonError, Point2, pt, subtract, vadd, vsub
from .pet import (
    BoundaryError,
    PetSystem,
    SymbolicStep,
    build_system,
    periodic_orbit,
)


class ShapeKind(str, enum.Enum):
    SQUARE = "square"
    OCTAGON = "octagon"
    TRIANGLE = "triangle"
    OTHER = "other"


@dataclass(frozen=True)
class Tile:
    polygon: ConvexPolygon2
    period: int
    displacement_list: tuple[SymbolicStep, ...]
    shape: ShapeKind


@dataclass
class Tiling:
    s: Fraction
    tiles: list[Tile] = field(default_factory=list)
    covered_area: Fraction = Fraction(0)
    complete: bool = False
    uncovered: list[ConvexPolygon2] = field(default_factory=list)

    def uncovered_area(self) -> Fraction:
        return 4 * self.s - self.covered_area


def _sq(v: Point2) -> Fraction:
    return v[0] * v[0] + v[1] * v[1]


def classify_tile(poly: ConvexPolygon2) -> ShapeKind:
    v = poly.vertices
    n = len(v)
    sides = [vsub(v[(i + 1) % n], v[i]) for i in range(n)]
    lengths = [_sq(e) for e in sides]
    # edges parallel to 8th roots of unity: horizontal, vertical or diagonal
    eighth = all(e[0] == 0 or e[1] == 0 or abs(e[0]) == abs(e[1]) for e in sides)
    if not eighth:
        return ShapeKind.OTHER
    dots = [sides[i][0] * sides[(i + 1) % n][0] + sides[i][1] * sides[(i + 1) % n][1] for i in range(n)]
    if n == 4 and len(set(lengths)) == 1 and all(d == 0 for d in dots):
        return ShapeKind.SQUARE
    if n == 3:
        ls = sorted(lengths)
        if ls[0] == ls[1] and ls[0] + ls[1] == ls[2]:
            return ShapeKind.TRIANGLE
    if n == 8:
        # dihedral 8-fold symmetry: opposite vertices antipodal about the centroid
        # and side lengths alternate between two values (4-fold rotation + reflections)
        c = poly.centroid()
        antipodal = all(vadd(v[i], v[(i + 4) % 8]) == (2 * c[0], 2 * c[1]) for i in range(8))
        rot = all(
            vsub(v[(i + 2) % 8], c) == (-(v[i][1] - c[1]), v[i][0] - c[0]) for i in range(8)
        )
        turns = all(
            sides[i][0] * sides[(i + 1) % 8][1] - sides[i][1] * sides[(i + 1) % 8][0] > 0
            for i in range(8)
        )
        if antipodal and rot and turns and (lengths[0] == lengths[2]):
            return ShapeKind.OCTAGON
    return ShapeKind.OTHER


def central_tiles(s) -> list[ConvexPolygon2]:
    """The tiles around the origin predicted by the fundamental-domain overlap."""
    s = as_rational(s)
    if s <= 0:
        raise ValueError("s must be positive")
    if Fraction(1, 2) < s < 1:
        return [ConvexPolygon2.from_points([
            (s, 1 - s), (1 - s, s), (s - 1, s), (-s, 1 - s),
            (-s, s - 1), (s - 1, -s), (1 - s, -s), (s, s - 1),
        ])]
    sys = build_system(s)
    core = sys.F1.intersect(sys.F2)
    if s <= Fraction(1, 2):
        return [core]
    # s >= 1: F1 ∩ F2 is the unit diamond; its grid translates by (k, k) that
    # stay inside X are the central tiles
    out = [core]
    k = 1
    while True:
        sq = core.translate((k, k))
        if sys.F1.intersect(sq) != sq:
            break
        out.extend([sq, core.translate((-k, -k))])
        k += 1
    return out


def tile_constraints(sys: PetSystem, o) -> list[ConvexPolygon2]:
    p0 = o.points[0]
    cells = []
    for k, st in enumerate(o.steps):
        D = vsub(o.points[k], p0)
        V = st.V(sys.s)
        cells.append(sys.F1.translate((-D[0], -D[1])))
        cells.append(sys.F2.translate((-D[0] - V[0], -D[1] - V[1])))
    return cells


def grow_tile(sys: PetSystem, p) -> Tile:
    p = pt(*p)
    o = periodic_orbit(sys, p)
    poly: ConvexPolygon2 | None = sys.F1
    for cell in tile_constraints(sys, o):
        poly = poly.intersect(cell)
        if poly is None:
            raise BoundaryError("tile collapsed; seed lies on a cell boundary")
    if not poly.contains(p):
        raise BoundaryError("seed is not interior to its cell")
    return Tile(poly, o.period, tuple(o.steps), classify_tile(poly))


def _orbit_tiles(sys: PetSystem, t: Tile, p: Point2) -> list[Tile]:
    """All tiles along the orbit of t (translates by the orbit displacements)."""
    out = [t]
    cur = p
    steps = list(t.displacement_list)
    for k in range(1, t.period):
        st = steps[k - 1]
        cur = vadd(vadd(cur, st.V(sys.s)), st.W(sys.s))
        D = vsub(cur, p)
        rolled = tuple(steps[k:] + steps[:k])
        out.append(Tile(t.polygon.translate(D), t.period, rolled, t.shape))
    return out


def _seed_candidates(frag: ConvexPolygon2) -> Iterable[Point2]:
    c = frag.centroid()
    yield c
    x0, y0, x1, y1 = frag.bbox()
    w = min(x1 - x0, y1 - y0)
    for k in range(1, 40):
        dx = w * Fraction(k * 7919 % 1009, 1009 * 97)
        dy = w * Fraction(k * 104729 % 1013, 1013 * 89)
        for sx, sy in ((1, 1), (-1, 1), (1, -1), (-1, -1)):
            q = (c[0] + sx * dx, c[1] + sy * dy)
            if frag.contains(q):
                yield q


def _merge_convex(a: ConvexPolygon2, b: ConvexPolygon2) -> ConvexPolygon2 | None:
    try:
        h = ConvexPolygon2.hull(list(a.vertices) + list(b.vertices))
    except DegeneratePolygonError:
        return None
    return h if h.area() == a.area() + b.area() else None


def compute_tiling(sys: PetSystem, seed_grid: int = 0, max_tiles: int = 200000,
                   merge_nonsharp: bool = True) -> Tiling:
    """Tile X by seeding inside the uncovered fragments until the area is 4s.

    ``seed_grid`` > 0 first seeds the midpoints of a seed_grid x seed_grid grid
    over the bounding box before the fragment-driven completion.
    """
    s = sys.s
    target = 4 * s
    tiling = Tiling(s)
    frags: list[ConvexPolygon2] = [sys.F1]
    seen: set = set()

    def add_orbit(t: Tile, p: Point2) -> None:
        nonlocal frags
        for tt in _orbit_tiles(sys, t, p):
            key = tt.polygon.vertices
            if key in seen:
                continue
            seen.add(key)
            tiling.tiles.append(tt)
            tiling.covered_area += tt.polygon.area()
            new = []
            for fr in frags:
                new.extend(subtract(fr, tt.polygon))
            frags = new

    def try_seed(q: Point2) -> bool:
        for fr in frags:
            if fr.contains(q):
                break
        else:
            return False
        try:
            t = grow_tile(sys, q)
        except BoundaryError:
            return False
        add_orbit(t, q)
        return True

    if seed_grid > 0:
        x0, y0, x1, y1 = sys.F1.bbox()
        for i in range(seed_grid):
            for j in range(seed_grid):
                q = (x0 + (x1 - x0) * Fraction(2 * i + 1, 2 * seed_grid),
                     y0 + (y1 - y0) * Fraction(2 * j + 1, 2 * seed_grid))
                if sys.F1.contains(q):
                    try_seed(q)
                if len(tiling.tiles) >= max_tiles:
                    break

    stuck = 0
    while tiling.covered_area < target and frags and len(tiling.tiles) < max_tiles:
        frags.sort(key=lambda f: -f.area())
        progressed = False
        for fr in frags[:8]:
            for q in _seed_candidates(fr):
                if try_seed(q):
                    progressed = True
                    break
            if progressed:
                break
        if not progressed:
            stuck += 1
            if stuck > 3:
                break
    tiling.complete = tiling.covered_area == target
    tiling.uncovered = frags
    if merge_nonsharp:
        tiling.tiles = merge_same_orbit_cells(tiling.tiles)
    return tiling


def merge_same_orbit_cells(tiles: list[Tile]) -> list[Tile]:
    """Fuse cells that share period and translation data and form a convex union.

    At the non-sharp parameters s = 1/n a single periodic tile is cut by
    partition lines into several cells with the same displacement list up to
    a cyclic shift; they are merged when their union is convex.
    """
    out = list(tiles)
    changed = True
    while changed:
        changed = False
        for i in range(len(out)):
            for j in range(i + 1, len(out)):
                a, b = out[i], out[j]
                if a.period != b.period:
                    continue
                if _sum_key(a) != _sum_key(b):
                    continue
                m = _merge_convex(a.polygon, b.polygon)
                if m is None:
                    continue
                out[i] = Tile(m, a.period, a.displacement_list, classify_tile(m))
                del out[j]
                changed = True
                break
            if changed:
                break
    return out


def _sum_key(t: Tile):
    return (sum(st.a for st in t.displacement_list), sum(st.b for st in t.displacement_list),
            sum(st.c for st in t.displacement_list), sum(st.d for st in t.displacement_list))


def tiling_for(s, seed_grid: int = 0, **kw) -> Tiling:
    return compute_tiling(build_system(as_rational(s)), seed_grid, **kw)


def shape_classes(tiling: Tiling) -> dict:
    """Multiset of tile shapes up to translation."""
    out: dict = {}
    for t in tiling.tiles:
        k = t.polygon.shape_key()
        out[k] = out.get(k, 0) + 1
    return out


def coverage_stats(t: Tiling) -> tuple[Fraction, Fraction, Fraction]:
    """Covered fraction of X^0 and of its left and bottom special edges.

    X^0 is the part of X to the left of the central tiles, here taken as the
    part of X with x + y < -c where c is where the central tile meets the
    diagonal; the two edges are X's left edge and bottom edge.
    """
    s = t.s
    sys = build_system(s)
    region = left_region(sys)
    covered = Fraction(0)
    for tile in t.tiles:
        inter = tile.polygon.intersect(region)
        if inter is not None:
            covered += inter.area()
    lam = covered / region.area()
    left = _edge_cover(t, (-1 - s, -s), (-1 + s, s))
    bottom = _edge_cover(t, (-1 - s, -s), (1 - s, -s))
    return lam, left, bottom


def left_region(sys: PetSystem) -> ConvexPolygon2:
    s = sys.s
    c = central_tiles(s)
    xmin = min(min(p[0] for p in poly.vertices) for poly in c)
    return sys.F1.clip((Fraction(1), Fraction(0), xmin)) or sys.F1


def _edge_cover(t: Tiling, a, b) -> Fraction:
    a, b = pt(*a), pt(*b)
    intervals = []
    for tile in t.tiles:
        lo, hi = None, None
        for p, q in tile.polygon.edges():
            if _collinear(a, b, p) and _collinear(a, b, q):
                u, v = _param(a, b, p), _param(a, b, q)
                lo = min(u, v) if lo is None else min(lo, u, v)
                hi = max(u, v) if hi is None else max(hi, u, v)
        if lo is not None:
            intervals.append((max(lo, Fraction(0)), min(hi, Fraction(1))))
    intervals.sort()
    total = Fraction(0)
    end = Fraction(0)
    for lo, hi in intervals:
        if hi <= end:
            continue
        total += hi - max(lo, end)
        end = hi
    return total


def _collinear(a, b, p) -> bool:
    return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) == 0


def _param(a, b, p) -> Fraction:
    if b[0] != a[0]:
        return (p[0] - a[0]) / (b[0] - a[0])
    return (p[1] - a[1]) / (b[1] - a[1])


def tiling_to_json(t: Tiling) -> dict:
    fr = format_rational
    return {
        "s": fr(t.s),
        "complete": t.complete,
        "covered_area": fr(t.covered_area),
        "tiles": [
            {
                "vertices": [[fr(x), fr(y)] for x, y in tile.polygon.vertices],
                "period": tile.period,
                "shape": tile.shape.value,
            }
            for tile in t.tiles
        ],
    }


def partial_uncovered_area(t: Tiling) -> Fraction:
    """Area of X left uncovered once the tiles of the largest period are dropped.

    At a convergent of an irrational parameter the longest-period tiles crowd
    around the limit set, so this is a measured proxy for the limit set's area.
    """
    if not t.tiles:
        return 4 * t.s
    top = max(tile.period for tile in t.tiles)
    kept = sum((tile.polygon.area() for tile in t.tiles if tile.period < top), Fraction(0))
    return 4 * t.s - kept


def predicted_shape_classes(s, depth: int = 64) -> set:
    """Translation classes of the shapes T_n(O_{s_n}) from the prototile recursion."""
    from .renorm import reconstruct_prototiles

    protos, done = reconstruct_prototiles(s, depth)
    if not done:
        raise ValueError("prototile recursion did not terminate within the depth budget")
    return {poly.shape_key() for p in protos for poly in p.polygons}


def shapes_match_prototiles(t: Tiling) -> bool:
    return set(shape_classes(t)) == predicted_shape_classes(t.s)
