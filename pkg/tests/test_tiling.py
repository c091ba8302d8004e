import functools
import math
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from shapely.geometry import Polygon

from dlpet.geom2 import ConvexPolygon2, interiors_overlap
from dlpet.pet import BoundaryError, build_system, periodic_orbit
from dlpet.renorm import inversion_map, reconstruct_prototiles
from dlpet.tiling import (
    ShapeKind, central_tiles, classify_tile, coverage_stats, grow_tile, partial_uncovered_area,
    shape_classes, shapes_match_prototiles, tiling_for, tiling_to_json,
)

F = Fraction


@functools.lru_cache(maxsize=None)
def tiling(s):
    return tiling_for(s)


def test_central_octagon():
    s = F(8, 13)
    (o,) = central_tiles(s)
    assert set(o.vertices) == {(a * x, b * y) for x, y in ((F(8, 13), F(5, 13)), (F(5, 13), F(8, 13)))
                               for a in (1, -1) for b in (1, -1)}
    assert classify_tile(o) is ShapeKind.OCTAGON


def test_central_square():
    s = F(5, 13)
    (sq,) = central_tiles(s)
    assert set(sq.vertices) == {(a * s, b * s) for a in (1, -1) for b in (1, -1)}


def test_insertion_picture_diamonds():
    assert len(central_tiles(F(5, 4))) == 1
    tiles = central_tiles(F(9, 4))
    assert len(tiles) == 3
    assert all(classify_tile(x) is ShapeKind.SQUARE for x in tiles)
    polys = {x.polygon for x in tiling(F(9, 4)).tiles}
    assert all(x in polys for x in tiles)


def test_classify_examples():
    assert classify_tile(ConvexPolygon2.from_points([(0, 0), (1, 0), (0, 1)])) is ShapeKind.TRIANGLE
    s = F(2, 5)
    sq = ConvexPolygon2.from_points([(s, s), (-s, s), (-s, -s), (s, -s)])
    assert classify_tile(sq) is ShapeKind.SQUARE
    assert classify_tile(ConvexPolygon2.from_points([(0, 0), (2, 0), (2, 1), (0, 1)])) is ShapeKind.OTHER


def test_grow_tile_trivial_tiles():
    t = grow_tile(build_system(F(8, 13)), (0, 0))
    assert t.polygon == central_tiles(F(8, 13))[0] and t.period == 1
    t = grow_tile(build_system(F(2, 5)), (0, 0))
    assert t.polygon == central_tiles(F(2, 5))[0]


def test_grow_tile_at_one():
    sys = build_system(1)
    for p in [(F(-2, 3), F(-2, 3)), (F(4, 3), F(2, 3)), (F(1, 7), F(1, 9))]:
        assert classify_tile(grow_tile(sys, p).polygon) in (ShapeKind.SQUARE, ShapeKind.TRIANGLE)


@pytest.mark.parametrize("s", [F(1, 2), F(2, 5), F(5, 13), F(8, 13), F(7, 10), F(1), F(1, 3)])
def test_tiling_fills_X_exactly(s):
    t = tiling(s)
    assert t.complete
    assert sum((x.polygon.area() for x in t.tiles), F(0)) == 4 * s
    assert t.uncovered_area() == 0


@pytest.mark.parametrize("s", [F(2, 5), F(5, 13), F(8, 13)])
def test_tiles_pairwise_disjoint(s):
    tiles = [x.polygon for x in tiling(s).tiles]
    for i, a in enumerate(tiles):
        for b in tiles[i + 1:]:
            assert not interiors_overlap(a, b)


@pytest.mark.parametrize("s", [F(2, 5), F(8, 13)])
def test_tile_orbits_constant(s):
    """Every tile's interior points share its period and symbolic steps."""
    sys = build_system(s)
    for tile in tiling(s).tiles[:20]:
        c = tile.polygon.centroid()
        for v in tile.polygon.vertices:
            q = ((3 * c[0] + v[0]) / 4, (3 * c[1] + v[1]) / 4)
            o = periodic_orbit(sys, q)
            assert o.period == tile.period


@pytest.mark.parametrize("s", [F(2, 5), F(8, 13)])
def test_tiles_are_maximal(s):
    """Just outside each tile edge the first step or the period changes."""
    sys = build_system(s)
    for tile in tiling(s).tiles[:12]:
        c = tile.polygon.centroid()
        inside = periodic_orbit(sys, c)
        for p, q in tile.polygon.edges():
            m = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
            out = (m[0] + (m[0] - c[0]) / 1000, m[1] + (m[1] - c[1]) / 1000)
            if not sys.F1.contains(out):
                continue
            try:
                o = periodic_orbit(sys, out)
            except BoundaryError:
                continue
            assert o.period != inside.period or o.steps != inside.steps


def test_half_tiling_is_square_plus_half_triangles():
    t = tiling(F(1, 2))
    kinds = Counter(x.shape for x in t.tiles)
    assert kinds == {ShapeKind.SQUARE: 1, ShapeKind.TRIANGLE: 4}
    sq = next(x for x in t.tiles if x.shape is ShapeKind.SQUARE).polygon
    assert sq == central_tiles(F(1, 2))[0]
    for x in t.tiles:
        if x.shape is ShapeKind.TRIANGLE:
            assert x.polygon.area() == F(1, 4)


def test_tiling_at_one_squares_and_triangles():
    assert {x.shape for x in tiling(F(1)).tiles} <= {ShapeKind.SQUARE, ShapeKind.TRIANGLE}


@pytest.mark.parametrize("s", [F(2, 5), F(5, 13), F(8, 13), F(1, 2), F(7, 10)])
def test_shapes_match_prototiles(s):
    assert shapes_match_prototiles(tiling(s))


def test_prototile_depth_zero():
    protos, _ = reconstruct_prototiles(F(8, 13), 0)
    assert len(protos) == 1 and protos[0].polygons == tuple(central_tiles(F(8, 13)))


@pytest.mark.parametrize("s", [F(5, 4), F(4, 3), F(3, 2)])
def test_insertion_adds_two_diamonds(s):
    a, b = Counter(shape_classes(tiling(s))), Counter(shape_classes(tiling(s + 1)))
    assert not a - b
    extra = b - a
    assert sum(extra.values()) == 2
    (key,) = extra
    assert classify_tile(ConvexPolygon2.from_points(key)) is ShapeKind.SQUARE


@pytest.mark.parametrize("s", [F(2, 5), F(1, 3), F(5, 13)])
def test_inversion_carries_tiling(s):
    m = inversion_map(s)
    a = {x.polygon for x in tiling(s).tiles}
    b = {x.polygon.transform(m.matrix) for x in tiling(1 / (2 * s)).tiles}
    assert a == b


def test_coverage_complete_tiling():
    lam, left, bottom = coverage_stats(tiling(F(2, 5)))
    assert lam == 1 and left == 1 and bottom == 1


def test_partial_tiling_coverage_below_one():
    t = tiling_for(F(5, 13), max_tiles=10)
    assert not t.complete
    lam, _, _ = coverage_stats(t)
    assert lam < 1


SQRT_HALF_CONVERGENTS = [F(2, 3), F(5, 7), F(12, 17)]


def test_central_tile_converges():
    r = math.sqrt(2) / 2
    octagon = Polygon([(r, 1 - r), (1 - r, r), (r - 1, r), (-r, 1 - r),
                       (-r, r - 1), (r - 1, -r), (1 - r, -r), (r, r - 1)])
    dists = []
    for s in SQRT_HALF_CONVERGENTS:
        (o,) = central_tiles(s)
        dists.append(Polygon([(float(x), float(y)) for x, y in o.vertices]).hausdorff_distance(octagon))
    assert dists[0] > dists[1] > dists[2]


def test_uncovered_area_shrinks_along_convergents():
    areas = [partial_uncovered_area(tiling(s)) / (4 * s) for s in SQRT_HALF_CONVERGENTS]
    assert areas[0] > areas[1] > areas[2] > 0


def test_json_is_exact():
    doc = tiling_to_json(tiling(F(2, 5)))
    assert doc["s"] == "2/5" and doc["covered_area"] == "8/5"
    assert all(isinstance(c, str) for t in doc["tiles"] for v in t["vertices"] for c in v)


@settings(max_examples=40, deadline=None)
@given(st.fractions(min_value=F(-7, 5), max_value=F(7, 5), max_denominator=50),
       st.fractions(min_value=F(-2, 5), max_value=F(2, 5), max_denominator=50))
def test_every_point_lies_in_a_tile(x, y):
    t = tiling(F(2, 5))
    p = (x, y)
    if not build_system(F(2, 5)).F1.contains(p):
        return
    assert any(tile.polygon.contains(p, strict=False) for tile in t.tiles)
