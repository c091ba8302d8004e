from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from dlpet.polytope3 import (
    IDENTITY, AffineMap3, CollinearError, ConvexPolytope3, IncidenceError, NoWitnessFound,
    PolytopeError, ProjectiveMap3, apply_map, check_improved_normals, check_no_collinear,
    check_three_faces, contains, contains_polytope, disjoint, enumerate_faces, find_witness,
    from_halfspaces, halfspaces, interiors_overlap, intersection, iota1, iota2, slice_at, volume6,
)

CUBE = ConvexPolytope3([(x, y, z) for x in (0, 420) for y in (0, 420) for z in (0, 420)], "cube")
PYRAMID = ConvexPolytope3([(0, 0, 0), (2, 0, 0), (2, 2, 0), (0, 2, 0), (1, 1, 1)], "pyramid")


def box(x0, y0, z0, x1, y1, z1, name=""):
    return ConvexPolytope3([(x, y, z) for x in (x0, x1) for y in (y0, y1) for z in (z0, z1)], name)


def test_cube_faces():
    faces = enumerate_faces(CUBE)
    assert len(faces) == 6
    check_three_faces(CUBE, faces)
    assert all(f.improved() for f in faces)


def test_pyramid_apex_in_four_faces():
    with pytest.raises(IncidenceError):
        check_three_faces(PYRAMID, enumerate_faces(PYRAMID))


def test_collinear_vertices_rejected():
    P = ConvexPolytope3([(0, 0, 0), (1, 0, 0), (2, 0, 0), (0, 1, 0), (0, 0, 1)])
    with pytest.raises(CollinearError):
        check_no_collinear(P)


def test_flat_rejected():
    with pytest.raises(PolytopeError):
        enumerate_faces(ConvexPolytope3([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)]))


def test_improved_normal_violations():
    P = ConvexPolytope3([(0, 0, 0), (9, 0, 0), (0, 1, 0), (0, 0, 1), (9, 1, 1)])
    assert check_improved_normals(P) == [f for f in P.faces if not f.improved()]


def test_volume_cube():
    assert volume6(CUBE) == 6 * 420 ** 3
    assert volume6(PYRAMID) == 8


def test_containment():
    assert contains(CUBE, (210, 210, 210), strict=True)
    assert contains(CUBE, (0, 0, 0)) and not contains(CUBE, (0, 0, 0), strict=True)
    assert not contains(CUBE, (421, 0, 0))
    assert contains_polytope(CUBE, box(1, 1, 1, 2, 2, 2))


def test_disjoint_boxes_have_witness():
    a, b = box(0, 0, 0, 1, 1, 1), box(2, 0, 0, 3, 1, 1)
    w = disjoint(a, b)
    assert max(w.dot(type(w).of(v)) for v in a.vertices) <= min(w.dot(type(w).of(v)) for v in b.vertices)
    touching = box(1, 0, 0, 2, 1, 1)
    assert find_witness(a, touching) is not None
    with pytest.raises(NoWitnessFound):
        disjoint(a, box(0, 0, 0, 2, 2, 2))


def test_intersection_and_halfspaces():
    a, b = box(0, 0, 0, 2, 2, 2), box(1, 1, 1, 3, 3, 3)
    assert intersection(a, b) == box(1, 1, 1, 2, 2, 2)
    assert from_halfspaces(halfspaces(CUBE)) == CUBE
    assert not interiors_overlap(a, box(2, 0, 0, 3, 1, 1))


def test_slice():
    assert slice_at(PYRAMID, Fraction(1, 2)) == sorted(
        [(Fraction(1, 2), Fraction(1, 2)), (Fraction(3, 2), Fraction(1, 2)),
         (Fraction(1, 2), Fraction(3, 2)), (Fraction(3, 2), Fraction(3, 2))])


def test_affine_maps():
    m = AffineMap3.of(((1, 0, 2), (0, 1, -2), (0, 0, 1)), (-840, 0, 0))
    assert m.det() == 1
    assert m.inverse().compose(m) == IDENTITY
    assert volume6(apply_map(CUBE, m)) == volume6(CUBE)


def test_projective_map_and_exceptional_plane():
    p = ProjectiveMap3.of(((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 1, 0)))
    assert p((2, 4, 2)) == (1, 2, 1)
    with pytest.raises(ValueError):
        p.image(box(-1, -1, -1, 1, 1, 1))


def test_involutions():
    v = (Fraction(-525), Fraction(-105), Fraction(105))
    assert iota1(iota1(v)) == v
    assert iota2(iota2(v)) == v


small = st.integers(min_value=-30, max_value=30)
pts = st.lists(st.tuples(small, small, small), min_size=5, max_size=9)


def hull_polytope(points):
    arr = np.array(points, dtype=float)
    try:
        h = ConvexHull(arr)
    except Exception:
        return None
    return ConvexPolytope3([points[i] for i in h.vertices]), h.volume


@settings(max_examples=30, deadline=None)
@given(pts)
def test_volume_matches_scipy(points):
    r = hull_polytope(points)
    assume(r is not None and r[1] > 1e-9)
    P, vol = r
    assert float(volume6(P)) == pytest.approx(6 * vol, rel=1e-9)
    faces = P.faces
    for f in faces:
        for v in P.vertices:
            n = f.normal
            assert n[0] * v[0] + n[1] * v[1] + n[2] * v[2] <= f.offset


def lp_overlap(P, Q) -> bool:
    """Interior overlap test by linear programming: maximize the slack t."""
    A, b = [], []
    for n, d in halfspaces(P) + halfspaces(Q):
        norm = float(np.linalg.norm([float(c) for c in n]))
        A.append([float(c) for c in n] + [norm])
        b.append(float(d))
    res = linprog([0, 0, 0, -1], A_ub=A, b_ub=b, bounds=[(None, None)] * 3 + [(0, 1)])
    return res.status == 0 and -res.fun > 1e-7


@settings(max_examples=30, deadline=None)
@given(pts, pts)
def test_overlap_agrees_with_lp(a, b):
    ra, rb = hull_polytope(a), hull_polytope(b)
    assume(ra is not None and rb is not None and ra[1] > 1e-9 and rb[1] > 1e-9)
    P, Q = ra[0], rb[0]
    overlap = interiors_overlap(P, Q)
    assert overlap == lp_overlap(P, Q)
    if find_witness(P, Q) is not None:
        assert not overlap
