"""Convex polytopes in the 420-scaled parameter bundle.

Vertices are triples of Fractions; the shipped data is integral and goes
through the checked :class:`IVec3` arithmetic, while projective images may
carry denominators and fall back to plain Python integers after scaling.
Faces are found by the subset method: every supporting plane through three
vertices collects the vertices on it.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .exact import IVec3, lcm_of_denominators, primitive

Vec = tuple[Fraction, Fraction, Fraction]
SCALE = 420


class PolytopeError(ValueError):
    pass


class CollinearError(PolytopeError):
    pass


class IncidenceError(PolytopeError):
    pass


class NoWitnessFound(Exception):
    """No separating vector in the search cube (overlap or too small a cube)."""


class NonIntegralImageError(ValueError):
    pass


def vec(v: Iterable) -> Vec:
    x, y, z = v
    return (Fraction(x), Fraction(y), Fraction(z))


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _det3(a, b, c):
    return _dot(a, _cross(b, c))


def _prim(n: tuple[int, int, int]) -> tuple[int, int, int]:
    g = math.gcd(*n)
    return n if g in (0, 1) else (n[0] // g, n[1] // g, n[2] // g)


@dataclass(frozen=True)
class Face:
    vertex_indices: tuple[int, ...]
    normal: tuple[int, int, int]
    offset: Fraction

    def improved(self) -> bool:
        """Two normal coordinates in {-1, 0, 1} and the third in {-8..8}."""
        a = sorted(abs(c) for c in self.normal)
        return a[0] <= 1 and a[1] <= 1 and a[2] <= 8


class ConvexPolytope3:
    def __init__(self, vertices: Iterable, name: str = ""):
        seen: dict = {}
        for v in vertices:
            seen.setdefault(vec(v), None)
        self.vertices: tuple[Vec, ...] = tuple(seen)
        self.name = name
        if len(self.vertices) < 4:
            raise PolytopeError(f"{name}: a polytope needs at least 4 vertices")

    def __repr__(self) -> str:
        return f"ConvexPolytope3({self.name!r}, {len(self.vertices)} vertices)"

    def __eq__(self, other) -> bool:
        return isinstance(other, ConvexPolytope3) and self.vertex_set() == other.vertex_set()

    def __hash__(self) -> int:
        return hash(self.vertex_set())

    def vertex_set(self) -> frozenset:
        return frozenset(self.vertices)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for v in self.vertices for c in v)

    def ivec_vertices(self) -> list[IVec3]:
        if not self.is_integral():
            raise NonIntegralImageError(f"{self.name} has non-integral vertices")
        return [IVec3(int(v[0]), int(v[1]), int(v[2])) for v in self.vertices]

    def scaled_int_vertices(self, k: int | None = None) -> tuple[int, list[tuple[int, int, int]]]:
        if k is None:
            k = lcm_of_denominators(c for v in self.vertices for c in v)
        return k, [tuple(int(c * k) for c in v) for v in self.vertices]

    def z_range(self) -> tuple[Fraction, Fraction]:
        zs = [v[2] for v in self.vertices]
        return min(zs), max(zs)

    def renamed(self, name: str) -> "ConvexPolytope3":
        return ConvexPolytope3(self.vertices, name)

    @cached_property
    def faces(self) -> list[Face]:
        return enumerate_faces(self)

    def centroid(self) -> Vec:
        n = len(self.vertices)
        return tuple(sum(v[i] for v in self.vertices) / n for i in range(3))

    def to_json(self) -> dict:
        from .exact import format_rational

        if self.is_integral():
            verts = [[int(c) for c in v] for v in self.vertices]
        else:
            verts = [[format_rational(c) for c in v] for v in self.vertices]
        return {"name": self.name, "vertices": verts}

    @classmethod
    def from_json(cls, d: dict) -> "ConvexPolytope3":
        return cls([[Fraction(c) if isinstance(c, str) else c for c in v] for v in d["vertices"]], d["name"])


def check_no_collinear(P: ConvexPolytope3) -> None:
    k, pts = P.scaled_int_vertices()
    checked = P.is_integral()
    for i, j, l in itertools.combinations(range(len(pts)), 3):
        if checked:
            a, b, c = (IVec3(*pts[m]) for m in (i, j, l))
            n = (b - a).cross(c - a)
            zero = n.is_zero()
        else:
            zero = _cross(_sub(pts[j], pts[i]), _sub(pts[l], pts[i])) == (0, 0, 0)
        if zero:
            raise CollinearError(f"{P.name}: vertices {i}, {j}, {l} are collinear")


def enumerate_faces(P: ConvexPolytope3, require_simple: bool = False) -> list[Face]:
    """Maximal coplanar boundary subsets with outward primitive normals."""
    check_no_collinear(P)
    k, pts = P.scaled_int_vertices()
    checked = P.is_integral()
    faces: dict[frozenset, Face] = {}
    n_v = len(pts)
    for i, j, l in itertools.combinations(range(n_v), 3):
        if checked:
            a, b, c = (IVec3(*pts[m]) for m in (i, j, l))
            nn = primitive((b - a).cross(c - a)).as_tuple()
        else:
            nn = _prim(_cross(_sub(pts[j], pts[i]), _sub(pts[l], pts[i])))
        D = _dot(nn, pts[i])
        vals = [_dot(nn, p) for p in pts]
        if all(v <= D for v in vals):
            normal = nn
        elif all(v >= D for v in vals):
            normal = (-nn[0], -nn[1], -nn[2])
            D = -D
        else:
            continue
        members = frozenset(m for m in range(n_v) if _dot(normal, pts[m]) == D)
        if members not in faces:
            order = _cyclic_order([pts[m] for m in sorted(members)], normal)
            idx = tuple(sorted(members)[o] for o in order)
            faces[members] = Face(idx, normal, Fraction(D, k))
    if len(faces) < 4:
        raise PolytopeError(f"{P.name}: flat or degenerate vertex set")
    out = sorted(faces.values(), key=lambda f: f.vertex_indices)
    if require_simple:
        check_three_faces(P, out)
    return out


def check_three_faces(P: ConvexPolytope3, faces: Sequence[Face]) -> None:
    count = [0] * len(P.vertices)
    for f in faces:
        for m in f.vertex_indices:
            count[m] += 1
    bad = [i for i, c in enumerate(count) if c != 3]
    if bad:
        raise IncidenceError(f"{P.name}: vertices {bad} do not lie in exactly 3 faces")


def _cyclic_order(points: list, normal) -> list[int]:
    """Counterclockwise order (seen from outside) of coplanar convex points."""
    c = [sum(p[i] for p in points) for i in range(3)]
    n = len(points)
    rel = [tuple(n * p[i] - c[i] for i in range(3)) for p in points]
    ref = rel[0]

    def half(r):
        side = _dot(_cross(ref, r), normal)
        if side > 0 or (side == 0 and _dot(ref, r) > 0):
            return 0
        return 1

    def cmp(a, b):
        ra, rb = rel[a], rel[b]
        ha, hb = half(ra), half(rb)
        if ha != hb:
            return ha - hb
        s = _dot(_cross(ra, rb), normal)
        return -1 if s > 0 else (1 if s < 0 else 0)

    return sorted(range(n), key=functools.cmp_to_key(cmp))


def check_improved_normals(P: ConvexPolytope3) -> list[Face]:
    """Faces whose primitive normal is not of the improved form."""
    return [f for f in P.faces if not f.improved()]


def contains(P: ConvexPolytope3, v: Iterable, strict: bool = False) -> bool:
    v = vec(v)
    for f in P.faces:
        val = _dot(f.normal, v)
        if val > f.offset or (strict and val == f.offset):
            return False
    return True


def contains_polytope(P: ConvexPolytope3, Q: ConvexPolytope3) -> bool:
    return all(contains(P, v) for v in Q.vertices)


def volume6(P: ConvexPolytope3) -> Fraction:
    """Six times the volume, via fans over faces from a base vertex."""
    k, pts = P.scaled_int_vertices()
    b = pts[0]
    total = 0
    for f in P.faces:
        if 0 in f.vertex_indices:
            continue
        ring = [_sub(pts[m], b) for m in f.vertex_indices]
        for t in range(1, len(ring) - 1):
            total += abs(_det3(ring[0], ring[t], ring[t + 1]))
    vol = Fraction(total, k**3)
    return int(vol) if vol.denominator == 1 else vol


# ---------------------------------------------------------------- separation

def _witness_vectors() -> np.ndarray:
    r = range(-10, 11)
    ws = [w for w in itertools.product(r, r, r) if w != (0, 0, 0)]
    return np.array(ws, dtype=np.int64)


WITNESSES = _witness_vectors()


class SeparationTable:
    """Per-polytope extremes of W.v over every candidate W, for batch tests.

    All polytopes in one table share a scale so that rational vertices become
    integers; comparisons are exact in int64 (checked against the bound).
    """

    def __init__(self, polys: Sequence[ConvexPolytope3]):
        self.polys = list(polys)
        self.scale = lcm_of_denominators(c for P in self.polys for v in P.vertices for c in v)
        self.maxs = []
        self.mins = []
        for P in self.polys:
            _, pts = P.scaled_int_vertices(self.scale)
            bound = max(abs(c) for p in pts for c in p)
            if bound * 30 >= 2**62:
                raise OverflowError("scaled coordinates too large for int64 witness search")
            vals = WITNESSES @ np.array(pts, dtype=np.int64).T
            self.maxs.append(vals.max(axis=1))
            self.mins.append(vals.min(axis=1))

    def witness(self, i: int, j: int) -> IVec3 | None:
        ok = self.maxs[i] <= self.mins[j]
        idx = np.flatnonzero(ok)
        if idx.size == 0:
            return None
        return IVec3(*(int(c) for c in WITNESSES[idx[0]]))


def find_witness(P: ConvexPolytope3, Q: ConvexPolytope3) -> IVec3 | None:
    return SeparationTable([P, Q]).witness(0, 1)


def disjoint(P: ConvexPolytope3, Q: ConvexPolytope3) -> IVec3:
    """First W in lexicographic order with max W.P <= min W.Q."""
    w = find_witness(P, Q)
    if w is None:
        raise NoWitnessFound(f"no separating vector for {P.name} and {Q.name}")
    return w


# ---------------------------------------------------------------- maps

@dataclass(frozen=True)
class AffineMap3:
    matrix: tuple[tuple[Fraction, ...], ...]
    translation: Vec

    @classmethod
    def of(cls, matrix, translation) -> "AffineMap3":
        return cls(tuple(tuple(Fraction(c) for c in row) for row in matrix), vec(translation))

    def __call__(self, v: Iterable) -> Vec:
        v = vec(v)
        return tuple(_dot(self.matrix[i], v) + self.translation[i] for i in range(3))

    def det(self) -> Fraction:
        m = self.matrix
        return _det3(m[0], m[1], m[2])

    def compose(self, other: "AffineMap3") -> "AffineMap3":
        """self after other."""
        m = tuple(
            tuple(sum(self.matrix[i][k] * other.matrix[k][j] for k in range(3)) for j in range(3))
            for i in range(3)
        )
        t = self(other.translation)
        return AffineMap3(m, t)

    def inverse(self) -> "AffineMap3":
        a = self.matrix
        det = self.det()
        if det == 0:
            raise ZeroDivisionError("singular affine map")
        cof = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(3):
                r = [k for k in range(3) if k != i]
                c = [k for k in range(3) if k != j]
                minor = a[r[0]][c[0]] * a[r[1]][c[1]] - a[r[0]][c[1]] * a[r[1]][c[0]]
                cof[i][j] = (-1) ** (i + j) * minor
        inv = tuple(tuple(cof[j][i] / det for j in range(3)) for i in range(3))
        t = tuple(-_dot(inv[i], self.translation) for i in range(3))
        return AffineMap3(inv, t)


IDENTITY = AffineMap3.of(((1, 0, 0), (0, 1, 0), (0, 0, 1)), (0, 0, 0))


@dataclass(frozen=True)
class ProjectiveMap3:
    """v -> (A v + b) / (c . v + d), given as a 4x4 matrix on (x, y, z, 1).

    Lines go to lines, so a polytope on which the denominator keeps one sign
    maps onto the hull of its vertex images.
    """

    rows: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def of(cls, rows) -> "ProjectiveMap3":
        return cls(tuple(tuple(Fraction(c) for c in r) for r in rows))

    def _hom(self, v: Vec) -> list[Fraction]:
        h = (*v, Fraction(1))
        return [sum(r[k] * h[k] for k in range(4)) for r in self.rows]

    def __call__(self, v: Iterable) -> Vec:
        x, y, z, w = self._hom(vec(v))
        if w == 0:
            raise ZeroDivisionError("point on the exceptional plane")
        return (x / w, y / w, z / w)

    def denominator(self, v: Iterable) -> Fraction:
        return self._hom(vec(v))[3]

    def image(self, P: "ConvexPolytope3", name: str | None = None) -> "ConvexPolytope3":
        signs = {self.denominator(v) > 0 for v in P.vertices}
        if len(signs) != 1 or any(self.denominator(v) == 0 for v in P.vertices):
            raise ValueError(f"{P.name} meets the exceptional plane")
        return apply_map(P, self, name=name)


def apply_map(P: ConvexPolytope3, m, integral: bool = False, name: str | None = None) -> ConvexPolytope3:
    """Vertex-wise image under an affine (or any convexity preserving) map."""
    img = ConvexPolytope3([m(v) for v in P.vertices], name if name is not None else P.name)
    if integral and not img.is_integral():
        raise NonIntegralImageError(f"image of {P.name} is not integral")
    return img


def iota1(v: Iterable) -> Vec:
    x, y, z = vec(v)
    return (-x, -y, z)


def iota2(v: Iterable) -> Vec:
    """(x, y, s) -> ((x+y)/2s, (x-y)/2s, 1/2s) written in 420-scaled coordinates."""
    x, y, z = vec(v)
    if z == 0:
        raise ZeroDivisionError("iota2 needs z != 0")
    h = Fraction(SCALE, 2)
    return (h * (x + y) / z, h * (x - y) / z, h * SCALE / z)


# ---------------------------------------------------------------- H-representation

HalfSpace = tuple[Vec, Fraction]


def halfspaces(P: ConvexPolytope3) -> list[HalfSpace]:
    return [(vec(f.normal), f.offset) for f in P.faces]


def from_halfspaces(hs: Sequence[HalfSpace], name: str = "") -> ConvexPolytope3 | None:
    """Vertices of {x : n.x <= d for all (n, d)}; None if not full-dimensional."""
    hs = [(vec(n), Fraction(d)) for n, d in hs]
    pts = set()
    for (n1, d1), (n2, d2), (n3, d3) in itertools.combinations(hs, 3):
        det = _det3(n1, n2, n3)
        if det == 0:
            continue
        c23, c31, c12 = _cross(n2, n3), _cross(n3, n1), _cross(n1, n2)
        p = tuple((d1 * c23[i] + d2 * c31[i] + d3 * c12[i]) / det for i in range(3))
        if all(_dot(n, p) <= d for n, d in hs):
            pts.add(p)
    if len(pts) < 4:
        return None
    pts = sorted(pts)
    base = pts[0]
    rel = [_sub(p, base) for p in pts[1:]]
    for a, b, c in itertools.combinations(rel, 3):
        if _det3(a, b, c) != 0:
            return ConvexPolytope3(pts, name)
    return None


def intersection(P: ConvexPolytope3, Q: ConvexPolytope3, name: str = "") -> ConvexPolytope3 | None:
    return from_halfspaces(halfspaces(P) + halfspaces(Q), name)


def interiors_overlap(P: ConvexPolytope3, Q: ConvexPolytope3) -> bool:
    return intersection(P, Q) is not None


def interior_point(P: ConvexPolytope3) -> Vec:
    return P.centroid()


def slice_at(P: ConvexPolytope3, z) -> list[tuple[Fraction, Fraction]]:
    """Vertices of the horizontal cross-section at height z (may be empty)."""
    z = Fraction(z)
    pts = set()
    verts = P.vertices
    for a, b in itertools.combinations(verts, 2):
        if (a[2] - z) * (b[2] - z) > 0:
            continue
        if a[2] == b[2]:
            if a[2] == z:
                pts.add((a[0], a[1]))
                pts.add((b[0], b[1]))
            continue
        t = (z - a[2]) / (b[2] - a[2])
        pts.add((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    return sorted(pts)
