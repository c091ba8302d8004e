"""The planar double lattice PET at a rational parameter s.

X = F1 = {|y| <= s, |x - y| <= 1} and F2 is F1 rotated by 90 degrees.
L1 is spanned by (2, 0) and (2s, -2s); L2 by (0, 2) and (2s, 2s).
Each F is a fundamental domain for each L.

One half step from F1 translates by the unique V in L1 that lands in F2, and
the next half step translates by the unique W in L2 that lands back in F1, so
f(p) = p + V + W.  Points on the boundary of any continuity cell are left
undefined and raise :class:`BoundaryError`.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact import as_rational
from .geom2 import ConvexPolygon2, Point2, cross2, pt, vadd, vsub

ZERO = (Fraction(0), Fraction(0))


class BoundaryError(ValueError):
    """The map is undefined at this point."""


@dataclass(frozen=True)
class Lattice2:
    basis1: Point2
    basis2: Point2

    def __post_init__(self) -> None:
        if cross2(self.basis1, self.basis2) == 0:
            raise ValueError("lattice basis is degenerate")

    def point(self, m: int, n: int) -> Point2:
        return (m * self.basis1[0] + n * self.basis2[0], m * self.basis1[1] + n * self.basis2[1])

    def coords(self, v: Point2) -> tuple[Fraction, Fraction]:
        det = cross2(self.basis1, self.basis2)
        return (cross2(v, self.basis2) / det, cross2(self.basis1, v) / det)

    def contains(self, v: Point2) -> bool:
        m, n = self.coords(v)
        return m.denominator == 1 and n.denominator == 1

    def covolume(self) -> Fraction:
        return abs(cross2(self.basis1, self.basis2))


@dataclass(frozen=True)
class PetSystem:
    s: Fraction
    F1: ConvexPolygon2
    F2: ConvexPolygon2
    L1: Lattice2
    L2: Lattice2


@dataclass(frozen=True)
class SymbolicStep:
    """V = a(2,0) + b(2s,-2s) in L1 and W = c(0,2) + d(2s,2s) in L2."""

    a: int
    b: int
    c: int
    d: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def V(self, s: Fraction) -> Point2:
        return (2 * self.a + 2 * self.b * s, -2 * self.b * s)

    def W(self, s: Fraction) -> Point2:
        return (2 * self.d * s, 2 * self.c + 2 * self.d * s)


class OrbitStatus(enum.Enum):
    PERIODIC = "periodic"
    TRUNCATED = "truncated"
    HIT_BOUNDARY = "hit_boundary"


@dataclass
class Orbit:
    start: Point2
    points: list[Point2] = field(default_factory=list)
    steps: list[SymbolicStep] = field(default_factory=list)
    status: OrbitStatus = OrbitStatus.TRUNCATED
    period: int | None = None


def rot90(p: Point2) -> Point2:
    return (-p[1], p[0])


def build_system(s) -> PetSystem:
    s = as_rational(s)
    if s <= 0:
        raise ValueError("s must be positive")
    F1 = ConvexPolygon2.from_points([(1 - s, -s), (1 + s, s), (-1 + s, s), (-1 - s, -s)])
    F2 = ConvexPolygon2.from_points([rot90(v) for v in F1.vertices])
    L1 = Lattice2(pt(2, 0), (2 * s, -2 * s))
    L2 = Lattice2(pt(0, 2), (2 * s, 2 * s))
    return PetSystem(s, F1, F2, L1, L2)


def _slabs(domain: ConvexPolygon2) -> list[tuple[Point2, Fraction, Fraction]]:
    """A parallelogram as two slabs lo < cross(e, q) < hi."""
    v = domain.vertices
    if len(v) != 4:
        raise ValueError("reduce needs a parallelogram domain")
    out = []
    for e in (vsub(v[1], v[0]), vsub(v[2], v[1])):
        vals = [cross2(e, p) for p in v]
        out.append((e, min(vals), max(vals)))
    return out


def _unique_integer(lo: Fraction, hi: Fraction) -> int:
    """The unique integer strictly inside (lo, hi), an interval of length 1."""
    if lo.denominator == 1:
        raise BoundaryError("point lies on the domain boundary")
    return math.floor(lo) + 1


@functools.lru_cache(maxsize=512)
def _plan(lattice: Lattice2, domain: ConvexPolygon2):
    """Pick the slab that pins one lattice coefficient on its own."""
    slabs = _slabs(domain)
    basis = (lattice.basis1, lattice.basis2)
    for si in range(2):
        e, lo, hi = slabs[si]
        for bj in range(2):
            if cross2(e, basis[bj]) != 0:
                continue
            bk = 1 - bj
            gain = cross2(e, basis[bk])
            if gain == 0:
                continue
            e2, lo2, hi2 = slabs[1 - si]
            gain2 = cross2(e2, basis[bj])
            if abs(hi - lo) != abs(gain) or abs(hi2 - lo2) != abs(gain2):
                raise ValueError("domain is not a fundamental domain for the lattice")
            return (e, lo, hi, gain, bk, e2, lo2, hi2, gain2, bj)
    raise ValueError("no side of the domain is parallel to a lattice vector")


def _coefficient(base: Fraction, lo: Fraction, hi: Fraction, gain: Fraction) -> int:
    a, b = (lo - base) / gain, (hi - base) / gain
    return _unique_integer(min(a, b), max(a, b))


def reduce(p: Point2, lattice: Lattice2, domain: ConvexPolygon2) -> tuple[Point2, tuple[int, int]]:
    """Find the lattice vector V with p + V strictly inside ``domain``.

    Works when one side direction of the parallelogram is parallel to a
    lattice basis vector, which holds for all four (F, L) pairs here.  The
    coefficient along the other basis vector is pinned by one slab, then the
    remaining coefficient by the other slab.
    """
    p = pt(*p)
    e, lo, hi, gain, bk, e2, lo2, hi2, gain2, bj = _plan(lattice, domain)
    basis = (lattice.basis1, lattice.basis2)
    mk = _coefficient(cross2(e, p), lo, hi, gain)
    q = (p[0] + mk * basis[bk][0], p[1] + mk * basis[bk][1])
    mj = _coefficient(cross2(e2, q), lo2, hi2, gain2)
    coeffs = [0, 0]
    coeffs[bk] = mk
    coeffs[bj] = mj
    return lattice.point(coeffs[0], coeffs[1]), (coeffs[0], coeffs[1])


def reduce_bruteforce(p: Point2, lattice: Lattice2, domain: ConvexPolygon2, radius: int = 4):
    """Scan lattice coefficients around the centred guess.  Test oracle."""
    p = pt(*p)
    cx, cy = domain.centroid()
    m0, n0 = lattice.coords(vsub((cx, cy), p))
    m0, n0 = round(m0), round(n0)
    inside = []
    closed = []
    for m in range(m0 - radius, m0 + radius + 1):
        for n in range(n0 - radius, n0 + radius + 1):
            V = lattice.point(m, n)
            q = vadd(p, V)
            if domain.contains(q, strict=True):
                inside.append((V, (m, n)))
            elif domain.contains(q, strict=False):
                closed.append((V, (m, n)))
    if len(inside) == 1 and not closed:
        return inside[0]
    raise BoundaryError("no unique interior candidate")


def step_fprime(sys: PetSystem, p: Point2, side: int) -> Point2:
    """One half step: from F1 by L1 into F2 (side 1), or from F2 by L2 into F1."""
    p = pt(*p)
    if side == 1:
        if not sys.F1.contains(p):
            raise BoundaryError("point is not interior to F1")
        V, _ = reduce(p, sys.L1, sys.F2)
    elif side == 2:
        if not sys.F2.contains(p):
            raise BoundaryError("point is not interior to F2")
        V, _ = reduce(p, sys.L2, sys.F1)
    else:
        raise ValueError("side must be 1 or 2")
    return vadd(p, V)


def step_f(sys: PetSystem, p: Point2) -> tuple[Point2, SymbolicStep]:
    p = pt(*p)
    if not sys.F1.contains(p):
        raise BoundaryError("point is not interior to X")
    V, (a, b) = reduce(p, sys.L1, sys.F2)
    q = vadd(p, V)
    W, (c, d) = reduce(q, sys.L2, sys.F1)
    return vadd(q, W), SymbolicStep(a, b, c, d)


def step_f_inverse(sys: PetSystem, p: Point2) -> tuple[Point2, SymbolicStep]:
    """Undo step_f.  The returned step is the one step_f applies to the preimage."""
    p = pt(*p)
    if not sys.F1.contains(p):
        raise BoundaryError("point is not interior to X")
    W, (c, d) = reduce(p, sys.L2, sys.F2)
    q = vadd(p, W)
    V, (a, b) = reduce(q, sys.L1, sys.F1)
    return vadd(q, V), SymbolicStep(-a, -b, -c, -d)


def f(sys: PetSystem, p: Point2) -> Point2:
    return step_f(sys, p)[0]


def f_inverse(sys: PetSystem, p: Point2) -> Point2:
    return step_f_inverse(sys, p)[0]


def period_guard(s: Fraction) -> int:
    return 4 * (s.numerator * s.denominator) ** 2 + 4


def orbit(sys: PetSystem, p: Point2, max_steps: int) -> Orbit:
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    p = pt(*p)
    o = Orbit(start=p, points=[p])
    cur = p
    for k in range(max_steps):
        try:
            nxt, st = step_f(sys, cur)
        except BoundaryError:
            o.status = OrbitStatus.HIT_BOUNDARY
            return o
        o.steps.append(st)
        if nxt == p:
            o.status = OrbitStatus.PERIODIC
            o.period = k + 1
            return o
        o.points.append(nxt)
        cur = nxt
    o.status = OrbitStatus.TRUNCATED
    return o


def periodic_orbit(sys: PetSystem, p: Point2) -> Orbit:
    """Orbit at rational s, bounded by a generous multiple of the period bound."""
    o = orbit(sys, p, period_guard(sys.s))
    if o.status is OrbitStatus.HIT_BOUNDARY:
        raise BoundaryError("orbit meets a boundary")
    if o.status is not OrbitStatus.PERIODIC:
        raise RuntimeError("orbit exceeded the period guard")
    return o


def arithmetic_graph(o: Orbit, s) -> tuple[list[Point2], list[Point2]]:
    """Partial sums of the V's and of the W's along a periodic orbit."""
    if o.status is not OrbitStatus.PERIODIC:
        raise ValueError("arithmetic graph needs a periodic orbit")
    s = as_rational(s)
    graph, conj = [], []
    gv = gw = ZERO
    for st in o.steps:
        gv = vadd(gv, st.V(s))
        gw = vadd(gw, st.W(s))
        graph.append(gv)
        conj.append(gw)
    return graph, conj


def lattice_intersection_is_trivial(s) -> dict:
    """Shortest nonzero vector of L1 ∩ L2 at rational s.

    (2a + 2bs, -2bs) = (2ds, 2c + 2ds) forces a = (d - b)s and c = -(b + d)s
    to be integers, so with s = p/q both d - b and d + b are multiples of q.
    """
    s = as_rational(s)
    q = s.denominator
    best = None
    for b in range(-2 * q, 2 * q + 1):
        for d in range(-2 * q, 2 * q + 1):
            if (b, d) == (0, 0) or (d - b) % q or (d + b) % q:
                continue
            v = (2 * d * s, -2 * b * s)
            key = (v[0] ** 2 + v[1] ** 2, -v[0], -v[1])
            if best is None or key < best[0]:
                a = (d - b) * s
                c = -(b + d) * s
                best = (key, v, (int(a), b), (int(c), d))
    _, v, l1, l2 = best
    return {"trivial": False, "vector": v, "L1_coeffs": l1, "L2_coeffs": l2}


def orbit_to_json(o: Orbit) -> dict:
    from .exact import format_rational as fr

    return {
        "start": [fr(o.start[0]), fr(o.start[1])],
        "status": o.status.value,
        "period": o.period,
        "points": [[fr(x), fr(y)] for x, y in o.points],
        "steps": [list(st.as_tuple()) for st in o.steps],
    }


def iota(p: Point2) -> Point2:
    return (-p[0], -p[1])


def in_X(sys: PetSystem, p: Sequence) -> bool:
    return sys.F1.contains(pt(*p))
