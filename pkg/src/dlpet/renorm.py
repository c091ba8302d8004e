"""Parameter dynamics: R, the Gauss map, continued fractions, the modular maps
and the planar symmetries that conjugate one parameter's dynamics to another.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .exact import as_rational
from .geom2 import ConvexPolygon2, Point2, pt

HALF = Fraction(1, 2)


def renorm_R(s) -> Fraction:
    s = as_rational(s)
    if not 0 < s < 1:
        raise ValueError("R is defined on (0, 1)")
    if s == HALF:
        raise ValueError("R(1/2) is undefined")
    if s > HALF:
        return 1 - s
    x = 1 / (2 * s)
    return x - math.floor(x)


def renorm_trace(s, depth: int) -> list[tuple[int, Fraction]]:
    """(n, R^n(s)) until depth, 0 or 1/2 is reached."""
    s = as_rational(s)
    out = [(0, s)]
    cur = s
    for n in range(1, depth + 1):
        if cur == 0 or cur == HALF:
            break
        cur = renorm_R(cur)
        out.append((n, cur))
    return out


def gauss(s) -> Fraction:
    s = as_rational(s)
    if s == 0:
        raise ZeroDivisionError("gauss map undefined at 0")
    x = 1 / s
    return x - math.floor(x)


@dataclass(frozen=True)
class ContinuedFraction:
    terms: tuple[int, ...]

    @classmethod
    def of(cls, s) -> "ContinuedFraction":
        s = as_rational(s)
        terms = []
        while True:
            a = math.floor(s)
            terms.append(a)
            s -= a
            if s == 0:
                break
            s = 1 / s
        if len(terms) > 1 and terms[-1] == 1:
            terms[-2] += 1
            terms.pop()
        return cls(tuple(terms))

    def value(self) -> Fraction:
        v = Fraction(self.terms[-1])
        for a in reversed(self.terms[:-1]):
            v = a + 1 / v
        return v


def continued_fraction(s) -> ContinuedFraction:
    return ContinuedFraction.of(s)


def oddly_even(cf: ContinuedFraction | Sequence[int]) -> bool:
    terms = cf.terms if isinstance(cf, ContinuedFraction) else tuple(cf)
    return all(terms[k] % 2 == 0 for k in range(1, len(terms), 2))


def modular_T(s, branch: str) -> Fraction:
    s = as_rational(s)
    if branch == "first":
        if not 1 < s <= Fraction(4, 3):
            raise ValueError("first branch needs s in (1, 4/3]")
        return (s - 2) / (2 * s - 3)
    if branch == "second":
        if not Fraction(3, 4) <= s < 1:
            raise ValueError("second branch needs s in [3/4, 1)")
        return (3 * s - 2) / (2 * s - 1)
    raise ValueError("branch is 'first' or 'second'")


def modular_T_raw(s, branch: str) -> Fraction:
    """The same fractional linear maps without the domain check."""
    s = as_rational(s)
    if branch == "first":
        return (s - 2) / (2 * s - 3)
    return (3 * s - 2) / (2 * s - 1)


def farey_T_inverse(u, branch: str) -> Fraction:
    """Parameter s with T(s) = u on the given branch."""
    u = as_rational(u)
    if branch == "first":
        return (3 * u - 2) / (2 * u - 1)
    return (u - 2) / (2 * u - 3)


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    ALL = "all"


@dataclass(frozen=True)
class Similarity:
    """x -> M x + t on points of one component."""

    matrix: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]
    translation: Point2
    side: Side = Side.ALL

    def __call__(self, p: Point2) -> Point2:
        (a, b), (c, d) = self.matrix
        x, y = p
        return (a * x + b * y + self.translation[0], c * x + d * y + self.translation[1])

    def det(self) -> Fraction:
        (a, b), (c, d) = self.matrix
        return a * d - b * c

    def scale_sq(self) -> Fraction:
        return abs(self.det())

    def reverses(self) -> bool:
        return self.det() < 0


@dataclass(frozen=True)
class PiecewiseSimilarity2:
    name: str
    branches: tuple[Similarity, ...]
    chooser: Callable[[Point2], int] = field(compare=False, default=lambda p: 0)

    def __call__(self, p: Point2) -> Point2:
        return self.branches[self.chooser(pt(*p))](pt(*p))


def _m(a, b, c, d):
    F = Fraction
    return ((F(a), F(b)), (F(c), F(d)))


def _zero():
    return (Fraction(0), Fraction(0))


def inversion_map(s) -> Similarity:
    """(x, y) -> (s(x+y), s(x-y)): carries X at 1/(2s) onto X at s."""
    s = as_rational(s)
    return Similarity(_m(s, s, s, -s), _zero())


def reflection_map(normal: Point2, offset) -> Similarity:
    """Reflection in the line normal . p = offset."""
    a, b = pt(*normal)
    c = as_rational(offset)
    n2 = a * a + b * b
    m = ((1 - 2 * a * a / n2, -2 * a * b / n2), (-2 * a * b / n2, 1 - 2 * b * b / n2))
    return Similarity(m, (2 * a * c / n2, 2 * b * c / n2))


def omega_map(s) -> PiecewiseSimilarity2:
    """(3 - 2s)(x, y) +- (2 - 2s, 0), with + on the left half."""
    s = as_rational(s)
    k = 3 - 2 * s
    left = Similarity(_m(k, 0, 0, k), (2 - 2 * s, Fraction(0)), Side.LEFT)
    right = Similarity(_m(k, 0, 0, k), (-(2 - 2 * s), Fraction(0)), Side.RIGHT)
    return PiecewiseSimilarity2("omega", (left, right), lambda p: 0 if p[0] < 0 else 1)


def omega2_map(s, diagonal: bool = False) -> PiecewiseSimilarity2:
    """(2s - 1)(x, y) +- offset with offset (2s - 2, 0), or (2s - 2)(1, 1) if diagonal."""
    s = as_rational(s)
    k = 2 * s - 1
    off = (2 * s - 2, 2 * s - 2 if diagonal else Fraction(0))
    left = Similarity(_m(k, 0, 0, k), off, Side.LEFT)
    right = Similarity(_m(k, 0, 0, k), (-off[0], -off[1]), Side.RIGHT)
    return PiecewiseSimilarity2("omega2", (left, right), lambda p: 0 if p[0] < 0 else 1)


def insertion_partner(s) -> Fraction:
    s = as_rational(s)
    if s <= HALF:
        return s / (2 * s + 1)
    return s + 1


def inversion_partner(s) -> Fraction:
    return 1 / (2 * as_rational(s))


def symmetry_maps(s) -> dict:
    """Exact branch data of the symmetries available at parameter s."""
    s = as_rational(s)
    out: dict = {"inversion_partner": inversion_partner(s), "inversion": inversion_map(s)}
    if s <= HALF:
        out["insertion_partner"] = s / (2 * s + 1)
    else:
        out["insertion_partner"] = s + 1
    # bilateral lines: horizontal axis, vertical axis, and the diagonal D_s
    out["bilateral"] = {
        "H": reflection_map((0, 1), 0),
        "V": reflection_map((1, 0), 0),
    }
    if Fraction(1, 4) <= s <= 1:
        out["mu"] = mu_map(s)
    if Fraction(1, 4) <= s <= 1:
        out["nu"] = nu_map(s)
    if 1 < s <= Fraction(4, 3):
        out["omega"] = omega_map(s)
    if Fraction(3, 4) <= s < 1:
        out["omega2"] = omega2_map(s)
    return out


def mu_map(s) -> PiecewiseSimilarity2:
    """Reflect the hexagon A = X ∩ rho_H(X) in x = 0 and the end triangles in x = -1, x = 1."""
    s = as_rational(s)
    left = reflection_map((1, 0), -1)
    mid = reflection_map((1, 0), 0)
    right = reflection_map((1, 0), 1)
    return PiecewiseSimilarity2("mu", (left, mid, right), _mu_region)


def _mu_region(p: Point2) -> int:
    """0 for the left triangle B, 1 for the hexagon A, 2 for iota(B)."""
    t = p[0] + p[1]
    if t < -1:
        return 0
    if t > 1:
        return 2
    return 1


def nu_map(s) -> PiecewiseSimilarity2:
    """Reflect each vertical strip of X in its slope -1 symmetry line.

    Strips: x < -3s (triangle Q), -3s < x < -s (P), |x| < s (central),
    and the mirror images.  Q is empty once s >= 1/2.
    """
    s = as_rational(s)
    lines = (-4 * s, -2 * s, 0, 2 * s, 4 * s)
    branches = tuple(reflection_map((1, 1), c) for c in lines)
    return PiecewiseSimilarity2("nu", branches, lambda p: _nu_region(s, p))


def _nu_region(s: Fraction, p: Point2) -> int:
    x = p[0]
    if x < -3 * s:
        return 0
    if x < -s:
        return 1
    if x <= s:
        return 2
    if x <= 3 * s:
        return 3
    return 4


def region_boundary(name: str, s, p: Point2) -> bool:
    """True when p lies on a line separating two branches of mu or nu."""
    s = as_rational(s)
    x, y = pt(*p)
    if name == "mu":
        return abs(x + y) == 1
    return abs(x) in (s, 3 * s)


def gamma_orbit(s, word_length: int) -> set[Fraction]:
    """Values reachable from s by words in z -> z - 1, z -> 1/(2z), z -> -z."""
    s = as_rational(s)
    frontier = {s}
    seen = {s}
    for _ in range(word_length):
        nxt = set()
        for z in frontier:
            cand = [z - 1, -z]
            if z != 0:
                cand.append(1 / (2 * z))
            for w in cand:
                if w not in seen:
                    seen.add(w)
                    nxt.add(w)
        frontier = nxt
    return seen


def gamma_orbit_reduced(s, word_length: int) -> set[Fraction]:
    """Orbit values folded into [0, 1] by integer shifts and sign."""
    out = set()
    for z in gamma_orbit(s, word_length):
        z = abs(z)
        out.add(z - math.floor(z) if z != math.floor(z) or z == 0 else Fraction(z > 0))
    return out


# ---------------------------------------------------------------- prototiles

class PrototileKind(str, enum.Enum):
    OCTAGON = "octagon"
    SQUARE = "square"
    TRIANGLE = "triangle"


@dataclass(frozen=True)
class Prototile:
    stage: int
    kind: PrototileKind
    scale_sq: Fraction
    orientation_reversals: int
    polygons: tuple[ConvexPolygon2, ...]


def base_shapes(s: Fraction) -> tuple[PrototileKind, list[ConvexPolygon2]]:
    """O_s: the octagon for s > 1/2, the square for s <= 1/2, triangles at 0."""
    if s == 0:
        tris = [
            [(0, 0), (1, -1), (1, 1)],
            [(0, 0), (-1, 1), (-1, -1)],
            [(0, 0), (1, 1), (-1, 1)],
            [(0, 0), (-1, -1), (1, -1)],
        ]
        return PrototileKind.TRIANGLE, [ConvexPolygon2.from_points(t) for t in tris]
    if s > HALF:
        o = ConvexPolygon2.from_points([
            (s, 1 - s), (1 - s, s), (s - 1, s), (-s, 1 - s),
            (-s, s - 1), (s - 1, -s), (1 - s, -s), (s, s - 1),
        ])
        return PrototileKind.OCTAGON, [o]
    return PrototileKind.SQUARE, [ConvexPolygon2.from_points([(s, s), (-s, s), (-s, -s), (s, -s)])]


def _matmul(a, b):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2)) for i in range(2)
    )


def reconstruct_prototiles(s, depth: int) -> tuple[list[Prototile], bool]:
    """The predicted tile shapes T_n(O_{s_n}) for n = 0..depth.

    Returns the list and a flag that is True when the recursion terminated
    (reached 0) within the depth budget.
    """
    s = as_rational(s)
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    ident = _m(1, 0, 0, 1)
    M = ident
    reversals = 0
    cur = s
    out: list[Prototile] = []
    prev = None
    for n in range(depth + 1):
        # a stage only shows up when the previous step was a similarity
        # that leaves room for it (R acts as a plain reflection above 1/2)
        if prev is None or prev <= HALF:
            kind, polys = base_shapes(cur)
            images = tuple(p.transform(M) for p in polys)
            det = M[0][0] * M[1][1] - M[0][1] * M[1][0]
            out.append(Prototile(n, kind, abs(det), reversals % 2, images))
        if cur == 0:
            return out, True
        if n == depth:
            break
        if (1 / (2 * cur)).denominator == 1:
            step, nxt = _m(cur, 0, 0, cur), Fraction(0)
        elif cur < HALF:
            step, nxt = _m(cur, cur, cur, -cur), renorm_R(cur)
            reversals += 1
        else:
            step, nxt = ident, renorm_R(cur)
        M = _matmul(M, step)
        prev, cur = cur, nxt
    return out, False


def planar_phi(s) -> PiecewiseSimilarity2:
    """The conjugacy Y_t -> X_s, t = R(s), from the renormalization theorem.

    On the left half it is p -> M p + c with M = (x+y, x-y) scaled by s when
    s < 1/2 and the identity otherwise, chosen so the acute vertex (-1-t, -t)
    lands on (-1-s, -s).  The right half is the rotation by pi of the left.
    """
    s = as_rational(s)
    t = renorm_R(s)
    M = _m(s, s, s, -s) if s < HALF else _m(1, 0, 0, 1)
    (a, b), (c, d) = M
    src = (-1 - t, -t)
    dst = (-1 - s, -s)
    shift = (dst[0] - (a * src[0] + b * src[1]), dst[1] - (c * src[0] + d * src[1]))
    left = Similarity(M, shift, Side.LEFT)
    right = Similarity(M, (-shift[0], -shift[1]), Side.RIGHT)
    return PiecewiseSimilarity2("phi", (left, right), lambda p: 0 if p[0] < 0 else 1)
