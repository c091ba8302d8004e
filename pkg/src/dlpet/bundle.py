"""The fiber bundle over [1/4, 2] and its partition into maximal domains.

Coordinates are scaled by 420, so the fiber over s sits at height z = 420 s.
On each maximal domain the map F is the unipotent affine map attached to a
4-tuple (u1, v1, u2, v2):

    F(x, y, z) = (x + (2 v1 - 2 v2) z - 840 u1, y - (2 v1 + 2 v2) z + 840 u2, z)

The y-row shear carries a minus sign: with it the shipped vectors agree with
the planar map and with the half-step rule V' = (u1, v1, 0, 0).  In terms of
the planar step, V = a(2,0) + b(2s,-2s) and W = c(0,2) + d(2s,2s) with
a = -u1, b = v1, c = u2, d = -v2.
"""
from __future__ import annotations

import itertools
import json
import random
from math import lcm
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

from .geom2 import ConvexPolygon2
from .pet import BoundaryError, SymbolicStep, build_system, step_f
from .polytope3 import (
    AffineMap3,
    ConvexPolytope3,
    PolytopeError,
    SeparationTable,
    apply_map,
    check_improved_normals,
    check_three_faces,
    contains,
    contains_polytope,
    enumerate_faces,
    from_halfspaces,
    iota1,
    iota2,
    vec,
    volume6,
)

SCALE = 420
Z_QUARTER, Z_HALF, Z_ONE, Z_TWO = 105, 210, 420, 840


@dataclass(frozen=True)
class MapVector:
    u1: int
    v1: int
    u2: int
    v2: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.u1, self.v1, self.u2, self.v2)

    def __neg__(self) -> "MapVector":
        return MapVector(-self.u1, -self.v1, -self.u2, -self.v2)

    def is_zero(self) -> bool:
        return self.as_tuple() == (0, 0, 0, 0)

    def affine(self) -> AffineMap3:
        return AffineMap3.of(
            ((1, 0, 2 * self.v1 - 2 * self.v2), (0, 1, -2 * self.v1 - 2 * self.v2), (0, 0, 1)),
            (-2 * SCALE * self.u1, 2 * SCALE * self.u2, 0),
        )

    def half_step(self) -> "MapVector":
        """Vector of the first half step F': translation by V only."""
        return MapVector(self.u1, self.v1, 0, 0)

    def gamma_partner(self) -> "MapVector":
        """Vector carried by iota2 o F of the piece with this vector."""
        return MapVector(-self.v2, -self.u2, -self.v1, -self.u1)

    def to_step(self) -> SymbolicStep:
        return SymbolicStep(-self.u1, self.v1, self.u2, -self.v2)

    @classmethod
    def from_step(cls, st: SymbolicStep) -> "MapVector":
        return cls(-st.a, st.b, st.c, -st.d)


@dataclass
class Piece:
    name: str
    polytope: ConvexPolytope3
    vector: MapVector

    @property
    def F(self) -> AffineMap3:
        return self.vector.affine()


@dataclass
class PiecewiseAffineSystem:
    pieces: list[Piece]
    interval: tuple[int, int] = (Z_QUARTER, Z_TWO)

    def by_name(self, name: str) -> Piece:
        for p in self.pieces:
            if p.name == name:
                return p
        raise KeyError(name)

    def family(self, prefix: str) -> list[Piece]:
        out = [p for p in self.pieces if p.name.startswith(prefix + "_")]
        return sorted(out, key=lambda p: int(p.name.split("_")[1]))

    def locate(self, v) -> Piece:
        v = vec(v)
        hits = [p for p in self.pieces if contains(p.polytope, v, strict=True)]
        if len(hits) != 1:
            raise BoundaryError(f"{v} is interior to {len(hits)} pieces")
        return hits[0]

    def locate_image(self, v) -> Piece:
        """The piece whose F-image contains v strictly."""
        v = vec(v)
        hits = [p for p in self.pieces if contains(self.image(p), v, strict=True)]
        if len(hits) != 1:
            raise BoundaryError(f"{v} is interior to {len(hits)} image pieces")
        return hits[0]

    def image(self, p: Piece) -> ConvexPolytope3:
        key = ("F", p.name)
        if key not in self._cache:
            self._cache[key] = apply_map(p.polytope, p.F, name=f"F({p.name})")
        return self._cache[key]

    def __post_init__(self) -> None:
        self._cache: dict = {}


# ---------------------------------------------------------------- fixtures

def data_dir() -> Path:
    return Path(str(resources.files("dlpet") / "data"))


def load_json(name: str, path: Path | None = None) -> dict:
    base = Path(path) if path is not None else data_dir()
    with open(base / name) as fh:
        return json.load(fh)


def bundle_X() -> ConvexPolytope3:
    return ConvexPolytope3(load_json("auxiliary.json")["polyhedra"]["X_1/4_2"], "X")


def rotated_X() -> ConvexPolytope3:
    return ConvexPolytope3([(-y, x, z) for x, y, z in bundle_X().vertices], "RX")


def bundle_slab(z0, z1) -> ConvexPolytope3:
    """X cut to heights [z0, z1] (vertices: the two fibers)."""
    out = []
    for z in (Fraction(z0), Fraction(z1)):
        s = z / SCALE
        for e1 in (-1, 1):
            for e2 in (-1, 1):
                out.append(((e1 + e2 * s) * SCALE, e2 * z, z))
    return ConvexPolytope3(out, f"X[{z0},{z1}]")


def fiber_volume6(z0, z1) -> Fraction:
    """Six times the volume of X over [z0, z1]; fiber area is 4s (scaled: 4*420*z)."""
    z0, z1 = Fraction(z0), Fraction(z1)
    return 6 * 4 * SCALE * (z1 * z1 - z0 * z0) / 2


def auxiliary(name: str) -> ConvexPolytope3:
    return ConvexPolytope3(load_json("auxiliary.json")["polyhedra"][name], name)


def _mv(seq) -> MapVector:
    return MapVector(*seq)


def load_fixtures(path: Path | str | None = None, beta_source: str = "derived") -> PiecewiseAffineSystem:
    """The 51 pieces alpha_0..18, beta_0..12, gamma_0..18 with their vectors.

    The alpha data is read as printed.  The printed beta list repeats the
    alpha list, so by default the beta pieces come from the derived fixture
    file (regenerated and checked by :func:`derive_partition`).
    """
    d = load_json("partition.json", path)
    polys, vecs = d["polyhedra"], d["vectors"]
    for key in ("A0", "a0", "a1"):
        if key not in polys and key not in vecs:
            raise ValueError(f"malformed fixture: missing {key}")
    pieces: list[Piece] = []
    alphas = [ConvexPolytope3(polys[f"A{i}"], f"alpha_{i}") for i in range(10)]
    avec = [_mv(vecs[f"a{i}"]) for i in range(10)]
    for i in range(10):
        pieces.append(Piece(f"alpha_{i}", alphas[i], avec[i]))
    for i in range(1, 10):
        P = ConvexPolytope3([iota1(v) for v in alphas[i].vertices], f"alpha_{9 + i}")
        pieces.append(Piece(f"alpha_{9 + i}", P, -avec[i]))
    if beta_source == "printed":
        betas = [ConvexPolytope3(polys[f"B{i}"], f"beta_{i}") for i in range(7)]
    else:
        dd = load_json("beta_derived.json", path)
        betas = [ConvexPolytope3(dd["polyhedra"][f"B{i}"], f"beta_{i}") for i in range(7)]
    bvec = [_mv(vecs[f"b{i}"]) for i in range(7)]
    for i in range(7):
        pieces.append(Piece(f"beta_{i}", betas[i], bvec[i]))
    for i in range(1, 7):
        P = ConvexPolytope3([iota1(v) for v in betas[i].vertices], f"beta_{6 + i}")
        pieces.append(Piece(f"beta_{6 + i}", P, -bvec[i]))
    for i in range(19):
        a = pieces[i]
        img = apply_map(a.polytope, a.F)
        G = ConvexPolytope3([iota2(v) for v in img.vertices], f"gamma_{i}")
        if not G.is_integral():
            raise ValueError(f"gamma_{i} has a non-integral vertex")
        pieces.append(Piece(f"gamma_{i}", G, a.vector.gamma_partner()))
    return PiecewiseAffineSystem(pieces)


# ---------------------------------------------------------------- the map

def apply_F(sys: PiecewiseAffineSystem, v) -> tuple:
    p = sys.locate(v)
    return p.F(vec(v))


def apply_F_inverse(sys: PiecewiseAffineSystem, v) -> tuple:
    p = sys.locate_image(v)
    return p.F.inverse()(vec(v))


def apply_Fprime(sys: PiecewiseAffineSystem, v) -> tuple:
    p = sys.locate(v)
    return p.vector.half_step().affine()(vec(v))


def planar_vector(x: Fraction, y: Fraction, z: Fraction) -> MapVector:
    """MapVector of F at the scaled point, computed through the planar map."""
    s = Fraction(z) / SCALE
    sys = build_system(s)
    _, st = step_f(sys, (Fraction(x) / SCALE, Fraction(y) / SCALE))
    return MapVector.from_step(st)


def planar_consistency(sys: PiecewiseAffineSystem, samples: int = 1000, seed: int = 0) -> Check:
    """Compare apply_F with the planar map on random rational interior points.

    Points are drawn with denominator 97 in each scaled coordinate; samples
    that fall on a piece boundary or a planar discontinuity are skipped and
    counted, and drawing continues until ``samples`` comparisons are made.
    """
    rng = random.Random(seed)
    den = 97
    done = mismatches = skipped = 0
    families: dict = {}
    while done < samples:
        z = Fraction(rng.randrange(Z_QUARTER * den + 1, Z_TWO * den), den)
        s = z / SCALE
        y = Fraction(rng.randrange(-int(z * den) + 1, int(z * den)), den)
        x = y + Fraction(rng.randrange(-SCALE * den + 1, SCALE * den), den)
        v = (x, y, z)
        try:
            piece = sys.locate(v)
            planar, _ = step_f(build_system(s), (x / SCALE, y / SCALE))
        except BoundaryError:
            skipped += 1
            continue
        image = piece.F(v)
        done += 1
        fam = piece.name.split("_")[0]
        families[fam] = families.get(fam, 0) + 1
        if image != (planar[0] * SCALE, planar[1] * SCALE, z):
            mismatches += 1
    return Check("bundle_planar_consistency", mismatches == 0,
                 {"samples": done, "mismatches": mismatches, "skipped": skipped, "by_family": families})


# ---------------------------------------------------------------- derivation

def domain_halfspaces(vector: MapVector, z0, z1) -> list:
    """{z0 <= z <= z1, p in F1, p + V in F2, p + V + W in F1} in scaled coordinates."""
    st = vector.to_step()
    a, b, c, d = st.as_tuple()
    hs = [((0, 0, 1), Fraction(z1)), ((0, 0, -1), Fraction(-z0))]

    def F1(tx, ty):
        # |y + ty| <= z ; |x - y + tx - ty| <= 420, translations affine in z
        (ax, bx), (ay, by) = tx, ty
        out = []
        # y + ay + by z <= z  and  -(y + ay + by z) <= z
        out.append(((0, 1, by - 1), -ay))
        out.append(((0, -1, -by - 1), ay))
        out.append(((1, -1, bx - by), SCALE - ax + ay))
        out.append(((-1, 1, -bx + by), SCALE + ax - ay))
        return out

    def F2(tx, ty):
        (ax, bx), (ay, by) = tx, ty
        out = []
        out.append(((1, 0, bx - 1), -ax))
        out.append(((-1, 0, -bx - 1), ax))
        out.append(((1, 1, bx + by), SCALE - ax - ay))
        out.append(((-1, -1, -bx - by), SCALE + ax + ay))
        return out

    zero = ((0, 0), (0, 0))
    # translations written as (constant, coefficient of z)
    Vx, Vy = (2 * SCALE * a, 2 * b), (0, -2 * b)
    Wx, Wy = (0, 2 * d), (2 * SCALE * c, 2 * d)
    hs += F1(*zero)
    hs += F2(Vx, Vy)
    hs += F1((Vx[0] + Wx[0], Vx[1] + Wx[1]), (Vy[0] + Wy[0], Vy[1] + Wy[1]))
    return [(vec(n), Fraction(dd)) for n, dd in hs]


@dataclass
class DerivedPartition:
    interval: tuple[Fraction, Fraction]
    pieces: list[Piece]
    samples: int
    grid_step: tuple[int, int]
    volume_ok: bool
    volume_sum: Fraction
    volume_target: Fraction


def sample_vectors(z0: int, z1: int, xy_step: int, z_step: int) -> dict:
    """Planar MapVectors on a shifted rational grid over X[z0, z1]."""
    found: dict = {}
    off = Fraction(1, 3)
    z = Fraction(z0) + Fraction(z_step, 2)
    while z < z1:
        s = z / SCALE
        sys = build_system(s)
        xmax = int((1 + s) * SCALE) + xy_step
        for i in range(-xmax, xmax + 1, xy_step):
            for j in range(-int(z) - xy_step, int(z) + xy_step + 1, xy_step):
                x, y = Fraction(i) + off, Fraction(j) + off / 2
                p = (x / SCALE, y / SCALE)
                if not sys.F1.contains(p):
                    continue
                try:
                    _, st = step_f(sys, p)
                except BoundaryError:
                    continue
                mv = MapVector.from_step(st)
                found[mv] = found.get(mv, 0) + 1
        z += z_step
    return found


def derive_partition(interval: tuple, grid_density: tuple[int, int] = (20, 5), max_refine: int = 2) -> DerivedPartition:
    """Re-derive the maximal domains over [s0, s1] from the planar map.

    Grid samples reveal which 4-tuples occur; each tuple's domain is then the
    exact polytope cut out by its defining inequalities (linear in x, y, z).
    The grid is refined until the domains fill the slab by volume.
    """
    s0, s1 = (Fraction(v) for v in interval)
    if not (Fraction(1, 4) <= s0 < s1 <= 2):
        raise ValueError("interval must lie within [1/4, 2]")
    z0, z1 = s0 * SCALE, s1 * SCALE
    xy, zs = grid_density
    target = fiber_volume6(z0, z1)
    vectors: set = set()
    total_samples = 0
    for _ in range(max_refine + 1):
        found = sample_vectors(int(z0), int(z1), xy, zs)
        total_samples += sum(found.values())
        vectors |= set(found)
        pieces = []
        for mv in sorted(vectors, key=lambda m: m.as_tuple()):
            P = from_halfspaces(domain_halfspaces(mv, z0, z1), name=str(mv.as_tuple()))
            if P is not None:
                pieces.append(Piece(str(mv.as_tuple()), P, mv))
        vol = sum((Fraction(volume6(p.polytope)) for p in pieces), Fraction(0))
        if vol == target:
            return DerivedPartition((s0, s1), pieces, total_samples, (xy, zs), True, vol, target)
        xy, zs = max(1, xy // 2), max(1, zs // 2)
    return DerivedPartition((s0, s1), pieces, total_samples, (xy, zs), False, vol, target)


def vertex_fibers(P: ConvexPolytope3) -> set[tuple[int, int]]:
    """(p, q) with z = 420 p/q for each vertex, q the least denominator of (x, y, s)."""
    out = set()
    for x, y, z in P.vertices:
        s = z / SCALE
        q = lcm(Fraction(x / SCALE).denominator, Fraction(y / SCALE).denominator, s.denominator)
        out.add((int(s * q), q))
    return out


def match_pieces(derived: Sequence[Piece], fixtures: Sequence[Piece]) -> dict:
    """Pair derived domains with fixture pieces by exact vertex sets."""
    by_set = {p.polytope.vertex_set(): p for p in fixtures}
    matched, unmatched = {}, []
    for d in derived:
        f = by_set.get(d.polytope.vertex_set())
        if f is None:
            unmatched.append(d)
        else:
            matched[f.name] = d
    missing = [p.name for p in fixtures if p.name not in matched]
    return {"matched": matched, "unmatched_derived": unmatched, "missing_fixtures": missing}


def printed_beta_diff(derived: Sequence[Piece]) -> list[dict]:
    """Compare each printed B_i with the derived piece carrying vector b_i."""
    d = load_json("partition.json")
    out = []
    for i in range(7):
        printed = ConvexPolytope3(d["polyhedra"][f"B{i}"], f"B{i}")
        mv = MapVector(*d["vectors"][f"b{i}"])
        cand = [p for p in derived if p.vector == mv]
        dv = cand[0].polytope if cand else None
        out.append({
            "name": f"B{i}",
            "vector": list(mv.as_tuple()),
            "printed": sorted([[int(c) for c in v] for v in printed.vertices]),
            "derived": sorted([[str(c) for c in v] for v in dv.vertices]) if dv else None,
            "equal": dv is not None and dv.vertex_set() == printed.vertex_set(),
        })
    return out


def beta_fixture_from(derived: Sequence[Piece]) -> dict:
    """The derived beta pieces labelled by the printed b vectors (B_i has b_i)."""
    d = load_json("partition.json")
    out = {}
    for i in range(7):
        mv = MapVector(*d["vectors"][f"b{i}"])
        cand = [p for p in derived if p.vector == mv]
        if len(cand) != 1:
            raise ValueError(f"no unique derived piece with vector b{i}")
        P = cand[0].polytope
        if not P.is_integral():
            raise ValueError(f"derived piece for b{i} is not 420-integral")
        out[f"B{i}"] = sorted([[int(c) for c in v] for v in P.vertices])
    return {"scale": SCALE, "polyhedra": out}


# ---------------------------------------------------------------- verification

@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class PartitionReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, **c.detail} for c in self.checks],
        }


def pairwise_witnesses(polys: Sequence[ConvexPolytope3]) -> tuple[dict, list]:
    table = SeparationTable(polys)
    found, missing = {}, []
    for i, j in itertools.combinations(range(len(polys)), 2):
        w = table.witness(i, j)
        if w is None:
            missing.append((polys[i].name, polys[j].name))
            continue
        found[(polys[i].name, polys[j].name)] = w.as_tuple()
    return found, missing


def _shared_face_area(P: ConvexPolytope3, Q: ConvexPolytope3) -> list[tuple]:
    """Non-horizontal faces of P that meet a face of Q in positive area."""
    out = []
    for f in P.faces:
        if f.normal[0] == 0 and f.normal[1] == 0:
            continue
        for g in Q.faces:
            if g.normal != tuple(-c for c in f.normal) or g.offset != -f.offset:
                continue
            drop = max(range(3), key=lambda i: abs(f.normal[i]))
            keep = [i for i in range(3) if i != drop]
            try:
                A = ConvexPolygon2.hull([(P.vertices[m][keep[0]], P.vertices[m][keep[1]]) for m in f.vertex_indices])
                B = ConvexPolygon2.hull([(Q.vertices[m][keep[0]], Q.vertices[m][keep[1]]) for m in g.vertex_indices])
            except Exception:
                continue
            if A.intersect(B) is not None:
                out.append(f.normal)
    return out


def verify_partition(sys: PiecewiseAffineSystem) -> PartitionReport:
    checks: list[Check] = []
    X = bundle_X()
    RX = rotated_X()
    polys = [p.polytope for p in sys.pieces]

    checks.append(Check("piece_count", len(polys) == 51, {"count": len(polys)}))

    collinear, incidence, improved, at_least_three = [], [], [], []
    for P in polys:
        try:
            faces = enumerate_faces(P)
        except PolytopeError as e:
            collinear.append(f"{P.name}: {e}")
            continue
        try:
            check_three_faces(P, faces)
        except PolytopeError:
            incidence.append(P.name)
        counts = [sum(m in f.vertex_indices for f in faces) for m in range(len(P.vertices))]
        if min(counts) < 3:
            at_least_three.append(P.name)
        bad = check_improved_normals(P)
        if bad:
            improved.append({"piece": P.name, "normals": [list(f.normal) for f in bad]})
    checks.append(Check("no_collinearity", not collinear, {"failures": collinear}))
    checks.append(Check("vertex_in_exactly_3_faces", not incidence, {"failures": incidence}))
    checks.append(Check("vertex_in_at_least_3_faces", not at_least_three, {"failures": at_least_three}))
    checks.append(Check("improved_normals", not improved, {"failures": improved}))

    found, missing = pairwise_witnesses(polys)
    checks.append(Check("pairwise_disjoint", not missing, {
        "pairs": len(found) + len(missing), "missing": missing,
        "witnesses": {f"{a}|{b}": list(w) for (a, b), w in sorted(found.items())},
    }))
    images = [sys.image(p) for p in sys.pieces]
    found_i, missing_i = pairwise_witnesses(images)
    checks.append(Check("image_pairwise_disjoint", not missing_i, {
        "pairs": len(found_i) + len(missing_i), "missing": missing_i,
    }))

    not_in_X = [P.name for P in polys if not contains_polytope(X, P)]
    img_not_in_X = [I.name for I in images if not contains_polytope(X, I)]
    half = []
    for p in sys.pieces:
        H = apply_map(p.polytope, p.vector.half_step().affine())
        if not contains_polytope(RX, H):
            half.append(p.name)
    checks.append(Check("pieces_in_X", not not_in_X, {"failures": not_in_X}))
    checks.append(Check("images_in_X", not img_not_in_X, {"failures": img_not_in_X}))
    checks.append(Check("half_step_images_in_RX", not half, {"failures": half}))

    vols = {P.name: volume6(P) for P in polys}
    total = sum(vols.values())
    vx = volume6(X)
    oracle = fiber_volume6(Z_QUARTER, Z_TWO)
    checks.append(Check("volume_fill", total == vx == oracle, {
        "sum": str(total), "volume6_X": str(vx), "analytic": str(oracle),
    }))

    contain1 = []
    for p in sys.pieces:
        lo, hi = p.polytope.z_range()
        fam = p.name.split("_")[0]
        bounds = {"alpha": (Z_QUARTER, Z_HALF), "beta": (Z_HALF, Z_ONE), "gamma": (Z_ONE, Z_TWO)}[fam]
        if not (bounds[0] <= lo and hi <= bounds[1]):
            contain1.append(p.name)
    checks.append(Check("interval_containment", not contain1, {"failures": contain1}))

    iota_bad = []
    sets = {p.polytope.vertex_set(): p for p in sys.pieces}
    for p in sys.pieces:
        img = frozenset(iota1(v) for v in p.polytope.vertices)
        q = sets.get(img)
        if q is None or q.vector != -p.vector:
            iota_bad.append(p.name)
    checks.append(Check("iota1_permutes_pieces", not iota_bad, {"failures": iota_bad}))

    same = []
    adjacent = 0
    for a, b in itertools.combinations(sys.pieces, 2):
        if _shared_face_area(a.polytope, b.polytope):
            adjacent += 1
            if a.vector == b.vector:
                same.append((a.name, b.name))
    checks.append(Check("maximality", not same, {"adjacent_pairs": adjacent, "same_vector": same}))
    return PartitionReport(checks)
