"""Machine checks of the eight calculations behind the renormalization theorem.

Every calculation works with the 51-piece partition of the bundle and exact
polytopes.  Calculations 1 and 2 compare two piecewise maps on a grid after
pairing up the domains that overlap.  Calculations 3, 4, 5 and 7 follow each
piece of a source region through the conjugacy and then through F or its
inverse until the orbit returns to the target region.  Calculations 6 and 8
inspect the period-2 tiles and the translation zones next to them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import bundle as bd
from .bundle import Check, Piece, PiecewiseAffineSystem, SCALE
from .geom2 import ConvexPolygon2
from .pet import BoundaryError, build_system, period_guard, step_f, step_f_inverse
from .polytope3 import (
    IDENTITY,
    AffineMap3,
    ConvexPolytope3,
    ProjectiveMap3,
    SeparationTable,
    apply_map,
    contains_polytope,
    from_halfspaces,
    halfspaces,
    interiors_overlap,
    iota1,
    slice_at,
    vec,
    volume6,
)
from .renorm import planar_phi, renorm_R

CHAIN_CAP = 64


@dataclass
class CalcReport:
    calc: str
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, **detail) -> Check:
        c = Check(name, bool(passed), detail)
        self.checks.append(c)
        return c

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "calc": self.calc,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, **c.detail} for c in self.checks],
            **self.data,
        }


# ---------------------------------------------------------------- helpers

def fmt(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_poly(P: ConvexPolytope3) -> list[list[str]]:
    return [[fmt(c) for c in v] for v in sorted(P.vertices)]


def slab_cut(P: ConvexPolytope3, z0, z1, name: str = "") -> ConvexPolytope3 | None:
    hs = halfspaces(P) + [((0, 0, 1), Fraction(z1)), ((0, 0, -1), -Fraction(z0))]
    return from_halfspaces([(vec(n), Fraction(d)) for n, d in hs], name or P.name)


def side_of(P: ConvexPolytope3) -> str:
    xs = [v[0] for v in P.vertices]
    if max(xs) <= 0:
        return "left"
    if min(xs) >= 0:
        return "right"
    raise ValueError(f"{P.name} straddles x = 0")


def separation(P: ConvexPolytope3, Q: ConvexPolytope3) -> tuple[bool, list | None]:
    """(disjoint interiors?, witness) using the lattice search, else exact H-rep."""
    try:
        w = SeparationTable([P, Q]).witness(0, 1)
    except OverflowError:
        w = None
    if w is not None:
        return True, list(w.as_tuple())
    return (not interiors_overlap(P, Q)), None


def batch_disjoint(P: ConvexPolytope3, others: Sequence[ConvexPolytope3]) -> list[str]:
    """Names of polytopes in others whose interior meets P's."""
    try:
        table = SeparationTable([P, *others])
        found = [table.witness(0, j + 1) for j in range(len(others))]
    except OverflowError:
        found = [None] * len(others)
    bad = []
    for Q, w in zip(others, found):
        if w is None and interiors_overlap(P, Q):
            bad.append(Q.name)
    return bad


def pairwise_overlaps(polys: Sequence[ConvexPolytope3]) -> tuple[int, list[tuple[str, str]]]:
    """(number of pairs settled by a lattice witness, overlapping pairs)."""
    try:
        table = SeparationTable(polys)
    except OverflowError:
        table = None
    by_witness, bad = 0, []
    for i, j in itertools.combinations(range(len(polys)), 2):
        if table is not None and table.witness(i, j) is not None:
            by_witness += 1
            continue
        if interiors_overlap(polys[i], polys[j]):
            bad.append((polys[i].name, polys[j].name))
    return by_witness, bad


class Dynamics:
    """F and F^{-1} applied to whole polytopes that sit inside one domain."""

    def __init__(self, sys: PiecewiseAffineSystem):
        self.sys = sys
        self.pieces = sys.pieces
        self.images = [sys.image(p) for p in self.pieces]
        self.fwd = [p.F for p in self.pieces]
        self.bwd = [p.F.inverse() for p in self.pieces]
        self._zr = [p.polytope.z_range() for p in self.pieces]

    def _find(self, P: ConvexPolytope3, family: list[ConvexPolytope3]) -> int | None:
        lo, hi = P.z_range()
        for k, D in enumerate(family):
            zl, zh = self._zr[k]
            if lo < zl or hi > zh:
                continue
            if contains_polytope(D, P):
                return k
        return None

    def domain_of(self, P: ConvexPolytope3) -> int | None:
        return self._find(P, [p.polytope for p in self.pieces])

    def step(self, P: ConvexPolytope3, direction: int) -> tuple[ConvexPolytope3, str] | None:
        if direction > 0:
            k = self.domain_of(P)
            return None if k is None else (apply_map(P, self.fwd[k]), self.pieces[k].name)
        k = self._find(P, self.images)
        return None if k is None else (apply_map(P, self.bwd[k]), self.pieces[k].name)


@dataclass
class Conjugacy:
    """A map of the bundle that acts by one branch on each half of x = 0."""

    name: str
    left: Callable
    right: Callable
    label: str

    def branch(self, P: ConvexPolytope3):
        return self.left if side_of(P) == "left" else self.right

    def __call__(self, P: ConvexPolytope3, name: str = "") -> ConvexPolytope3:
        m = self.branch(P)
        if isinstance(m, ProjectiveMap3):
            return m.image(P, name=name or f"{self.name}({P.name})")
        return apply_map(P, m, name=name or f"{self.name}({P.name})")


@dataclass
class Chain:
    source: str
    polys: list[ConvexPolytope3]
    domains: list[str]
    closed: bool
    failure: str | None = None

    @property
    def k(self) -> int:
        return len(self.polys) - 1

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "k": self.k if self.closed else None,
            "closed": self.closed,
            "failure": self.failure,
            "domains": self.domains,
        }


def return_chain(dyn: Dynamics, source: Piece, conj: Conjugacy, targets: Sequence[ConvexPolytope3],
                 direction: int, cap: int = CHAIN_CAP) -> Chain:
    """P_0 = conj(F(source)), P_{j+1} = F^direction(P_j), until P_j = conj(source).

    Each intermediate P_j (j >= 1) must avoid every target part.
    """
    start = conj(dyn.sys.image(source), name=f"{source.name}:0")
    goal = conj(source.polytope)
    polys, domains = [start], []
    cur = start
    for j in range(1, cap + 2):
        got = dyn.step(cur, direction)
        if got is None:
            return Chain(source.name, polys, domains, False, f"step {j}: not inside one domain")
        nxt, dom = got
        domains.append(dom)
        if nxt.vertex_set() == goal.vertex_set():
            return Chain(source.name, polys, domains, True)
        hit = batch_disjoint(nxt, targets)
        if hit:
            return Chain(source.name, polys, domains, False, f"step {j}: meets {hit[0]} early")
        polys.append(nxt.renamed(f"{source.name}:{j}"))
        cur = nxt
    return Chain(source.name, polys, domains, False, "chain cap reached")


def run_chains(dyn, sources, conj, targets, direction, stop_on_failure=True) -> list[Chain]:
    out = []
    for src in sources:
        ch = return_chain(dyn, src, conj, targets, direction)
        out.append(ch)
        if not ch.closed and stop_on_failure:
            break
    return out


def select_variant(dyn, sources, variants) -> tuple[dict, list[Chain], list[dict]]:
    """Try (conjugacy, direction) variants in order; keep the first that closes every chain."""
    tried = []
    for v in variants:
        targets = [v["conj"](s.polytope) for s in sources]
        chains = run_chains(dyn, sources, v["conj"], targets, v["direction"])
        ok = len(chains) == len(sources) and all(c.closed for c in chains)
        tried.append({"variant": v["conj"].label, "direction": v["direction"], "closed": ok,
                      "first_failure": next((f"{c.source}: {c.failure}" for c in chains if not c.closed), None)})
        if ok:
            return v, chains, tried
    return variants[0], chains, tried


def _chain_checks(rep: CalcReport, sources, chains, tried) -> None:
    closed = [c for c in chains if c.closed]
    rep.add("orientation_selected", any(t["closed"] for t in tried), attempts=tried)
    rep.add("chains_close", len(closed) == len(sources),
            k={c.source: c.k for c in closed},
            failures=[f"{c.source}: {c.failure}" for c in chains if not c.closed])
    rep.data["chains"] = [c.to_json() for c in chains]


def _affine(mat, t) -> AffineMap3:
    return AffineMap3.of(mat, t)


def trivial_tile_checks(rep: CalcReport, dyn: Dynamics, tile: ConvexPolytope3, partner: ConvexPolytope3,
                        targets, label: str) -> list[ConvexPolytope3]:
    """F defined on the tile, F^2 the identity there, tile and F(tile) off the target."""
    k0 = dyn.domain_of(tile)
    ok, info = k0 is not None, {}
    out = [tile]
    if ok:
        m0 = dyn.fwd[k0]
        img = apply_map(tile, m0, name=f"F({tile.name})")
        k1 = dyn.domain_of(img)
        ok = k1 is not None
        if ok:
            m1 = dyn.fwd[k1]
            comp = m1.compose(m0)
            ok = comp == IDENTITY
            info = {"domains": [dyn.pieces[k0].name, dyn.pieces[k1].name],
                    "image_is_partner": img.vertex_set() == partner.vertex_set()}
            out.append(img)
    rep.add(f"{label}_period_two", ok, **info)
    hits = [n for P in out for n in batch_disjoint(P, targets)]
    rep.add(f"{label}_off_target", not hits, hits=hits)
    return out


def volume_fill(rep: CalcReport, family: Sequence[ConvexPolytope3], z0, z1, name: str) -> None:
    vols = [volume6(P) for P in family]
    total = sum(vols)
    target = bd.fiber_volume6(z0, z1)
    rep.add(f"{name}_volume_fill", total == target, sum=fmt(total), target=fmt(target),
            pieces=len(family))
    by_w, bad = pairwise_overlaps(family)
    rep.add(f"{name}_disjoint", not bad, pairs=len(family) * (len(family) - 1) // 2,
            by_witness=by_w, overlapping=bad[:20])


# ---------------------------------------------------------------- calculations 1 and 2

def mu_regions() -> list[tuple[str, ConvexPolytope3, AffineMap3]]:
    A = bd.auxiliary("A_1/4_1")
    B = bd.auxiliary("B_1/4_1")
    C = ConvexPolytope3([iota1(v) for v in B.vertices], "C_1/4_1")
    return [
        ("A", A, _affine(((-1, 0, 0), (0, 1, 0), (0, 0, 1)), (0, 0, 0))),
        ("B", B, _affine(((-1, 0, 0), (0, 1, 0), (0, 0, 1)), (-2 * SCALE, 0, 0))),
        ("C", C, _affine(((-1, 0, 0), (0, 1, 0), (0, 0, 1)), (2 * SCALE, 0, 0))),
    ]


def nu_regions() -> list[tuple[str, ConvexPolytope3, AffineMap3]]:
    P = bd.auxiliary("P_1/4_1/2")
    Q = bd.auxiliary("Q_1/4_1/2")
    central = slab_cut(bd.bundle_X(), 105, 210)
    central = from_halfspaces(halfspaces(central) + [(vec((1, 0, -1)), Fraction(0)), (vec((-1, 0, -1)), Fraction(0))], "central")
    iP = ConvexPolytope3([iota1(v) for v in P.vertices], "iota(P)")
    iQ = ConvexPolytope3([iota1(v) for v in Q.vertices], "iota(Q)")

    def refl(c):  # reflection in x + y = c z
        return _affine(((0, -1, c), (-1, 0, c), (0, 0, 1)), (0, 0, 0))

    return [("Q", Q, refl(-4)), ("P", P, refl(-2)), ("central", central, refl(0)),
            ("iota(P)", iP, refl(2)), ("iota(Q)", iQ, refl(4))]


def region_of(P: ConvexPolytope3, regions) -> tuple[str, AffineMap3] | None:
    for name, R, m in regions:
        if contains_polytope(R, P):
            return name, m
    return None


@dataclass
class MapCell:
    """A domain with map outer_r o pre, where r is the region that pre(p) falls in.

    With no outer regions the map is just pre.
    """

    name: str
    poly: ConvexPolytope3
    pre: AffineMap3
    outer: list | None = None


def _int_map(m: AffineMap3) -> tuple[np.ndarray, np.ndarray]:
    if any(Fraction(c).denominator != 1 for row in m.matrix for c in row) or any(
        Fraction(c).denominator != 1 for c in m.translation
    ):
        raise ValueError("grid check needs an integral map")
    mat = np.array([[int(c) for c in row] for row in m.matrix], dtype=np.int64)
    t = np.array([int(c) for c in m.translation], dtype=np.int64)
    return mat, t


def _faces_np(P: ConvexPolytope3) -> tuple[np.ndarray, np.ndarray]:
    N = np.array([f.normal for f in P.faces], dtype=np.int64)
    d = np.array([int(f.offset) for f in P.faces], dtype=np.int64)
    return N, d


def _strict_inside(polys: Sequence[ConvexPolytope3], pts: np.ndarray) -> np.ndarray:
    out = np.zeros((len(polys), len(pts)), dtype=bool)
    for k, P in enumerate(polys):
        N, d = _faces_np(P)
        out[k] = ((pts @ N.T - d) < 0).all(axis=1)
    return out


def _evaluate(cell: MapCell, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Images of pts under the cell map, and a mask of points where it is defined."""
    m, t = _int_map(cell.pre)
    q = pts @ m.T + t
    if not cell.outer:
        return q, np.ones(len(pts), dtype=bool)
    inside = _strict_inside([R for _, R, _ in cell.outer], q)
    ok = inside.sum(axis=0) == 1
    which = inside.argmax(axis=0)
    out = q.copy()
    for r, (_, _, om) in enumerate(cell.outer):
        sel = ok & (which == r)
        if sel.any():
            a, b = _int_map(om)
            out[sel] = q[sel] @ a.T + b
    return out, ok


def calc1_grid(k_max: int = 31) -> np.ndarray:
    """(20i, 20j, 105 + 10k) for i in [-42, 42], j in [-21, 21], k in [0, k_max]."""
    i, j, k = np.meshgrid(np.arange(-42, 43), np.arange(-21, 22), np.arange(0, k_max + 1), indexing="ij")
    return np.stack([20 * i.ravel(), 20 * j.ravel(), 105 + 10 * k.ravel()], axis=1).astype(np.int64)


def compare_partitions(rep: CalcReport, G: list[MapCell], H: list[MapCell], grid: np.ndarray,
                       expected_pairs: int) -> None:
    """Pairs with overlapping interiors, exact map agreement, and the grid test."""
    table = SeparationTable([c.poly for c in G] + [c.poly for c in H])
    n = len(G)
    pairs = []
    for i, j in itertools.product(range(n), range(len(H))):
        if table.witness(i, n + j) is None:
            pairs.append((i, j))
    overlapping = [(i, j) for i, j in pairs if interiors_overlap(G[i].poly, H[j].poly)]
    rep.add("pair_count", len(overlapping) == expected_pairs, found=len(overlapping),
            expected=expected_pairs, without_witness=len(pairs),
            pairs=[[G[i].name, H[j].name] for i, j in overlapping])

    # exact: on every refined cell the two affine maps coincide
    differing, cells = [], 0
    for i, j in overlapping:
        base = halfspaces(G[i].poly) + halfspaces(H[j].poly)
        outer = G[i].outer or [("all", None, IDENTITY)]
        for rname, R, om in outer:
            hs = list(base)
            if R is not None:
                hs += halfspaces(apply_map(R, G[i].pre.inverse()))
            if from_halfspaces(hs) is None:
                continue
            cells += 1
            if om.compose(G[i].pre) != H[j].pre:
                differing.append([G[i].name, H[j].name, rname])
    rep.add("refined_maps_equal", not differing, cells=cells, differing=differing)

    sG = _strict_inside([c.poly for c in G], grid)
    sH = _strict_inside([c.poly for c in H], grid)
    gi = np.where(sG.sum(axis=0) == 1, sG.argmax(axis=0), -1)
    hj = np.where(sH.sum(axis=0) == 1, sH.argmax(axis=0), -1)
    use = (gi >= 0) & (hj >= 0)
    mismatches, evaluated = 0, 0
    covered = set()
    for i, j in sorted(set(zip(gi[use].tolist(), hj[use].tolist()))):
        sel = use & (gi == i) & (hj == j)
        p = grid[sel]
        a, ok = _evaluate(G[i], p)
        b, _ = _evaluate(H[j], p)
        evaluated += int(ok.sum())
        mismatches += int((a[ok] != b[ok]).any(axis=1).sum())
        covered.add((i, j))
    uncovered = [(i, j) for i, j in overlapping if (i, j) not in covered]
    rep.add("grid_identity", mismatches == 0, grid_points=int(len(grid)), evaluated=evaluated,
            mismatches=mismatches)
    rep.add("grid_hits_every_pair", not uncovered,
            uncovered=[[G[i].name, H[j].name] for i, j in uncovered])


def calculation_1(sys: PiecewiseAffineSystem | None = None) -> CalcReport:
    """G = mu F mu equals H = F^{-1} on X[1/4, 1]."""
    sys = sys or bd.load_fixtures()
    rep = CalcReport("calc1")
    regions = mu_regions()
    A = regions[0][1]
    oracle_A = from_halfspaces(halfspaces(bd.bundle_slab(105, 420)) + [
        (vec((1, 1, 0)), Fraction(SCALE)), (vec((-1, -1, 0)), Fraction(SCALE))])
    rep.add("hexagon_bundle_matches_definition", oracle_A is not None and oracle_A.vertex_set() == A.vertex_set())
    pieces = [p for p in sys.pieces if p.name.split("_")[0] in ("alpha", "beta")]
    G, H, outside = [], [], []
    for p in pieces:
        r0 = region_of(p.polytope, regions)
        if r0 is None:
            outside.append(p.name)
            continue
        mu0 = r0[1]
        G.append(MapCell(f"mu({p.name})", apply_map(p.polytope, mu0), p.F.compose(mu0), regions))
        H.append(MapCell(f"F({p.name})", sys.image(p), p.F.inverse()))
    rep.add("pieces_in_mu_regions", not outside, outside=outside)
    if outside:
        return rep
    compare_partitions(rep, G, H, calc1_grid(31), 48)
    return rep


def calculation_2(sys: PiecewiseAffineSystem | None = None) -> CalcReport:
    """G = nu F^{-1} nu equals H = F on X[1/4, 1/2]."""
    sys = sys or bd.load_fixtures()
    rep = CalcReport("calc2")
    regions = nu_regions()
    P = regions[1][1]
    oracle_P = from_halfspaces(halfspaces(bd.bundle_slab(105, 210)) + [
        (vec((1, 0, 1)), Fraction(0)), (vec((-1, 0, -3)), Fraction(0))])
    rep.add("strip_bundle_matches_definition", oracle_P is not None and oracle_P.vertex_set() == P.vertex_set())
    alphas = sys.family("alpha")
    G, H, outside = [], [], []
    for p in alphas:
        img = sys.image(p)
        r_img = region_of(img, regions)
        if r_img is None:
            outside.append(p.name)
            continue
        nu_img = r_img[1]
        G.append(MapCell(f"nu(F({p.name}))", apply_map(img, nu_img), p.F.inverse().compose(nu_img), regions))
        H.append(MapCell(p.name, p.polytope, p.F))
    rep.add("images_in_nu_regions", not outside, outside=outside)
    if outside:
        return rep
    compare_partitions(rep, G, H, calc1_grid(10), 27)
    return rep


# ---------------------------------------------------------------- calculations 3 and 4

def phi_shift(sign: int) -> Conjugacy:
    """(x, y, z) -> (x +- 420, y +- 420, z + 420); sign is the left-half shift."""
    a = sign * SCALE
    L = _affine(((1, 0, 0), (0, 1, 0), (0, 0, 1)), (a, a, SCALE))
    R = _affine(((1, 0, 0), (0, 1, 0), (0, 0, 1)), (-a, -a, SCALE))
    return Conjugacy("phi", L, R, f"left shift {'+' if sign > 0 else '-'}420")


def phi_flip(sign: int) -> Conjugacy:
    """(x, y, z) -> (x +- (420 - 2z), y +- (420 - 2z), 420 - z)."""
    L = _affine(((1, 0, -2 * sign), (0, 1, -2 * sign), (0, 0, -1)), (sign * SCALE, sign * SCALE, SCALE))
    R = _affine(((1, 0, 2 * sign), (0, 1, 2 * sign), (0, 0, -1)), (-sign * SCALE, -sign * SCALE, SCALE))
    return Conjugacy("phi", L, R, f"left shift {'+' if sign > 0 else '-'}(420-2z)")


def calculation_3(sys: PiecewiseAffineSystem | None = None) -> CalcReport:
    sys = sys or bd.load_fixtures()
    rep = CalcReport("calc3")
    dyn = Dynamics(sys)
    sources = sys.family("alpha")[1:] + sys.family("beta")[1:]
    variants = [{"conj": phi_shift(s), "direction": d} for s in (-1, 1) for d in (-1, 1)]
    v, chains, tried = select_variant(dyn, sources, variants)
    _chain_checks(rep, sources, chains, tried)
    conj = v["conj"]
    targets = [conj(s.polytope) for s in sources]
    extra = []
    for name in ("alpha_0", "beta_0"):
        P = sys.by_name(name).polytope
        tile = apply_map(P, conj.left, name=f"phi_L({name})")
        partner = apply_map(P, conj.right)
        extra += trivial_tile_checks(rep, dyn, tile, partner, targets, name)
    trivial = slab_cut(sys.by_name("gamma_0").polytope, 525, 840, "gamma_0[525,840]")
    family = [P for c in chains if c.closed for P in c.polys] + extra + [trivial]
    volume_fill(rep, family, 525, 840, "grand")
    rep.data["orientation"] = {"phi": conj.label, "direction": v["direction"]}
    return rep


def calculation_4(sys: PiecewiseAffineSystem | None = None) -> CalcReport:
    sys = sys or bd.load_fixtures()
    rep = CalcReport("calc4")
    dyn = Dynamics(sys)
    sources = sys.family("alpha")[1:]
    variants = [{"conj": phi_flip(s), "direction": d} for s in (-1, 1) for d in (-1, 1)]
    v, chains, tried = select_variant(dyn, sources, variants)
    _chain_checks(rep, sources, chains, tried)
    trivial = slab_cut(sys.by_name("beta_0").polytope, 210, 315, "beta_0[210,315]")
    family = [P for c in chains if c.closed for P in c.polys] + [trivial]
    volume_fill(rep, family, 210, 315, "grand")
    rep.data["orientation"] = {"phi": v["conj"].label, "direction": v["direction"]}
    return rep


# ---------------------------------------------------------------- calculations 5 and 7

def omega_first(sign: int = 1) -> Conjugacy:
    """Fiber u in [1, 2] to s = (3u-2)/(2u-1): (x, y) -> ((x +- (2-2u)), y)/(2u-1)."""
    def rows(e):
        return ((SCALE, 0, -2 * SCALE * e, 2 * SCALE * SCALE * e), (0, SCALE, 0, 0),
                (0, 0, 3 * SCALE, -2 * SCALE * SCALE), (0, 0, 2, -SCALE))
    return Conjugacy("omega", ProjectiveMap3.of(rows(sign)), ProjectiveMap3.of(rows(-sign)),
                     f"left offset {'+' if sign > 0 else '-'}(2-2u)")


def omega_second(sign: int = -1, diagonal: bool = False) -> Conjugacy:
    """Fiber u in [1/2, 1] to s = (u-2)/(2u-3): (x, y) -> (x, y)/(3-2u) + offset."""
    def rows(e):
        dy = e if diagonal else 0
        return ((SCALE, 0, -2 * SCALE * e, 2 * SCALE * SCALE * e),
                (0, SCALE, -2 * SCALE * dy, 2 * SCALE * SCALE * dy),
                (0, 0, -SCALE, 2 * SCALE * SCALE), (0, 0, -2, 3 * SCALE))
    kind = "(1,1)" if diagonal else "(1,0)"
    return Conjugacy("omega", ProjectiveMap3.of(rows(sign)), ProjectiveMap3.of(rows(-sign)),
                     f"left offset {'+' if sign < 0 else '-'}(2s-2) along {kind}")


def calculation_5(sys: PiecewiseAffineSystem | None = None) -> CalcReport:
    sys = sys or bd.load_fixtures()
    rep = CalcReport("calc5")
    dyn = Dynamics(sys)
    sources = sys.family("gamma")[1:]
    variants = [{"conj": omega_first(s), "direction": d} for s in (1, -1) for d in (-1, 1)]
    v, chains, tried = select_variant(dyn, sources, variants)
    _chain_checks(rep, sources, chains, tried)
    rep.data["orientation"] = {"omega": v["conj"].label, "direction": v["direction"]}
    return rep


def calculation_7(sys: PiecewiseAffineSystem | None = None) -> CalcReport:
    sys = sys or bd.load_fixtures()
    rep = CalcReport("calc7")
    dyn = Dynamics(sys)
    sources = sys.family("beta")[1:]
    variants = [{"conj": omega_second(s, diag), "direction": d}
                for diag in (False, True) for s in (-1, 1) for d in (-1, 1)]
    v, chains, tried = select_variant(dyn, sources, variants)
    _chain_checks(rep, sources, chains, tried)
    rep.data["orientation"] = {"omega": v["conj"].label, "direction": v["direction"]}
    return rep


# ---------------------------------------------------------------- calculations 6 and 8

def left_half_Y(shift: Callable[[str], tuple], z0, z1, name: str) -> ConvexPolytope3 | None:
    """Image of {|y| <= t, |x - y| <= 1, x <= -t} under a fiberwise translation.

    shift(var) gives, for the output fiber s, the linear forms (const, coeff of z)
    of t and of the translation; the set is described in output coordinates.
    """
    (t0, t1), (d0, d1) = shift("t"), shift("d")
    # a point (X, Y, z) is in the image iff (X - d, Y - d) is in the left half of Y_t
    # with t = t0 + t1 z and d = d0 + d1 z (all 420-scaled)
    hs = [
        ((0, 1, -d1 - t1), t0 + d0), ((0, -1, d1 - t1), t0 - d0),
        ((1, -1, 0), Fraction(SCALE)), ((-1, 1, 0), Fraction(SCALE)),
        ((1, 0, -d1 + t1), d0 - t0),
        ((0, 0, 1), Fraction(z1)), ((0, 0, -1), -Fraction(z0)),
    ]
    return from_halfspaces([(vec(n), Fraction(c)) for n, c in hs], name)


def diagonal_of(P: ConvexPolytope3, z) -> tuple[Fraction, Fraction]:
    pts = slice_at(P, z)
    lo = min(pts, key=lambda p: p[0] + p[1])
    hi = max(pts, key=lambda p: p[0] + p[1])
    return (hi[0] - lo[0], hi[1] - lo[1])


def _slice_poly(P: ConvexPolytope3, z) -> ConvexPolygon2 | None:
    pts = slice_at(P, z)
    if len(pts) < 3:
        return None
    try:
        return ConvexPolygon2.hull(pts)
    except ValueError:
        return None


def _area(polys) -> Fraction:
    return sum((p.area() for p in polys if p is not None), Fraction(0))


def _overlap_area(a: Sequence, b: Sequence) -> Fraction:
    total = Fraction(0)
    for p in a:
        for q in b:
            if p is None or q is None:
                continue
            r = p.intersect(q)
            if r is not None:
                total += r.area()
    return total


def tau_checks(rep: CalcReport, dyn: Dynamics, tau: ConvexPolytope3) -> None:
    k0 = dyn.domain_of(tau)
    ok, info = False, {}
    if k0 is not None:
        img = apply_map(tau, dyn.fwd[k0])
        k1 = dyn.domain_of(img)
        if k1 is not None:
            comp = dyn.fwd[k1].compose(dyn.fwd[k0])
            back = apply_map(img, dyn.fwd[k1])
            ok = back.vertex_set() == tau.vertex_set() and comp == IDENTITY
            info = {"domains": [dyn.pieces[k0].name, dyn.pieces[k1].name]}
    rep.add("tau_period_two", ok, z_range=[fmt(c) for c in tau.z_range()], **info)


def translation_zone_checks(rep: CalcReport, sys, zone: ConvexPolytope3, host: Piece, tau, use_image: bool,
                            heights) -> None:
    """zone inside the host domain and the host map is translation by the tau diagonal."""
    D = sys.image(host) if use_image else host.polytope
    m = host.F.inverse() if use_image else host.F
    rep.add("zone_in_domain", contains_polytope(D, zone), domain=("F(" + host.name + ")") if use_image else host.name)
    agree = []
    for z in heights:
        p = (Fraction(0), Fraction(0), Fraction(z))
        q = m(p)
        agree.append((q[0] - p[0], q[1] - p[1]) == diagonal_of(tau, z))
    rep.add("zone_translation_is_diagonal", all(agree), heights=[fmt(z) for z in heights])
    c = zone.centroid()
    s = c[2] / SCALE
    pl = build_system(s)
    p2 = (c[0] / SCALE, c[1] / SCALE)
    try:
        got = step_f_inverse(pl, p2)[0] if use_image else step_f(pl, p2)[0]
        dx, dy = diagonal_of(tau, c[2])
        ok = got == (p2[0] + dx / SCALE, p2[1] + dy / SCALE)
    except BoundaryError:
        ok = False
    rep.add("planar_sample_point", ok, point=[fmt(x) for x in c])


def complement_checks(rep: CalcReport, K: Sequence[ConvexPolytope3], removed: Sequence[ConvexPolytope3],
                      heights, mapped: Sequence[ConvexPolytope3], target: Sequence[ConvexPolytope3]) -> None:
    """At each height: K fills X minus the removed sets, and the mapped sets land in target.

    The removed sets are the zone, the image of the modular symmetry and the
    period-1 trivial tile, whose orbits are excluded from the statement.
    """
    rows = []
    ok = True
    X_all = bd.bundle_X()
    for z in heights:
        X = _slice_poly(X_all, z)
        Ks = [_slice_poly(P, z) for P in K]
        Rs = [_slice_poly(P, z) for P in removed]
        rest = X.area() - _area(Rs)
        k_area = _area(Ks)
        clash = _overlap_area(Ks, Rs)
        M = [_slice_poly(Q, z) for Q in mapped]
        T = [_slice_poly(Q, z) for Q in target]
        inside = _overlap_area(M, T) == _area(M)
        rows.append({"z": fmt(z), "remainder": fmt(rest), "K": fmt(k_area), "K_overlap": fmt(clash),
                     "maps_into_target": inside})
        ok = ok and rest == k_area and clash == 0 and inside
    rep.add("complement_inspection", ok, fibers=rows)


def calculation_6(sys: PiecewiseAffineSystem | None = None) -> CalcReport:
    sys = sys or bd.load_fixtures()
    rep = CalcReport("calc6")
    dyn = Dynamics(sys)
    tau = bd.auxiliary("tau_printed_3/4_1").renamed("tau[1,3/2]")
    tau_checks(rep, dyn, tau)
    Z = bd.auxiliary("Z_printed_1_5/4").renamed("Z[1,5/4]")
    # Z^0_s is the left half of Y_{s-1} moved by (-1, -1): t = z - 420, d = -420
    oracle = left_half_Y(lambda v: (-SCALE, 1) if v == "t" else (-SCALE, 0), 420, 525, "Z oracle")
    rep.add("zone_matches_definition", oracle is not None and oracle.vertex_set() == Z.vertex_set())
    translation_zone_checks(rep, sys, Z, sys.by_name("gamma_13"), tau, True, (420, 525))
    iZ = ConvexPolytope3([iota1(v) for v in Z.vertices], "iota(Z)")
    itau = ConvexPolytope3([iota1(v) for v in tau.vertices], "iota(tau)")
    omega = omega_first(1)
    W = [omega(p.polytope) for p in sys.family("gamma")[1:]]
    trivial = slab_cut(sys.by_name("gamma_0").polytope, 420, 525, "trivial")
    K = [sys.image(sys.by_name(f"gamma_{j}")) for j in (2, 8, 11, 17)]
    pre = [sys.by_name(f"gamma_{j}").polytope for j in (2, 8, 11, 17)]
    complement_checks(rep, K, [Z, iZ, trivial, *W], (420, Fraction(945, 2), 525), pre, [Z, iZ, tau, itau])
    return rep


def calculation_8(sys: PiecewiseAffineSystem | None = None) -> CalcReport:
    sys = sys or bd.load_fixtures()
    rep = CalcReport("calc8")
    dyn = Dynamics(sys)
    tau = bd.auxiliary("tau_printed_1_5/4").renamed("tau[3/4,1]")
    tau_checks(rep, dyn, tau)
    # Z^0_s is the left half of Y_{1-s} moved by (1 - 2s)(1, 1): t = 420 - z, d = 420 - 2z
    Z = left_half_Y(lambda v: (SCALE, -1) if v == "t" else (SCALE, -2), 315, 420, "Z[3/4,1]")
    pieces = subtract_convex(Z, tau)
    rep.add("zone_minus_tau_convex", len(pieces) == 1, pieces=len(pieces))
    Zs = pieces[0] if len(pieces) == 1 else Z
    Zs = Zs.renamed("Z*[3/4,1]")
    rep.data["zone"] = fmt_poly(Zs)
    printed = bd.auxiliary("Z_printed_3/4_1")
    rep.data["printed_zone_fixture"] = {
        "z_range": [fmt(c) for c in printed.z_range()],
        "duplicates_other_zone": printed.vertex_set() == bd.auxiliary("Z_printed_1_5/4").vertex_set(),
    }
    translation_zone_checks(rep, sys, Zs, sys.by_name("beta_7"), tau, False, (315, 420))
    iZs = ConvexPolytope3([iota1(v) for v in Zs.vertices], "iota(Z*)")
    iZ = ConvexPolytope3([iota1(v) for v in Z.vertices], "iota(Z)")
    omega = omega_second(-1, False)
    W = [omega(p.polytope) for p in sys.family("beta")[1:]]
    trivial = slab_cut(sys.by_name("beta_0").polytope, 315, 420, "trivial")
    K = [sys.by_name(f"beta_{j}").polytope for j in (2, 6, 8, 12)]
    post = [sys.image(sys.by_name(f"beta_{j}")) for j in (2, 6, 8, 12)]
    heights = (315, Fraction(735, 2), 420)
    complement_checks(rep, K, [Zs, iZs, trivial, *W], heights, post, [Z, iZ])
    # F fixes tau and iota(tau) as a pair, so the rest of F(K) lies in Z*
    itau = ConvexPolytope3([iota1(v) for v in tau.vertices], "iota(tau)")
    rows = []
    for z in heights:
        FK = [_slice_poly(P, z) for P in post]
        taus = [_slice_poly(P, z) for P in (tau, itau)]
        star = [_slice_poly(P, z) for P in (Zs, iZs)]
        rows.append(_overlap_area(FK, star) == _area(FK) - _area(taus))
    rep.add("complement_lands_in_zone_star", all(rows), heights=[fmt(z) for z in heights])
    return rep


def subtract_convex(P: ConvexPolytope3, hole: ConvexPolytope3) -> list[ConvexPolytope3]:
    """P minus hole as convex pieces (one per separating face of the hole)."""
    out = []
    prior: list = []
    base = halfspaces(P)
    for n, d in halfspaces(hole):
        flipped = (tuple(-c for c in n), -d)
        piece = from_halfspaces(base + prior + [flipped], P.name)
        if piece is not None:
            out.append(piece)
        prior.append((n, d))
    return out


# ---------------------------------------------------------------- the planar replay

def _inv_similarity(sim):
    (a, b), (c, d) = sim.matrix
    det = a * d - b * c
    inv = ((d / det, -b / det), (-c / det, a / det))

    def f(p):
        x, y = p[0] - sim.translation[0], p[1] - sim.translation[1]
        return (inv[0][0] * x + inv[0][1] * y, inv[1][0] * x + inv[1][1] * y)
    return f


def main_theorem_replay(s, samples: int = 100, seed: int = 0) -> CalcReport:
    """Compare first returns to Y_t under f_t with first returns to Z_s under f_s^{-1}."""
    s = Fraction(s)
    t = renorm_R(s)
    rep = CalcReport(f"main_theorem[{fmt(s)}]")
    sys_t, sys_s = build_system(t), build_system(s)
    phi = planar_phi(s)
    inverse = [_inv_similarity(b) for b in phi.branches]

    def in_Y(p):
        return sys_t.F1.contains(p, strict=True) and not sys_t.F2.contains(p, strict=False)

    def in_Z(q):
        for k, g in enumerate(inverse):
            p = g(q)
            if in_Y(p) and (p[0] < 0) == (k == 0):
                return True
        return False

    def first_return(p, step, member, cap):
        cur = p
        for n in range(1, cap + 1):
            cur = step(cur)
            if member(cur):
                return cur, n
        raise RuntimeError("no return within the cap")

    cap_t, cap_s = period_guard(t), period_guard(s)
    rows, bad, skipped = [], 0, 0
    # a deterministic rational lattice with a prime denominator, walked by a fixed stride
    den = 1009
    xs = range(-int((1 + t) * den), int((1 + t) * den) + 1)
    ys = range(-int(t * den), int(t * den) + 1)
    total = len(xs) * len(ys)
    idx = (seed * 7919) % total
    tried = 0
    while len(rows) < samples and tried < 50 * samples:
        tried += 1
        idx = (idx + 104729) % total
        p = (Fraction(xs[idx // len(ys)], den), Fraction(ys[idx % len(ys)], den))
        if not in_Y(p):
            continue
        try:
            r_t, n_t = first_return(p, lambda q: step_f(sys_t, q)[0], in_Y, cap_t)
            q = phi(p)
            r_s, n_s = first_return(q, lambda q: step_f_inverse(sys_s, q)[0], in_Z, cap_s)
        except BoundaryError:
            skipped += 1
            continue
        ok = phi(r_t) == r_s
        bad += not ok
        rows.append({"p": [fmt(c) for c in p], "n_t": n_t, "n_s": n_s, "match": ok})
    rep.add("first_returns_match", len(rows) == samples and bad == 0, samples=len(rows),
            mismatches=bad, skipped_boundary=skipped, t=fmt(t))
    rep.data["samples"] = rows
    return rep


# ---------------------------------------------------------------- entry points

CALCULATIONS = {
    "calc1": calculation_1, "calc2": calculation_2, "calc3": calculation_3, "calc4": calculation_4,
    "calc5": calculation_5, "calc6": calculation_6, "calc7": calculation_7, "calc8": calculation_8,
}


def run(name: str, sys: PiecewiseAffineSystem | None = None) -> CalcReport:
    if name not in CALCULATIONS:
        raise KeyError(f"unknown calculation {name!r}")
    return CALCULATIONS[name](sys)
