from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import partition_report
from dlpet import bundle
from dlpet.bundle import MapVector, SCALE
from dlpet.pet import build_system, step_fprime
from dlpet.polytope3 import contains, from_halfspaces, volume6

ints = st.integers(min_value=-3, max_value=3)
vectors = st.builds(MapVector, ints, ints, ints, ints)


def test_fixture_counts(system):
    assert len(system.pieces) == 51
    assert [len(system.family(f)) for f in ("alpha", "beta", "gamma")] == [19, 13, 19]


def test_X_vertices():
    X = bundle.bundle_X()
    assert (-525, -105, 105) in X.vertices
    assert volume6(X) == 3_500_658_000 == bundle.fiber_volume6(105, 840)


@given(vectors)
def test_step_round_trip(mv):
    assert MapVector.from_step(mv.to_step()) == mv
    assert mv.gamma_partner().gamma_partner() == mv


@given(vectors, st.integers(min_value=105, max_value=840))
def test_affine_matches_planar_translation(mv, z):
    """F on a fiber is translation by V + W at s = z/420."""
    s = Fraction(z, SCALE)
    st_ = mv.to_step()
    V, W = st_.V(s), st_.W(s)
    img = mv.affine()((0, 0, z))
    assert img == ((V[0] + W[0]) * SCALE, (V[1] + W[1]) * SCALE, z)
    half = mv.half_step().affine()((0, 0, z))
    assert half == (V[0] * SCALE, V[1] * SCALE, z)


def test_every_piece_vector_is_planar(system):
    for p in system.pieces:
        c = p.polytope.centroid()
        assert bundle.planar_vector(*c) == p.vector, p.name


def test_half_step_is_fprime(system):
    for p in system.family("alpha")[:5]:
        x, y, z = p.polytope.centroid()
        img = bundle.apply_Fprime(system, (x, y, z))
        q = step_fprime(build_system(z / SCALE), (x / SCALE, y / SCALE), 1)
        assert img == (q[0] * SCALE, q[1] * SCALE, z)


def test_inverse_round_trip(system):
    for p in system.pieces[::5]:
        c = p.polytope.centroid()
        assert bundle.apply_F_inverse(system, bundle.apply_F(system, c)) == c


def test_domain_halfspaces_rebuild_alpha(system):
    a = system.by_name("alpha_0")
    P = from_halfspaces(bundle.domain_halfspaces(a.vector, 105, 210))
    assert P == a.polytope


def test_gamma_pieces_are_images(system):
    for i in (0, 7, 13):
        a, g = system.by_name(f"alpha_{i}"), system.by_name(f"gamma_{i}")
        assert g.vector == a.vector.gamma_partner()
        assert contains(bundle.bundle_X(), g.polytope.centroid(), strict=True)


def test_printed_beta_differs_from_derived(system):
    printed = bundle.load_fixtures(beta_source="printed")
    names = [f"beta_{i}" for i in range(7)]
    assert any(printed.by_name(n).polytope != system.by_name(n).polytope for n in names)


def test_vertex_fibers():
    assert bundle.vertex_fibers(bundle.bundle_X()) == {(1, 4), (2, 1)}


def test_planar_consistency(system):
    c = bundle.planar_consistency(system, samples=300, seed=3)
    assert c.passed and c.detail["samples"] == 300


def test_partition_report_checks():
    rep = partition_report()
    passing = [
        "piece_count", "no_collinearity", "vertex_in_at_least_3_faces", "improved_normals",
        "pairwise_disjoint", "image_pairwise_disjoint", "pieces_in_X", "images_in_X",
        "half_step_images_in_RX", "volume_fill",
    ]
    for name in passing:
        assert rep.get(name).passed, name
    assert rep.get("volume_fill").detail


def test_exactly_three_faces_failures_are_genuine(system):
    """Each piece flagged by the exactly-3 check really has a vertex on 4+ faces."""
    rep = partition_report()
    flagged = rep.get("vertex_in_exactly_3_faces").detail["failures"]
    assert flagged
    for name in flagged:
        P = system.by_name(name).polytope
        counts = [sum(m in f.vertex_indices for f in P.faces) for m in range(len(P.vertices))]
        assert max(counts) >= 4


def test_odd_vertex_count_forces_non_simple(system):
    """3V = 2E for a simple polytope, so pieces with an odd vertex count cannot pass."""
    odd = [p.name for p in system.pieces if len(p.polytope.vertices) % 2]
    flagged = set(partition_report().get("vertex_in_exactly_3_faces").detail["failures"])
    assert odd and set(odd) <= flagged


def test_locate_rejects_boundary(system):
    with pytest.raises(Exception):
        bundle.apply_F(system, (0, 0, 105))
