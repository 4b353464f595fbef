import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from convexbench.bodies import (
    AffineMap,
    Ellipsoid,
    HPolytope,
    VPolytope,
    ball,
    ball_volume,
    body_from_dict,
    convex_hull_union,
    cross_polytope,
    cube,
    difference_body,
    dumps,
    loads,
    minkowski_sum,
    polar,
    simplex,
)
from convexbench.errors import DegenerateBody, DimensionMismatch, PointNotInterior, SingularMap

from conftest import random_map, random_polytope


def shoelace(P):
    """Area of the planar hull of ``P``; independent of the triangulation code."""
    h = ConvexHull(P)
    x, y = P[h.vertices].T
    return 0.5 * abs(np.dot(x, np.roll(y, 1)) - np.dot(y, np.roll(x, 1)))


# --- oracle values -----------------------------------------------------------


@pytest.mark.parametrize("n", range(2, 7))
def test_cross_polytope_volume_closed_form(n):
    assert cross_polytope(n).volume == pytest.approx(2**n / math.factorial(n), rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cube_and_simplex_volume(n):
    assert cube(n).volume == pytest.approx(2.0**n, rel=1e-12)
    assert simplex(n).volume == pytest.approx(1 / math.factorial(n), rel=1e-12)


def test_ball_volume_low_dimensions():
    assert ball_volume(2) == pytest.approx(math.pi)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_polar_of_square_is_cross():
    P = polar(cube(2))
    got = sorted(map(tuple, np.round(P.vertices, 12)))
    assert got == sorted([(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)])
    # membership oracle: |x|_1 <= 1
    X = np.random.default_rng(1).uniform(-1.2, 1.2, (1000, 2))
    inside = np.abs(X).sum(axis=1) <= 1
    margin = np.abs(np.abs(X).sum(axis=1) - 1) > 1e-9
    assert np.array_equal(P.contains(X)[margin], inside[margin])


def test_polar_of_scaled_ball():
    P = polar(ball(3, 2.5))
    assert isinstance(P, Ellipsoid)
    np.testing.assert_allclose(P.shape, np.eye(3) * 2.5**2)


def test_bipolar_triangle():
    K = simplex(2, centered=True)
    KK = polar(polar(K))
    np.testing.assert_allclose(sorted(map(tuple, KK.vertices)), sorted(map(tuple, K.vertices)), atol=1e-12)


def test_polar_needs_interior_point():
    with pytest.raises(PointNotInterior):
        polar(simplex(2))
    with pytest.raises(PointNotInterior):
        polar(cube(2), x=[1.0, 0.0])


def test_minkowski_examples():
    assert minkowski_sum(cube(2), cube(2)).volume == pytest.approx(16.0)
    seg1 = np.array([[-1.0, 0.0], [1.0, 0.0]])
    seg2 = np.array([[0.0, -1.0], [0.0, 1.0]])
    sq = minkowski_sum(seg1, seg2)
    U = np.random.default_rng(0).standard_normal((50, 2))
    np.testing.assert_allclose(sq.support(U), cube(2).support(U), atol=1e-12)
    K = random_polytope(np.random.default_rng(3), 3)
    assert minkowski_sum(K, np.zeros((1, 3))).volume == pytest.approx(K.volume, rel=1e-12)


def test_minkowski_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        minkowski_sum(cube(2), cube(3))


def test_difference_body_rogers_shephard_equality():
    tri = simplex(2)
    D = difference_body(tri)
    assert len(D.vertices) == 6
    assert D.volume / tri.volume == pytest.approx(6.0, rel=1e-12)
    assert difference_body(simplex(3)).volume / simplex(3).volume == pytest.approx(20.0, rel=1e-10)
    C = cross_polytope(3)
    assert difference_body(C).volume == pytest.approx(8 * C.volume, rel=1e-12)


def test_hull_union():
    K = cube(2)
    assert convex_hull_union(K, K).volume == pytest.approx(4.0)
    U = convex_hull_union(cube(2), cross_polytope(2, 2.0))
    pts = np.vstack([cube(2).vertices, cross_polytope(2, 2.0).vertices])
    assert U.volume == pytest.approx(shoelace(pts), rel=1e-12)
    assert U.volume == pytest.approx(8.0, rel=1e-12)


def test_affine_image_volume_and_support():
    E = ball(2).affine_image(AffineMap.from_linear(np.diag([2.0, 3.0])))
    assert E.volume == pytest.approx(6 * math.pi, rel=1e-6)
    assert cube(2).support(np.array([1.0, 1.0])) == pytest.approx(2.0)
    assert cross_polytope(2).radial(np.array([1.0, 0.0])) == pytest.approx(1.0)


def test_singular_map_rejected():
    with pytest.raises(SingularMap):
        AffineMap.from_linear([[1.0, 2.0], [2.0, 4.0]])


def test_degenerate_polytopes_rejected():
    with pytest.raises(DegenerateBody):
        VPolytope([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    with pytest.raises(DegenerateBody):
        HPolytope([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]], [1.0, -1.0, 1.0, 1.0])


def test_h_and_v_agree_on_cube():
    H = cube(3)
    V = VPolytope(H.vertices)
    X = np.random.default_rng(2).uniform(-1.5, 1.5, (500, 3))
    np.testing.assert_array_equal(H.contains(X), V.contains(X))
    np.testing.assert_allclose(H.gauge(X), np.abs(X).max(axis=1), atol=1e-12)
    np.testing.assert_allclose(V.gauge(X), np.abs(X).max(axis=1), atol=1e-12)


def test_json_round_trip_bit_identical(rng):
    for K in (cube(3), random_polytope(rng, 3), Ellipsoid(rng.standard_normal(2), [[2.0, 0.3], [0.3, 1.0]])):
        s = dumps(K)
        K2 = loads(s)
        assert dumps(K2) == s
        assert json.loads(s)["type"] in ("hpolytope", "vpolytope", "ellipsoid")
    with pytest.raises(ValueError):
        body_from_dict({"type": "zonoid"})


# --- properties --------------------------------------------------------------


@given(seed=st.integers(0, 10**6), n=st.integers(2, 4))
def test_bipolar_random(seed, n):
    rng = np.random.default_rng(seed)
    K = random_polytope(rng, n).translate(np.zeros(n))
    c = K.vertices.mean(axis=0)
    K = K.translate(-c)
    if K.interior_margin(np.zeros(n)) < 1e-3:
        return
    KK = polar(polar(K))
    U = rng.standard_normal((40, n))
    np.testing.assert_allclose(KK.support(U), K.support(U), rtol=1e-7, atol=1e-9)


@given(seed=st.integers(0, 10**6), n=st.integers(2, 4))
def test_affine_volume_scales_by_det(seed, n):
    rng = np.random.default_rng(seed)
    K = random_polytope(rng, n)
    T = random_map(rng, n)
    assert K.affine_image(T).volume == pytest.approx(abs(T.det) * K.volume, rel=1e-9)


@given(seed=st.integers(0, 10**6), n=st.integers(2, 4))
def test_minkowski_support_additive(seed, n):
    rng = np.random.default_rng(seed)
    K, L = random_polytope(rng, n, n + 3), random_polytope(rng, n, n + 3)
    U = rng.standard_normal((30, n))
    np.testing.assert_allclose(minkowski_sum(K, L).support(U), K.support(U) + L.support(U), rtol=1e-10)


@given(seed=st.integers(0, 10**6))
def test_gauge_of_vertices_is_one(seed):
    rng = np.random.default_rng(seed)
    K = random_polytope(rng, 3)
    K = K.translate(-K.vertices.mean(axis=0))
    if K.interior_margin(np.zeros(3)) < 1e-3:
        return
    np.testing.assert_allclose(K.gauge(K.vertices), 1.0, atol=1e-9)


@given(seed=st.integers(0, 10**6), n=st.integers(2, 4))
def test_ellipsoid_polar_volume_product_about_center(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 3 * np.eye(n)
    E = Ellipsoid.from_axes(np.zeros(n), A)
    assert E.volume * polar(E).volume == pytest.approx(ball_volume(n) ** 2, rel=1e-9)
