import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from convexbench.bodies import AffineMap, ball, ball_volume, cross_polytope, cube, polar, simplex
from convexbench.errors import NoConvergence, PointNotInterior
from convexbench.randgeom import SampleConfig
from convexbench.santalo import (
    mahler_bound,
    prop_3_1_check,
    santalo_point,
    santalo_solve,
    thm_3_3_scan,
    volume_product,
)
from convexbench.zoo import ZooSpec, generate_zoo

from conftest import random_map, random_polytope


def test_bounds():
    assert mahler_bound(2) == 8.0
    assert mahler_bound(3) == pytest.approx(64 / 6)


def test_symmetric_body_has_origin():
    for K in (cube(3), cross_polytope(2), cube(2).affine_image(AffineMap.from_linear([[2.0, 1.0], [0.0, 1.0]]))):
        np.testing.assert_allclose(santalo_point(K), 0, atol=1e-6)


def test_triangle_centroid_and_grid_oracle():
    tri = simplex(2)
    z = santalo_point(tri)
    np.testing.assert_allclose(z, [1 / 3, 1 / 3], atol=1e-6)
    # direct minimization of the polar volume as an independent oracle
    res = minimize(lambda x: polar(tri, x).volume, [0.2, 0.25], method="Nelder-Mead",
                   options={"xatol": 1e-9, "fatol": 1e-12})
    np.testing.assert_allclose(res.x, z, atol=1e-5)


def test_barycenter_certificate(rng):
    K = random_polytope(rng, 3)
    r = santalo_solve(K)
    P = polar(K, r.point)
    from convexbench.integrals import polynomial_moments

    vol, m1, _ = polynomial_moments(P.simplices)
    diam = np.max(np.linalg.norm(P.vertices[:, None] - P.vertices[None], axis=-1))
    assert np.linalg.norm(m1 / vol) <= 1e-6 * diam
    assert r.local_min
    assert all(a >= b for a, b in zip(r.polar_volumes, r.polar_volumes[1:]))


def test_equivariance(rng):
    K = random_polytope(rng, 3)
    T = random_map(rng, 3)
    np.testing.assert_allclose(santalo_point(K.affine_image(T)), T(santalo_point(K)), atol=1e-5)


def test_no_convergence_reports_best():
    with pytest.raises(NoConvergence) as err:
        santalo_solve(simplex(3), max_iter=1, x0=[0.05, 0.05, 0.05])
    assert err.value.best is not None


def test_volume_product_examples():
    vp = volume_product(cube(2))
    assert vp.s == pytest.approx(8.0)
    assert vp.n_s_root == pytest.approx(2 * math.sqrt(8))
    assert volume_product(ball(2)).s == pytest.approx(math.pi**2)
    mc = volume_product(ball(2), method="mc", cfg=SampleConfig(seed=0, n_samples=400_000))
    assert abs(mc.s - math.pi**2) / math.pi**2 <= 0.02
    assert abs(mc.s - math.pi**2) <= 4 * mc.stderr


def test_volume_product_center_choices():
    tri = simplex(2)
    assert volume_product(tri).center_used == "santalo"
    b = volume_product(tri, center="barycenter")
    s = volume_product(tri, center="santalo")
    assert s.s <= b.s + 1e-12
    with pytest.raises(PointNotInterior):
        volume_product(tri, center="origin")
    with pytest.raises(ValueError):
        volume_product(tri, center="steiner")


@settings(max_examples=5)
@given(seed=st.integers(0, 10**6))
def test_volume_product_linear_invariance(seed):
    rng = np.random.default_rng(seed)
    K = cross_polytope(3)
    for _ in range(5):
        A = rng.standard_normal((3, 3)) + 2 * np.eye(3)
        if abs(np.linalg.det(A)) < 0.1:
            continue
        KT = K.affine_image(AffineMap.from_linear(A))
        assert volume_product(KT).s == pytest.approx(volume_product(K).s, rel=1e-9)


def test_mahler_value_is_the_symmetric_floor():
    """The attainable floor: s(K) >= 4^n/n! on cubes, cross-polytopes and zonotopes."""
    for bid, K in generate_zoo(ZooSpec(families=("cube", "cross_polytope", ("zonotope", 2)), dims=(2, 3, 4, 5)), labeled=True):
        vp = volume_product(K)
        assert vp.mahler_ok, bid
        if bid.startswith(("cube", "cross")):
            assert vp.s == pytest.approx(mahler_bound(K.dim), rel=1e-10)


def test_blaschke_santalo_on_zoo_and_ball_maximal():
    for n in (2, 3, 4, 5):
        sball = volume_product(ball(n))
        assert sball.s == pytest.approx(ball_volume(n) ** 2)
        for bid, K in generate_zoo(ZooSpec(dims=(n,)), labeled=True):
            vp = volume_product(K)
            assert vp.santalo_ok, bid
            assert vp.n_s_root <= sball.n_s_root


def test_prop_3_1_square_values():
    r = prop_3_1_check(cube(2))
    assert r["L"] == pytest.approx(1 / math.sqrt(12))
    assert r["c1_measured"] == pytest.approx(1.633, abs=1e-3)
    assert r["middle"] == pytest.approx(2 * math.sqrt(8))
    # symmetric collapse: K - K = 2K, so left = 4 * middle
    assert r["left"] == pytest.approx(4 * r["middle"])
    assert r["pass"]


def test_prop_3_1_random_polytopes():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        K = random_polytope(rng, 3)
        K = K.translate(-santalo_point(K))
        assert prop_3_1_check(K)["pass"], seed


def test_scan_reports_measured_floor():
    rep = thm_3_3_scan([("cube-n2", cube(2)), ("tri", simplex(2, centered=True))])
    rows = {r["body_id"]: r for r in rep["rows"]}
    assert rows["cube-n2"]["n_s_root"] == pytest.approx(2 * math.sqrt(8))
    assert rows["cube-n2"]["sandwich_ok"] and rows["cube-n2"]["polar_ok"]
    assert rows["tri"]["floor_ok"]  # asserted on symmetric bodies only
    assert rep["min_n_s_root_symmetric"] == pytest.approx(5.656854, abs=1e-6)
    assert rep["pass"] == (rep["min_n_s_root_symmetric"] >= 8)
