import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexbench.bodies import (
    AffineMap,
    VPolytope,
    ball,
    cross_polytope,
    cube,
    difference_body,
    polar,
    simplex,
)
from convexbench.covering import (
    coverage_gap,
    covering_profile,
    dual_covering_check,
    equal_volume_symmetry,
    greedy_net,
    hull_volume_check,
    lemma_4_2_check,
    verify_lemma_2_1,
    volume_lower_bound,
)
from convexbench.errors import InclusionViolated, NonSymmetricGauge
from convexbench.randgeom import SampleConfig, isotropic_transform, sample_uniform

from conftest import random_polytope

FAST = {"n_samples": 20_000, "audit_samples": 4_000}


def covered(est, K, B, count=20_000, seed=99):
    X = sample_uniform(K, SampleConfig(seed=seed, n_samples=count, method="direct"))
    g = np.min(np.stack([B.gauge(X - c) for c in est.net]), axis=0)
    return float(np.max(g)) <= est.t * (1 + 1e-9)


def test_two_by_two_grid_is_exact():
    est = greedy_net(cube(2, 2.0), cube(2), 1.0, **FAST)
    assert est.lower == pytest.approx(4.0)
    assert est.upper == 4
    assert est.certified
    assert covered(est, cube(2, 2.0), cube(2))


def test_single_translate_regime():
    K = cube(2).translate([5.0, -3.0])
    est = greedy_net(K, ball(2), math.sqrt(2) * 1.0001, **FAST)
    assert est.upper == 1 and est.method == "single"
    np.testing.assert_allclose(est.net[0], [5.0, -3.0], atol=1e-4)
    assert greedy_net(K, ball(2), 1.35, **FAST).upper > 1


def test_profile_is_monotone_and_tail_is_one():
    K = simplex(2, centered=True)
    ts = np.linspace(0.1, 2.0, 10)
    prof = covering_profile(K, ball(2), ts, **FAST)
    ups = [e.upper for e in prof]
    assert all(a >= b for a, b in zip(ups, ups[1:]))
    assert ups[-1] == 1  # t = 2 exceeds the circumradius of the centered triangle


@pytest.mark.parametrize("K,B,t", [
    (cross_polytope(3), ball(3), 0.5),
    (simplex(2, centered=True), cube(2), 0.2),
    (ball(2), cross_polytope(2), 0.3),
])
def test_nets_cover_and_bounds_are_ordered(K, B, t):
    est = greedy_net(K, B, t, **FAST)
    assert est.lower <= est.upper
    if est.certified:
        assert covered(est, K, B)
    assert coverage_gap(est, K, B) <= 1 + 1e-9 or not est.certified


def test_asymmetric_gauge_needs_opt_in():
    with pytest.raises(NonSymmetricGauge):
        greedy_net(cube(2), simplex(2, centered=True), 1.0, **FAST)
    est = greedy_net(cube(2), simplex(2, centered=True), 1.0, allow_asymmetric=True, **FAST)
    assert est.upper >= est.lower


def test_lower_bound_uses_sum_body():
    K, B = cube(2), cube(2)
    # |K + tB| / (2^n |tB|) = 16 / 16 = 1 and |K| / |tB| = 1
    assert volume_lower_bound(K, B, 1.0) == pytest.approx(1.0)
    # a thin segment-like body: the sum-body bound dominates the volume ratio
    thin = VPolytope([[-5.0, -0.01], [5.0, -0.01], [5.0, 0.01], [-5.0, 0.01]])
    lb = volume_lower_bound(thin, cube(2), 1.0)
    assert lb > thin.volume / 4
    assert lb <= greedy_net(thin, cube(2), 1.0, **FAST).upper


@settings(max_examples=8)
@given(seed=st.integers(0, 10**6), t=st.floats(0.3, 2.0))
def test_random_bounds_ordered(seed, t):
    rng = np.random.default_rng(seed)
    K = random_polytope(rng, 2, 6)
    est = greedy_net(K, cube(2), t, n_samples=5000, audit_samples=1000)
    assert est.lower <= est.upper * (1 + 1e-9)


def test_submultiplicativity_on_triple():
    A, B, C = cross_polytope(2, 2.0), cube(2, 0.7), ball(2, 0.4)
    ac = greedy_net(A, C, 1.0, **FAST).upper
    ab = greedy_net(A, B, 1.0, **FAST).upper
    bc = greedy_net(B, C, 1.0, **FAST).upper
    assert ac <= 1.3 * ab * bc


# --- lemma checks ------------------------------------------------------------


def test_mean_gauge_bound_square_grid():
    rep = verify_lemma_2_1(cube(2), ball(2), [0.1, 0.25, 0.5, 1.0, 1.5, 2.0], **FAST)
    assert rep["pass"]
    assert all(r["upper"] >= r["lower"] for r in rep["rows"])
    assert rep["c_prime"] > 0


def test_mean_gauge_bound_isotropic_body():
    _, K = isotropic_transform(simplex(3))
    rep = verify_lemma_2_1(K, ball(3), [0.25, 0.5, 1.0], **FAST)
    assert rep["pass"] and math.isfinite(rep["c_prime"])


def test_dual_check_self_dual_ball():
    rep = dual_covering_check(ball(2), [0.5, 1.0, 2.0], audit_points=100, **FAST)
    assert rep["ratio"] == pytest.approx(1.0)
    assert rep["pass"]


def test_dual_check_square_grid():
    ts = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
    rep = dual_covering_check(cube(2), ts, audit_points=1000, **FAST)
    assert rep["ratio"] <= 16 * 1.25
    assert all(a["pass"] for a in rep["audit"])


def test_hull_volume_trivial_and_segment():
    K = cube(2)
    r = hull_volume_check(K, K, 1.0, **FAST)
    assert r["N_upper"] == 1 and r["pass"]
    B = ball(2)
    L = VPolytope([[-4.9, -0.05], [4.9, -0.05], [4.9, 0.05], [-4.9, 0.05]])
    r = hull_volume_check(B, L, 5.0, **FAST)
    assert r["pass"]
    with pytest.raises(InclusionViolated):
        hull_volume_check(B, L, 2.0, **FAST)


@pytest.mark.parametrize("n", [2, 3])
def test_hull_volume_isotropic_instance(n):
    _, K0 = isotropic_transform(simplex(n))
    from convexbench.randgeom import isotropic_constant

    D = difference_body(K0)
    K = polar(D).scale(n * isotropic_constant(K0))
    L = ball(n)
    A, b = K.facets
    bb = float(np.max(np.linalg.norm(A, axis=1) / b))  # L <= bb K
    r = hull_volume_check(K, L, bb, **FAST)
    assert r["pass"]
    assert 0.1 <= bb / math.sqrt(n) <= 10


def test_entropy_chain_and_equal_volume():
    r = lemma_4_2_check(simplex(2, centered=True), cube(2, 0.5), **FAST)
    assert r["pass"]
    e = equal_volume_symmetry(cube(2), cube(2), **FAST)
    assert e["ratio"] == pytest.approx(1.0)
    C = cube(3)
    Bl = ball(3, (C.volume / ball(3).volume) ** (1 / 3))
    for t in (0.5, 1.0, 2.0):
        assert equal_volume_symmetry(C, Bl, t=t, **FAST)["pass"]
    big = equal_volume_symmetry(cube(2), cube(2).affine_image(AffineMap.from_linear(np.diag([3.0, 1 / 3]))), t=50.0, **FAST)
    assert big["N_KL"] == big["N_LK"] == 1
