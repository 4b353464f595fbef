import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from convexbench.bodies import Ellipsoid, ball, cube, difference_body, polar, simplex
from convexbench.errors import BudgetExhaustedWithoutCertificate, NonPolytope
from convexbench.laplace import (
    klartag_body,
    klartag_search,
    log_laplace,
    log_laplace_batch,
    measure_bounds,
    sandwich_factors,
)
from convexbench.randgeom import SampleConfig, isotropic_constant, moments, sample_uniform

from conftest import random_polytope


def fd_grad(K, xi, h=1e-4):
    n = len(xi)
    E = np.eye(n) * h
    return np.array([(log_laplace(K, xi + E[i]).value - log_laplace(K, xi - E[i]).value) / (2 * h) for i in range(n)])


def test_log_sinh_closed_form():
    ev = log_laplace(cube(2), np.array([1.0, 0.0]))
    assert ev.value == pytest.approx(math.log(math.sinh(1.0)), abs=1e-12)
    assert ev.value == pytest.approx(0.161439, abs=1e-6)
    # the tilted marginal in x1 has mean coth(1) - 1
    assert ev.grad[0] == pytest.approx(1 / math.tanh(1.0) - 1.0, rel=1e-12)


def test_zero_exponent_gives_uniform_moments():
    K = simplex(3)
    ev = log_laplace(K, np.zeros(3))
    m = moments(K, qs=())
    assert ev.value == 0.0
    np.testing.assert_allclose(ev.grad, m.barycenter, atol=1e-14)
    np.testing.assert_allclose(ev.hess, m.covariance, atol=1e-14)


def test_gradient_and_hessian_match_finite_differences(rng):
    for _ in range(20):
        n = int(rng.integers(2, 5))
        K = random_polytope(rng, n)
        xi = rng.standard_normal(n)
        ev = log_laplace(K, xi)
        np.testing.assert_allclose(ev.grad, fd_grad(K, xi), atol=1e-6)
        h = 1e-4
        H = np.array([(log_laplace(K, xi + h * e).grad - log_laplace(K, xi - h * e).grad) / (2 * h) for e in np.eye(n)])
        np.testing.assert_allclose(ev.hess, H, rtol=1e-5, atol=1e-8)


def test_ellipsoid_against_monte_carlo():
    E = Ellipsoid.from_axes([0.5, -0.2], [[1.5, 0.4], [0.0, 0.7]])
    xi = np.array([0.8, -1.1])
    ev = log_laplace(E, xi)
    X = sample_uniform(E, SampleConfig(seed=4, n_samples=400_000, method="direct"))
    w = np.exp(X @ xi)
    assert ev.value == pytest.approx(math.log(w.mean()), abs=5e-3)
    np.testing.assert_allclose(ev.grad, (w[:, None] * X).sum(axis=0) / w.sum(), atol=5e-3)


def test_ball_large_exponent_against_gamma_asymptotics():
    # 1-D marginal density of the unit disc ~ sqrt(1 - s^2); for large a the
    # tilted mean is 1 - 3/(2a) + O(a^-2)
    a = 400.0
    ev = log_laplace(ball(2), np.array([a, 0.0]))
    assert ev.grad[0] == pytest.approx(1 - 1.5 / a, abs=2 / a**2 * 5)


def test_ellipsoid_matches_fine_polytope():
    xi = np.array([2.0, 1.0, -0.5])
    E = ball(3)
    P = E.to_vpolytope(4000)
    a, b = log_laplace(E, xi), log_laplace(P, xi)
    np.testing.assert_allclose(a.grad, b.grad, atol=5e-3)


def test_batch_matches_single(rng):
    K = random_polytope(rng, 3)
    X = rng.standard_normal((6, 3))
    v, g, H = log_laplace_batch(K, X)
    for i in range(6):
        ev = log_laplace(K, X[i])
        assert v[i] == pytest.approx(ev.value, abs=1e-12)
        np.testing.assert_allclose(H[i], ev.hess, atol=1e-12)


def test_non_polytope_rejected():
    from convexbench.ballbodies import RadialBody

    dirs = np.vstack([np.eye(2), -np.eye(2), [[0.6, 0.8], [-0.6, -0.8]]])
    R = RadialBody(dirs / np.linalg.norm(dirs, axis=1, keepdims=True), np.ones(6))
    with pytest.raises(NonPolytope):
        log_laplace(R, np.zeros(2))


@given(seed=st.integers(0, 10**6))
def test_log_laplace_convex_along_lines(seed):
    rng = np.random.default_rng(seed)
    K = random_polytope(rng, 2, 6)
    a, b = rng.standard_normal(2) * 3, rng.standard_normal(2) * 3
    mid = log_laplace(K, (a + b) / 2).value
    assert mid <= 0.5 * (log_laplace(K, a).value + log_laplace(K, b).value) + 1e-12


@given(seed=st.integers(0, 10**6))
def test_jensen_and_range(seed):
    rng = np.random.default_rng(seed)
    K = random_polytope(rng, 3)
    xi = rng.standard_normal(3)
    h, lam = measure_bounds(K, xi)
    bar = log_laplace(K, np.zeros(3)).grad
    assert float(xi @ bar) - 1e-12 <= lam <= h + 1e-12


# --- perturbation search ---------------------------------------------------------


def test_search_on_square_meets_target_and_grid_oracle():
    K = cube(2)
    res = klartag_search(K, eps=0.5, budget=200)
    assert res.certified and res.evaluations <= 200
    # target = (eps n s(K - K)^{1/n})^{-n} computed directly
    D = difference_body(K)
    s = D.volume * polar(D).volume
    assert res.target == pytest.approx((0.5 * 2 * s ** 0.5) ** -2, rel=1e-12)
    # brute 40 x 40 grid over the polar region: the best grid point meets the target too
    lam = D.volume ** -0.5
    Kn = K.scale(lam)
    # (K_n - K_n) = [-2 lam, 2 lam]^2, so eps n (K_n - K_n)^o is the l1-ball of radius eps n / (2 lam)
    r = 0.5 * 2 / (2 * lam)
    g = np.linspace(-r, r, 40)
    G = np.array([[x, y] for x in g for y in g if abs(x) + abs(y) <= r])
    _, _, H = log_laplace_batch(Kn, G)
    assert np.min(np.linalg.det(H)) <= res.target


def test_search_output_in_polar_region(rng):
    K = random_polytope(rng, 3)
    res = klartag_search(K, eps=0.5)
    c = log_laplace(K, np.zeros(3)).grad
    D = difference_body(K.vertices - c)
    assert np.max(np.abs(D.vertices @ res.xi)) <= 0.5 * 3 * (1 + 1e-9)


def test_symmetric_search_no_worse_than_origin():
    K = cube(3)
    res = klartag_search(K, eps=0.5)
    D = difference_body(K)
    lam = D.volume ** (-1 / 3)
    det0 = np.linalg.det(log_laplace(K.scale(lam), np.zeros(3)).hess)
    assert res.detcov <= det0 * (1 + 1e-12)
    assert np.asarray(res).shape == (3,)


def test_budget_exhausted_is_reported():
    with pytest.raises(BudgetExhaustedWithoutCertificate) as err:
        klartag_search(cube(2), budget=0, strict=True)
    assert err.value.target > 0
    assert not klartag_search(cube(2), budget=0).certified


def test_search_validates_eps():
    with pytest.raises(ValueError):
        klartag_search(cube(2), eps=1.5)


def test_klartag_body_on_cube_is_cube():
    pr = klartag_body(cube(2), eps=0.5)
    assert pr.certified and pr.sandwich_ok
    np.testing.assert_allclose(pr.xi_star, 0)
    U = np.random.default_rng(0).standard_normal((100, 2))
    np.testing.assert_allclose(pr.T.support(U), cube(2).support(U), atol=1e-9)
    np.testing.assert_allclose(pr.x, 0, atol=1e-12)


def test_klartag_body_triangle():
    K = simplex(2)
    pr = klartag_body(K, eps=0.5)
    assert pr.certified and pr.L_T <= 0.6
    assert pr.L_T == pytest.approx(isotropic_constant(pr.T))
    inner, outer = sandwich_factors(pr.T, K.translate(pr.x), count=500, seed=3)
    assert max(inner, outer) <= 1.02 * math.e
    d = pr.to_dict()
    assert set(d) >= {"xi_star", "L_T", "certified", "detcov", "target"}


def test_l_t_sqrt_eps_scaling_probe():
    K = simplex(3)
    vals = [klartag_body(K, eps=e).L_T * math.sqrt(e) for e in (0.1, 0.25, 0.5)]
    assert max(vals) / min(vals) <= 3.0
