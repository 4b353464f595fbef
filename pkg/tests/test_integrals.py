import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import dblquad

from convexbench.bodies import cube, simplex
from convexbench.integrals import divided_difference_exp, exp_moments, polynomial_moments


def mp_divdiff(nodes):
    """Recursive divided differences in 50-digit arithmetic (distinct nodes)."""
    mpmath.mp.dps = 50
    t = [mpmath.mpf(float(x)) for x in nodes]
    vals = [mpmath.e**x for x in t]
    for level in range(1, len(t)):
        vals = [(vals[i + 1] - vals[i]) / (t[i + level] - t[i]) for i in range(len(vals) - 1)]
    return float(vals[0])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_standard_simplex_moments(n):
    vol, m1, m2 = polynomial_moments(simplex(n).simplices)
    assert vol == pytest.approx(1 / math.factorial(n))
    np.testing.assert_allclose(m1, np.full(n, 1 / math.factorial(n + 1)))
    expect = np.full((n, n), 1 / math.factorial(n + 2))
    np.fill_diagonal(expect, 2 / math.factorial(n + 2))
    np.testing.assert_allclose(m2, expect)


def test_cube_second_moment():
    vol, m1, m2 = polynomial_moments(cube(3, 0.5).simplices)
    assert vol == pytest.approx(1.0)
    np.testing.assert_allclose(m1, 0, atol=1e-15)
    np.testing.assert_allclose(m2, np.eye(3) / 12, atol=1e-15)


@pytest.mark.parametrize(
    "nodes",
    [[0.1, 0.7], [-2.0, 0.5, 3.0], [-9.0, -1.0, 4.0, 11.0], [0.0, 0.3, 0.31, 0.9, 1.4], [-30.0, 2.0, 25.0]],
)
def test_divided_differences_match_high_precision(nodes):
    assert divided_difference_exp(np.array(nodes)) == pytest.approx(mp_divdiff(nodes), rel=1e-10)


def test_divided_differences_repeated_nodes():
    t = 0.7
    assert divided_difference_exp(np.array([t, t])) == pytest.approx(math.exp(t), rel=1e-14)
    assert divided_difference_exp(np.array([t, t, t])) == pytest.approx(math.exp(t) / 2, rel=1e-14)
    assert divided_difference_exp(np.array([8.0, 8.0, 8.0, 8.0])) == pytest.approx(math.exp(8) / 6, rel=1e-12)


def test_exp_moments_square_closed_form():
    ls, I0, I1, I2 = exp_moments(cube(2).simplices, np.array([1.0, 0.0]))
    scale = math.exp(ls)
    assert scale * I0 == pytest.approx(4 * math.sinh(1.0), rel=1e-13)
    # int x e^x over [-1,1] = 2/e, times 2 for the second coordinate
    assert scale * I1[0] == pytest.approx(2 * 2 / math.e, rel=1e-12)
    assert scale * I1[1] == pytest.approx(0.0, abs=1e-13)
    # int x^2 e^x = e - 5/e
    assert scale * I2[0, 0] == pytest.approx(2 * (math.e - 5 / math.e), rel=1e-12)
    assert scale * I2[1, 1] == pytest.approx(2 * math.sinh(1.0) * 2 / 3, rel=1e-12)


@pytest.mark.parametrize("a", [40.0, 200.0, 700.0, 3000.0])
def test_exp_moments_large_exponent_log_scale(a):
    ls, I0, _, _ = exp_moments(cube(2).simplices, np.array([a, 0.0]))
    # log int = log(2 sinh(a)/a) + log 2
    expect = a + math.log1p(-math.exp(-2 * a)) - math.log(a) + math.log(2)
    assert ls + math.log(I0) == pytest.approx(expect, rel=1e-12)


def test_exp_moments_triangle_against_quadrature():
    tri = simplex(2)
    xi = np.array([1.3, -0.6])
    ls, I0, I1, I2 = exp_moments(tri.simplices, xi)
    s = math.exp(ls)

    def q(f):
        return dblquad(lambda y, x: f(x, y) * math.exp(xi[0] * x + xi[1] * y), 0, 1, 0, lambda x: 1 - x,
                       epsabs=1e-13, epsrel=1e-12)[0]

    assert s * I0 == pytest.approx(q(lambda x, y: 1.0), rel=1e-10)
    assert s * I1[0] == pytest.approx(q(lambda x, y: x), rel=1e-10)
    assert s * I2[0, 1] == pytest.approx(q(lambda x, y: x * y), rel=1e-9)


def test_batched_matches_single(rng):
    S = simplex(3, centered=True).simplices
    X = rng.standard_normal((5, 3)) * 3
    ls, I0, I1, I2 = exp_moments(S, X)
    for i in range(5):
        l1, a0, a1, a2 = exp_moments(S, X[i])
        assert ls[i] + math.log(I0[i]) == pytest.approx(l1 + math.log(a0), rel=1e-13)
        np.testing.assert_allclose(I1[i] / I0[i], a1 / a0, rtol=1e-12, atol=1e-14)


@given(seed=st.integers(0, 10**6), scale=st.floats(0.0, 30.0))
def test_zero_exponent_limit_and_positivity(seed, scale):
    rng = np.random.default_rng(seed)
    S = simplex(3, centered=True).simplices
    xi = rng.standard_normal(3) * scale
    ls, I0, I1, I2 = exp_moments(S, xi)
    assert I0 > 0
    mean = I1 / I0
    cov = I2 / I0 - np.outer(mean, mean)
    assert np.all(np.linalg.eigvalsh(0.5 * (cov + cov.T)) > -1e-12)
    vol = polynomial_moments(S)[0]
    if scale == 0:
        assert math.exp(ls) * I0 == pytest.approx(vol, rel=1e-13)
