"""Exponential densities on bodies and the bodies ``K_p`` they generate.

For a density ``f`` with ``f(0) > 0`` the set
``K_p(f) = {x : p int_0^inf f(r x) r^{p-1} dr >= f(0)}`` is star-shaped with
radial function ``rho(theta)^p = p int_0^inf f(r theta) / f(0) r^{p-1} dr``.
For ``f = e^{<xi,x>} 1_K`` the ray integral has a closed form, evaluated
here per direction of a fixed sphere grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, cKDTree
from scipy.special import gammainc, gammaln

from .bodies import (
    ConvexBody,
    VPolytope,
    _Polytope,
    sphere_directions,
)
from .errors import (
    DimensionMismatch,
    InclusionViolated,
    NonPositiveP,
    PointNotInterior,
    RangeRatioExceeded,
    ZeroAtOrigin,
)
from .laplace import log_laplace, sandwich_factors
from .randgeom import isotropic_constant, l_mu

SERIES_THRESHOLD = 1e-4
SANDWICH_SLACK = 1.02
SANDWICH_DIRECTIONS = 200

__all__ = [
    "ExpMeasure",
    "RadialBody",
    "ball_body",
    "body_from_function",
    "default_directions",
    "ray_integral_radius",
]


@dataclass(frozen=True)
class ExpMeasure:
    """Measure with density proportional to ``e^{<xi,x>}`` on ``body``."""

    body: ConvexBody
    xi: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float).ravel()
        if xi.shape != (self.body.dim,):
            raise DimensionMismatch("xi does not match the body dimension")
        object.__setattr__(self, "xi", xi)

    @classmethod
    def indicator(cls, K):
        return cls(K, np.zeros(K.dim))

    @property
    def dim(self):
        return self.body.dim

    def log_range(self):
        """``log(sup f / inf f) = h_K(xi) + h_K(-xi)``."""
        return float(self.body.support(self.xi) + self.body.support(-self.xi))

    def density(self, x):
        """Unnormalized density ``e^{<xi,x>} 1_K(x)``."""
        x = np.asarray(x, dtype=float)
        return np.where(self.body.contains(x), np.exp(x @ self.xi), 0.0)

    def barycenter(self):
        return log_laplace(self.body, self.xi).grad

    def translate(self, v):
        """The measure of ``g(x) = f(x + v)``: support ``K - v``, same exponent."""
        return ExpMeasure(self.body.translate(-np.asarray(v, dtype=float)), self.xi)

    def isotropic_constant(self):
        return l_mu(self)


def default_directions(n):
    """720 angles in the plane, ``2000 (n - 1)`` quasi-uniform points otherwise."""
    return sphere_directions(n, 720 if n == 2 else 2000 * (n - 1))


def _ray_factor(x, p):
    """``p int_0^1 e^{x u} u^{p-1} du`` for an array ``x`` (so radius^p = rho^p times this)."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < SERIES_THRESHOLD
    xs = x[small]
    out[small] = 1.0 + p * xs / (p + 1) + p * xs**2 / (2 * (p + 2)) + p * xs**3 / (6 * (p + 3))
    neg = (~small) & (x < 0)
    if np.any(neg):
        y = -x[neg]
        # p gamma(p) P(p, y) / y^p
        out[neg] = np.exp(gammaln(p + 1) - p * np.log(y)) * gammainc(p, y)
    pos = (~small) & (x > 0)
    if np.any(pos):
        y = x[pos]
        kmax = int(40 + np.max(y) + 12 * math.sqrt(np.max(y)))
        k = np.arange(kmax)
        # p sum_k y^k / (k! (p + k)), summed in log space
        logt = k[None, :] * np.log(y)[:, None] - gammaln(k + 1)[None, :] + math.log(p) - np.log(p + k)[None, :]
        mx = logt.max(axis=1, keepdims=True)
        out[pos] = np.exp(mx[:, 0]) * np.exp(logt - mx).sum(axis=1)
    return out


def ray_integral_radius(f, p, theta):
    """Exact radial function of ``K_p(f)`` along unit vectors ``theta``."""
    K = f.body if isinstance(f, ExpMeasure) else f
    xi = f.xi if isinstance(f, ExpMeasure) else np.zeros(K.dim)
    if p <= 0:
        raise NonPositiveP(f"p must be positive, got {p}")
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    try:
        g = K.gauge(theta)
    except PointNotInterior:
        raise ZeroAtOrigin("the density vanishes at the origin") from None
    rho = 1.0 / g
    x = (theta @ xi) * rho
    return rho * _ray_factor(x, p) ** (1.0 / p)


class RadialBody(ConvexBody):
    """Star body given by radii on a direction grid.

    Between grid directions the boundary is the piecewise-linear surface
    through the points ``radii[i] * directions[i]`` over the spherical
    triangulation of the grid, which extends positively homogeneously.
    ``radius_fn``, when given, evaluates the exact radial function at
    arbitrary unit vectors and is used by :meth:`convexity_defect`.
    """

    kind = "radial"

    def __init__(self, directions, radii, radius_fn=None):
        U = np.asarray(directions, dtype=float)
        r = np.asarray(radii, dtype=float).ravel()
        if U.ndim != 2 or len(U) != len(r):
            raise DimensionMismatch("one radius per direction is required")
        if np.any(~(r > 0)):
            raise ValueError("radii must be positive")
        self.directions = U / np.linalg.norm(U, axis=1, keepdims=True)
        self.radii = r
        self.points = self.directions * r[:, None]
        self.radius_fn = radius_fn

    @property
    def dim(self):
        return self.directions.shape[1]

    @cached_property
    def _cones(self):
        """Simplicial cones of the grid: facet vertex indices and their inverse matrices."""
        hull = ConvexHull(self.directions)
        simp = hull.simplices
        eq = hull.equations
        P = self.points[simp]  # (F, n, n) boundary points, rows
        inv = np.linalg.inv(np.swapaxes(P, 1, 2))
        return eq, inv

    def gauge(self, x):
        x = np.asarray(x, dtype=float)
        X = np.atleast_2d(x)
        eq, inv = self._cones
        nrm = np.linalg.norm(X, axis=1)
        A = eq[:, :-1] / (-eq[:, -1])[:, None]
        g = np.empty(len(X))
        step = max(1, 2_000_000 // len(A))
        for i in range(0, len(X), step):
            Xi = X[i : i + step]
            # the grid facet hit by the ray through x
            k = np.argmax(Xi @ A.T, axis=1)
            g[i : i + step] = np.einsum("qij,qj->qi", inv[k], Xi).sum(axis=1)
        g = np.where(nrm > 0, g, 0.0)
        return g if x.ndim == 2 else float(g[0])

    def contains(self, x, tol=1e-9):
        g = self.gauge(x)
        return g <= 1.0 + tol

    def support(self, u):
        u = np.asarray(u, dtype=float)
        vals = np.atleast_2d(u) @ self.points.T
        out = vals.max(axis=1)
        return out if u.ndim == 2 else float(out[0])

    def interior_point(self):
        return np.zeros(self.dim)

    def to_vpolytope(self):
        """Inner polytope: convex hull of the boundary grid points."""
        return VPolytope(self.points)

    @property
    def volume(self):
        return self.to_vpolytope().volume

    def affine_image(self, T):
        return self.to_vpolytope().affine_image(T)

    def is_symmetric(self, tol=1e-9):
        return self.to_vpolytope().is_symmetric(tol)

    def convexity_defect(self, samples=2000, seed=0):
        """Largest ``gauge(sum l_i p_i) - 1`` over convex combinations of three boundary points.

        Half of the triples are neighbors on the grid, half uniform. The
        gauge is the exact one when ``radius_fn`` is known, otherwise the
        interpolated one. Zero for a convex body.
        """
        rng = np.random.default_rng(seed)
        N = len(self.points)
        idx = rng.integers(0, N, size=(samples, 3))
        near = cKDTree(self.directions).query(self.directions, k=min(N, 8))[1]
        half = samples // 2
        rows = idx[:half, 0]
        idx[:half, 1] = near[rows, rng.integers(1, near.shape[1], half)]
        idx[:half, 2] = near[rows, rng.integers(1, near.shape[1], half)]
        lam = rng.dirichlet(np.ones(3), size=samples)
        X = np.einsum("sk,skn->sn", lam, self.points[idx])
        if self.radius_fn is None:
            g = self.gauge(X)
        else:
            nrm = np.linalg.norm(X, axis=1)
            g = nrm / self.radius_fn(X / nrm[:, None])
        return float(max(0.0, np.max(g) - 1.0))

    def to_dict(self):
        return {"type": "radial", "directions": self.directions.tolist(), "radii": self.radii.tolist()}

    def __repr__(self):
        return f"RadialBody(n={self.dim}, directions={len(self.radii)})"


def _vertex_directions(K):
    if isinstance(K, _Polytope):
        V = K.vertices
        nv = np.linalg.norm(V, axis=1)
        return V[nv > 0] / nv[nv > 0, None]
    return np.empty((0, K.dim))


def ball_body(f, p, directions=None):
    """``K_p(f)`` for an exponential density or the indicator of a body.

    Parameters
    ----------
    f : ExpMeasure or ConvexBody
    p : float > 0
    directions : (N, n) array, optional
        grid of unit vectors; defaults to :func:`default_directions` plus the
        directions of the vertices of the support.

    Raises
    ------
    ZeroAtOrigin
        if the origin is not interior to the support.
    NonPositiveP
    """
    if p <= 0:
        raise NonPositiveP(f"p must be positive, got {p}")
    K = f.body if isinstance(f, ExpMeasure) else f
    if directions is None:
        directions = np.vstack([default_directions(K.dim), _vertex_directions(K)])
    U = np.asarray(directions, dtype=float)
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    return RadialBody(U, ray_integral_radius(f, p, U), radius_fn=lambda th: ray_integral_radius(f, p, th))


@dataclass
class FunctionBody:
    """Output of :func:`body_from_function` with its sandwich measurements."""

    T: ConvexBody
    x0: np.ndarray
    m: float
    inner: float
    outer: float

    def __iter__(self):
        return iter((self.T, self.x0))


def body_from_function(f, m, directions=None, check=True):
    """Body ``T`` with ``T / m <= K - x0 <= m T`` for the barycenter ``x0`` of ``f``.

    ``T = K_{n+1}(g)`` with ``g(x) = f(x + x0)``, converted to a V-polytope by
    the hull of its boundary grid. For the indicator (``xi = 0``) ``T`` is
    ``K - x0`` itself. Unpacks as ``(T, x0)``.

    Raises
    ------
    RangeRatioExceeded
        if ``sup f > m^n inf f`` on the support.
    InclusionViolated
        if a sampled direction breaks the sandwich by more than the 1.02 slack.
    """
    if not isinstance(f, ExpMeasure):
        f = ExpMeasure.indicator(f)
    n = f.dim
    if f.log_range() > n * math.log(m) + 1e-12:
        raise RangeRatioExceeded(
            f"log(sup f / inf f) = {f.log_range():.6g} exceeds n log m = {n * math.log(m):.6g}"
        )
    x0 = f.barycenter()
    g = f.translate(x0)
    C = g.body
    if not np.any(f.xi):
        T = C
    else:
        T = ball_body(g, n + 1, directions).to_vpolytope()
    inner = outer = float("nan")
    if check:
        inner, outer = sandwich_factors(T, C, count=SANDWICH_DIRECTIONS)
        if max(inner, outer) > SANDWICH_SLACK * m:
            raise InclusionViolated(
                f"sandwich factors ({inner:.4g}, {outer:.4g}) exceed {SANDWICH_SLACK} * m = {SANDWICH_SLACK * m:.4g}"
            )
    return FunctionBody(T, x0, m, inner, outer)


def l_ratio(f, m):
    """``L_T / L_f`` for the body of :func:`body_from_function`."""
    T, _ = body_from_function(f, m)
    return isotropic_constant(T) / l_mu(f)

