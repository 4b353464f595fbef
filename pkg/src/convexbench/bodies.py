"""Exact convex bodies and the body algebra.

Three representations are supported:

- :class:`HPolytope` -- ``{x : A x <= b}``
- :class:`VPolytope` -- convex hull of a finite point set
- :class:`Ellipsoid` -- ``{x : (x - c)^T M (x - c) <= 1}``

Polytopes carry both representations lazily; conversions go through qhull
and polar duality, so every duality-critical operation stays exact up to
floating point.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.special import gammaln
from scipy.stats import norm, qmc

from .errors import (
    DegenerateBody,
    DimensionMismatch,
    PointNotInterior,
    SingularMap,
    UnboundedResult,
)

VERTEX_TOL = 1e-10
INTERIOR_MARGIN = 1e-9
ELLIPSOID_DIRECTIONS_PER_DIM = 64

__all__ = [
    "AffineMap",
    "ConvexBody",
    "Ellipsoid",
    "HPolytope",
    "VPolytope",
    "affine_image",
    "ball",
    "ball_volume",
    "body_from_dict",
    "body_to_dict",
    "contains",
    "convex_hull_union",
    "cross_polytope",
    "cube",
    "difference_body",
    "dumps",
    "loads",
    "minkowski_sum",
    "polar",
    "radial",
    "simplex",
    "sphere_directions",
    "support",
]


def ball_volume(n):
    """Volume of the Euclidean unit ball in dimension ``n``."""
    return math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1.0))


def sphere_directions(n, count):
    """Deterministic, roughly uniform unit vectors in ``R^n``.

    Uses equally spaced angles in the plane, a Fibonacci lattice on the
    2-sphere and a scrambled Halton sequence pushed through the Gaussian
    quantile function in higher dimensions.
    """
    count = int(count)
    if n == 2:
        ang = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if n == 3:
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        phi = np.pi * (3.0 - math.sqrt(5.0)) * np.arange(count)
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    u = qmc.Halton(d=n, scramble=True, seed=20240611).random(count)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _points(x):
    return np.atleast_2d(np.asarray(x, dtype=float))


def _dedupe(points, tol):
    """Drop points within ``tol`` of an earlier point, keeping input order."""
    if len(points) < 2:
        return points
    keep = np.ones(len(points), dtype=bool)
    for i, j in sorted(cKDTree(points).query_pairs(tol)):
        if keep[i] and keep[j]:
            keep[j] = False
    return points[keep]


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _hull(points):
    try:
        return ConvexHull(points)
    except (QhullError, ValueError) as exc:
        raise DegenerateBody(f"point set is not full-dimensional: {exc}") from None


# ---------------------------------------------------------------------------
# affine maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineMap:
    """``x -> linear @ x + shift`` with a cached determinant."""

    linear: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        L = _readonly(np.atleast_2d(self.linear))
        n = L.shape[0]
        if L.shape != (n, n):
            raise DimensionMismatch(f"linear part must be square, got {L.shape}")
        s = _readonly(np.zeros(n) if self.shift is None else self.shift)
        if s.shape != (n,):
            raise DimensionMismatch("shift does not match the linear part")
        object.__setattr__(self, "linear", L)
        object.__setattr__(self, "shift", s)
        if not np.all(np.isfinite(L)) or abs(self.det) <= 1e-300:
            raise SingularMap("linear part is singular")
        if np.linalg.cond(L) > 1e13:
            raise SingularMap("linear part is numerically singular")

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n), np.zeros(n))

    @classmethod
    def from_linear(cls, linear):
        linear = np.atleast_2d(np.asarray(linear, dtype=float))
        return cls(linear, np.zeros(linear.shape[0]))

    @classmethod
    def translation(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(np.eye(len(v)), v)

    @property
    def dim(self):
        return self.linear.shape[0]

    @cached_property
    def det(self):
        return float(np.linalg.det(self.linear))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.linear.T + self.shift

    def inverse(self):
        Li = np.linalg.inv(self.linear)
        return AffineMap(Li, -Li @ self.shift)

    def compose(self, other):
        """Return ``self o other``."""
        return AffineMap(self.linear @ other.linear, self.linear @ other.shift + self.shift)

    def __matmul__(self, other):
        return self.compose(other)


# ---------------------------------------------------------------------------
# bodies
# ---------------------------------------------------------------------------


class ConvexBody:
    """Common interface of the three representations.

    All bodies are immutable; derived data (vertices, facets, triangulations)
    is computed once and cached.
    """

    kind = "abstract"

    @property
    def dim(self):
        raise NotImplementedError

    # support / membership / gauge -------------------------------------------------
    def support(self, u):
        raise NotImplementedError

    def contains(self, x, tol=1e-9):
        raise NotImplementedError

    def gauge(self, x):
        """Minkowski functional ``p_K(x) = inf{r > 0 : x in rK}`` about the origin."""
        raise NotImplementedError

    def radial(self, theta):
        """Radial function about the origin: ``max{r : r*theta in K}``."""
        g = self.gauge(theta)
        with np.errstate(divide="ignore"):
            return 1.0 / g

    # transformations ---------------------------------------------------------------
    def affine_image(self, T):
        raise NotImplementedError

    def translate(self, v):
        return self.affine_image(AffineMap.translation(v))

    def scale(self, c):
        return self.affine_image(AffineMap.from_linear(c * np.eye(self.dim)))

    def __neg__(self):
        return self.affine_image(AffineMap.from_linear(-np.eye(self.dim)))

    # measures ---------------------------------------------------------------------
    @property
    def volume(self):
        raise NotImplementedError

    def is_symmetric(self, tol=1e-9):
        raise NotImplementedError

    def bounding_box(self):
        E = np.eye(self.dim)
        return -self.support(-E), self.support(E)

    def diameter_bound(self):
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    def to_dict(self):
        raise NotImplementedError


class _Polytope(ConvexBody):
    """Shared machinery for both polytope representations."""

    @property
    def dim(self):
        return self.vertices.shape[1]

    @property
    def scale_hint(self):
        return max(1.0, float(np.max(np.abs(self.vertices))))

    @cached_property
    def hull(self):
        return _hull(self.vertices)

    @cached_property
    def facets(self):
        """Irredundant ``(A, b)`` with unit-norm rows."""
        eq = self.hull.equations
        A, b = eq[:, :-1], -eq[:, -1]
        keep = _dedupe(np.column_stack([A, b]), 1e-9)
        return _readonly(keep[:, :-1]), _readonly(keep[:, -1])

    @cached_property
    def simplices(self):
        """Cone triangulation from the vertex centroid: array ``(S, n+1, n)``."""
        V = self.vertices
        p = V.mean(axis=0)
        faces = V[self.hull.simplices]
        S = np.concatenate([np.broadcast_to(p, (len(faces), 1, V.shape[1])), faces], axis=1)
        vol = np.abs(np.linalg.det(S[:, 1:] - S[:, :1])) / math.factorial(V.shape[1])
        S = S[vol > 0]
        return _readonly(S)

    @cached_property
    def simplex_volumes(self):
        S = self.simplices
        return _readonly(np.abs(np.linalg.det(S[:, 1:] - S[:, :1])) / math.factorial(self.dim))

    @property
    def volume(self):
        return float(self.simplex_volumes.sum())

    def support(self, u):
        u = np.asarray(u, dtype=float)
        vals = _points(u) @ self.vertices.T
        out = vals.max(axis=1)
        return out if u.ndim == 2 else float(out[0])

    def argsupport(self, u):
        return self.vertices[np.argmax(self.vertices @ np.asarray(u, dtype=float))]

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        A, b = self.facets
        ok = np.all(_points(x) @ A.T <= b + tol * self.scale_hint, axis=1)
        return ok if x.ndim == 2 else bool(ok[0])

    def interior_margin(self, x):
        A, b = self.facets
        return float(np.min(b - A @ np.asarray(x, dtype=float)))

    def gauge(self, x):
        A, b = self.facets
        if np.min(b) <= INTERIOR_MARGIN:
            raise PointNotInterior("origin is not interior; gauge undefined")
        x = np.asarray(x, dtype=float)
        g = np.maximum(0.0, np.max(_points(x) @ (A / b[:, None]).T, axis=1))
        return g if x.ndim == 2 else float(g[0])

    def is_symmetric(self, tol=1e-9):
        return bool(np.all(self.contains(-self.vertices, tol=tol)))

    def as_vpolytope(self):
        return self if isinstance(self, VPolytope) else VPolytope(self.vertices)

    def as_hpolytope(self):
        if isinstance(self, HPolytope):
            return self
        A, b = self.facets
        return HPolytope(A, b, _vertices=self.vertices)


class VPolytope(_Polytope):
    """Convex hull of ``vertices`` (at least ``n+1`` affinely spanning points).

    Redundant points are discarded at construction; the surviving vertices
    keep their input order.
    """

    kind = "vpolytope"

    def __init__(self, vertices):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] < V.shape[1] + 1:
            raise DegenerateBody(f"need at least n+1 points, got shape {V.shape}")
        V = _dedupe(V, VERTEX_TOL * max(1.0, float(np.max(np.abs(V)))))
        hull = _hull(V)
        idx = np.sort(hull.vertices)
        if len(idx) < len(V):
            V = V[idx]
            hull = _hull(V)
        self.vertices = _readonly(V)
        self.__dict__["hull"] = hull

    def affine_image(self, T):
        if T.dim != self.dim:
            raise DimensionMismatch("map and body dimensions differ")
        return VPolytope(T(self.vertices))

    def to_dict(self):
        return {"type": "vpolytope", "vertices": self.vertices.tolist()}

    def __repr__(self):
        return f"VPolytope(n={self.dim}, vertices={len(self.vertices)})"


def _chebyshev_center(A, b):
    n = A.shape[1]
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(
        c,
        A_ub=np.column_stack([A, norms]),
        b_ub=b,
        bounds=[(None, None)] * n + [(0, None)],
        method="highs",
    )
    if res.status == 3:
        raise UnboundedResult("H-polytope is unbounded")
    if res.status != 0:
        raise DegenerateBody(f"Chebyshev-center LP failed: {res.message}")
    return res.x[:n], res.x[n]


class HPolytope(_Polytope):
    """``{x : A x <= b}``; boundedness and full dimension are checked here."""

    kind = "hpolytope"

    def __init__(self, A, b, _vertices=None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        m, n = A.shape
        if b.shape != (m,):
            raise DimensionMismatch("A and b have incompatible shapes")
        if m < n + 1:
            raise UnboundedResult(f"{m} half-spaces cannot bound a body in R^{n}")
        if np.any(np.linalg.norm(A, axis=1) == 0):
            raise ValueError("A has a zero row")
        self.A = _readonly(A)
        self.b = _readonly(b)
        if _vertices is None:
            _vertices = self._enumerate_vertices()
        self.vertices = _readonly(_vertices)

    @property
    def dim(self):
        return self.A.shape[1]

    def _enumerate_vertices(self):
        A, b = self.A, self.b
        scale = max(1.0, float(np.max(np.abs(b))))
        p, r = _chebyshev_center(A, b)
        if r <= 1e-12 * scale:
            raise DegenerateBody("H-polytope has empty interior")
        slack = b - A @ p
        q = A / slack[:, None]
        try:
            hull = ConvexHull(q)
        except (QhullError, ValueError):
            raise UnboundedResult("H-polytope is unbounded") from None
        eq = hull.equations
        if np.max(eq[:, -1]) >= -1e-14:
            raise UnboundedResult("H-polytope is unbounded")
        V = p + eq[:, :-1] / (-eq[:, -1])[:, None]
        return _dedupe(V, VERTEX_TOL * max(1.0, float(np.max(np.abs(V)))))

    def affine_image(self, T):
        if T.dim != self.dim:
            raise DimensionMismatch("map and body dimensions differ")
        Li = np.linalg.inv(T.linear)
        A2 = self.A @ Li
        b2 = self.b + A2 @ T.shift
        return HPolytope(A2, b2, _vertices=T(self.vertices))

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        ok = np.all(_points(x) @ self.A.T <= self.b + tol * self.scale_hint, axis=1)
        return ok if x.ndim == 2 else bool(ok[0])

    def to_dict(self):
        return {"type": "hpolytope", "A": self.A.tolist(), "b": self.b.tolist()}

    def __repr__(self):
        return f"HPolytope(n={self.dim}, facets={len(self.b)})"


class Ellipsoid(ConvexBody):
    """``{x : (x - center)^T shape (x - center) <= 1}`` with ``shape`` SPD."""

    kind = "ellipsoid"

    def __init__(self, center, shape):
        c = np.asarray(center, dtype=float).ravel()
        M = np.atleast_2d(np.asarray(shape, dtype=float))
        n = len(c)
        if M.shape != (n, n):
            raise DimensionMismatch("shape matrix does not match center")
        if not np.allclose(M, M.T, rtol=1e-10, atol=1e-12 * np.max(np.abs(M))):
            raise ValueError("shape matrix must be symmetric")
        M = 0.5 * (M + M.T)
        w, U = np.linalg.eigh(M)
        if w[0] <= 0 or not np.all(np.isfinite(w)):
            raise DegenerateBody("shape matrix must be positive definite")
        self.center = _readonly(c)
        self.shape = _readonly(M)
        self._eig = (w, U)
        self.axes = _readonly((U * w ** -0.5) @ U.T)  # M^{-1/2}
        self.inv_shape = _readonly((U / w) @ U.T)

    @classmethod
    def from_axes(cls, center, axes):
        """Ellipsoid ``center + axes @ B_2^n`` for an invertible ``axes``."""
        R = np.atleast_2d(np.asarray(axes, dtype=float))
        Ri = np.linalg.inv(R)
        return cls(center, Ri.T @ Ri)

    @property
    def dim(self):
        return len(self.center)

    @property
    def scale_hint(self):
        return max(1.0, float(np.max(np.abs(self.center)) + self._eig[0][0] ** -0.5))

    @property
    def volume(self):
        return ball_volume(self.dim) / math.sqrt(float(np.prod(self._eig[0])))

    def support(self, u):
        u = np.asarray(u, dtype=float)
        U = _points(u)
        vals = U @ self.center + np.sqrt(np.einsum("ij,jk,ik->i", U, self.inv_shape, U))
        return vals if u.ndim == 2 else float(vals[0])

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        d = _points(x) - self.center
        ok = np.einsum("ij,jk,ik->i", d, self.shape, d) <= 1.0 + tol
        return ok if x.ndim == 2 else bool(ok[0])

    def gauge(self, x):
        c, M = self.center, self.shape
        a = float(c @ M @ c) - 1.0
        if a >= -INTERIOR_MARGIN:
            raise PointNotInterior("origin is not interior; gauge undefined")
        x = np.asarray(x, dtype=float)
        X = _points(x)
        # (x - r c)^T M (x - r c) = r^2, solved for the positive root
        bq = -2.0 * (X @ (M @ c))
        cq = np.einsum("ij,jk,ik->i", X, M, X)
        disc = np.sqrt(np.maximum(bq * bq - 4.0 * a * cq, 0.0))
        r = (-bq - disc) / (2.0 * a)
        r = np.maximum(r, 0.0)
        return r if x.ndim == 2 else float(r[0])

    def affine_image(self, T):
        if T.dim != self.dim:
            raise DimensionMismatch("map and body dimensions differ")
        Li = np.linalg.inv(T.linear)
        return Ellipsoid(T(self.center), Li.T @ self.shape @ Li)

    def is_symmetric(self, tol=1e-9):
        return bool(np.linalg.norm(self.center) <= tol * self.scale_hint)

    def boundary_points(self, count=None):
        n = self.dim
        count = ELLIPSOID_DIRECTIONS_PER_DIM * n if count is None else count
        return self.center + sphere_directions(n, count) @ self.axes.T

    def to_vpolytope(self, count=None):
        """Inscribed polytope through ``count`` boundary points (64*n by default)."""
        return VPolytope(self.boundary_points(count))

    def to_dict(self):
        return {"type": "ellipsoid", "center": self.center.tolist(), "shape": self.shape.tolist()}

    def __repr__(self):
        return f"Ellipsoid(n={self.dim})"


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def cube(n, r=1.0):
    """``[-r, r]^n`` as an H-polytope."""
    I = np.eye(n)
    return HPolytope(np.vstack([I, -I]), np.full(2 * n, float(r)))


def cross_polytope(n, r=1.0):
    """``r B_1^n`` as a V-polytope."""
    I = np.eye(n)
    return VPolytope(r * np.vstack([I, -I]))


def simplex(n, centered=False):
    """``conv{0, e_1, ..., e_n}``, optionally translated to its barycenter."""
    V = np.vstack([np.zeros(n), np.eye(n)])
    if centered:
        V = V - V.mean(axis=0)
    return VPolytope(V)


def ball(n, r=1.0, center=None):
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    return Ellipsoid(c, np.eye(n) / r**2)


# ---------------------------------------------------------------------------
# body algebra
# ---------------------------------------------------------------------------


def _as_vpolytope(K):
    if isinstance(K, VPolytope):
        return K
    if isinstance(K, HPolytope):
        return VPolytope(K.vertices)
    if isinstance(K, Ellipsoid):
        return K.to_vpolytope()
    if hasattr(K, "to_vpolytope"):
        return K.to_vpolytope()
    raise TypeError(f"cannot convert {type(K).__name__} to a V-polytope")


def _point_set(K):
    """Vertices of a body, or a raw (possibly degenerate) point array."""
    if isinstance(K, ConvexBody) or hasattr(K, "to_vpolytope"):
        return _as_vpolytope(K).vertices
    return _points(K)


def polar(K, x=None):
    """Polar body ``(K - x)^o = {y : <z - x, y> <= 1 for all z in K}``.

    V-polytopes dualize to H-polytopes and vice versa; ellipsoids stay
    ellipsoids. ``x`` defaults to the origin and must be interior.
    """
    n = K.dim
    x = np.zeros(n) if x is None else np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise DimensionMismatch("center does not match body dimension")
    if isinstance(K, Ellipsoid):
        d = K.center - x
        if float(d @ K.shape @ d) >= 1.0 - INTERIOR_MARGIN:
            raise PointNotInterior("polar center is not interior to the ellipsoid")
        P = K.inv_shape - np.outer(d, d)
        Pd = np.linalg.solve(P, d)
        return Ellipsoid(-Pd, P / (1.0 + float(d @ Pd)))
    if isinstance(K, HPolytope):
        slack = K.b - K.A @ x
        if np.min(slack / np.linalg.norm(K.A, axis=1)) <= INTERIOR_MARGIN:
            raise PointNotInterior("polar center is not interior to the polytope")
        return VPolytope(K.A / slack[:, None])
    if isinstance(K, VPolytope):
        if K.interior_margin(x) <= INTERIOR_MARGIN:
            raise PointNotInterior("polar center is not interior to the polytope")
        W = K.vertices - x
        A, b = K.facets
        # facets of K - x become the vertices of the polar
        dual_vertices = A / (b - A @ x)[:, None]
        return HPolytope(W, np.ones(len(W)), _vertices=dual_vertices)
    if hasattr(K, "to_vpolytope"):
        return polar(K.to_vpolytope(), x)
    raise TypeError(f"unsupported body type {type(K).__name__}")


def minkowski_sum(K, L):
    """``K + L`` as a V-polytope.

    Either argument may be a body or a raw point array (segments and single
    points are allowed as summands).
    """
    P, Q = _point_set(K), _point_set(L)
    if P.shape[1] != Q.shape[1]:
        raise DimensionMismatch(f"dimensions differ: {P.shape[1]} vs {Q.shape[1]}")
    S = (P[:, None, :] + Q[None, :, :]).reshape(-1, P.shape[1])
    return VPolytope(S)


def difference_body(K):
    """``K - K = K + (-K)``; ellipsoids map to the doubled centered ellipsoid."""
    if isinstance(K, Ellipsoid):
        return Ellipsoid(np.zeros(K.dim), K.shape / 4.0)
    V = _point_set(K)
    return minkowski_sum(V, -V)


def convex_hull_union(K, L):
    """``conv(K u L)``; ellipsoids enter through their 64*n-point inscribed polytope."""
    P, Q = _point_set(K), _point_set(L)
    if P.shape[1] != Q.shape[1]:
        raise DimensionMismatch(f"dimensions differ: {P.shape[1]} vs {Q.shape[1]}")
    return VPolytope(np.vstack([P, Q]))


def affine_image(K, T):
    return K.affine_image(T)


def support(K, u):
    return K.support(u)


def contains(K, x, tol=1e-9):
    return K.contains(x, tol=tol)


def radial(K, theta):
    return K.radial(theta)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def body_to_dict(K):
    return K.to_dict()


def body_from_dict(d):
    kind = d["type"]
    if kind == "hpolytope":
        return HPolytope(d["A"], d["b"])
    if kind == "vpolytope":
        return VPolytope(d["vertices"])
    if kind == "ellipsoid":
        return Ellipsoid(d["center"], d["shape"])
    raise ValueError(f"unknown body type {kind!r}")


def dumps(K):
    return json.dumps(body_to_dict(K))


def loads(s):
    return body_from_dict(json.loads(s))
