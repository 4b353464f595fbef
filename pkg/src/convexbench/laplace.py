"""Logarithmic Laplace transform and the perturbation search.

For the uniform measure on ``K`` the normalized transform is
``Lambda(xi) = log( int_K e^{<xi,x>} dx / |K| )``. Its gradient is the
barycenter and its Hessian the covariance of the tilted measure
``mu_xi``, both evaluated exactly on polytopes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from .bodies import (
    Ellipsoid,
    HPolytope,
    _Polytope,
    difference_body,
    polar,
)
from .errors import BudgetExhaustedWithoutCertificate, NonPolytope
from .integrals import exp_moments, polynomial_moments
from .randgeom import SampleConfig, isotropic_constant, sample_uniform

DEFAULT_EPS = 0.5
FD_STEP = 1e-4

__all__ = [
    "LaplaceEval",
    "PerturbationResult",
    "SearchResult",
    "klartag_body",
    "klartag_search",
    "log_laplace",
    "log_laplace_batch",
]


@dataclass
class LaplaceEval:
    """``Lambda(xi)`` with gradient and Hessian; ``log_integral`` is ``log int_K e^{<xi,x>}``."""

    xi: np.ndarray
    value: float
    grad: np.ndarray
    hess: np.ndarray
    log_integral: float

    @property
    def logdet_cov(self):
        return float(np.linalg.slogdet(self.hess)[1])


# ---------------------------------------------------------------------------
# ellipsoids by Gauss-Jacobi quadrature
# ---------------------------------------------------------------------------


def _ball_exp_moments(n, a):
    """For ``y`` uniform on ``B_2^n`` tilted by ``e^{a y_1}``, ``a >= 0``.

    Returns ``(log E e^{a y_1}, E y_1, Var y_1, E y_j^2 for j > 1)``. The
    marginal of ``y_1`` has density proportional to ``(1 - s^2)^{(n-1)/2}``,
    and the slice at height ``s`` is a ball of radius ``sqrt(1 - s^2)``.
    """
    alpha = 0.5 * (n - 1)
    deg = int(min(400, 48 + 3 * a))
    s, w = roots_jacobi(deg, alpha, alpha)
    # factor out e^{a} for stability
    e = w * np.exp(a * (s - 1.0))
    Z = e.sum()
    m1 = (e * s).sum() / Z
    m2 = (e * s * s).sum() / Z
    perp = (e * (1.0 - s * s)).sum() / Z / (n + 1)
    log_norm = math.log(w.sum())
    return a + math.log(Z) - log_norm, m1, m2 - m1 * m1, perp


def _ellipsoid_eval(E, xi):
    n = E.dim
    R = E.axes  # E = c + R B
    u = R.T @ xi
    a = float(np.linalg.norm(u))
    lmgf, m1, var_par, var_perp = _ball_exp_moments(n, a)
    if a > 0:
        e = u / a
    else:
        e = np.eye(n)[0]
    mean_y = m1 * e
    cov_y = var_perp * (np.eye(n) - np.outer(e, e)) + var_par * np.outer(e, e)
    value = float(xi @ E.center) + lmgf
    grad = E.center + R @ mean_y
    hess = R @ cov_y @ R.T
    return value, grad, 0.5 * (hess + hess.T), value + math.log(E.volume)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def log_laplace_batch(K, xis):
    """Vectorized :func:`log_laplace` over rows of ``xis`` for polytopes.

    Returns ``(value, grad, hess)`` with leading axis ``q``.
    """
    if not isinstance(K, _Polytope):
        raise NonPolytope("batched evaluation needs a polytope")
    X = np.atleast_2d(np.asarray(xis, dtype=float))
    ls, I0, I1, I2 = exp_moments(K.simplices, X)
    vol = K.volume
    grad = I1 / I0[:, None]
    hess = I2 / I0[:, None, None] - np.einsum("qi,qj->qij", grad, grad)
    hess = 0.5 * (hess + np.swapaxes(hess, 1, 2))
    value = ls + np.log(I0) - math.log(vol)
    return value, grad, hess


def log_laplace(K, xi):
    """Exact ``Lambda_K(xi)`` with gradient (tilted barycenter) and Hessian (tilted covariance).

    Polytopes are integrated exactly over a triangulation; ellipsoids use
    one-dimensional Gauss-Jacobi quadrature (relative error below 1e-10 for
    moderate ``|xi|``).

    Raises
    ------
    NonPolytope
        for bodies that are neither polytopes nor ellipsoids.
    """
    xi = np.asarray(xi, dtype=float)
    if isinstance(K, Ellipsoid):
        value, grad, hess, logint = _ellipsoid_eval(K, xi)
        return LaplaceEval(xi.copy(), value, grad, hess, logint)
    if not isinstance(K, _Polytope):
        raise NonPolytope(f"log_laplace needs a polytope or ellipsoid, got {type(K).__name__}")
    if not np.any(xi):
        vol, m1, m2 = polynomial_moments(K.simplices)
        b = m1 / vol
        cov = m2 / vol - np.outer(b, b)
        return LaplaceEval(xi.copy(), 0.0, b, 0.5 * (cov + cov.T), math.log(vol))
    value, grad, hess = log_laplace_batch(K, xi[None, :])
    v = float(value[0])
    return LaplaceEval(xi.copy(), v, grad[0], hess[0], v + math.log(K.volume))


# ---------------------------------------------------------------------------
# perturbation search
# ---------------------------------------------------------------------------


@dataclass
class SearchResult:
    """Outcome of :func:`klartag_search`.

    ``xi`` is expressed for the body as given; ``xi_normalized`` for the
    centered copy scaled to ``|K - K| = 1`` (``xi = scale * xi_normalized``).
    """

    xi: np.ndarray
    xi_normalized: np.ndarray
    detcov: float
    target: float
    certified: bool
    evaluations: int
    scale: float
    eps: float
    start_index: int = -1
    history: list = field(default_factory=list)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.xi, dtype=dtype)

    def to_dict(self):
        return {
            "xi": self.xi.tolist(),
            "detcov": self.detcov,
            "target": self.target,
            "certified": self.certified,
            "evaluations": self.evaluations,
            "eps": self.eps,
        }


def _normalized_setup(K, eps):
    """Centered copy of ``K`` scaled so ``|K - K| = 1`` and the polar region ``eps n (K-K)^o``."""
    if not isinstance(K, _Polytope):
        raise NonPolytope("the perturbation search needs a polytope")
    n = K.dim
    vol, m1, _ = polynomial_moments(K.simplices)
    bar = m1 / vol
    D = difference_body(K.vertices - bar)
    lam = D.volume ** (-1.0 / n)
    Kn = K.translate(-bar).scale(lam)
    Dn = D.scale(lam)
    # eps n (K - K)^o = {xi : <xi, v> <= eps n for v in K - K}
    P = HPolytope(Dn.vertices, np.full(len(Dn.vertices), eps * n), _vertices=polar(Dn).vertices * eps * n)
    return Kn, P, bar, lam


def _project(P, xi):
    """Pull ``xi`` radially back into the star-shaped (convex, 0-centered) region ``P``."""
    g = float(np.max(P.A @ xi / P.b))
    if g > 1.0:
        xi = xi / g * (1.0 - 1e-9)
    return xi


class _Objective:
    """Counts evaluations of ``log det Cov(mu_xi)`` against the budget."""

    def __init__(self, K, budget):
        self.K = K
        self.budget = budget
        self.count = 0
        self.best = (np.inf, None)

    def __call__(self, X):
        X = np.atleast_2d(X)
        if self.count + len(X) > self.budget:
            X = X[: max(0, self.budget - self.count)]
        if len(X) == 0:
            return np.empty(0)
        self.count += len(X)
        _, _, H = log_laplace_batch(self.K, X)
        sign, ld = np.linalg.slogdet(H)
        ld = np.where(sign > 0, ld, np.inf)
        i = int(np.argmin(ld))
        if ld[i] < self.best[0]:
            self.best = (float(ld[i]), X[i].copy())
        return ld

    @property
    def exhausted(self):
        return self.count >= self.budget


def _descend(obj, P, xi, log_target, max_steps=20):
    """Projected descent on ``log det Cov`` with finite-difference gradients."""
    n = len(xi)
    f = obj(xi[None, :])
    if len(f) == 0:
        return xi, np.inf
    f = float(f[0])
    step = 0.5 * float(np.min(P.b / np.linalg.norm(P.A, axis=1)))
    E = np.eye(n) * FD_STEP
    for _ in range(max_steps):
        if f <= log_target or obj.exhausted:
            break
        vals = obj(np.vstack([xi + E, xi - E]))
        if len(vals) < 2 * n:
            break
        g = (vals[:n] - vals[n:]) / (2 * FD_STEP)
        gn = float(np.linalg.norm(g))
        if not np.isfinite(gn) or gn == 0:
            break
        improved = False
        while step > 1e-6 and not obj.exhausted:
            cand = _project(P, xi - step * g / gn)
            fc = obj(cand[None, :])
            if len(fc) and fc[0] < f:
                xi, f = cand, float(fc[0])
                step *= 1.5
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return xi, f


def klartag_search(K, eps=DEFAULT_EPS, budget=200, seed=0, starts=8, strict=False):
    """Find ``xi`` in ``eps n (K - K)^o`` with a small tilted covariance determinant.

    The body is centered and scaled to ``|K - K| = 1``. The averaging
    argument over the polar region guarantees some ``xi`` with
    ``det Cov(mu_xi) <= 1 / |eps n (K - K)^o|``; that value is the target.
    Starts are tried in a fixed order (the origin first, then seeded uniform
    points of the region) with a short projected descent from each; any
    remaining budget is spent on uniform samples of the region.

    Parameters
    ----------
    K : polytope
    eps : float in (0, 1)
    budget : int
        maximum number of determinant evaluations.
    seed : int
    starts : int
        number of descent starts, including the origin.
    strict : bool
        raise :class:`BudgetExhaustedWithoutCertificate` instead of returning
        an uncertified result.

    Returns
    -------
    SearchResult
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    Kn, P, _, lam = _normalized_setup(K, eps)
    log_target = -math.log(P.volume)
    obj = _Objective(Kn, budget)
    cfg = SampleConfig(seed=seed, n_samples=max(starts - 1, 1) + budget, method="direct")
    pool = sample_uniform(P, cfg)
    history = []
    found = None
    start_pts = [np.zeros(K.dim)] + [pool[i] for i in range(starts - 1)]
    for i, x0 in enumerate(start_pts):
        if obj.exhausted:
            break
        xi, f = _descend(obj, P, x0, log_target)
        history.append(f)
        if f <= log_target:
            found = (xi, f, i)
            break
    if found is None:
        rest = pool[starts - 1 :]
        j = 0
        while not obj.exhausted and j < len(rest):
            batch = rest[j : j + 32]
            vals = obj(batch)
            j += len(batch)
            k = int(np.argmin(vals)) if len(vals) else -1
            if k >= 0 and vals[k] <= log_target:
                found = (batch[k], float(vals[k]), len(start_pts) + j - len(batch) + k)
                break
    if found is None:
        f, xi = obj.best
        certified = False
        idx = -1
    else:
        xi, f, idx = found
        certified = True
    if xi is None:
        xi, f = np.zeros(K.dim), np.inf
    res = SearchResult(
        xi=lam * np.asarray(xi),
        xi_normalized=np.asarray(xi),
        detcov=math.exp(f) if np.isfinite(f) else np.inf,
        target=math.exp(log_target),
        certified=certified,
        evaluations=obj.count,
        scale=lam,
        eps=eps,
        start_index=idx,
        history=history,
    )
    if strict and not certified:
        raise BudgetExhaustedWithoutCertificate(
            "evaluation budget spent without meeting the determinant target",
            best_xi=res.xi,
            best_value=res.detcov,
            target=res.target,
        )
    return res


@dataclass
class PerturbationResult:
    """A body ``T`` with ``T / m <= K + x <= m T``, ``m = e^{2 eps}``, and small ``L_T``."""

    xi_star: np.ndarray
    T: object
    x: np.ndarray
    L_T: float
    eps: float
    detcov: float
    target: float
    certified: bool
    sandwich_inner: float
    sandwich_outer: float
    search: SearchResult | None = None

    @property
    def sandwich_ok(self):
        bound = 1.02 * math.exp(2 * self.eps)
        return self.sandwich_inner <= bound and self.sandwich_outer <= bound

    def to_dict(self):
        return {
            "xi_star": np.asarray(self.xi_star).tolist(),
            "x": np.asarray(self.x).tolist(),
            "L_T": self.L_T,
            "eps": self.eps,
            "detcov": self.detcov,
            "target": self.target,
            "certified": self.certified,
            "sandwich_inner": self.sandwich_inner,
            "sandwich_outer": self.sandwich_outer,
        }


def sandwich_factors(T, C, count=200, seed=0):
    """Smallest ``a, b`` with ``T / a <= C <= b T`` along ``count`` random directions.

    Both bodies must contain the origin in their interior; ``a = max rho_T / rho_C``
    and ``b = max rho_C / rho_T``.
    """
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((count, T.dim))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    rT = 1.0 / T.gauge(U)
    rC = 1.0 / C.gauge(U)
    return float(np.max(rT / rC)), float(np.max(rC / rT))


def klartag_body(K, eps=DEFAULT_EPS, cfg=None, budget=200, seed=None):
    """Body ``T`` close to a translate of ``K`` with bounded isotropic constant.

    Runs :func:`klartag_search`, tilts the centered body by the returned
    ``xi`` and feeds the density to the Ball-body construction with
    ``m = e^{2 eps}``. The sandwich is measured on 200 random directions.
    """
    from .ballbodies import ExpMeasure, body_from_function

    if seed is None:
        seed = cfg.seed if cfg is not None else 0
    n = K.dim
    vol, m1, _ = polynomial_moments(K.simplices)
    bar = m1 / vol
    K0 = K.translate(-bar)
    res = klartag_search(K0, eps=eps, budget=budget, seed=seed)
    m = math.exp(2 * eps)
    fb = body_from_function(ExpMeasure(K0, res.xi), m)
    T, x0 = fb.T, fb.x0
    inner, outer = fb.inner, fb.outer
    return PerturbationResult(
        xi_star=res.xi,
        T=T,
        x=-(bar + x0),
        L_T=isotropic_constant(T),
        eps=eps,
        detcov=res.detcov,
        target=res.target,
        certified=res.certified,
        sandwich_inner=inner,
        sandwich_outer=outer,
        search=res,
    )


def measure_bounds(K, xi):
    """``(max_K <xi,x>, log int_K e^{<xi,x>} - log|K|)`` for the range and Jensen checks."""
    ev = log_laplace(K, xi)
    return float(K.support(xi)), ev.value

