"""Volumes, uniform sampling, moments and isotropic position.

All randomness flows from ``SampleConfig.seed``. Work is split into chunks of
``chunk_size`` draws, chunk ``k`` using the generator seeded by
``SeedSequence(seed, spawn_key=(k,))``, and chunk results are reduced in
index order, so the output does not depend on ``workers``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .bodies import (
    AffineMap,
    ConvexBody,
    Ellipsoid,
    VPolytope,
    _Polytope,
    ball_volume,
    sphere_directions,
)
from .errors import DegenerateBody, TooHighDimensional
from .integrals import polynomial_moments

MAX_EXACT_DIM = 8
METHODS = ("rejection", "hit_and_run", "direct")

__all__ = [
    "MomentSummary",
    "SampleConfig",
    "exact_volume",
    "isotropic_constant",
    "isotropic_transform",
    "l_mu",
    "mc_volume",
    "moments",
    "sample_uniform",
]


@dataclass(frozen=True)
class SampleConfig:
    """Reproducible sampling settings.

    ``burn_in`` and ``thinning`` default to ``10 n^2`` and ``n`` hit-and-run
    steps when left as ``None``.
    """

    seed: int = 0
    n_samples: int = 10_000
    burn_in: int | None = None
    method: str = "rejection"
    thinning: int | None = None
    chunk_size: int = 8192
    workers: int = 1

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")

    def replace(self, **kw):
        d = asdict(self)
        d.update(kw)
        return SampleConfig(**d)

    def to_dict(self):
        return asdict(self)


@dataclass
class MomentSummary:
    volume: float
    barycenter: np.ndarray
    covariance: np.ndarray
    iq: dict = field(default_factory=dict)
    isotropic_constant: float = float("nan")
    exact: bool = True

    def to_dict(self):
        return {
            "volume": self.volume,
            "barycenter": np.asarray(self.barycenter).tolist(),
            "covariance": np.asarray(self.covariance).tolist(),
            "iq": {str(q): v for q, v in self.iq.items()},
            "isotropic_constant": self.isotropic_constant,
            "exact": self.exact,
        }


# ---------------------------------------------------------------------------
# chunked determinism
# ---------------------------------------------------------------------------


def _chunk_rng(seed, k):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(k,)))


def _run_chunks(cfg, total, fn):
    """Call ``fn(rng, k, size)`` per chunk and return the results in chunk order."""
    sizes = [cfg.chunk_size] * (total // cfg.chunk_size)
    if total % cfg.chunk_size:
        sizes.append(total % cfg.chunk_size)
    jobs = [(k, s) for k, s in enumerate(sizes)]

    def run(job):
        k, s = job
        return fn(_chunk_rng(cfg.seed, k), k, s)

    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            return list(ex.map(run, jobs))
    return [run(j) for j in jobs]


# ---------------------------------------------------------------------------
# geometry helpers
# ---------------------------------------------------------------------------


def _check_body(K):
    if not isinstance(K, ConvexBody):
        K = VPolytope(np.asarray(K, dtype=float))
    lo, hi = K.bounding_box()
    w = hi - lo
    if not np.all(np.isfinite(w)) or np.min(w) <= 1e-12 * max(1.0, float(np.max(np.abs(w)))):
        raise DegenerateBody("body has an empty interior")
    return K


def interior_point(K):
    """A point well inside ``K`` (Chebyshev center, or center for ellipsoids)."""
    if isinstance(K, Ellipsoid):
        return K.center.copy()
    if isinstance(K, _Polytope):
        return K.vertices.mean(axis=0)
    if hasattr(K, "interior_point"):
        return np.asarray(K.interior_point(), dtype=float)
    lo, hi = K.bounding_box()
    return 0.5 * (lo + hi)


def _chord(K, x, d):
    """Parameters ``(t0, t1)`` with ``x + t d`` in ``K`` exactly for ``t0 <= t <= t1``."""
    if isinstance(K, _Polytope):
        A, b = K.facets
        ad = A @ d
        slack = b - A @ x
        with np.errstate(divide="ignore", invalid="ignore"):
            r = slack / ad
        t1 = np.min(r[ad > 0], initial=np.inf)
        t0 = np.max(r[ad < 0], initial=-np.inf)
        return t0, t1
    if isinstance(K, Ellipsoid):
        y = x - K.center
        M = K.shape
        a = d @ M @ d
        bq = d @ M @ y
        c = y @ M @ y - 1.0
        disc = math.sqrt(max(bq * bq - a * c, 0.0))
        return (-bq - disc) / a, (-bq + disc) / a
    return _chord_bisect(K, x, d)


def _chord_bisect(K, x, d, iters=50):
    R = K.diameter_bound()
    out = []
    for sgn in (1.0, -1.0):
        lo, hi = 0.0, R / np.linalg.norm(d)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if K.contains(x + sgn * mid * d, tol=0.0):
                lo = mid
            else:
                hi = mid
        out.append(sgn * lo)
    return out[1], out[0]


def _ball_chord(c, r, x, d):
    y = x - c
    bq = d @ y
    cc = y @ y - r * r
    disc = math.sqrt(max(bq * bq - cc, 0.0))
    return -bq - disc, -bq + disc


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------


def _direct_chunk(K, rng, size):
    n = K.dim
    if isinstance(K, Ellipsoid):
        g = rng.standard_normal((size, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = rng.random(size) ** (1.0 / n)
        return K.center + (g * r[:, None]) @ K.axes.T
    S = K.simplices
    w = K.simplex_volumes
    idx = rng.choice(len(S), size=size, p=w / w.sum())
    lam = rng.dirichlet(np.ones(n + 1), size=size)
    return np.einsum("sk,skn->sn", lam, S[idx])


def _rejection_chunk(K, rng, size):
    lo, hi = K.bounding_box()
    out = []
    got = 0
    while got < size:
        m = max(64, 2 * (size - got))
        X = lo + (hi - lo) * rng.random((m, K.dim))
        X = X[np.atleast_1d(K.contains(X, tol=0.0))]
        out.append(X)
        got += len(X)
    return np.vstack(out)[:size]


def _hit_and_run_chain(K, rng, size, x0, burn_in, thinning, ball=None):
    """``size`` thinned states of a hit-and-run chain on ``K`` (optionally cut by a ball)."""
    n = K.dim
    x = np.array(x0, dtype=float)
    steps = burn_in + size * thinning
    D = rng.standard_normal((steps, n))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    U = rng.random(steps)
    out = np.empty((size, n))
    j = 0
    for s in range(steps):
        d = D[s]
        t0, t1 = _chord(K, x, d)
        if ball is not None:
            b0, b1 = _ball_chord(ball[0], ball[1], x, d)
            t0, t1 = max(t0, b0), min(t1, b1)
        if t1 > t0:
            x = x + (t0 + (t1 - t0) * U[s]) * d
        if s >= burn_in and (s - burn_in) % thinning == thinning - 1:
            out[j] = x
            j += 1
    return out


def _defaults(cfg, n):
    burn = 10 * n * n if cfg.burn_in is None else cfg.burn_in
    thin = n if cfg.thinning is None else cfg.thinning
    return burn, max(1, thin)


def sample_uniform(K, cfg):
    """``cfg.n_samples`` points distributed uniformly on ``K``.

    ``method="direct"`` draws exactly from a triangulation (polytopes) or by
    radial scaling (ellipsoids); ``"rejection"`` uses the bounding box;
    ``"hit_and_run"`` runs one independent chain per chunk from an interior
    point, with burn-in and thinning.
    """
    K = _check_body(K)
    method = cfg.method
    if method == "direct" and not isinstance(K, (Ellipsoid, _Polytope)):
        method = "rejection"
    if method == "direct":
        fn = lambda rng, k, s: _direct_chunk(K, rng, s)  # noqa: E731
    elif method == "rejection":
        fn = lambda rng, k, s: _rejection_chunk(K, rng, s)  # noqa: E731
    else:
        burn, thin = _defaults(cfg, K.dim)
        x0 = interior_point(K)
        fn = lambda rng, k, s: _hit_and_run_chain(K, rng, s, x0, burn, thin)  # noqa: E731
    return np.vstack(_run_chunks(cfg, cfg.n_samples, fn))


# ---------------------------------------------------------------------------
# volume
# ---------------------------------------------------------------------------


def exact_volume(K):
    """Volume by triangulation (polytopes) or closed form (ellipsoids)."""
    if isinstance(K, Ellipsoid):
        return K.volume
    if isinstance(K, _Polytope):
        if K.dim > MAX_EXACT_DIM:
            raise TooHighDimensional(f"exact volume limited to n <= {MAX_EXACT_DIM}; use mc_volume")
        return K.volume
    if hasattr(K, "to_vpolytope"):
        return exact_volume(K.to_vpolytope())
    raise TypeError(f"no exact volume for {type(K).__name__}")


def _inradius_about(K, c):
    if isinstance(K, _Polytope):
        A, b = K.facets
        return float(np.min(b - A @ c))
    if isinstance(K, Ellipsoid):
        w = K._eig[0]
        return float(w[-1] ** -0.5 - np.linalg.norm(c - K.center))
    dirs = sphere_directions(K.dim, 200 * K.dim)
    return 0.5 * min(-(_chord_bisect(K, c, d)[0]) for d in dirs)


def _outradius_about(K, c):
    if isinstance(K, _Polytope):
        return float(np.max(np.linalg.norm(K.vertices - c, axis=1)))
    lo, hi = K.bounding_box()
    return float(np.linalg.norm(np.maximum(np.abs(hi - c), np.abs(lo - c))))


def mc_volume(K, cfg, chains=10):
    """Seeded Monte Carlo volume with its standard error.

    For ``n <= 4`` points are drawn uniformly in the bounding box. From
    ``n = 5`` the volume is a telescoping product over ``K`` intersected with
    balls of radii ``r_0 2^{i/n}``; each ratio is estimated by ``chains``
    independent hit-and-run chains and the error comes from the spread
    between chains.
    """
    K = _check_body(K)
    n = K.dim
    if n <= 4:
        lo, hi = K.bounding_box()
        box = float(np.prod(hi - lo))

        def count(rng, k, s):
            X = lo + (hi - lo) * rng.random((s, n))
            return int(np.count_nonzero(K.contains(X, tol=0.0)))

        hits = sum(_run_chunks(cfg, cfg.n_samples, count))
        p = hits / cfg.n_samples
        return box * p, box * math.sqrt(max(p * (1.0 - p), 0.0) / cfg.n_samples)
    return _telescoping_volume(K, cfg, chains)


def _telescoping_volume(K, cfg, chains):
    n = K.dim
    c = interior_point(K)
    r0 = _inradius_about(K, c)
    R = _outradius_about(K, c)
    if r0 <= 0:
        raise DegenerateBody("no interior ball found")
    m = max(1, math.ceil(n * math.log2(R / r0)))
    radii = r0 * 2.0 ** (np.arange(m + 1) / n)
    radii[-1] = max(radii[-1], R)
    burn, thin = _defaults(cfg, n)
    per_chain = max(2, cfg.n_samples // (m * chains))
    logs = np.zeros((m, chains))
    for i in range(1, m + 1):
        for j in range(chains):
            rng = _chunk_rng(cfg.seed, i * chains + j)
            X = _hit_and_run_chain(K, rng, per_chain, c, burn, thin, ball=(c, radii[i]))
            inside = np.count_nonzero(np.sum((X - c) ** 2, axis=1) <= radii[i - 1] ** 2)
            # ratio |K_{i-1}| / |K_i|, kept away from zero for the log
            logs[i - 1, j] = math.log(max(inside, 0.5) / per_chain)
    log_ratio = logs.mean(axis=1)
    est = ball_volume(n) * r0**n * math.exp(-log_ratio.sum())
    var = np.sum(logs.var(axis=1, ddof=1) / chains)
    return est, est * math.sqrt(var)


# ---------------------------------------------------------------------------
# moments and isotropic position
# ---------------------------------------------------------------------------


def _exact_moments(K):
    """``(volume, barycenter, covariance, E|x|^2)`` for polytopes and ellipsoids, else ``None``."""
    n = K.dim
    if isinstance(K, Ellipsoid):
        cov = K.inv_shape / (n + 2)
        c = K.center
        return K.volume, c.copy(), cov, float(np.trace(cov) + c @ c)
    if isinstance(K, _Polytope):
        vol, m1, m2 = polynomial_moments(K.simplices)
        b = m1 / vol
        cov = m2 / vol - np.outer(b, b)
        return vol, b, 0.5 * (cov + cov.T), float(np.trace(m2) / vol)
    return None


def _sample_cfg(K, cfg):
    if cfg is None:
        cfg = SampleConfig(n_samples=100_000, method="direct")
    return cfg


def moments(K, cfg=None, qs=(1, 2)):
    """Volume, barycenter, covariance, ``I_q(K, B_2^n)`` and ``L_K``.

    Degree-two moments are exact for polytopes and ellipsoids; other ``q``
    use ``cfg`` (default: 10^5 direct samples, seed 0).
    """
    K = _check_body(K)
    n = K.dim
    ex = _exact_moments(K)
    X = None
    if ex is None:
        cfg = _sample_cfg(K, cfg)
        X = sample_uniform(K, cfg)
        vol = mc_volume(K, cfg)[0]
        b = X.mean(axis=0)
        cov = np.cov(X, rowvar=False, bias=True).reshape(n, n)
        second = float(np.mean(np.sum(X * X, axis=1)))
        exact = False
    else:
        vol, b, cov, second = ex
        exact = True
    iq = {}
    for q in qs:
        if q == 2:
            mean_q = second
        else:
            if X is None:
                X = sample_uniform(K, _sample_cfg(K, cfg))
            mean_q = float(np.mean(np.linalg.norm(X, axis=1) ** q))
        # I_q = (|K|^{-q/n} E|x|^q)^{1/q}
        iq[q] = mean_q ** (1.0 / q) / vol ** (1.0 / n)
    L = _lk_from(vol, cov)
    return MomentSummary(vol, b, cov, iq, L, exact)


def _lk_from(vol, cov):
    n = cov.shape[0]
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise DegenerateBody("covariance is singular")
    return math.exp(logdet / (2 * n) - math.log(vol) / n)


def _inv_sqrt_psd(C):
    w, U = np.linalg.eigh(0.5 * (C + C.T))
    if w[0] <= 0:
        raise DegenerateBody("covariance is singular")
    return (U * w**-0.5) @ U.T


def isotropic_transform(K, cfg=None):
    """Affine map ``T`` with ``T(K)`` in isotropic position, and ``T(K)``.

    ``T`` translates the barycenter to 0, whitens by ``Cov^{-1/2}`` and then
    rescales to volume one.
    """
    K = _check_body(K)
    n = K.dim
    summ = moments(K, cfg, qs=())
    W = _inv_sqrt_psd(summ.covariance)
    white_vol = summ.volume * abs(np.linalg.det(W))
    s = white_vol ** (-1.0 / n)
    lin = s * W
    T = AffineMap(lin, -lin @ summ.barycenter)
    return T, K.affine_image(T)


def isotropic_constant(K, cfg=None):
    """``L_K = det(Cov K)^{1/(2n)} / |K|^{1/n}``; affine invariant."""
    K = _check_body(K)
    ex = _exact_moments(K)
    if ex is not None:
        return _lk_from(ex[0], ex[2])
    return moments(K, cfg, qs=()).isotropic_constant


def l_mu(m):
    """Isotropic constant of ``mu`` with density ``e^{<xi,x>}`` on ``K``.

    ``L_mu = (sup f / int f)^{1/n} det Cov(mu)^{1/(2n)}``, the sup taken
    exactly as ``h_K(xi)``.
    """
    from .laplace import log_laplace

    K, xi = m.body, np.asarray(m.xi, dtype=float)
    n = K.dim
    ev = log_laplace(K, xi)
    log_int = math.log(exact_volume(K)) + ev.value
    log_sup = float(K.support(xi))
    sign, logdet = np.linalg.slogdet(ev.hess)
    if sign <= 0:
        raise DegenerateBody("measure covariance is singular")
    return math.exp((log_sup - log_int) / n + logdet / (2 * n))
