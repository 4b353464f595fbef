"""Santaló points and volume products.

``s(K) = |K| |K^o|`` with the polar taken about a chosen interior point.
The Santaló point minimizes ``x -> |(K - x)^o|``; it is found by damped
Newton steps using the exact polar moments

``grad = (n + 1) int_P y dy`` and ``Hess = (n + 1)(n + 2) int_P y y^T dy``,
``P = (K - x)^o``, so the step is ``-(1/(n+2)) M_2^{-1} M_1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import (
    Ellipsoid,
    _Polytope,
    ball_volume,
    difference_body,
    polar,
)
from .errors import NoConvergence, PointNotInterior
from .integrals import polynomial_moments
from .randgeom import SampleConfig, exact_volume, isotropic_constant, mc_volume

DAMPING = 0.5
SANTALO_TOL = 1e-6
CENTERS = ("auto", "origin", "santalo", "barycenter")

__all__ = [
    "SantaloResult",
    "VolumeProductReport",
    "mahler_bound",
    "prop_3_1_check",
    "santalo_point",
    "santalo_solve",
    "thm_3_3_scan",
    "volume_product",
]


def mahler_bound(n):
    """``4^n / n!``, the conjectured minimum of ``s`` over symmetric bodies."""
    return 4.0**n / math.factorial(n)


def santalo_bound(n):
    """``s(B_2^n) = |B_2^n|^2``."""
    return ball_volume(n) ** 2


@dataclass
class SantaloResult:
    point: np.ndarray
    residual: float
    iterations: int
    polar_volumes: list = field(default_factory=list)
    local_min: bool = True


def _as_polytope(K):
    if isinstance(K, (_Polytope, Ellipsoid)):
        return K
    return K.to_vpolytope()


def _polar_moments(K, x):
    P = polar(K, x)
    vol, m1, m2 = polynomial_moments(P.simplices)
    return P, vol, m1, m2


def _polar_diameter(P):
    V = P.vertices
    return float(np.max(np.linalg.norm(V[:, None, :] - V[None, :, :], axis=-1))) if len(V) < 3000 else P.diameter_bound()


def santalo_solve(K, tol=SANTALO_TOL, max_iter=200, x0=None):
    """Santaló point with diagnostics (see :func:`santalo_point`)."""
    K = _as_polytope(K)
    n = K.dim
    if isinstance(K, Ellipsoid):
        return SantaloResult(K.center.copy(), 0.0, 0, [polar(K, K.center).volume])
    x = K.vertices.mean(axis=0) if x0 is None else np.asarray(x0, dtype=float)
    P, vol, m1, m2 = _polar_moments(K, x)
    history = [vol]
    diam = _polar_diameter(P)
    for it in range(max_iter):
        res = float(np.linalg.norm(m1 / vol))
        if res <= tol * diam:
            break
        step = -np.linalg.solve(m2, m1) / (n + 2)
        eta = DAMPING
        while True:
            cand = x + eta * step
            try:
                if K.interior_margin(cand) > 0:
                    Pc, vc, m1c, m2c = _polar_moments(K, cand)
                    if vc <= vol * (1 + 1e-14):
                        break
            except PointNotInterior:
                pass
            eta *= 0.5
            if eta < 1e-12:
                raise NoConvergence("Santaló iteration stalled", best=x, residual=res)
        x, P, vol, m1, m2 = cand, Pc, vc, m1c, m2c
        history.append(vol)
        diam = _polar_diameter(P)
    else:
        res = float(np.linalg.norm(m1 / vol))
        if res > tol * diam:
            raise NoConvergence("Santaló iteration hit max_iter", best=x, residual=res)
    res = float(np.linalg.norm(m1 / vol))
    return SantaloResult(x, res, it, history, _is_local_min(K, x, vol))


def _is_local_min(K, x, vol, rel=1e-3):
    """Probe ``x +- h e_i``: none may shrink the polar volume."""
    n = K.dim
    h = rel * K.diameter_bound()
    for i in range(n):
        for sgn in (1.0, -1.0):
            y = x.copy()
            y[i] += sgn * h
            try:
                if polar(K, y).volume < vol * (1 - 1e-12):
                    return False
            except PointNotInterior:
                continue
    return True


def santalo_point(K, tol=SANTALO_TOL, max_iter=200):
    """Interior point ``z`` minimizing ``|(K - z)^o|``.

    Stops once ``|bar((K - z)^o)| <= tol * diam((K - z)^o)``.

    Raises
    ------
    NoConvergence
        with the best iterate and its residual.
    """
    return santalo_solve(K, tol, max_iter).point


@dataclass
class VolumeProductReport:
    body_id: str
    n: int
    s: float
    s_ratio: float
    n_s_root: float
    center_used: str
    center: np.ndarray
    volume: float
    polar_volume: float
    stderr: float = 0.0
    mahler: float = float("nan")
    exact: bool = True

    @property
    def mahler_ok(self):
        return self.s >= self.mahler * (1 - 1e-9)

    @property
    def santalo_ok(self):
        return self.s_ratio <= 1 + 1e-9 + 3 * self.stderr / max(self.s, 1e-300)

    def to_dict(self):
        return {
            "body_id": self.body_id,
            "n": self.n,
            "s": self.s,
            "s_ratio": self.s_ratio,
            "n_s_root": self.n_s_root,
            "center_used": self.center_used,
            "center": np.asarray(self.center).tolist(),
            "volume": self.volume,
            "polar_volume": self.polar_volume,
            "stderr": self.stderr,
            "mahler": self.mahler,
            "exact": self.exact,
        }


def _center(K, center):
    n = K.dim
    if center == "auto":
        center = "origin" if K.is_symmetric() else "santalo"
    if center == "origin":
        return "origin", np.zeros(n)
    if center == "santalo":
        return "santalo", santalo_point(K)
    if center == "barycenter":
        if isinstance(K, Ellipsoid):
            return "barycenter", K.center.copy()
        vol, m1, _ = polynomial_moments(K.simplices)
        return "barycenter", m1 / vol
    raise ValueError(f"center must be one of {CENTERS}")


def volume_product(K, center="auto", body_id="K", method="exact", cfg=None):
    """``s(K) = |K| |(K - z)^o|`` about the chosen center.

    ``center='auto'`` uses the origin for symmetric bodies and the Santaló
    point otherwise. ``method='mc'`` estimates both volumes by Monte Carlo
    with ``cfg`` and reports a propagated standard error.

    Raises
    ------
    PointNotInterior
        if the chosen center is not interior.
    """
    K = _as_polytope(K)
    n = K.dim
    name, z = _center(K, center)
    P = polar(K, z)
    if method == "exact":
        vK, vP, se = exact_volume(K), exact_volume(P), 0.0
        exact = True
    else:
        cfg = cfg or SampleConfig(seed=0, n_samples=400_000)
        vK, sK = mc_volume(K, cfg)
        vP, sP = mc_volume(P, cfg.replace(seed=cfg.seed + 1))
        se = math.hypot(sK * vP, sP * vK)
        exact = False
    s = vK * vP
    return VolumeProductReport(
        body_id=body_id,
        n=n,
        s=s,
        s_ratio=s / santalo_bound(n),
        n_s_root=n * s ** (1.0 / n),
        center_used=name,
        center=z,
        volume=vK,
        polar_volume=vP,
        stderr=se,
        mahler=mahler_bound(n),
        exact=exact,
    )


def prop_3_1_check(K, body_id="K", c1_floor=0.5):
    """``4 |K|^{1/n} |nK^o|^{1/n} >= |K-K|^{1/n} |n(K-K)^o|^{1/n} >= c_1 / L_K``.

    Polars are about the origin, which must be interior. The first
    inequality is exact; the measured ``c_1 = middle * L_K`` is compared
    with the desk floor ``c1_floor``.
    """
    K = _as_polytope(K)
    n = K.dim
    vK = exact_volume(K)
    vKp = exact_volume(polar(K))
    D = difference_body(K)
    vD, vDp = exact_volume(D), exact_volume(polar(D))
    left = 4 * n * (vK * vKp) ** (1.0 / n)
    middle = n * (vD * vDp) ** (1.0 / n)
    L = isotropic_constant(K)
    c1 = middle * L
    first_ok = left >= middle * (1 - 1e-9)
    return {
        "body_id": body_id,
        "n": n,
        "left": left,
        "middle": middle,
        "L": L,
        "c1_measured": c1,
        "first_ok": bool(first_ok),
        "c1_ok": bool(c1 >= c1_floor),
        "pass": bool(first_ok and c1 >= c1_floor),
    }


def thm_3_3_scan(bodies, eps=0.5, floor=8.0, seed=0):
    """Perturbation pipeline and volume-product floor over labeled bodies.

    ``bodies`` is a list of ``(body_id, K)``. For each body the perturbation
    step returns ``T`` and ``x``; the scan records the measured sandwich
    factors (compared with ``3/2``), checks ``K <= (3/4)(T - T)`` (the
    support form of ``K^o >= (4/3)(T - T)^o``) for symmetric bodies, and
    the value ``n s(K)^{1/n}`` about the automatic center. The floor is
    asserted on symmetric bodies only.
    """
    from .laplace import klartag_body

    rows = []
    for body_id, K in bodies:
        n = K.dim
        pr = klartag_body(K, eps=eps, seed=seed)
        sym = K.is_symmetric()
        T = pr.T
        sandwich_ok = pr.sandwich_inner <= 1.5 * (1 + 1e-9) and pr.sandwich_outer <= 1.5 * (1 + 1e-9)
        polar_ok = True
        if sym:
            TT = difference_body(T)
            pts = K.vertices if isinstance(K, _Polytope) else K.to_vpolytope().vertices
            polar_ok = bool(np.max(TT.gauge(pts)) <= 0.75 * (1 + 1e-9))
        vp = volume_product(K, body_id=body_id)
        rows.append(
            {
                "body_id": body_id,
                "n": n,
                "symmetric": sym,
                "n_s_root": vp.n_s_root,
                "s_ratio": vp.s_ratio,
                "L_T": pr.L_T,
                "sandwich_inner": pr.sandwich_inner,
                "sandwich_outer": pr.sandwich_outer,
                "sandwich_ok": bool(sandwich_ok),
                "polar_ok": polar_ok,
                "floor_ok": (vp.n_s_root >= floor) if sym else True,
            }
        )
    sym_roots = [r["n_s_root"] for r in rows if r["symmetric"]]
    return {
        "rows": rows,
        "min_n_s_root_symmetric": min(sym_roots) if sym_roots else float("nan"),
        "floor": floor,
        "pass": all(r["floor_ok"] and r["sandwich_ok"] and r["polar_ok"] for r in rows),
    }

