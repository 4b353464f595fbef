"""M-ellipsoids, M-position and reverse Brunn-Minkowski checks.

The M-ellipsoid of a centered body ``K`` is built from the perturbed body
``T`` of small isotropic constant: with ``Q`` the linear map putting ``T``
in isotropic position, ``E_K = Q^{-1}(a sqrt(n) B_2^n)`` where ``a`` makes
``|E_K| = |K|``. Its quality is measured by four covering numbers
``N(K, E)``, ``N(E, K)``, ``N(K^o, E^o)``, ``N(E^o, K^o)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import (
    AffineMap,
    Ellipsoid,
    ball_volume,
    minkowski_sum,
    polar,
)
from .covering import NET_SLACK, greedy_net
from .laplace import klartag_body
from .randgeom import exact_volume, isotropic_transform
from .santalo import santalo_bound

BETA_FLOOR = 2.5
RBM_FLOOR = 8.0
COVER_KEYS = ("K_in_E", "E_in_K", "Kpolar_in_Epolar", "Epolar_in_Kpolar")

__all__ = [
    "MPositionCert",
    "covering_symmetry_check",
    "m_ellipsoid",
    "m_position_image",
    "needle_pancake_control",
    "reverse_bm_check",
    "santalo_from_mposition",
]


@dataclass
class MPositionCert:
    body_id: str
    ellipsoid: Ellipsoid
    beta_measured: float
    position_map: AffineMap
    volumes_equal: float
    covering: dict = field(default_factory=dict)
    a: float = float("nan")
    L_T: float = float("nan")

    @property
    def ok(self):
        return self.volumes_equal <= 1e-4 and self.beta_measured <= BETA_FLOOR

    def to_dict(self):
        return {
            "body_id": self.body_id,
            "ellipsoid": self.ellipsoid.to_dict(),
            "beta_measured": self.beta_measured,
            "volumes_equal": self.volumes_equal,
            "a": self.a,
            "L_T": self.L_T,
            "covering": dict(self.covering),
        }


def _four_coverings(K, E, seed, **kw):
    """Net upper bounds for the four covering numbers between ``K`` and ``E`` (t = 1)."""
    Kp, Ep = polar(K), polar(E)
    kw.setdefault("allow_asymmetric", True)
    pairs = {
        "K_in_E": (K, E),
        "E_in_K": (E, K),
        "Kpolar_in_Epolar": (Kp, Ep),
        "Epolar_in_Kpolar": (Ep, Kp),
    }
    return {key: greedy_net(A, B, 1.0, seed=seed, pair=(key, ""), **kw).upper for key, (A, B) in pairs.items()}


def _beta(cov, n):
    return max(math.log(v) for v in cov.values()) / n


def _round_map(E):
    """Determinant-one linear map sending ``E`` (centered) to a Euclidean ball."""
    n = E.dim
    w, U = np.linalg.eigh(E.shape)
    r = float(np.prod(w)) ** (-1.0 / (2 * n))
    return AffineMap.from_linear(r * (U * np.sqrt(w)) @ U.T)


def m_ellipsoid(K, body_id="K", seed=0, eps=0.5, **kw):
    """M-ellipsoid certificate for a centered body ``K``.

    ``kw`` is forwarded to :func:`greedy_net` (sample sizes).
    """
    n = K.dim
    vK = exact_volume(K)
    if isinstance(K, Ellipsoid):
        T, L_T = K, float("nan")
    else:
        pr = klartag_body(K, eps=eps, seed=seed)
        T, L_T = pr.T, pr.L_T
    Tmap, _ = isotropic_transform(T)
    Q = Tmap.linear
    detQ = abs(float(np.linalg.det(Q)))
    a = (detQ * vK / ball_volume(n)) ** (1.0 / n) / math.sqrt(n)
    Qi = np.linalg.inv(Q)
    E = Ellipsoid.from_axes(np.zeros(n), a * math.sqrt(n) * Qi)
    vol_res = abs(1.0 - E.volume / vK)
    cov = _four_coverings(K, E, seed, **kw)
    return MPositionCert(
        body_id=body_id,
        ellipsoid=E,
        beta_measured=_beta(cov, n),
        position_map=_round_map(E),
        volumes_equal=vol_res,
        covering=cov,
        a=a,
        L_T=L_T,
    )


def m_position_image(K, cert=None, seed=0, **kw):
    """Volume-preserving image of ``K`` whose M-ellipsoid is a Euclidean ball.

    Returns ``(image, map, cert_image)``; the image certificate re-runs the
    four coverings against the round ellipsoid ``U E``.
    """
    if cert is None:
        cert = m_ellipsoid(K, seed=seed, **kw)
    U = cert.position_map
    Kt = K.affine_image(U)
    Et = cert.ellipsoid.affine_image(U)
    Et = Ellipsoid(np.zeros(K.dim), 0.5 * (Et.shape + Et.shape.T))
    cov = _four_coverings(Kt, Et, seed, **kw)
    cert_t = MPositionCert(
        body_id=cert.body_id + "~",
        ellipsoid=Et,
        beta_measured=_beta(cov, K.dim),
        position_map=AffineMap.identity(K.dim),
        volumes_equal=abs(1.0 - Et.volume / exact_volume(Kt)),
        covering=cov,
        a=cert.a,
        L_T=cert.L_T,
    )
    return Kt, U, cert_t


def _bm_ratio(A, B):
    n = A.dim
    s = exact_volume(minkowski_sum(A, B)) ** (1.0 / n)
    return s / (exact_volume(A) ** (1.0 / n) + exact_volume(B) ** (1.0 / n))


def reverse_bm_check(K1, K2, positioned=False, seed=0, **kw):
    """``|K1 + K2|^{1/n} / (|K1|^{1/n} + |K2|^{1/n})`` in M-position, all four polar combinations.

    The ratio is at least one by Brunn-Minkowski and is asserted to stay
    below the desk floor 8. Pass ``positioned=True`` when the bodies are
    already in M-position.
    """
    if not positioned:
        K1 = m_position_image(K1, seed=seed, **kw)[0]
        K2 = m_position_image(K2, seed=seed, **kw)[0]
    P1, P2 = polar(K1), polar(K2)
    combos = {"K1+K2": (K1, K2), "K1o+K2": (P1, K2), "K1+K2o": (K1, P2), "K1o+K2o": (P1, P2)}
    ratios = {k: _bm_ratio(a, b) for k, (a, b) in combos.items()}
    ok = all(1 - 1e-6 <= r <= RBM_FLOOR for r in ratios.values())
    return {"ratios": ratios, "max_ratio": max(ratios.values()), "pass": bool(ok)}


def needle_pancake_control(n=2, eccentricity=100.0):
    """Brunn-Minkowski ratio of two orthogonal thin boxes, without repositioning.

    The boxes have half-axes ``sqrt(ecc)`` and ``1/sqrt(ecc)``; in the plane
    the ratio is ``(sqrt(ecc) + 1/sqrt(ecc)) / 2``.
    """
    from .bodies import cube

    r = math.sqrt(eccentricity)
    d1 = np.full(n, 1.0 / r)
    d1[0] = r
    d2 = np.full(n, r)
    d2[0] = 1.0 / r
    A = cube(n).affine_image(AffineMap.from_linear(np.diag(d1)))
    B = cube(n).affine_image(AffineMap.from_linear(np.diag(d2)))
    return _bm_ratio(A, B)


def covering_symmetry_check(K, L, ts=(0.5, 1.0, 2.0), seed=0, slack=NET_SLACK, **kw):
    """``N(K, tL)^{1/n} / N(L, tK)^{1/n}`` within ``[1/C, C]``, ``C = 8 slack``, over ``ts``."""
    n = K.dim
    kw.setdefault("allow_asymmetric", True)
    C = 8 * slack
    rows = []
    for t in ts:
        a = greedy_net(K, L, t, seed=seed, **kw).upper
        b = greedy_net(L, K, t, seed=seed, **kw).upper
        r = (a / b) ** (1.0 / n)
        rows.append({"t": t, "N_KL": a, "N_LK": b, "ratio": r, "pass": 1 / C <= r <= C})
    return {"rows": rows, "bound": C, "pass": all(r["pass"] for r in rows)}


def santalo_from_mposition(K, cert):
    """Volume-product sandwich derived from the four covering numbers alone.

    Covering gives ``|K| <= N(K,E)|E|``, ``|E| <= N(E,K)|K|`` and the same
    for the polars, hence

    ``s(B) / (N(E,K) N(E^o,K^o)) <= s(K) <= s(B) N(K,E) N(K^o,E^o)``.

    The coarser ``n``-th root form uses ``beta``:
    ``e^{-2(beta + log 8)} <= (s(K)/s(B))^{1/n} <= e^{2(beta + log 8)}``.
    Both are compared with ``s(K)`` computed about the origin.
    """
    n = K.dim
    c = cert.covering
    sB = santalo_bound(n)
    s = exact_volume(K) * exact_volume(polar(K))
    lo = sB / (c["E_in_K"] * c["Epolar_in_Kpolar"])
    hi = sB * c["K_in_E"] * c["Kpolar_in_Epolar"]
    root = (s / sB) ** (1.0 / n)
    k = math.exp(2 * (cert.beta_measured + math.log(8)))
    direct_ok = lo * (1 - 1e-9) <= s <= hi * (1 + 1e-9)
    root_ok = 1 / k <= root <= k
    return {
        "body_id": cert.body_id,
        "s": s,
        "s_ball": sB,
        "lower": lo,
        "upper": hi,
        "root_ratio": root,
        "root_bound": k,
        "direct_ok": bool(direct_ok),
        "root_ok": bool(root_ok),
        "pass": bool(direct_ok and root_ok),
    }

