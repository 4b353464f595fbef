"""Exact integrals over simplices.

Polynomial moments up to degree two use the Dirichlet closed forms.
Exponential moments ``int e^{<xi,x>} x^a dx`` reduce to divided differences
of ``exp`` at the vertex exponents (Hermite-Genocchi); repeated nodes give
the first and second moments.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

# nodes whose centered spread stays below this use the Taylor series
SERIES_RADIUS = 4.0
_SERIES_TERMS = 80


def polynomial_moments(simplices):
    """Volume, first and second moments of a union of simplices.

    Parameters
    ----------
    simplices : (S, n+1, n) array

    Returns
    -------
    vol : float
    m1 : (n,) array, ``int x dx``
    m2 : (n, n) array, ``int x x^T dx``
    """
    S = np.asarray(simplices, dtype=float)
    n = S.shape[2]
    vols = np.abs(np.linalg.det(S[:, 1:] - S[:, :1])) / math.factorial(n)
    s = S.sum(axis=1)
    m1 = (vols[:, None] * s).sum(axis=0) / (n + 1)
    outer = np.einsum("skp,skq->spq", S, S) + np.einsum("sp,sq->spq", s, s)
    m2 = np.einsum("s,spq->pq", vols, outer) / ((n + 1) * (n + 2))
    return float(vols.sum()), m1, m2


def _inv_factorials(m, J):
    j = np.arange(J + 1)
    return np.exp(-gammaln(j + m + 1.0))


def _series_terms(R):
    # tail bound R^J / J! below 1e-20 * e^{-R}
    J, term = 0, 1.0
    while term > 1e-20 * math.exp(-R) and J < _SERIES_TERMS:
        J += 1
        term *= R / J
    return max(J, 2)


def _divdiff_series(nodes):
    """Taylor series ``sum_j h_j(nodes) / (j + m)!`` with ``h_j`` complete symmetric."""
    k = nodes.shape[-1]
    flat = nodes.reshape(-1, k)
    J = _series_terms(float(np.max(np.abs(flat))) if flat.size else 0.0)
    h = np.zeros((flat.shape[0], J + 1))
    h[:, 0] = 1.0
    for col in range(k):
        a = flat[:, col]
        for j in range(1, J + 1):
            h[:, j] += a * h[:, j - 1]
    out = h @ _inv_factorials(k - 1, J)
    return out.reshape(nodes.shape[:-1])


def _divdiff_expm(nodes):
    """Corner entry of ``exp`` of the bidiagonal node matrix (Opitz)."""
    k = nodes.shape[-1]
    flat = nodes.reshape(-1, k)
    Jm = np.zeros((flat.shape[0], k, k))
    idx = np.arange(k)
    Jm[:, idx, idx] = flat
    Jm[:, idx[:-1], idx[1:]] = 1.0
    out = expm(Jm)[:, 0, k - 1]
    return out.reshape(nodes.shape[:-1])


def divided_difference_exp(nodes):
    """Divided differences ``exp[t_0, ..., t_m]`` over the last axis.

    Nodes may repeat. Rows with small spread are evaluated by series, the
    rest through the matrix exponential of the Opitz matrix; both are
    centered at the row mean first.
    """
    nodes = np.asarray(nodes, dtype=float)
    c = nodes.mean(axis=-1, keepdims=True)
    s = nodes - c
    R = np.max(np.abs(s), axis=-1)
    small = R <= SERIES_RADIUS
    # wide rows are shifted to a nonpositive spectrum so expm cannot overflow
    c = np.where(small[..., None], c, nodes.max(axis=-1, keepdims=True))
    s = nodes - c
    out = np.empty(nodes.shape[:-1])
    if np.any(small):
        out[small] = _divdiff_series(s[small])
    if np.any(~small):
        out[~small] = _divdiff_expm(s[~small])
    return out * np.exp(c[..., 0])


def exp_moments(simplices, xi):
    """Exponential moments of a union of simplices, for one or many ``xi``.

    Returns ``(log_scale, I0, I1, I2)`` such that
    ``exp(log_scale) * I0 = int e^{<xi,x>} dx``,
    ``exp(log_scale) * I1 = int x e^{<xi,x>} dx`` and
    ``exp(log_scale) * I2 = int x x^T e^{<xi,x>} dx``.
    A batch of ``q`` exponents gives leading axis ``q`` on every output.
    """
    S = np.asarray(simplices, dtype=float)
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    X = np.atleast_2d(xi)
    nS, k, n = S.shape
    vols = np.abs(np.linalg.det(S[:, 1:] - S[:, :1]))  # n! |simplex|

    t = np.einsum("skn,qn->qsk", S, X)  # (q, S, k)
    c = t.max(axis=-1)
    s = t - c[..., None]

    iu, ju = np.triu_indices(k)
    base = s
    rep1 = np.concatenate([np.broadcast_to(s[..., None, :], s.shape[:-1] + (k, k)), s[..., :, None]], axis=-1)
    rep2 = np.concatenate(
        [
            np.broadcast_to(s[..., None, :], s.shape[:-1] + (len(iu), k)),
            s[..., iu, None],
            s[..., ju, None],
        ],
        axis=-1,
    )
    d0 = divided_difference_exp(base)  # (q, S)
    d1 = divided_difference_exp(rep1)  # (q, S, k)
    d2p = divided_difference_exp(rep2)  # (q, S, P)
    d2 = np.zeros(d0.shape + (k, k))
    d2[..., iu, ju] = d2p
    d2[..., ju, iu] = d2p
    d2[..., np.arange(k), np.arange(k)] *= 2.0

    log_scale = c.max(axis=-1)  # (q,)
    w = vols[None, :] * np.exp(c - log_scale[:, None])  # (q, S)
    I0 = np.einsum("qs,qs->q", w, d0)
    I1 = np.einsum("qs,qsk,skn->qn", w, d1, S)
    I2 = np.einsum("qs,qskl,skn,slm->qnm", w, d2, S, S)
    if single:
        return float(log_scale[0]), float(I0[0]), I1[0], I2[0]
    return log_scale, I0, I1, I2
