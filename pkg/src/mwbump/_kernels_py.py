"""Pure numpy implementations of the hot kernels.

Mirrors the compiled module ``mwbump._kernels``; the two are interchangeable
(``mwbump.backend`` picks one at import).  Young-function parameters are passed
in the flattened form produced by :func:`mwbump.young.YoungFn.kernel_params`:
``(kind, r, delta, coeff, logt, logv, deriv, zero_below)`` where kind is
0 = power, 1 = power_log, 2 = log-log pchip grid.
"""

from __future__ import annotations

import math

import numpy as np

_E = math.e

BACKEND_NAME = "python"


def young_eval(t, params):
    """Evaluate a Young function on an array of nonnegative arguments."""
    kind, r, delta, coeff, logt, logv, deriv, zero_below = params
    t = np.asarray(t, dtype=float)
    if kind == 0:
        return coeff * t**r
    if kind == 1:
        return coeff * t**r * np.log(_E + t) ** delta
    # grid family: piecewise monotone cubic in log-log coordinates
    out = np.zeros_like(t)
    pos = t > zero_below
    if not np.any(pos):
        return out
    x = np.log(t[pos])
    y = _pchip_eval(x, logt, logv, deriv)
    out[pos] = np.exp(y)
    return out


def _pchip_eval(x, xs, ys, ds):
    """Hermite evaluation with knot slopes; linear extrapolation in log-log."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    lo = x <= xs[0]
    hi = x >= xs[-1]
    out[lo] = ys[0] + ds[0] * (x[lo] - xs[0])
    out[hi] = ys[-1] + ds[-1] * (x[hi] - xs[-1])
    mid = ~(lo | hi)
    if np.any(mid):
        xm = x[mid]
        i = np.searchsorted(xs, xm, side="right") - 1
        i = np.clip(i, 0, len(xs) - 2)
        h = xs[i + 1] - xs[i]
        s = (xm - xs[i]) / h
        s2 = s * s
        s3 = s2 * s
        out[mid] = (
            ys[i] * (2 * s3 - 3 * s2 + 1)
            + ds[i] * h * (s3 - 2 * s2 + s)
            + ys[i + 1] * (-2 * s3 + 3 * s2)
            + ds[i + 1] * h * (s3 - s2)
        )
    return out


def lux_rows(values, weights, params, rtol=1e-10):
    """Row-wise Luxemburg norms by bisection.

    values: (m, c) nonnegative, weights: (c,) summing to 1.  Returns (m,) of
    lambda* with sum_j w_j Phi(v_ij / lambda*) = 1 (0 for all-zero rows).
    """
    V = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    m = V.shape[0]
    out = np.zeros(m)
    vmax = V.max(axis=1)
    live = vmax > 0
    if not np.any(live):
        return out
    Vl = V[live]
    lam = vmax[live].copy()

    def favg(lamv):
        return young_eval(Vl / lamv[:, None], params) @ w

    hi = lam.copy()
    for _ in range(200):
        bad = favg(hi) > 1.0
        if not np.any(bad):
            break
        hi[bad] *= 2.0
    lo = lam.copy()
    for _ in range(400):
        bad = favg(lo) < 1.0
        if not np.any(bad):
            break
        lo[bad] /= 2.0
    for _ in range(200):
        if np.all(hi - lo <= rtol * hi):
            break
        mid = 0.5 * (lo + hi)
        f = favg(mid)
        gt = f > 1.0
        lo = np.where(gt, mid, lo)
        hi = np.where(gt, hi, mid)
    # upper bracket end: avg phi(v/hi) <= 1, so norms are never understated
    # (keeps exact inequalities like the generalized Holder safe)
    out[live] = hi
    return out


def khachiyan_mvee(points, eps=1e-7, maxiter=100000):
    """Minimum-volume ellipsoid centered at the origin enclosing {+-p_k}.

    Barycentric coordinate ascent on the log-det objective with away steps.
    Returns (M, iters, residual) where the ellipsoid is
    {x : x^T M^{-1} x <= n}; residual is the final duality gap kmax/n - 1.
    """
    P = np.ascontiguousarray(points, dtype=float)
    N, n = P.shape
    u = np.full(N, 1.0 / N)
    M = P.T @ (P * u[:, None])
    Minv = np.linalg.inv(M)
    kappa = np.einsum("ij,ij->i", P @ Minv, P)
    iters = 0
    for iters in range(1, maxiter + 1):
        jmax = int(np.argmax(kappa))
        kmax = kappa[jmax]
        sup = u > 0
        ks = np.where(sup, kappa, np.inf)
        jmin = int(np.argmin(ks))
        kmin = ks[jmin]
        if kmax - n <= eps * n and n - kmin <= eps * n:
            break
        if kmax - n >= n - kmin:
            j, kj = jmax, kmax
            beta = (kj - n) / (n * (kj - 1.0))
        else:
            j, kj = jmin, kmin
            if kj <= 1.0 + 1e-15:
                beta = -u[j] / (1.0 - u[j])
            else:
                beta = max((kj - n) / (n * (kj - 1.0)), -u[j] / (1.0 - u[j]))
        if beta == 0.0:
            break
        p = P[j]
        Mp = Minv @ p
        denom = (1.0 - beta) + beta * kj
        u *= 1.0 - beta
        u[j] += beta
        u[u < 0] = 0.0
        if iters % 64 == 0:
            M = P.T @ (P * u[:, None])
            Minv = np.linalg.inv(M)
            kappa = np.einsum("ij,ij->i", P @ Minv, P)
        else:
            Minv = (Minv - (beta / denom) * np.outer(Mp, Mp)) / (1.0 - beta)
            PMp = P @ Mp
            kappa = (kappa - (beta / denom) * PMp**2) / (1.0 - beta)
    M = P.T @ (P * u[:, None])
    Minv = np.linalg.inv(M)
    kappa = np.einsum("ij,ij->i", P @ Minv, P)
    kmax = float(kappa.max())
    # inflate so every input point is certified inside
    return M * (kmax / n), iters, kmax / n - 1.0


def pair_opnorm(A, B, chunk=1 << 22):
    """Operator norms |A_x B_y|_op for all pairs -> (N, M)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    N, n, _ = A.shape
    M = B.shape[0]
    if n == 1:
        return np.abs(np.outer(A[:, 0, 0], B[:, 0, 0]))
    out = np.empty((N, M))
    rows = max(1, chunk // (M * n * n))
    for i0 in range(0, N, rows):
        i1 = min(N, i0 + rows)
        C = np.einsum("xab,ybc->xyac", A[i0:i1], B)
        S = np.einsum("xyba,xybc->xyac", C, C)
        out[i0:i1] = np.sqrt(np.maximum(np.linalg.eigvalsh(S)[..., -1], 0.0))
    return out


def pair_vecnorm(A, G):
    """Euclidean norms |A_x g_y| for all pairs -> (N, M)."""
    A = np.asarray(A, dtype=float)
    G = np.asarray(G, dtype=float)
    if A.shape[1] == 1:
        return np.abs(np.outer(A[:, 0, 0], G[:, 0]))
    C = np.einsum("xab,yb->xya", A, G)
    return np.sqrt(np.einsum("xya,xya->xy", C, C))


def eigh_batch(S):
    """Eigendecomposition of a batch of symmetric matrices (ascending)."""
    w, V = np.linalg.eigh(np.asarray(S, dtype=float))
    return w, V
