# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementations of the hot kernels (see _kernels_py for contracts)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, pow, sqrt

cnp.import_array()

cdef double _E = 2.718281828459045235360287

BACKEND_NAME = "compiled"


# ---------------------------------------------------------------------------
# Young function evaluation
# ---------------------------------------------------------------------------

cdef double _phi(double t, int kind, double r, double delta, double coeff,
                 double[::1] lt, double[::1] lv, double[::1] ld,
                 double zero_below) noexcept nogil:
    cdef double x, h, s, s2, s3, y
    cdef Py_ssize_t k, lo, hi, mid
    if t <= 0.0:
        return 0.0
    if kind == 0:
        return coeff * pow(t, r)
    if kind == 1:
        return coeff * pow(t, r) * pow(log(_E + t), delta)
    if t <= zero_below:
        return 0.0
    x = log(t)
    k = lt.shape[0]
    if x <= lt[0]:
        return exp(lv[0] + ld[0] * (x - lt[0]))
    if x >= lt[k - 1]:
        return exp(lv[k - 1] + ld[k - 1] * (x - lt[k - 1]))
    lo = 0
    hi = k - 1
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if lt[mid] <= x:
            lo = mid
        else:
            hi = mid
    h = lt[lo + 1] - lt[lo]
    s = (x - lt[lo]) / h
    s2 = s * s
    s3 = s2 * s
    y = (lv[lo] * (2 * s3 - 3 * s2 + 1)
         + ld[lo] * h * (s3 - 2 * s2 + s)
         + lv[lo + 1] * (-2 * s3 + 3 * s2)
         + ld[lo + 1] * h * (s3 - s2))
    return exp(y)


def young_eval(t, params):
    kind, r, delta, coeff, logt, logv, deriv, zero_below = params
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tf = \
        np.ascontiguousarray(np.asarray(t, dtype=float).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(tf)
    cdef double[::1] lt = np.ascontiguousarray(logt, dtype=float)
    cdef double[::1] lv = np.ascontiguousarray(logv, dtype=float)
    cdef double[::1] ld = np.ascontiguousarray(deriv, dtype=float)
    cdef int kd = kind
    cdef double rr = r, dd = delta, cc = coeff, zb = zero_below
    cdef Py_ssize_t i, m = tf.shape[0]
    with nogil:
        for i in range(m):
            out[i] = _phi(tf[i], kd, rr, dd, cc, lt, lv, ld, zb)
    return out.reshape(np.asarray(t, dtype=float).shape)


def lux_rows(values, weights, params, double rtol=1e-10):
    kind, r, delta, coeff, logt, logv, deriv, zero_below = params
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V = \
        np.ascontiguousarray(values, dtype=float)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=float)
    cdef Py_ssize_t m = V.shape[0], c = V.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(m)
    cdef double[::1] lt = np.ascontiguousarray(logt, dtype=float)
    cdef double[::1] lv = np.ascontiguousarray(logv, dtype=float)
    cdef double[::1] ld = np.ascontiguousarray(deriv, dtype=float)
    cdef int kd = kind
    cdef double rr = r, dd = delta, cc = coeff, zb = zero_below
    cdef Py_ssize_t i, j, it
    cdef double vmax, lo, hi, mid, f
    with nogil:
        for i in range(m):
            vmax = 0.0
            for j in range(c):
                if V[i, j] > vmax:
                    vmax = V[i, j]
            if vmax == 0.0:
                continue
            hi = vmax
            for it in range(200):
                f = 0.0
                for j in range(c):
                    f += w[j] * _phi(V[i, j] / hi, kd, rr, dd, cc, lt, lv, ld, zb)
                if f <= 1.0:
                    break
                hi *= 2.0
            lo = hi if hi < vmax else vmax
            for it in range(400):
                f = 0.0
                for j in range(c):
                    f += w[j] * _phi(V[i, j] / lo, kd, rr, dd, cc, lt, lv, ld, zb)
                if f >= 1.0:
                    break
                lo /= 2.0
            for it in range(200):
                if hi - lo <= rtol * hi:
                    break
                mid = 0.5 * (lo + hi)
                f = 0.0
                for j in range(c):
                    f += w[j] * _phi(V[i, j] / mid, kd, rr, dd, cc, lt, lv, ld, zb)
                if f > 1.0:
                    lo = mid
                else:
                    hi = mid
            # upper bracket end: never understates the norm
            out[i] = hi
    return out


# ---------------------------------------------------------------------------
# Small dense linear algebra helpers
# ---------------------------------------------------------------------------

cdef int _inv_small(double* a, double* inv, Py_ssize_t n) noexcept nogil:
    """Gaussian elimination with partial pivoting; a is destroyed."""
    cdef Py_ssize_t i, j, k, piv
    cdef double best, tmp, f
    for i in range(n):
        for j in range(n):
            inv[i * n + j] = 1.0 if i == j else 0.0
    for k in range(n):
        piv = k
        best = fabs(a[k * n + k])
        for i in range(k + 1, n):
            if fabs(a[i * n + k]) > best:
                best = fabs(a[i * n + k])
                piv = i
        if best == 0.0:
            return -1
        if piv != k:
            for j in range(n):
                tmp = a[k * n + j]; a[k * n + j] = a[piv * n + j]; a[piv * n + j] = tmp
                tmp = inv[k * n + j]; inv[k * n + j] = inv[piv * n + j]; inv[piv * n + j] = tmp
        f = a[k * n + k]
        for j in range(n):
            a[k * n + j] /= f
            inv[k * n + j] /= f
        for i in range(n):
            if i == k:
                continue
            f = a[i * n + k]
            if f != 0.0:
                for j in range(n):
                    a[i * n + j] -= f * a[k * n + j]
                    inv[i * n + j] -= f * inv[k * n + j]
    return 0


cdef void _jacobi(double* s, double* v, double* w, Py_ssize_t n,
                  double tol) noexcept nogil:
    """Cyclic Jacobi on a symmetric matrix (s destroyed); v columns = vectors."""
    cdef Py_ssize_t i, j, p, q, sweep
    cdef double off, norm, apq, app, aqq, theta, t, cth, sth, tmp1, tmp2
    for i in range(n):
        for j in range(n):
            v[i * n + j] = 1.0 if i == j else 0.0
    for sweep in range(60):
        off = 0.0
        norm = 0.0
        for i in range(n):
            for j in range(n):
                norm += s[i * n + j] * s[i * n + j]
                if i != j:
                    off += s[i * n + j] * s[i * n + j]
        if off <= tol * tol * (norm + 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = s[p * n + q]
                if fabs(apq) < 1e-300:
                    continue
                app = s[p * n + p]
                aqq = s[q * n + q]
                theta = 0.5 * (aqq - app) / apq
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + sqrt(1.0 + theta * theta))
                cth = 1.0 / sqrt(1.0 + t * t)
                sth = t * cth
                for i in range(n):
                    tmp1 = s[i * n + p]
                    tmp2 = s[i * n + q]
                    s[i * n + p] = cth * tmp1 - sth * tmp2
                    s[i * n + q] = sth * tmp1 + cth * tmp2
                for i in range(n):
                    tmp1 = s[p * n + i]
                    tmp2 = s[q * n + i]
                    s[p * n + i] = cth * tmp1 - sth * tmp2
                    s[q * n + i] = sth * tmp1 + cth * tmp2
                for i in range(n):
                    tmp1 = v[i * n + p]
                    tmp2 = v[i * n + q]
                    v[i * n + p] = cth * tmp1 - sth * tmp2
                    v[i * n + q] = sth * tmp1 + cth * tmp2
    for i in range(n):
        w[i] = s[i * n + i]


cdef void _sort_eigh(double* w, double* v, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j, best
    cdef double tmp
    for i in range(n - 1):
        best = i
        for j in range(i + 1, n):
            if w[j] < w[best]:
                best = j
        if best != i:
            tmp = w[i]; w[i] = w[best]; w[best] = tmp
            for j in range(n):
                tmp = v[j * n + i]; v[j * n + i] = v[j * n + best]; v[j * n + best] = tmp


def eigh_batch(S):
    """Cyclic-Jacobi eigendecomposition of a batch of symmetric matrices."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3] A = \
        np.ascontiguousarray(S, dtype=float)
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] W = np.empty((m, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] V = np.empty((m, n, n))
    cdef double sbuf[64]
    cdef double vbuf[64]
    cdef double wbuf[8]
    cdef Py_ssize_t b, i, j
    if n > 8:
        raise ValueError("eigh_batch supports n <= 8")
    with nogil:
        for b in range(m):
            for i in range(n):
                for j in range(n):
                    sbuf[i * n + j] = A[b, i, j]
            _jacobi(sbuf, vbuf, wbuf, n, 1e-13)
            _sort_eigh(wbuf, vbuf, n)
            for i in range(n):
                W[b, i] = wbuf[i]
                for j in range(n):
                    V[b, i, j] = vbuf[i * n + j]
    return W, V


def pair_opnorm(A, B, chunk=0):
    """Operator norms |A_x B_y|_op for all pairs -> (N, M)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Aa = \
        np.ascontiguousarray(A, dtype=float)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Bb = \
        np.ascontiguousarray(B, dtype=float)
    cdef Py_ssize_t N = Aa.shape[0], M = Bb.shape[0], n = Aa.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((N, M))
    cdef Py_ssize_t x, y, i, j, k
    cdef double cbuf[64]
    cdef double sbuf[64]
    cdef double vbuf[64]
    cdef double wbuf[8]
    cdef double acc, wmax
    if n > 8:
        raise ValueError("pair_opnorm supports n <= 8")
    with nogil:
        for x in range(N):
            for y in range(M):
                if n == 1:
                    out[x, y] = fabs(Aa[x, 0, 0] * Bb[y, 0, 0])
                    continue
                for i in range(n):
                    for j in range(n):
                        acc = 0.0
                        for k in range(n):
                            acc += Aa[x, i, k] * Bb[y, k, j]
                        cbuf[i * n + j] = acc
                for i in range(n):
                    for j in range(n):
                        acc = 0.0
                        for k in range(n):
                            acc += cbuf[k * n + i] * cbuf[k * n + j]
                        sbuf[i * n + j] = acc
                _jacobi(sbuf, vbuf, wbuf, n, 1e-13)
                wmax = wbuf[0]
                for i in range(1, n):
                    if wbuf[i] > wmax:
                        wmax = wbuf[i]
                out[x, y] = sqrt(wmax) if wmax > 0 else 0.0
    return out


def pair_vecnorm(A, G):
    """Euclidean norms |A_x g_y| for all pairs -> (N, M)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Aa = \
        np.ascontiguousarray(A, dtype=float)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Gg = \
        np.ascontiguousarray(G, dtype=float)
    cdef Py_ssize_t N = Aa.shape[0], M = Gg.shape[0], n = Aa.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((N, M))
    cdef Py_ssize_t x, y, i, k
    cdef double acc, s
    with nogil:
        for x in range(N):
            for y in range(M):
                s = 0.0
                for i in range(n):
                    acc = 0.0
                    for k in range(n):
                        acc += Aa[x, i, k] * Gg[y, k]
                    s += acc * acc
                out[x, y] = sqrt(s)
    return out


def khachiyan_mvee(points, double eps=1e-7, int maxiter=100000):
    """Centered MVEE of {+-p_k} by coordinate ascent with away steps."""
    cdef double[:, ::1] P = np.ascontiguousarray(points, dtype=float)
    cdef Py_ssize_t N = P.shape[0], n = P.shape[1]
    cdef double[::1] u = np.full(N, 1.0 / N)
    cdef double[::1] kappa = np.empty(N)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Mout = np.empty((n, n))
    cdef double mbuf[64]
    cdef double minv[64]
    cdef double tmp[64]
    cdef double mp[8]
    cdef Py_ssize_t i, j, k, it, jmax, jmin, jpick
    cdef double kmax, kmin, kj, beta, bmin, denom, acc, pmp, resid
    cdef int iters = 0
    if n > 8:
        raise ValueError("khachiyan_mvee supports n <= 8")
    with nogil:
        _mvee_m(P, u, mbuf, N, n)
        for i in range(n * n):
            tmp[i] = mbuf[i]
        _inv_small(tmp, minv, n)
        _mvee_kappa(P, minv, kappa, N, n)
        for it in range(1, maxiter + 1):
            iters = it
            jmax = 0
            kmax = kappa[0]
            for i in range(1, N):
                if kappa[i] > kmax:
                    kmax = kappa[i]
                    jmax = i
            jmin = -1
            kmin = 1e308
            for i in range(N):
                if u[i] > 0 and kappa[i] < kmin:
                    kmin = kappa[i]
                    jmin = i
            if kmax - n <= eps * n and n - kmin <= eps * n:
                break
            if kmax - n >= n - kmin:
                jpick = jmax
                kj = kmax
                beta = (kj - n) / (n * (kj - 1.0))
            else:
                jpick = jmin
                kj = kmin
                bmin = -u[jpick] / (1.0 - u[jpick])
                if kj <= 1.0 + 1e-15:
                    beta = bmin
                else:
                    beta = (kj - n) / (n * (kj - 1.0))
                    if beta < bmin:
                        beta = bmin
            if beta == 0.0:
                break
            for k in range(n):
                acc = 0.0
                for j in range(n):
                    acc += minv[k * n + j] * P[jpick, j]
                mp[k] = acc
            denom = (1.0 - beta) + beta * kj
            for i in range(N):
                u[i] *= 1.0 - beta
            u[jpick] += beta
            if u[jpick] < 0:
                u[jpick] = 0.0
            if it % 64 == 0:
                _mvee_m(P, u, mbuf, N, n)
                for i in range(n * n):
                    tmp[i] = mbuf[i]
                _inv_small(tmp, minv, n)
                _mvee_kappa(P, minv, kappa, N, n)
            else:
                for i in range(n):
                    for j in range(n):
                        minv[i * n + j] = (minv[i * n + j]
                                           - (beta / denom) * mp[i] * mp[j]) / (1.0 - beta)
                for i in range(N):
                    pmp = 0.0
                    for k in range(n):
                        pmp += P[i, k] * mp[k]
                    kappa[i] = (kappa[i] - (beta / denom) * pmp * pmp) / (1.0 - beta)
        _mvee_m(P, u, mbuf, N, n)
        for i in range(n * n):
            tmp[i] = mbuf[i]
        _inv_small(tmp, minv, n)
        _mvee_kappa(P, minv, kappa, N, n)
        kmax = kappa[0]
        for i in range(1, N):
            if kappa[i] > kmax:
                kmax = kappa[i]
        resid = kmax / n - 1.0
        for i in range(n):
            for j in range(n):
                Mout[i, j] = mbuf[i * n + j] * (kmax / n)
    return Mout, iters, resid


cdef void _mvee_m(double[:, ::1] P, double[::1] u, double* m,
                  Py_ssize_t N, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j, k
    for i in range(n):
        for j in range(n):
            m[i * n + j] = 0.0
    for k in range(N):
        if u[k] == 0.0:
            continue
        for i in range(n):
            for j in range(n):
                m[i * n + j] += u[k] * P[k, i] * P[k, j]


cdef void _mvee_kappa(double[:, ::1] P, double* minv, double[::1] kappa,
                      Py_ssize_t N, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef double acc, tot
    for k in range(N):
        tot = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += minv[i * n + j] * P[k, j]
            tot += acc * P[k, i]
        kappa[k] = tot
