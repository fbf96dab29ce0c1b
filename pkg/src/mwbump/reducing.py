"""Reducing operators: constant SPD matrices equivalent to e -> ||A e||_{Psi,Q}.

For Psi(t) = c t^2 the reducing operator is exact:
||A e||_{2,Q}^2 = e . (avg_Q A^2) e, so R = c^{1/2} (avg_Q A^2)^{1/2}.

Otherwise the unit ball K = {e : ||A e||_{Psi,Q} <= 1} is sampled along a
deterministic set of directions and R is taken as the gauge of the
minimum-volume ellipsoid enclosing the sampled boundary points (Khachiyan
coordinate ascent).  John's theorem for symmetric bodies bounds the gauge
distortion by sqrt(n); tests allow 10% sampling slack on top of that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import DomainError, MveeError
from .weights import sigma_max
from .young import YoungFn, luxemburg_rows

_DEFAULT_DIRS = {1: 2, 2: 64, 3: 512}
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def default_n_dirs(n):
    return _DEFAULT_DIRS.get(n, 2048)


def unit_directions(n, count):
    """Deterministic unit directions spanning half the sphere (antipodal
    pairs are implicit in the symmetric MVEE)."""
    if n == 1:
        return np.ones((1, 1))
    if n == 2:
        th = np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(th), np.sin(th)], 1)
    if n == 3:
        k = np.arange(count) + 0.5
        z = k / count
        phi = 2.0 * np.pi * k * _GOLDEN
        rho = np.sqrt(1.0 - z**2)
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], 1)
    rng = np.random.default_rng(0xD1CE + n)
    pts = rng.normal(size=(count, n))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


@dataclass
class ReducingOp:
    """Constant SPD matrix R with |R e| equivalent to ||A e||_{Psi,Q}."""

    matrix: np.ndarray
    provenance: dict = field(default_factory=dict)
    cube: object = None
    role: str = ""

    @property
    def n(self):
        return self.matrix.shape[0]

    def norm_of(self, e):
        return float(np.linalg.norm(self.matrix @ np.asarray(e, float)))

    def to_json_dict(self):
        return {
            "matrix": self.matrix.tolist(),
            "provenance": self.provenance,
            "cube": str(self.cube) if self.cube is not None else None,
            "role": self.role,
        }


def _sqrtm_spd(M):
    w, V = np.linalg.eigh(M)
    w = np.maximum(w, 0.0)
    return (V * np.sqrt(w)) @ V.T


def _inv_sqrtm_spd(M):
    w, V = np.linalg.eigh(M)
    if w.min() <= 0:
        raise MveeError("singular MVEE shape matrix")
    return (V / np.sqrt(w)) @ V.T


def _sym_basis(n):
    basis = []
    for i in range(n):
        for j in range(i, n):
            B = np.zeros((n, n))
            if i == j:
                B[i, i] = 1.0
            else:
                B[i, j] = B[j, i] = 1.0
            basis.append(B)
    return basis


def _mvee_polish(points, M0, mu0=1e-2, mu_min=1e-14):
    """Barrier-Newton polish of an enclosing ellipsoid in shape space.

    First-order ascent can crawl when many sampled points are almost active
    (nearly ellipsoidal norm balls); this finishes the same minimum-volume
    problem - minimize -logdet Q subject to p_j^T Q p_j <= n - by Newton on
    the n(n+1)/2 free entries of Q, which is tiny for n <= 4.
    """
    P = np.asarray(points, dtype=float)
    N, n = P.shape
    basis = _sym_basis(n)
    s = len(basis)
    A = np.stack([np.einsum("ji,il,jl->j", P, B, P) for B in basis], 1)

    def unpack(x):
        Q = np.zeros((n, n))
        idx = 0
        for i in range(n):
            for j in range(i, n):
                Q[i, j] = Q[j, i] = x[idx]
                idx += 1
        return Q

    Minv = np.linalg.inv(M0)
    kmax = float(np.einsum("ij,jk,ik->i", P, Minv, P).max())
    Q = Minv * (n / kmax) * (1.0 - 1e-9)
    x = np.array([Q[i, j] for i in range(n) for j in range(i, n)])
    mu = mu0
    while mu >= mu_min:
        for _ in range(60):
            Q = unpack(x)
            W = np.linalg.inv(Q)
            slack = n - A @ x
            Asc = A / slack[:, None]
            grad = np.array([-np.sum(W * B) for B in basis]) + mu * Asc.sum(0)
            H = np.empty((s, s))
            for k, Bk in enumerate(basis):
                Ck = W @ Bk @ W
                for l in range(s):
                    H[k, l] = np.sum(Ck * basis[l])
            H += mu * Asc.T @ Asc
            try:
                dx = np.linalg.solve(H, -grad)
            except np.linalg.LinAlgError:
                return None
            step = 1.0
            for _ in range(60):
                xn = x + step * dx
                if np.all(n - A @ xn > 0) and \
                        np.all(np.linalg.eigvalsh(unpack(xn)) > 0):
                    break
                step *= 0.5
            else:
                return None
            x = xn
            if np.linalg.norm(step * dx) <= 1e-14 * max(np.linalg.norm(x), 1.0):
                break
        mu /= 10.0
    Q = unpack(x)
    if not np.all(np.isfinite(Q)):
        return None
    kmax = float((A @ x).max())
    # scale so the worst point sits exactly on the boundary
    return np.linalg.inv(Q) * (kmax / n)


def reducing_exact_p2(cells, weights=None, coeff=1.0, cube=None, role=""):
    """Exact reducing operator for Psi(t) = coeff * t^2.

    ``cells`` is the (c, n, n) slice of the symmetric matrix function A on
    the cube; R = coeff^{1/2} (avg A^2)^{1/2} satisfies |R e| = ||A e||
    exactly in every direction.
    """
    cells = np.asarray(cells, dtype=float)
    c = cells.shape[0]
    w = np.full(c, 1.0 / c) if weights is None else np.asarray(weights, float)
    sq = np.einsum("cij,cjk->cik", cells, cells)
    avg = np.einsum("c,cij->ij", w, sq)
    R = math.sqrt(coeff) * _sqrtm_spd(avg)
    return ReducingOp(matrix=R, provenance={"method": "exact_p2"},
                      cube=cube, role=role)


def reducing_mvee(cells, psi: YoungFn, n_dirs=None, eps=1e-7,
                  weights=None, cube=None, role="", maxiter=100000):
    """Reducing operator from the MVEE of sampled norm-ball boundary points."""
    cells = np.asarray(cells, dtype=float)
    c, n, _ = cells.shape
    w = np.full(c, 1.0 / c) if weights is None else np.asarray(weights, float)
    if n == 1:
        # the 1-d ellipsoid is the interval: exact for every Psi
        vals = luxemburg_rows(np.abs(cells[None, :, 0, 0]), psi, weights=w)
        r = float(vals[0])
        if r <= 0:
            raise MveeError("degenerate matrix function (zero norm)")
        return ReducingOp(matrix=np.array([[r]]),
                          provenance={"method": "exact_1d"},
                          cube=cube, role=role)
    if n_dirs is None:
        n_dirs = default_n_dirs(n)
    # coordinate axes are always probed: they certify degeneracy exactly
    dirs = np.vstack([np.eye(n), unit_directions(n, n_dirs)])
    # |A(x) u_k| per (direction, cell)
    vals = np.sqrt(np.einsum("kci->kc",
                             np.einsum("cij,kj->kci", cells, dirs) ** 2))
    norms = luxemburg_rows(vals, psi, weights=w)
    if np.any(norms <= 0):
        raise MveeError("degenerate matrix function (zero norm in some "
                        "direction)")
    points = dirs / norms[:, None]
    M, iters, resid = backend.khachiyan_mvee(points, eps, min(maxiter, 20000))
    polished = False
    if resid > eps:
        # ascent tail can crawl on nearly-ellipsoidal balls; certify with
        # the Newton finisher on the same finite problem
        Mp = _mvee_polish(points, M)
        if Mp is not None:
            M = Mp
            kap = np.einsum("ij,jk,ik->i", points, np.linalg.inv(M), points)
            resid = float(kap.max() / n - 1.0)
            polished = True
    if resid > 100 * eps:
        raise MveeError(f"MVEE ascent stalled: residual {resid:.3e} after "
                        f"{iters} iterations")
    R = _inv_sqrtm_spd(n * M)
    prov = {"method": "mvee", "n_dirs": int(n_dirs), "eps": eps,
            "iters": int(iters), "residual": float(resid),
            "newton_polish": polished}
    return ReducingOp(matrix=R, provenance=prov, cube=cube, role=role)


def reducing_for(cells, psi: YoungFn, weights=None, cube=None, role="",
                 n_dirs=None, eps=1e-7):
    """Dispatch: exact for power(2), interval for n=1, MVEE otherwise."""
    n = np.asarray(cells).shape[1]
    if psi.family == "power" and psi.r == 2.0 and n > 1:
        return reducing_exact_p2(cells, weights=weights, coeff=psi.coeff,
                                 cube=cube, role=role)
    return reducing_mvee(cells, psi, n_dirs=n_dirs, eps=eps, weights=weights,
                         cube=cube, role=role)


def reducing_opnorm_pair(R1: ReducingOp, R2: ReducingOp) -> float:
    """Operator norm of the product R1 R2 (largest singular value)."""
    if R1.matrix.shape != R2.matrix.shape:
        raise DomainError("dimension mismatch")
    return sigma_max(R1.matrix @ R2.matrix)


def direction_norms(cells, psi: YoungFn, dirs, weights=None):
    """||A e||_{Psi,Q} for each probe direction e (rows of dirs)."""
    cells = np.asarray(cells, dtype=float)
    c = cells.shape[0]
    w = np.full(c, 1.0 / c) if weights is None else np.asarray(weights, float)
    if cells.shape[1] == 1:
        base = luxemburg_rows(np.abs(cells[None, :, 0, 0]), psi, weights=w)[0]
        return base * np.abs(np.asarray(dirs, float)[:, 0])
    vals = np.sqrt(np.einsum("kci->kc",
                             np.einsum("cij,kj->kci", cells, dirs) ** 2))
    return luxemburg_rows(vals, psi, weights=w)
