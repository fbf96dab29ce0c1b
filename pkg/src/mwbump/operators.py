"""Operators on grid functions: maximal, averaging, sparse, N_Q, I_alpha.

All suprema over cubes are realized over a named census: the unshifted grid
by default, optionally the union of the 3^d shifted grids, and (for small
problems, in the verify module) brute-force cell-aligned cubes.  Membership
x in Q is decided at cell midpoints; averages over shifted cubes use exact
fractional cell overlaps.

The only quadrature approximation in the package is the diagonal treatment
of the fractional integral kernel (same cell and, in d = 1, adjacent cells
integrate |x-y|^{alpha-d} exactly; in d = 2 the same-cell contribution uses
the equal-area disc value 2 pi^{1-alpha/2} h^alpha / alpha).  Every other
quantity is an exact finite sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .constants import _iter_base, apq_power
from .dyadic import SparseFamily, base_cube, level_blocks, shifted_grids
from .errors import DomainError
from .reducing import reducing_for
from .weights import WeightField, midpoints
from .young import YoungFn, luxemburg_rows


def lp_norm(f, p, d, L, weight: WeightField = None, weight_power=None):
    """(int |W^{weight_power} f|^p dx)^{1/p} with exact cell sums."""
    f = np.asarray(f, dtype=float)
    hd = 2.0 ** (-d * L)
    if f.ndim == 1:
        f = f[:, None]
    if weight is not None:
        wp = weight.matrix_power(1.0 / p if weight_power is None
                                 else weight_power)
        f = np.einsum("cij,cj->ci", wp.mats, f)
    mag = np.linalg.norm(f, axis=1)
    return float((np.sum(mag**p) * hd) ** (1.0 / p))


def weak_lq_norm(g, q, d, L):
    """sup_lambda lambda |{|g| > lambda}|^{1/q}, exact for cell functions."""
    mag = np.abs(np.asarray(g, dtype=float)).ravel()
    hd = 2.0 ** (-d * L)
    vals = np.unique(mag[mag > 0])
    if vals.size == 0:
        return 0.0
    best = 0.0
    for lam in vals:
        meas = float(np.count_nonzero(mag >= lam)) * hd
        best = max(best, lam * meas ** (1.0 / q))
    return best


def as_vector_field(f, N, n):
    """Validate/reshape a grid function to (N, n)."""
    f = np.asarray(f, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if f.shape != (N, n):
        raise DomainError(f"grid function shape {f.shape} does not match "
                          f"field geometry {(N, n)}")
    if not np.all(np.isfinite(f)):
        raise DomainError("grid function must be finite")
    return f


def _apply_matrix(mats, f):
    f = as_vector_field(f, mats.shape[0], mats.shape[1])
    return np.einsum("cij,cj->ci", mats, f)


# ---------------------------------------------------------------------------
# maximal operators
# ---------------------------------------------------------------------------

def matrix_maximal(U: WeightField, V: WeightField, alpha, p, q, f,
                   mode="single_grid", levels=None):
    """sup_{Q in census, Q ∋ x} |Q|^{alpha/d} avg_Q |U^{1/q}(x) V^{-1/p}(y) f(y)| dy.

    mode "single_grid" scans the unshifted grid; "shifted_union" sums the
    per-grid dyadic maximal functions over all 3^d shifted grids.
    """
    d, L = U.d, U.L
    if (U.d, U.L, U.n) != (V.d, V.L, V.n):
        raise DomainError("weight fields must share geometry")
    A = U.matrix_power(1.0 / q).mats
    g = _apply_matrix(V.matrix_power(-1.0 / p).mats, f)
    if g.shape[1] != U.n:
        raise DomainError("function dimension mismatch")
    H = backend.pair_vecnorm(A, g)  # H[x, y] = |A(x) g(y)|

    def grid_max(tnum):
        out = np.zeros(H.shape[0])
        if not any(tnum):
            for k, blocks in _iter_base(d, L, levels):
                vol = 2.0 ** (-k * d)
                sub = H[blocks[:, :, None], blocks[:, None, :]]
                vals = vol ** (alpha / d) * sub.mean(axis=2)
                np.maximum.at(out, blocks.ravel(), vals.ravel())
            return out
        mids = midpoints(d, L)
        k0, k1 = levels if levels is not None else (0, L)
        from .dyadic import Grid
        grid = Grid(d, tnum)
        for k in range(k0, k1 + 1):
            for cube in grid.cubes_at_level(k, inside=True):
                idx, vol = cube.cell_overlaps(L)
                w = vol / vol.sum()
                avg = H[:, idx] @ w
                lo, hi = cube.lo(), cube.hi()
                sel = np.all((mids >= lo) & (mids < hi), axis=1)
                out[sel] = np.maximum(out[sel],
                                      cube.volume ** (alpha / d) * avg[sel])
        return out

    if mode == "single_grid":
        return grid_max((0,) * d)
    if mode == "shifted_union":
        return sum(grid_max(g_.tnum) for g_ in shifted_grids(d))
    raise DomainError(f"unknown mode {mode!r}")


def brute_force_maximal(U, V, alpha, p, q, f):
    """Reference: sup over ALL cell-aligned axis-parallel cubes (small L)."""
    d, L = U.d, U.L
    A = U.matrix_power(1.0 / q).mats
    g = _apply_matrix(V.matrix_power(-1.0 / p).mats, f)
    H = backend.pair_vecnorm(A, g)
    n1 = 2**L
    out = np.zeros(H.shape[0])
    shape = (n1,) * d
    cells = np.arange(n1**d).reshape(shape)
    for side in range(1, n1 + 1):
        vol = (side / n1) ** d
        for corner in np.ndindex(*(n1 - side + 1,) * d):
            sl = tuple(slice(c, c + side) for c in corner)
            idx = cells[sl].ravel()
            avg = H[:, idx].mean(axis=1) * vol ** (alpha / d)
            out[idx] = np.maximum(out[idx], avg[idx])
    return out


def _reducing_u_per_cube(U, q, d, L, levels=None):
    A = U.matrix_power(1.0 / q).mats
    young = YoungFn.power(q)
    out = {}
    for k, blocks in _iter_base(d, L, levels):
        for i in range(blocks.shape[0]):
            out[(k, i)] = reducing_for(A[blocks[i]], young).matrix
    return out


def aux_maximal(U: WeightField, V: WeightField, alpha, p, q, f,
                levels=None, ru=None):
    """sup_Q |Q|^{alpha/d} avg_Q |R_U^q V^{-1/p}(y) f(y)| dy over the grid."""
    d, L = U.d, U.L
    g = _apply_matrix(V.matrix_power(-1.0 / p).mats, f)
    if ru is None:
        ru = _reducing_u_per_cube(U, q, d, L, levels)
    out = np.zeros(g.shape[0])
    for k, blocks in _iter_base(d, L, levels):
        vol = 2.0 ** (-k * d)
        for i in range(blocks.shape[0]):
            idx = blocks[i]
            val = vol ** (alpha / d) * float(
                np.linalg.norm(g[idx] @ ru[(k, i)].T, axis=1).mean())
            out[idx] = np.maximum(out[idx], val)
    return out


def aux_single_cube(U: WeightField, V: WeightField, alpha, p, q, f, cube):
    """B_Q^alpha: the single-cube averaging piece of the auxiliary maximal."""
    d, L = U.d, U.L
    A = U.matrix_power(1.0 / q).mats
    cells = _cube_cells_flat(cube, d, L)
    g = _apply_matrix(V.matrix_power(-1.0 / p).mats, f)
    R = reducing_for(A[cells], YoungFn.power(q)).matrix
    val = cube.volume ** (alpha / d) * float(
        np.linalg.norm(g[cells] @ R.T, axis=1).mean())
    out = np.zeros(g.shape[0])
    out[cells] = val
    return out


def _cube_cells_flat(cube, d, L):
    from .dyadic import _cube_cells
    return _cube_cells(cube, d, L)


def aux_maximal_beta(V: WeightField, p, beta, phi: YoungFn, f, levels=None):
    """sup_Q |Q|^{beta/d} avg_Q |(R_V^Phi)^{-1} V^{-1/p}(y) f(y)| dy."""
    d, L = V.d, V.L
    B = V.matrix_power(-1.0 / p).mats
    g = _apply_matrix(B, f)
    out = np.zeros(g.shape[0])
    for k, blocks in _iter_base(d, L, levels):
        vol = 2.0 ** (-k * d)
        for i in range(blocks.shape[0]):
            idx = blocks[i]
            Rinv = np.linalg.inv(reducing_for(B[idx], phi).matrix)
            val = vol ** (beta / d) * float(
                np.linalg.norm(g[idx] @ Rinv.T, axis=1).mean())
            out[idx] = np.maximum(out[idx], val)
    return out


def orlicz_maximal(phi_bar: YoungFn, beta, f, d, L, levels=None):
    """sup_Q |Q|^{beta/d} ||f||_{phi_bar, Q} chi_Q(x)."""
    mag = np.abs(np.asarray(f, dtype=float)).ravel()
    out = np.zeros(mag.size)
    for k, blocks in _iter_base(d, L, levels):
        vol = 2.0 ** (-k * d)
        norms = vol ** (beta / d) * luxemburg_rows(mag[blocks], phi_bar)
        vals = np.broadcast_to(norms[:, None], blocks.shape)
        np.maximum.at(out, blocks.ravel(), vals.ravel())
    return out


# ---------------------------------------------------------------------------
# N_Q scans
# ---------------------------------------------------------------------------

def n_q_scan(U: WeightField, V: WeightField, alpha, p, q, phi: YoungFn,
             psi: YoungFn = None, scaling="inner", levels=None):
    """N_Q fields for every cube Q of the census, via one bottom-up pass.

    N_Q(x) = sup over R in D(Q) containing x of
             |R|^{alpha/d + 1/q - 1/p} |U^{1/q}(x) R_V^Phi|_op
    (scaling="outer" uses |Q|^... for the literal reading; the two agree
    when alpha/d = 1/p - 1/q).

    Returns dict with per-cube mean-q values (avg_Q N_Q^q)^{1/q}, Luxemburg
    norms ||N_Q||_{Psi,Q} (when psi given), keyed by (level, cube_index).
    """
    d, L = U.d, U.L
    gamma = apq_power(p, q, alpha, d)
    A = U.matrix_power(1.0 / q).mats
    B = V.matrix_power(-1.0 / p).mats
    k0, k1 = levels if levels is not None else (0, L)
    # term_k[x] = |R_k(x)|^gamma |A(x) RV_{R_k(x)}|_op for the level-k cube
    terms = {}
    for k in range(k0, k1 + 1):
        blocks = level_blocks(d, L, k)
        vol = 2.0 ** (-k * d)
        t = np.empty(A.shape[0])
        for i in range(blocks.shape[0]):
            idx = blocks[i]
            R = reducing_for(B[idx], phi).matrix
            t[idx] = backend.pair_opnorm(A[idx], R[None])[:, 0]
        terms[k] = vol**gamma * t if scaling == "inner" else t
    # bottom-up running max: narr_k[x] = N over R within the level-k cube
    narr = {k1: terms[k1].copy()}
    for k in range(k1 - 1, k0 - 1, -1):
        narr[k] = np.maximum(terms[k], narr[k + 1])
    out = {}
    for k in range(k0, k1 + 1):
        blocks = level_blocks(d, L, k)
        nk = narr[k]
        if scaling == "outer":
            nk = nk * (2.0 ** (-k * d)) ** gamma
        meanq = (nk[blocks] ** q).mean(axis=1) ** (1.0 / q)
        entry = {"mean_q": meanq}
        if psi is not None:
            entry["lux_psi"] = luxemburg_rows(nk[blocks], psi)
        out[k] = entry
    return out


def n_q_field(U, V, cube, alpha, p, q, phi: YoungFn, scaling="inner"):
    """N_Q on the cells of one unshifted cube Q."""
    if any(cube.tnum):
        raise DomainError("N_Q is defined over base-grid cubes")
    d, L = U.d, U.L
    gamma = apq_power(p, q, alpha, d)
    A = U.matrix_power(1.0 / q).mats
    B = V.matrix_power(-1.0 / p).mats
    cells = _cube_cells_flat(cube, d, L)
    out = np.zeros(A.shape[0])
    for k in range(cube.k, L + 1):
        blocks = level_blocks(d, L, k)
        volg = (2.0 ** (-k * d)) ** gamma if scaling == "inner" \
            else cube.volume**gamma
        for i in range(blocks.shape[0]):
            idx = blocks[i]
            if not cube.contains_cube(base_cube(d, L, k, i)):
                continue
            R = reducing_for(B[idx], phi).matrix
            vals = volg * backend.pair_opnorm(A[idx], R[None])[:, 0]
            out[idx] = np.maximum(out[idx], vals)
    return out[cells], cells


# ---------------------------------------------------------------------------
# averaging, sparse, fractional integral, mollifier
# ---------------------------------------------------------------------------

def averaging(U: WeightField, V: WeightField, alpha, cubes, f):
    """A^alpha over a disjoint family: sum_Q |Q|^{alpha/d} (avg_Q f) chi_Q."""
    d, L = U.d, U.L
    for i, a in enumerate(cubes):
        for b in cubes[i + 1:]:
            if not a.disjoint(b):
                raise DomainError(f"cubes overlap: {a} and {b}")
    f = np.asarray(f, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    out = np.zeros_like(f)
    for cube in cubes:
        cells = _cube_cells_flat(cube, d, L)
        out[cells] = cube.volume ** (alpha / d) * f[cells].mean(axis=0)
    return out


def sparse_op(alpha, family: SparseFamily, f, d=None, L=None):
    """T^S_alpha f = sum_{Q in S} |Q|^{alpha/d} (avg_Q f) chi_Q."""
    family.validate()
    d = family.d if d is None else d
    L = family.L if L is None else L
    f = np.asarray(f, dtype=float)
    vec = f.ndim > 1
    if not vec:
        f = f[:, None]
    out = np.zeros_like(f)
    for cube in family.cubes:
        cells = _cube_cells_flat(cube, d, L)
        out[cells] += cube.volume ** (alpha / d) * f[cells].mean(axis=0)
    return out if vec else out[:, 0]


def frac_kernel(alpha, d, L):
    """Kernel matrix K with I_alpha f = K @ (f per cell), cell measures
    folded in.  Diagonal/adjacent handling is exact in d = 1; in d = 2 the
    same-cell term uses the equal-area disc value 2 pi^{1-a/2} h^a / a."""
    if not 0 < alpha < d:
        raise DomainError(f"need 0 < alpha < d, got alpha={alpha}")
    x = midpoints(d, L)
    h = 2.0**-L
    diff = x[:, None, :] - x[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    with np.errstate(divide="ignore"):
        K = np.where(dist > 0, dist ** (alpha - d), 0.0) * h**d
    if d == 1:
        np.fill_diagonal(K, 2.0 * (h / 2.0) ** alpha / alpha)
        adj = ((1.5 * h) ** alpha - (0.5 * h) ** alpha) / alpha
        i = np.arange(2**L - 1)
        K[i, i + 1] = adj
        K[i + 1, i] = adj
    else:
        np.fill_diagonal(K, 2.0 * math.pi ** (1 - alpha / 2.0)
                         * h**alpha / alpha)
    return K


def frac_integral(alpha, f, d, L, U: WeightField = None,
                  V: WeightField = None, p=None, q=None, kernel=None):
    """I_alpha f, optionally in the weighted form U^{1/q} I_alpha(V^{-1/p} f)."""
    K = frac_kernel(alpha, d, L) if kernel is None else kernel
    f = np.asarray(f, dtype=float)
    vec = f.ndim > 1
    if not vec:
        f = f[:, None]
    if V is not None:
        f = _apply_matrix(V.matrix_power(-1.0 / p).mats, f)
    out = K @ f
    if U is not None:
        out = _apply_matrix(U.matrix_power(1.0 / q).mats, out)
    return out if vec else out[:, 0]


def frac_integral_at(points, alpha, f, d, L):
    """Point evaluation of I_alpha f by the midpoint rule (points off-grid)."""
    if not 0 < alpha < d:
        raise DomainError(f"need 0 < alpha < d, got alpha={alpha}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x = midpoints(d, L)
    h = 2.0**-L
    dist = np.linalg.norm(pts[:, None, :] - x[None, :, :], axis=2)
    K = dist ** (alpha - d) * h**d
    return K @ np.asarray(f, dtype=float).ravel()


def mollify(t, f, d, L):
    """Convolution with the bump (1-|x|^2)^2 at scale t, kernel renormalized
    on the box (reflection-free); returns (field, boundary flags)."""
    if t <= 0:
        raise DomainError("mollifier scale must be positive")
    f = np.asarray(f, dtype=float)
    vec = f.ndim > 1
    if not vec:
        f = f[:, None]
    x = midpoints(d, L)
    dist = np.linalg.norm(x[:, None, :] - x[None, :, :], axis=2) / t
    W = np.maximum(0.0, 1.0 - dist**2) ** 2
    W /= W.sum(axis=1, keepdims=True)
    out = W @ f
    margin = np.min(np.minimum(x, 1.0 - x), axis=1)
    flags = margin < t
    return (out if vec else out[:, 0]), flags


def approx_identity_check(U: WeightField, V: WeightField, p, f, t_list=None):
    """sup_t ||phi_t * f||_{L^p(U)} / ||f||_{L^p(V)} and the deviation ladder
    ||phi_t * f - f||_{L^p(U)} along t."""
    d, L = U.d, U.L
    if t_list is None:
        t_list = [2.0**-j for j in range(1, 6)]
    fin = lp_norm(f, p, d, L, weight=V)
    ratios, devs = [], []
    f2 = np.asarray(f, dtype=float)
    if f2.ndim == 1:
        f2 = f2[:, None]
    for t in t_list:
        conv, flags = mollify(t, f2, d, L)
        ratios.append(lp_norm(conv, p, d, L, weight=U) / fin)
        devs.append(lp_norm(conv - f2, p, d, L, weight=U))
    return {"t": list(t_list), "sup_ratio": max(ratios),
            "ratios": ratios, "deviations": devs}


# ---------------------------------------------------------------------------
# operator specs (config-facing)
# ---------------------------------------------------------------------------

_KINDS = ("matrix_maximal", "aux_maximal", "aux_maximal_beta",
          "orlicz_maximal", "averaging", "sparse", "frac_integral",
          "mollifier")


@dataclass
class OperatorSpec:
    """A configured operator: kind plus parameters, applicable to fields.

    The in/out norm pair is the one its boundedness statement uses: the
    already-weighted operators (maximal family, weighted sparse / fractional
    integral) pair plain L^p -> L^q; averaging and the mollifier pair
    L^p(V) -> L^q(U).
    """

    kind: str
    U: WeightField = None
    V: WeightField = None
    p: float = 2.0
    q: float = None
    alpha: float = 0.0
    phi: YoungFn = None
    psi: YoungFn = None
    cubes: list = None
    family: SparseFamily = None
    t: float = 0.5
    mode: str = "single_grid"
    weighted: bool = True
    check: bool = True

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown operator kind {self.kind!r}")
        if self.q is None:
            self.q = self.p
        if self.check:
            self._check_params()
        # reducing operators / kernels depend only on the weights and the
        # geometry: cache across applies
        self._ru_cache = None
        self._kernel_cache = None

    def _check_params(self):
        d = self.U.d if self.U is not None else 1
        if self.kind in ("matrix_maximal", "aux_maximal"):
            if 1.0 / self.p - 1.0 / self.q > self.alpha / d + 1e-12:
                raise DomainError(
                    "need 1/p - 1/q <= alpha/d (else only trivial weights)")
        if self.kind == "frac_integral" and not 0 < self.alpha < d:
            raise DomainError("fractional integral needs 0 < alpha < d")

    @property
    def geometry(self):
        W = self.U if self.U is not None else self.V
        return W.d, W.L

    def apply(self, f):
        k = self.kind
        if k == "matrix_maximal":
            return matrix_maximal(self.U, self.V, self.alpha, self.p, self.q,
                                  f, mode=self.mode)
        if k == "aux_maximal":
            if self._ru_cache is None:
                self._ru_cache = _reducing_u_per_cube(self.U, self.q,
                                                      self.U.d, self.U.L)
            return aux_maximal(self.U, self.V, self.alpha, self.p, self.q, f,
                               ru=self._ru_cache)
        if k == "aux_maximal_beta":
            beta = self.alpha
            return aux_maximal_beta(self.V, self.p, beta, self.phi, f)
        if k == "orlicz_maximal":
            d, L = self.geometry
            return orlicz_maximal(self.phi, self.alpha, f, d, L)
        if k == "averaging":
            return averaging(self.U, self.V, self.alpha, self.cubes, f)
        if k == "sparse":
            d, L = self.geometry
            if self.weighted:
                g = _apply_matrix(self.V.matrix_power(-1.0 / self.p).mats, f)
                g = sparse_op(self.alpha, self.family, g, d, L)
                return _apply_matrix(self.U.matrix_power(1.0 / self.q).mats, g)
            return sparse_op(self.alpha, self.family, f, d, L)
        if k == "frac_integral":
            d, L = self.geometry
            if self._kernel_cache is None:
                self._kernel_cache = frac_kernel(self.alpha, d, L)
            if self.weighted:
                return frac_integral(self.alpha, f, d, L, U=self.U, V=self.V,
                                     p=self.p, q=self.q,
                                     kernel=self._kernel_cache)
            return frac_integral(self.alpha, f, d, L,
                                 kernel=self._kernel_cache)
        if k == "mollifier":
            d, L = self.geometry
            return mollify(self.t, f, d, L)[0]
        raise DomainError(k)

    def input_norm(self, f):
        d, L = self.geometry
        if self.kind in ("averaging", "mollifier"):
            return lp_norm(f, self.p, d, L, weight=self.V)
        return lp_norm(f, self.p, d, L)

    def output_norm(self, g):
        d, L = self.geometry
        if self.kind == "averaging":
            return lp_norm(g, self.q, d, L, weight=self.U)
        if self.kind == "mollifier":
            return lp_norm(g, self.p, d, L, weight=self.U)
        return lp_norm(g, self.q, d, L)

    def weak_output_norm(self, g):
        d, L = self.geometry
        if np.asarray(g).ndim > 1:
            g = np.linalg.norm(np.asarray(g, float), axis=1)
        return weak_lq_norm(g, self.q, d, L)
