"""Weight constants over dyadic cube censuses.

Every constant is a supremum over the scanned cubes of the box; the default
census is the unshifted grid, levels 0..L (boundary-clipped shifted grids can
be enabled).  All cube averages are exact finite sums over cells; Orlicz
norms over shifted cubes use the exact fractional cell overlaps as weights.

Closed forms, in the scalar n = 1 case, reduce to the classical expressions;
the verify module cross-checks that against an independent scalar path.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .dyadic import base_cube, level_blocks, shifted_grids
from .errors import DomainError
from .reducing import reducing_for
from .weights import WeightField, sigma_max
from .young import YoungFn, classify_b, luxemburg_rows

CENSUSES = ("dyadic", "shifted", "brute")


@dataclass
class ConstantReport:
    name: str
    value: float
    cube: str
    method: str               # definitional | reducing | estimated
    params: dict = field(default_factory=dict)
    census: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    CSV_HEADER = "name,p,q,alpha,phi,psi,value,cube,method"

    def csv_row(self):
        p = self.params
        return ",".join([
            self.name,
            str(p.get("p", "")), str(p.get("q", "")),
            str(p.get("alpha", "")),
            str(p.get("phi", "")), str(p.get("psi", "")),
            repr(self.value), f"\"{self.cube}\"", self.method,
        ])

    def to_json_dict(self):
        return {
            "name": self.name, "value": self.value, "cube": self.cube,
            "method": self.method, "params": self.params,
            "census": self.census, "extras": self.extras,
        }


def _census_dict(census, d, L, levels):
    k0, k1 = levels if levels is not None else (0, L)
    return {"grids": census, "levels": [k0, k1],
            "cubes": "fully inside the box"}


def _iter_base(d, L, levels=None):
    k0, k1 = levels if levels is not None else (0, L)
    for k in range(k0, k1 + 1):
        yield k, level_blocks(d, L, k)


def _iter_shifted(d, L, levels=None):
    k0, k1 = levels if levels is not None else (0, L)
    for grid in shifted_grids(d):
        if not any(grid.tnum):
            continue
        for k in range(k0, k1 + 1):
            for cube in grid.cubes_at_level(k, inside=True):
                idx, vol = cube.cell_overlaps(L)
                yield cube, idx, vol / vol.sum()


class _AlignedCube:
    """A cell-aligned cube of the brute-force census (uniform cell weights)."""

    __slots__ = ("corner", "side", "d", "L")

    def __init__(self, corner, side, d, L):
        self.corner = corner
        self.side = side
        self.d = d
        self.L = L

    @property
    def volume(self):
        return (self.side * 2.0**-self.L) ** self.d

    def __str__(self):
        lo = ",".join(str(c) for c in self.corner)
        return f"aligned corner=({lo}) side={self.side} L={self.L}"


def _iter_aligned(d, L):
    """All axis-parallel cubes with corners on the cell lattice."""
    if d * L > 12:
        raise DomainError("brute census is for small problems (d*L <= 12)")
    n1 = 2**L
    cells = np.arange(n1**d).reshape((n1,) * d)
    for side in range(1, n1 + 1):
        w = np.full(side**d, side ** (-float(d)))
        for corner in np.ndindex(*(n1 - side + 1,) * d):
            sl = tuple(slice(c, c + side) for c in corner)
            idx = cells[sl].ravel()
            yield _AlignedCube(corner, side, d, L), idx, w


def _extra_cubes(census, d, L, levels=None):
    if census == "shifted":
        yield from _iter_shifted(d, L, levels)
    elif census == "brute":
        yield from _iter_aligned(d, L)


def apq_power(p, q, alpha, d):
    return alpha / d + 1.0 / q - 1.0 / p


def _check_pq_alpha(p, q, alpha, d, allow_p1=False):
    pmin = 1.0 if allow_p1 else 1.0 + 1e-12
    if not (p >= pmin and p <= q and q < math.inf):
        raise DomainError(f"need {'1 <=' if allow_p1 else '1 <'} p <= q, "
                          f"got p={p}, q={q}")
    if not 0 <= alpha < d:
        raise DomainError(f"need 0 <= alpha < d, got alpha={alpha}")


class _Best:
    def __init__(self):
        self.value = -math.inf
        self.cube = None

    def update(self, value, cube):
        if value > self.value:
            self.value = value
            self.cube = cube

    def update_level(self, vals, d, L, k):
        i = int(np.argmax(vals))
        self.update(float(vals[i]), base_cube(d, L, k, i))


# ---------------------------------------------------------------------------
# A_p and A_{p,q}
# ---------------------------------------------------------------------------

def matrix_ap(W: WeightField, p, census="dyadic", levels=None):
    """One-weight matrix A_p constant: sup over cubes of the double average
    avg_x ( avg_y |W^{1/p}(x) W^{-1/p}(y)|_op^{p'} )^{p/p'}."""
    if not 1 < p < math.inf:
        raise DomainError(f"need 1 < p < inf, got {p}")
    pp = p / (p - 1.0)
    A = W.matrix_power(1.0 / p).mats
    B = W.matrix_power(-1.0 / p).mats
    G = backend.pair_opnorm(A, B)
    best = _Best()
    d, L = W.d, W.L
    for k, blocks in _iter_base(d, L, levels):
        sub = G[blocks[:, :, None], blocks[:, None, :]]
        vals = ((sub**pp).mean(axis=2) ** (p / pp)).mean(axis=1)
        best.update_level(vals, d, L, k)
    for cube, idx, w in _extra_cubes(census, d, L, levels):
        sub = G[np.ix_(idx, idx)]
        val = float(((sub**pp) @ w) ** (p / pp) @ w)
        best.update(val, cube)
    return ConstantReport(
        name="matrix_ap", value=best.value, cube=str(best.cube),
        method="definitional", params={"p": p},
        census=_census_dict(census, d, L, levels))


def two_weight_apq(U: WeightField, V: WeightField, p, q, alpha,
                   census="dyadic", levels=None):
    """Two-weight A_{p,q}^alpha constant (p = 1 uses the esssup branch)."""
    d, L = U.d, U.L
    _check_pq_alpha(p, q, alpha, d, allow_p1=True)
    if (U.d, U.L, U.n) != (V.d, V.L, V.n):
        raise DomainError("weight fields must share geometry")
    A = U.matrix_power(1.0 / q).mats
    pw = apq_power(p, q, alpha, d)
    best = _Best()
    if p > 1:
        pp = p / (p - 1.0)
        B = V.matrix_power(-1.0 / p).mats
        G = backend.pair_opnorm(A, B)
        for k, blocks in _iter_base(d, L, levels):
            vol = 2.0 ** (-k * d)
            sub = G[blocks[:, :, None], blocks[:, None, :]]
            vals = ((sub**pp).mean(axis=2) ** (q / pp)).mean(axis=1) ** (1 / q)
            best.update_level(vol**pw * vals, d, L, k)
        for cube, idx, w in _extra_cubes(census, d, L, levels):
            sub = G[np.ix_(idx, idx)]
            val = float((((sub**pp) @ w) ** (q / pp) @ w) ** (1 / q))
            best.update(cube.volume**pw * val, cube)
    else:
        B = V.matrix_power(-1.0).mats
        G = backend.pair_opnorm(A, B)
        for k, blocks in _iter_base(d, L, levels):
            vol = 2.0 ** (-k * d)
            sub = G[blocks[:, :, None], blocks[:, None, :]]
            # esssup over y of the L^q average in x (cells make it a max)
            vals = ((sub**q).mean(axis=1) ** (1 / q)).max(axis=1)
            best.update_level(vol**pw * vals, d, L, k)
        for cube, idx, w in _extra_cubes(census, d, L, levels):
            sub = G[np.ix_(idx, idx)]
            val = float(np.max((w @ sub**q) ** (1 / q)))
            best.update(cube.volume**pw * val, cube)
    return ConstantReport(
        name="two_weight_apq", value=best.value, cube=str(best.cube),
        method="definitional", params={"p": p, "q": q, "alpha": alpha},
        census=_census_dict(census, d, L, levels))


# ---------------------------------------------------------------------------
# Orlicz bump constants
# ---------------------------------------------------------------------------

def _enforce_bump_classes(p, q, phi, psi, variant, enforce):
    checks = []
    if variant in ("maximal", "double"):
        checks.append(("phi-bar in B_{p,q}", phi.associate(), p, q))
    if variant == "double":
        qq = q / (q - 1.0)
        checks.append(("psi-bar in B_{q'}", psi.associate(), qq, qq))
    if variant == "czo":
        checks.append(("phi-bar in B_p", phi.associate(), p, p))
        pp = p / (p - 1.0)
        checks.append(("psi-bar in B_{p'}", psi.associate(), pp, pp))
    for label, fn, pc, qc in checks:
        res = classify_b(fn, pc, qc)
        if res.member is False:
            if enforce:
                raise DomainError(f"bump precondition failed: {label}")
            warnings.warn(f"bump precondition overridden: {label}",
                          stacklevel=3)
        elif res.member is None:
            warnings.warn(f"bump precondition inconclusive: {label}",
                          stacklevel=3)


def bump_constant(U, V, p, q, alpha, phi: YoungFn, psi: YoungFn = None,
                  variant="double", census="dyadic", levels=None,
                  enforce_b=True, literal_inner=False):
    """Orlicz bump constants.

    variant "maximal": sup |Q|^pow ( avg_x ||U^{1/q}V^{-1/p}||_{Phi,Q}^q )^{1/q}
    variant "double":  sup |Q|^pow || ||U^{1/q}(x)V^{-1/p}(y)||_{Phi_y,Q} ||_{Psi_x,Q}
    variant "czo":     double with exponent 1/p on U, no |Q| factor (p = q)

    The maximal variant raises the inner norm to the q-th power before the
    outer average; ``literal_inner=True`` switches to the first-power
    reading (the two agree when the one-weight reduction applies).
    """
    d, L = U.d, U.L
    if variant not in ("maximal", "double", "czo"):
        raise DomainError(f"unknown bump variant {variant!r}")
    if variant == "czo":
        if p != q:
            raise DomainError("czo bump requires p = q")
        if alpha != 0:
            raise DomainError("czo bump requires alpha = 0")
    _check_pq_alpha(p, q, alpha, d)
    if variant in ("double", "czo") and psi is None:
        raise DomainError(f"variant {variant!r} needs an outer Young function")
    _enforce_bump_classes(p, q, phi, psi, variant, enforce_b)

    u_exp = 1.0 / p if variant == "czo" else 1.0 / q
    A = U.matrix_power(u_exp).mats
    B = V.matrix_power(-1.0 / p).mats
    G = backend.pair_opnorm(A, B)
    pw = 0.0 if variant == "czo" else apq_power(p, q, alpha, d)
    best = _Best()
    for k, blocks in _iter_base(d, L, levels):
        vol = 2.0 ** (-k * d)
        m, c = blocks.shape
        vals = np.empty(m)
        for i in range(m):
            idx = blocks[i]
            inner = luxemburg_rows(G[np.ix_(idx, idx)], phi)
            if variant == "maximal":
                if literal_inner:
                    vals[i] = inner.mean() ** (1.0 / q)
                else:
                    vals[i] = (inner**q).mean() ** (1.0 / q)
            else:
                vals[i] = luxemburg_rows(inner[None, :], psi)[0]
        best.update_level(vol**pw * vals, d, L, k)
    for cube, idx, w in _extra_cubes(census, d, L, levels):
        inner = luxemburg_rows(G[np.ix_(idx, idx)], phi, weights=w)
        if variant == "maximal":
            v = ((inner @ w) if literal_inner
                 else (inner**q) @ w) ** (1.0 / q)
        else:
            v = luxemburg_rows(inner[None, :], psi, weights=w)[0]
        best.update(cube.volume**pw * float(v), cube)
    name = {"maximal": "bump_maximal", "double": "bump_double",
            "czo": "bump_czo"}[variant]
    return ConstantReport(
        name=name, value=best.value, cube=str(best.cube),
        method="definitional",
        params={"p": p, "q": q, "alpha": alpha, "phi": str(phi),
                "psi": str(psi) if psi is not None else None,
                "literal_inner": literal_inner},
        census=_census_dict(census, d, L, levels))


def reducing_sweep(cells_full, d, L, young: YoungFn, levels=None):
    """Reducing-operator matrices for every base cube; keyed by (k, index).

    Per-cube constructions are independent; the worker knob parallelizes
    them (the compiled kernels release the GIL)."""
    from .config import pool_map

    keys, slices = [], []
    for k, blocks in _iter_base(d, L, levels):
        for i in range(blocks.shape[0]):
            keys.append((k, i))
            slices.append(blocks[i])
    mats = pool_map(lambda idx: reducing_for(cells_full[idx], young).matrix,
                    slices)
    return dict(zip(keys, mats))


def bump_constant_reducing(U, V, p, q, alpha, phi: YoungFn,
                           psi: YoungFn = None, variant="double",
                           census="dyadic", levels=None, enforce_b=True):
    """Bump constants through reducing operators:
    sup |Q|^pow |R_U R_V|_op with R_U, R_V built per cube."""
    d, L = U.d, U.L
    if variant == "czo":
        if p != q or alpha != 0:
            raise DomainError("czo requires p = q and alpha = 0")
    elif variant == "apq":
        pass
    else:
        if variant not in ("maximal", "double"):
            raise DomainError(f"unknown bump variant {variant!r}")
    _check_pq_alpha(p, q, alpha, d)
    if variant in ("double", "czo") and psi is None:
        raise DomainError(f"variant {variant!r} needs an outer Young function")
    if variant != "apq" and phi is None:
        raise DomainError(f"variant {variant!r} needs an inner Young function")
    if variant in ("maximal", "double", "czo"):
        _enforce_bump_classes(p, q, phi, psi, variant, enforce_b)

    u_exp = 1.0 / p if variant == "czo" else 1.0 / q
    u_young = psi if variant in ("double", "czo") else YoungFn.power(q)
    v_young = YoungFn.power(p / (p - 1.0)) if variant == "apq" else phi
    A = U.matrix_power(u_exp).mats
    B = V.matrix_power(-1.0 / p).mats
    pw = 0.0 if variant == "czo" else apq_power(p, q, alpha, d)
    ru = reducing_sweep(A, d, L, u_young, levels)
    rv = reducing_sweep(B, d, L, v_young, levels)
    best = _Best()
    for k, blocks in _iter_base(d, L, levels):
        vol = 2.0 ** (-k * d)
        for i in range(blocks.shape[0]):
            val = vol**pw * sigma_max(ru[(k, i)] @ rv[(k, i)])
            best.update(val, base_cube(d, L, k, i))
    name = {"maximal": "bump_maximal", "double": "bump_double",
            "czo": "bump_czo", "apq": "two_weight_apq"}[variant]
    return ConstantReport(
        name=name, value=best.value, cube=str(best.cube), method="reducing",
        params={"p": p, "q": q, "alpha": alpha,
                "phi": str(phi) if phi is not None else None,
                "psi": str(psi) if psi is not None else None},
        census=_census_dict("dyadic", d, L, levels))


# ---------------------------------------------------------------------------
# A_infinity, scalar directions, reverse Holder
# ---------------------------------------------------------------------------

def fujii_wilson_ainfty(w, d, L, census="dyadic", levels=None):
    """Fujii-Wilson constant sup_Q (1/w(Q)) int_Q M(w chi_Q) dx with M the
    maximal operator over the scanned census."""
    w = np.asarray(w, dtype=float).ravel()
    if np.any(w < 0):
        raise DomainError("scalar weight must be nonnegative")
    N = w.size
    hd = 1.0 / N
    best = _Best()
    if census == "dyadic":
        # maxv[k][x] = max over levels j >= k of the level-j average at x
        k0, k1 = levels if levels is not None else (0, L)
        maxv = w.copy()
        per_level = {L: w.copy()}
        for k in range(L - 1, -1, -1):
            blocks = level_blocks(d, L, k)
            means = w[blocks].mean(axis=1)
            bc = np.empty(N)
            for i in range(blocks.shape[0]):
                bc[blocks[i]] = means[i]
            maxv = np.maximum(maxv, bc)
            per_level[k] = maxv.copy()
        for k in range(k0, k1 + 1):
            blocks = level_blocks(d, L, k)
            mass = w[blocks].sum(axis=1)
            numer = per_level[k][blocks].sum(axis=1)
            vals = np.where(mass > 0, numer / np.maximum(mass, 1e-300), 1.0)
            best.update_level(vals, d, L, k)
    else:
        # slow generic path: every census cube against every census cube,
        # with exact overlap volumes (midpoint evaluation of M per cell)
        cubes = [(base_cube(d, L, k, i), blocks[i],
                  np.full(blocks.shape[1], hd))
                 for k, blocks in _iter_base(d, L, levels)
                 for i in range(blocks.shape[0])]
        cubes += [(cube, idx, wt * cube.volume)
                  for cube, idx, wt in _extra_cubes(census, d, L, levels)]
        for q, qidx, qvol in cubes:
            wq = np.zeros(N)
            wq[qidx] = w[qidx]
            mass = float(w[qidx] @ qvol)
            if mass <= 0:
                continue
            mx = np.zeros(N)
            for r, ridx, rvol in cubes:
                avg = float(wq[ridx] @ rvol) / rvol.sum()
                mx[ridx] = np.maximum(mx[ridx], avg)
            val = float(mx[qidx] @ qvol / mass)
            best.update(val, q)
    return ConstantReport(
        name="fujii_wilson_ainfty", value=best.value, cube=str(best.cube),
        method="definitional", params={},
        census=_census_dict(census, d, L, levels))


def _direction_weight(W: WeightField, p, e):
    Wp = W.matrix_power(1.0 / p).mats
    return np.linalg.norm(Wp @ np.asarray(e, float), axis=1) ** p


def scalar_ainfty_sup(W: WeightField, p, n_dirs=64, census="dyadic",
                      levels=None):
    """sup over directions e of the Fujii-Wilson constant of |W^{1/p}e|^p.

    Reported as a lower bound (finitely many directions, plus golden-section
    refinement of the best angle when n = 2).
    """
    if p <= 1:
        raise DomainError("need p > 1")
    d, L, n = W.d, W.L, W.n
    from .reducing import unit_directions

    dirs = np.vstack([np.eye(n), unit_directions(n, n_dirs)])
    Wp = W.matrix_power(1.0 / p).mats

    def fw_of(e):
        wvals = np.linalg.norm(Wp @ e, axis=1) ** p
        return fujii_wilson_ainfty(wvals, d, L, census, levels)

    reports = [fw_of(e) for e in dirs]
    values = np.array([r.value for r in reports])
    best_i = int(np.argmax(values))
    best_val, best_dir = float(values[best_i]), dirs[best_i]
    if n == 2:
        th0 = math.atan2(best_dir[1], best_dir[0])
        span = math.pi / (n_dirs + 1)
        lo, hi = th0 - span, th0 + span
        invphi = (math.sqrt(5) - 1) / 2
        for _ in range(25):
            m1 = hi - invphi * (hi - lo)
            m2 = lo + invphi * (hi - lo)
            f1 = fw_of(np.array([math.cos(m1), math.sin(m1)])).value
            f2 = fw_of(np.array([math.cos(m2), math.sin(m2)])).value
            if f1 < f2:
                lo = m1
            else:
                hi = m2
        th = 0.5 * (lo + hi)
        e = np.array([math.cos(th), math.sin(th)])
        r = fw_of(e)
        if r.value > best_val:
            best_val, best_dir = r.value, e
    attain = fw_of(best_dir)
    return ConstantReport(
        name="scalar_ainfty_sup", value=best_val, cube=attain.cube,
        method="definitional", params={"p": p, "n_dirs": n_dirs},
        census=_census_dict(census, d, L, levels),
        extras={"lower_bound": True, "direction": best_dir.tolist()})


def rh_exponents(W: WeightField, p, n_dirs=64, census="dyadic", levels=None):
    """Sharp reverse-Holder exponents (s, r):
    s = 1 + 1/(2^{d+11} sup_e [|W^{1/p}e|^p]_{Ainf}) and the dual r."""
    d = W.d
    pp = p / (p - 1.0)
    sup_w = scalar_ainfty_sup(W, p, n_dirs, census, levels).value
    Wdual = W.matrix_power(-pp / p)
    sup_dual = scalar_ainfty_sup(Wdual, pp, n_dirs, census, levels).value
    s = 1.0 + 1.0 / (2.0 ** (d + 11) * sup_w)
    r = 1.0 + 1.0 / (2.0 ** (d + 11) * sup_dual)
    return s, r
