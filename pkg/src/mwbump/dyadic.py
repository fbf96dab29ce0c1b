"""Dyadic grids, shifted grids, stopping-time families, and sparse families.

The working box is [0,1)^d at finest level L (cells are the level-L cubes of
the unshifted grid).  Shifted grids carry a per-axis shift t in {0, +-1/3};
a level-k cube of grid t occupies 2^{-k}([0,1)^d + m + (-1)^k t).  The sign
alternation between levels is what makes each shifted family nested (two
cubes of one grid intersect in the empty set or the smaller cube); levels
are indexed by refinement depth, so side(k) = 2^{-k}.

Shift arithmetic is exact: a cube edge sits at (3 m_i + (-1)^k t_i) / (3 2^k)
with integer numerator, so containment tests never see float drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import DomainError, PackingError

_SHIFT_STR = {-1: "-1/3", 0: "0", 1: "1/3"}


@dataclass(frozen=True, order=True)
class Cube:
    """A cube of a (possibly shifted) dyadic grid, identified exactly."""

    tnum: tuple  # per-axis shift numerator over 3, each in {-1, 0, 1}
    k: int       # level = refinement depth, side 2^{-k}
    m: tuple     # integer index vector

    @property
    def d(self):
        return len(self.m)

    @property
    def side(self):
        return 2.0 ** (-self.k)

    @property
    def volume(self):
        return 2.0 ** (-self.k * self.d)

    def _nums(self):
        """Per-axis lower-corner numerators over denominator 3 * 2^k."""
        sign = -1 if self.k % 2 else 1
        return tuple(3 * mi + sign * ti for mi, ti in zip(self.m, self.tnum))

    def lo(self):
        den = 3.0 * 2.0**self.k
        return tuple(a / den for a in self._nums())

    def hi(self):
        den = 3.0 * 2.0**self.k
        return tuple((a + 3) / den for a in self._nums())

    def contains_point(self, x):
        return all(lo <= xi < hi for lo, xi, hi in zip(self.lo(), x, self.hi()))

    def contains_cube(self, other: "Cube") -> bool:
        """Exact containment test via integer cross-multiplication."""
        a = self._nums()
        b = other._nums()
        ka, kb = self.k, other.k
        # compare a / (3 2^ka) <= b / (3 2^kb): a 2^kb <= b 2^ka
        for ai, bi in zip(a, b):
            if ai * 2**kb > bi * 2**ka:
                return False
            if (bi + 3) * 2**ka > (ai + 3) * 2**kb:
                return False
        return True

    def disjoint(self, other: "Cube") -> bool:
        a, b = self._nums(), other._nums()
        ka, kb = self.k, other.k
        for ai, bi in zip(a, b):
            if (ai + 3) * 2**kb <= bi * 2**ka:
                return True
            if (bi + 3) * 2**ka <= ai * 2**kb:
                return True
        return False

    def parent(self):
        if self.k == 0:
            return None
        sign = -1 if self.k % 2 else 1
        m = tuple((mi + sign * ti) >> 1 for mi, ti in zip(self.m, self.tnum))
        return Cube(self.tnum, self.k - 1, m)

    def children(self):
        sign = 1 if self.k % 2 else -1  # sign used at level k+1
        out = []
        for bits in product((0, 1), repeat=self.d):
            m = tuple(2 * mi + bi - sign * ti
                      for mi, bi, ti in zip(self.m, bits, self.tnum))
            out.append(Cube(self.tnum, self.k + 1, m))
        return out

    def cell_block(self, L):
        """Cell index ranges per axis for an unshifted cube (exact block)."""
        if any(self.tnum):
            raise ValueError("cell_block is for unshifted cubes")
        w = 2 ** (L - self.k)
        return [(mi * w, (mi + 1) * w) for mi in self.m]

    def cell_overlaps(self, L):
        """Cells meeting this cube with overlap volumes (flat idx, volumes)."""
        nL = 2**L
        axes = []
        for a in self._nums():
            # cube axis interval [a, a+3) / (3 2^k); cell j -> [j, j+1) / 2^L
            lo = a * nL / (3.0 * 2**self.k)
            hi = (a + 3) * nL / (3.0 * 2**self.k)
            j0 = max(0, math.floor(lo))
            j1 = min(nL, math.ceil(hi))
            idx, frac = [], []
            for j in range(j0, j1):
                ov = min(hi, j + 1) - max(lo, j)
                if ov > 1e-15:
                    idx.append(j)
                    frac.append(ov / nL)
            axes.append((np.array(idx, dtype=np.int64), np.array(frac)))
        flat = np.zeros(1, dtype=np.int64)
        vol = np.ones(1)
        for idx, frac in axes:
            flat = (flat[:, None] * nL + idx[None, :]).ravel()
            vol = (vol[:, None] * frac[None, :]).ravel()
        return flat, vol

    def __str__(self):
        t = ",".join(_SHIFT_STR[ti] for ti in self.tnum)
        m = ",".join(str(mi) for mi in self.m)
        return f"t=({t}) k={self.k} m=({m})"


@dataclass(frozen=True)
class Grid:
    """One shifted dyadic grid over the unit box."""

    d: int
    tnum: tuple

    @property
    def shift(self):
        return tuple(ti / 3.0 for ti in self.tnum)

    def _axis_range(self, k, inside):
        sign = -1 if k % 2 else 1
        ranges = []
        for ti in self.tnum:
            s = sign * ti
            if inside:
                lo = 0 if s >= 0 else 1
                hi = 2**k - 1 - (1 if s > 0 else 0)
            else:
                lo = -1 if s > 0 else 0
                hi = 2**k if s < 0 else 2**k - 1
            ranges.append(range(lo, hi + 1))
        return ranges

    def cubes_at_level(self, k, inside=True):
        """Cubes fully inside (inside=True) or meeting the box."""
        return [Cube(self.tnum, k, m)
                for m in product(*self._axis_range(k, inside))]

    def cube_containing(self, x, k):
        """The level-k cube of this grid containing the point x."""
        sign = -1 if k % 2 else 1
        m = tuple(math.floor(xi * 2**k - sign * ti / 3.0)
                  for xi, ti in zip(x, self.tnum))
        return Cube(self.tnum, k, m)


def shifted_grids(d):
    """All 3^d shifted grids, shifts ordered lexicographically."""
    if d < 1:
        raise DomainError("dimension must be >= 1")
    return [Grid(d, t) for t in product((-1, 0, 1), repeat=d)]


def base_grid(d):
    return Grid(d, (0,) * d)


def containing_shifted_cube(lo, side):
    """A shifted dyadic cube containing [lo, lo+side)^d with side <= 3 side.

    Deterministic: shifts are tried in lexicographic order, levels from the
    coarsest admissible one down.
    """
    lo = tuple(float(x) for x in lo)
    side = float(side)
    if side <= 0:
        raise DomainError("degenerate cube")
    d = len(lo)
    k_min = max(0, math.ceil(-math.log2(3 * side) - 1e-12))
    k_max = math.floor(-math.log2(side) + 1e-12)
    eps = 1e-12 * side
    for grid in shifted_grids(d):
        for k in range(k_min, k_max + 1):
            cand = grid.cube_containing(lo, k)
            clo, chi = cand.lo(), cand.hi()
            if all(cl <= li + eps and li + side <= ch + eps
                   for cl, li, ch in zip(clo, lo, chi)):
                return grid.shift, cand
    raise RuntimeError("no shifted container found (should not happen)")


# ---------------------------------------------------------------------------
# cell-block indexing of the unshifted grid (the scan workhorse)
# ---------------------------------------------------------------------------

_BLOCK_CACHE = {}


def level_blocks(d, L, k):
    """Flat cell indices per level-k cube: array (2^{kd}, 2^{(L-k)d}).

    Cube order is row-major in m; together with the cube order of
    ``base_grid(d).cubes_at_level(k)`` the rows line up.
    """
    key = (d, L, k)
    if key in _BLOCK_CACHE:
        return _BLOCK_CACHE[key]
    n = 2**L
    b = 2 ** (L - k)
    idx = np.arange(2**k, dtype=np.int64)[:, None] * b + \
        np.arange(b, dtype=np.int64)[None, :]
    out = idx
    for _ in range(d - 1):
        out = (out[:, None, :, None] * n + idx[None, :, None, :])
        out = out.reshape(out.shape[0] * idx.shape[0], -1)
    _BLOCK_CACHE[key] = out
    return out


def base_cube(d, L, k, flat_index):
    """Cube object for row ``flat_index`` of level_blocks(d, L, k)."""
    m = []
    rem = int(flat_index)
    for axis in range(d):
        power = 2 ** (k * (d - 1 - axis))
        m.append(rem // power)
        rem %= power
    return Cube((0,) * d, k, tuple(m))


# ---------------------------------------------------------------------------
# stopping families and sparse families
# ---------------------------------------------------------------------------

@dataclass
class StoppingFamily:
    """Maximal cubes exceeding the thresholds a^k of a localized norm."""

    a: float
    levels: dict            # k -> list[Cube], maximal with norm > a^k
    cubes: list             # union of all levels (unique, sorted)
    k_range: tuple          # (k_lo, k_hi) of the clipped threshold range
    norms: dict = field(default_factory=dict)  # cube -> localized norm


def stopping_family(f, phi_bar, a, d, L):
    """Stopping family of f: maximal cubes with ||f||_{phi_bar,Q} > a^k.

    f is a flat nonnegative cell array (2^{dL} values); the localized norms
    are Luxemburg norms over the unshifted cubes of levels 0..L.  Levels k
    below the root threshold all have S^k = {root}; the returned ``levels``
    carries one representative entry for them at k_range[0].
    """
    from .young import luxemburg_rows

    if a <= 2 ** (d + 1):
        raise DomainError(f"stopping base must exceed 2^(d+1) = {2**(d+1)}")
    f = np.abs(np.asarray(f, dtype=float).ravel())
    if f.size != 2 ** (d * L):
        raise DomainError("cell count mismatch")
    if not np.any(f > 0):
        raise DomainError("function is identically zero")

    all_norms = {}
    for k in range(L + 1):
        vals = luxemburg_rows(f[level_blocks(d, L, k)], phi_bar)
        for i, v in enumerate(vals):
            all_norms[base_cube(d, L, k, i)] = float(v)
    root = Cube((0,) * d, 0, (0,) * d)
    root_norm = all_norms[root]
    max_norm = max(all_norms.values())

    loga = math.log(a)
    # smallest k with a^k >= root_norm (root stops qualifying there)
    k0 = math.ceil(math.log(root_norm) / loga - 1e-12)
    while a**k0 < root_norm:
        k0 += 1
    k_hi = math.ceil(math.log(max_norm) / loga - 1e-12) - 1
    while a ** (k_hi + 1) < max_norm:
        k_hi += 1

    levels = {k0 - 1: [root]}  # representative of every lower threshold
    for k in range(k0, k_hi + 1):
        thr = a**k
        found = []

        def collect(cube):
            if all_norms[cube] > thr:
                found.append(cube)
                return
            if cube.k < L:
                for ch in cube.children():
                    collect(ch)

        collect(root)
        if found:
            levels[k] = found

    cubes = sorted({c for cs in levels.values() for c in cs})
    return StoppingFamily(a=a, levels=levels, cubes=cubes,
                          k_range=(k0 - 1, k_hi), norms=all_norms)


@dataclass
class SparseFamily:
    """Cubes with pairwise-disjoint major subsets E_Q, |E_Q| >= |Q|/2."""

    d: int
    L: int
    cubes: list
    e_cells: dict           # Cube -> flat cell indices of E_Q
    ratios: dict            # Cube -> |E_Q| / |Q|
    violations: list        # cubes with ratio < 1/2

    @property
    def ok(self):
        return not self.violations

    def validate(self):
        seen = np.zeros(2 ** (self.d * self.L), dtype=bool)
        for q in self.cubes:
            cells = self.e_cells[q]
            if np.any(seen[cells]):
                raise DomainError(f"E_Q sets overlap at cube {q}")
            seen[cells] = True
        if self.violations:
            raise DomainError(
                f"sparse family has {len(self.violations)} cubes "
                f"with |E_Q| < |Q|/2, first at {self.violations[0]}")

    def to_json_dict(self):
        return {
            "d": self.d, "L": self.L,
            "cubes": [str(q) for q in self.cubes],
            "e_cells": {str(q): self.e_cells[q].tolist()
                        for q in self.cubes},
        }


def _cube_cells(cube, d, L):
    nL = 2**L
    block = cube.cell_block(L)
    flat = np.zeros(1, dtype=np.int64)
    for lo, hi in block:
        flat = (flat[:, None] * nL
                + np.arange(lo, hi, dtype=np.int64)[None, :]).ravel()
    return flat


def sparse_sets(cubes, d, L):
    """E_Q construction: Q minus its maximal strict subcubes in the family.

    Verifies the Carleson packing condition first (raises PackingError
    naming the first offending cube), then checks |E_Q| >= |Q|/2 per cube;
    shortfalls are recorded in ``violations`` rather than raised.
    """
    cubes = sorted(set(cubes))
    for q in cubes:
        if any(q.tnum):
            raise DomainError("sparse families live on the unshifted grid")
    for q in cubes:
        tot = sum(r.volume for r in cubes if q.contains_cube(r))
        if tot > 2 * q.volume + 1e-12:
            raise PackingError(q)

    e_cells, ratios, violations = {}, {}, []
    for q in cubes:
        strict = [r for r in cubes if r != q and q.contains_cube(r)]
        maximal = [r for r in strict
                   if not any(s != r and s.contains_cube(r) for s in strict)]
        cells = _cube_cells(q, d, L)
        mask = np.ones(cells.size, dtype=bool)
        if maximal:
            removed = np.concatenate([_cube_cells(r, d, L) for r in maximal])
            mask = ~np.isin(cells, removed)
        e_cells[q] = cells[mask]
        ratios[q] = mask.mean()
        if ratios[q] < 0.5 - 1e-12:
            violations.append(q)
    return SparseFamily(d=d, L=L, cubes=cubes, e_cells=e_cells,
                        ratios=ratios, violations=violations)
