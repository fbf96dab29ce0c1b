"""Matrix-weight fields: storage, powers, generators, and file I/O.

A WeightField holds one symmetric positive-definite n x n matrix per finest
cell of the box [0,1)^d at level L, sampled at cell midpoints and treated as
piecewise constant.  That makes every cube average an exact finite sum, so
the inequality checks downstream are free of quadrature error.

Matrices are real symmetric (the complex-Hermitian case of the theory is
invariant under this restriction); degenerate cells are rejected.
"""

from __future__ import annotations

import math
import struct

import numpy as np

from . import backend
from .errors import DomainError, FieldError

_MAGIC_FIELD = b"MWF1"
_MAGIC_SCALAR = b"MWS1"


def midpoints(d, L):
    """Cell midpoints, row-major flat order -> array (2^{dL}, d)."""
    n = 2**L
    axis = (np.arange(n) + 0.5) / n
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def op_norm(M):
    """Operator norm of a symmetric matrix: largest |eigenvalue|."""
    M = np.asarray(M, dtype=float)
    if M.shape == (1, 1):
        return abs(float(M[0, 0]))
    if not np.allclose(M, M.T, atol=1e-10):
        raise DomainError("op_norm expects a symmetric matrix")
    return float(np.max(np.abs(np.linalg.eigvalsh(M))))


def sigma_max(M):
    """Largest singular value (for products of symmetric matrices)."""
    M = np.asarray(M, dtype=float)
    return float(np.linalg.norm(M, 2))


class WeightField:
    """Piecewise-constant SPD matrix field on the finest cells."""

    __slots__ = ("d", "L", "n", "box", "mats", "meta")

    def __init__(self, d, L, n, mats, box=1.0, meta=None, _validate=True):
        self.d = int(d)
        self.L = int(L)
        self.n = int(n)
        self.box = float(box)
        self.mats = np.ascontiguousarray(mats, dtype=float)
        self.meta = dict(meta or {})
        if self.mats.shape != (self.ncells, self.n, self.n):
            raise FieldError(None, f"expected shape {(self.ncells, self.n, self.n)}, "
                                   f"got {self.mats.shape}")
        if _validate:
            self._validate()

    @property
    def ncells(self):
        return 2 ** (self.d * self.L)

    @property
    def cell_volume(self):
        return self.box**self.d / self.ncells

    def _validate(self):
        if not np.all(np.isfinite(self.mats)):
            bad = int(np.argwhere(~np.isfinite(self.mats))[0][0])
            raise FieldError(bad, f"non-finite entries in cell {bad}")
        asym = np.abs(self.mats - self.mats.transpose(0, 2, 1)).max(axis=(1, 2))
        if np.any(asym > 1e-12):
            bad = int(np.argmax(asym))
            raise FieldError(bad, f"cell {bad} asymmetric by {asym[bad]:.2e}")
        w, _ = backend.eigh_batch(self.mats)
        if np.any(w[:, 0] <= 0):
            bad = int(np.argmax(w[:, 0] <= 0))
            raise FieldError(bad, f"cell {bad} not positive definite")

    # -- functional calculus -------------------------------------------------

    def matrix_power(self, r):
        """Cellwise W^r via symmetric eigendecomposition (PD for all real r)."""
        w, V = backend.eigh_batch(self.mats)
        if not np.all(np.isfinite(w)):
            bad = int(np.argwhere(~np.isfinite(w))[0][0])
            raise FieldError(bad, f"non-finite eigenvalue in cell {bad}")
        w = np.maximum(w, 1e-300)
        out = np.einsum("cij,cj,ckj->cik", V, w**r, V)
        out = 0.5 * (out + out.transpose(0, 2, 1))
        return WeightField(self.d, self.L, self.n, out, box=self.box,
                           meta=self.meta, _validate=False)

    def scalar(self):
        if self.n != 1:
            raise DomainError("scalar() requires n = 1")
        return self.mats[:, 0, 0].copy()

    def refine(self, extra_levels=1):
        """Same piecewise-constant field represented at level L + extra."""
        mats = self.mats
        for _ in range(extra_levels):
            N = mats.shape[0]
            L = round(math.log2(N) / self.d)
            shape = (2**L,) * self.d + (self.n, self.n)
            arr = mats.reshape(shape)
            for ax in range(self.d):
                arr = np.repeat(arr, 2, axis=ax)
            mats = arr.reshape(-1, self.n, self.n)
        return WeightField(self.d, self.L + extra_levels, self.n, mats,
                           box=self.box, meta=self.meta, _validate=False)

    # -- serialization -------------------------------------------------------

    def _tril_indices(self):
        return np.tril_indices(self.n)

    def save(self, path):
        i, j = self._tril_indices()
        tri = self.mats[:, i, j].astype("<f8")
        with open(path, "wb") as fh:
            fh.write(_MAGIC_FIELD)
            fh.write(struct.pack("<III", self.d, self.L, self.n))
            fh.write(struct.pack("<d", self.box))
            fh.write(tri.tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != _MAGIC_FIELD:
                raise DomainError(f"bad magic {magic!r}, expected MWF1")
            d, L, n = struct.unpack("<III", fh.read(12))
            (box,) = struct.unpack("<d", fh.read(8))
            ntri = n * (n + 1) // 2
            ncells = 2 ** (d * L)
            tri = np.frombuffer(fh.read(8 * ntri * ncells),
                                dtype="<f8").reshape(ncells, ntri)
        mats = np.zeros((ncells, n, n))
        i, j = np.tril_indices(n)
        mats[:, i, j] = tri
        mats[:, j, i] = tri
        return cls(d, L, n, mats, box=box)

    def to_json_dict(self):
        i, j = self._tril_indices()
        return {
            "format": "MWF1-json",
            "d": self.d, "L": self.L, "n": self.n, "box": self.box,
            "cells": self.mats[:, i, j].tolist(),
        }

    @classmethod
    def from_json_dict(cls, dct):
        if dct.get("format") != "MWF1-json":
            raise DomainError("not an MWF1-json object")
        d, L, n = dct["d"], dct["L"], dct["n"]
        tri = np.asarray(dct["cells"], dtype=float)
        mats = np.zeros((2 ** (d * L), n, n))
        i, j = np.tril_indices(n)
        mats[:, i, j] = tri
        mats[:, j, i] = tri
        return cls(d, L, n, mats, box=dct.get("box", 1.0))


def save_scalar_field(path, values, d, L, box=1.0):
    """MWS1: scalar output fields (operator results) for plotting."""
    v = np.asarray(values, dtype="<f8").ravel()
    if v.size != 2 ** (d * L):
        raise DomainError("cell count mismatch")
    with open(path, "wb") as fh:
        fh.write(_MAGIC_SCALAR)
        fh.write(struct.pack("<III", d, L, 1))
        fh.write(struct.pack("<d", box))
        fh.write(v.tobytes())


def load_scalar_field(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC_SCALAR:
            raise DomainError(f"bad magic {magic!r}, expected MWS1")
        d, L, _ = struct.unpack("<III", fh.read(12))
        (box,) = struct.unpack("<d", fh.read(8))
        v = np.frombuffer(fh.read(8 * 2 ** (d * L)), dtype="<f8")
    return v.copy(), d, L, box


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _rotation_from_angles(n, angles):
    """Orthogonal matrix as a product of Givens rotations, one per pair."""
    R = np.eye(n)
    idx = 0
    for i in range(n):
        for j in range(i + 1, n):
            th = angles[idx]
            idx += 1
            G = np.eye(n)
            G[i, i] = G[j, j] = math.cos(th)
            G[i, j] = -math.sin(th)
            G[j, i] = math.sin(th)
            R = R @ G
    return R


def gen_power_weight(d, L, n, gamma, center=None, rotation=None):
    """|x - center|^gamma diagonal family conjugated by a fixed rotation.

    gamma may be a scalar (same exponent on the diagonal) or a length-n
    vector.  Midpoints landing exactly on the center are offset by half a
    cell and recorded in field.meta.
    """
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (n,)).copy()
    if center is None:
        center = (0.5,) * d
    center = np.asarray(center, dtype=float)
    if np.any(center < 0) or np.any(center > 1):
        raise DomainError("center must lie in the box")
    if rotation is None:
        R = np.eye(n)
    elif np.isscalar(rotation):
        nang = n * (n - 1) // 2
        R = _rotation_from_angles(n, [float(rotation)] * max(nang, 1))
    else:
        R = np.asarray(rotation, dtype=float)
        if not np.allclose(R @ R.T, np.eye(n), atol=1e-10):
            raise DomainError("rotation must be orthogonal")
    x = midpoints(d, L)
    dist = np.linalg.norm(x - center, axis=1)
    h = 2.0**-L
    offset_cells = np.nonzero(dist == 0.0)[0]
    dist[offset_cells] = h / 2.0
    diag = dist[:, None] ** gamma[None, :]
    mats = np.einsum("ij,cj,kj->cik", R, diag, R)
    mats = 0.5 * (mats + mats.transpose(0, 2, 1))
    meta = {"generator": "power", "gamma": gamma.tolist(),
            "center": center.tolist()}
    if offset_cells.size:
        meta["midpoint_offset_cells"] = offset_cells.tolist()
    return WeightField(d, L, n, mats, meta=meta)


def _smooth(v, d, L, passes=3):
    """Neighbor averaging on the cell lattice (keeps determinism)."""
    shape = (2**L,) * d
    a = v.reshape(shape)
    for _ in range(passes):
        acc = a.copy()
        cnt = np.ones_like(a)
        for ax in range(d):
            lo = np.roll(a, 1, axis=ax)
            hi = np.roll(a, -1, axis=ax)
            # non-periodic: drop the wrapped entries
            sl_lo = [slice(None)] * d
            sl_lo[ax] = slice(0, 1)
            sl_hi = [slice(None)] * d
            sl_hi[ax] = slice(-1, None)
            m_lo = np.ones_like(a)
            m_lo[tuple(sl_lo)] = 0
            m_hi = np.ones_like(a)
            m_hi[tuple(sl_hi)] = 0
            acc += lo * m_lo + hi * m_hi
            cnt += m_lo + m_hi
        a = acc / cnt
    return a.ravel()


def log_spectral_distance(A, B):
    """max |log eigenvalue| of A^{-1} B (affine-invariant spectral metric)."""
    w = np.linalg.eigvals(np.linalg.solve(A, B)).real
    w = np.maximum(w, 1e-300)
    return float(np.max(np.abs(np.log(w))))


def _adjacent_pairs(d, L):
    n = 2**L
    idx = np.arange(n**d).reshape((n,) * d)
    pairs = []
    for ax in range(d):
        a = np.moveaxis(idx, ax, 0)
        pairs.append(np.stack([a[:-1].ravel(), a[1:].ravel()], 1))
    return np.concatenate(pairs, 0)


def gen_random_field(d, L, n, seed, kappa=4.0, lam=0.5):
    """Deterministic random SPD field.

    Per-cell eigenvalues lie in [1/kappa, kappa] and adjacent cells differ
    by at most lam in log-spectral distance; both constraints are verified
    on the constructed field (the smoothed parameter fields are shrunk
    until they hold).
    """
    if kappa < 1:
        raise DomainError("condition bound must be >= 1")
    rng = np.random.default_rng(seed)
    N = 2 ** (d * L)
    nang = n * (n - 1) // 2
    angles = np.stack([_smooth(rng.normal(size=N), d, L)
                       for _ in range(max(nang, 1))], 1)
    logs = np.stack([_smooth(rng.normal(size=N), d, L)
                     for _ in range(n)], 1)
    logs -= logs.mean(axis=0, keepdims=True)
    sc = logs.std() + 1e-12
    logs *= math.log(kappa) / (2.5 * sc)  # typical range inside the cap
    angles *= 0.5 / (angles.std() + 1e-12)
    pairs = _adjacent_pairs(d, L)

    scale = 1.0
    for _ in range(60):
        lg = np.clip(logs * scale, -math.log(kappa), math.log(kappa))
        an = angles * scale
        mats = np.empty((N, n, n))
        for c in range(N):
            R = _rotation_from_angles(n, an[c])
            mats[c] = (R * np.exp(lg[c])) @ R.T
        mats = 0.5 * (mats + mats.transpose(0, 2, 1))
        if kappa == 1.0 or lam == 0.0:
            mats = np.broadcast_to(np.eye(n), (N, n, n)).copy()
        dmax = 0.0
        for i, j in pairs:
            dmax = max(dmax, log_spectral_distance(mats[i], mats[j]))
            if dmax > lam:
                break
        w = np.linalg.eigvalsh(mats)
        in_range = (w.min() >= 1 / kappa - 1e-12) and (w.max() <= kappa + 1e-12)
        if dmax <= lam + 1e-12 and in_range:
            meta = {"generator": "random", "seed": int(seed),
                    "kappa": kappa, "lambda": lam}
            return WeightField(d, L, n, mats, meta=meta)
        scale *= 0.7
    raise RuntimeError("random field generation failed to satisfy bounds")
