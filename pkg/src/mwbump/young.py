"""Young functions, associates, B-class tests, and Luxemburg norms.

A Young function here is convex, increasing, vanishes at 0, and grows
superlinearly.  Three public families cover everything the rest of the
package needs:

* ``power(r)``:        coeff * t**r
* ``power_log(r, d)``: coeff * t**r * log(e+t)**d
* ``tabulated(pts)``:  strictly increasing samples, power-law interpolation

Associates (Legendre-type conjugates) of non-power families are computed
numerically once and cached as an internal ``grid`` family: 512 knots on a
log grid with monotone cubic interpolation in log-log coordinates.  Grid
functions may vanish on an initial segment ``[0, zero_below]`` (this happens
whenever the conjugated function has positive slope at 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import DomainError

_E = math.e

_EMPTY = np.empty(0)


def _pchip_slopes(x, y):
    """Fritsch-Carlson monotone cubic slopes at the knots."""
    h = np.diff(x)
    m = np.diff(y) / h
    d = np.empty_like(x)
    d[0] = m[0]
    d[-1] = m[-1]
    if len(x) > 2:
        w1 = 2 * h[1:] + h[:-1]
        w2 = h[1:] + 2 * h[:-1]
        hm = (w1 + w2) / (w1 / np.where(m[:-1] != 0, m[:-1], 1e-300)
                          + w2 / np.where(m[1:] != 0, m[1:], 1e-300))
        d[1:-1] = np.where(m[:-1] * m[1:] > 0, hm, 0.0)
    return d


class YoungFn:
    """Immutable Young function; construct via the classmethods below."""

    __slots__ = ("family", "r", "delta", "coeff", "logt", "logv", "deriv",
                 "zero_below", "asymp", "_assoc")

    def __init__(self, family, r=1.0, delta=0.0, coeff=1.0,
                 logt=_EMPTY, logv=_EMPTY, deriv=_EMPTY,
                 zero_below=0.0, asymp=None, _validate=True):
        self.family = family
        self.r = float(r)
        self.delta = float(delta)
        self.coeff = float(coeff)
        self.logt = np.asarray(logt, dtype=float)
        self.logv = np.asarray(logv, dtype=float)
        self.deriv = np.asarray(deriv, dtype=float)
        self.zero_below = float(zero_below)
        self.asymp = asymp
        self._assoc = None
        if _validate:
            self._validate()

    # -- constructors -------------------------------------------------------

    @classmethod
    def power(cls, r, coeff=1.0):
        if r < 1:
            raise DomainError(f"power exponent must be >= 1, got {r}")
        if coeff <= 0:
            raise DomainError("coefficient must be positive")
        return cls("power", r=r, coeff=coeff, asymp=(float(r), 0.0))

    @classmethod
    def power_log(cls, r, delta, coeff=1.0):
        if r < 1:
            raise DomainError(f"power_log exponent must be >= 1, got {r}")
        if r == 1 and delta <= 0:
            raise DomainError("power_log(1, delta) needs delta > 0 for "
                              "superlinear growth")
        if coeff <= 0:
            raise DomainError("coefficient must be positive")
        return cls("power_log", r=r, delta=delta, coeff=coeff,
                   asymp=(float(r), float(delta)))

    @classmethod
    def tabulated(cls, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
            raise DomainError("tabulated needs >= 4 (t, value) pairs")
        t, v = pts[:, 0], pts[:, 1]
        if np.any(t <= 0) or np.any(v <= 0):
            raise DomainError("tabulated samples must be positive")
        if np.any(np.diff(t) <= 0) or np.any(np.diff(v) <= 0):
            raise DomainError("tabulated samples must be strictly increasing")
        lt, lv = np.log(t), np.log(v)
        return cls("grid", logt=lt, logv=lv, deriv=_pchip_slopes(lt, lv),
                   asymp=None)

    @classmethod
    def _grid(cls, logt, logv, deriv, zero_below=0.0, asymp=None,
              _validate=True):
        return cls("grid", logt=logt, logv=logv, deriv=deriv,
                   zero_below=zero_below, asymp=asymp, _validate=_validate)

    # -- evaluation ---------------------------------------------------------

    @property
    def kernel_params(self):
        kind = {"power": 0, "power_log": 1, "grid": 2}[self.family]
        return (kind, self.r, self.delta, self.coeff,
                self.logt, self.logv, self.deriv, self.zero_below)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        out = backend.young_eval(np.atleast_1d(t), self.kernel_params)
        return float(out[0]) if scalar else out

    def inverse(self, y):
        """Generalized inverse: smallest t with phi(t) >= y (scalar)."""
        y = float(y)
        if y <= 0:
            return 0.0
        lo, hi = 1.0, 1.0
        for _ in range(2000):
            if self(hi) >= y:
                break
            hi *= 2.0
        for _ in range(2000):
            if self(lo) <= y:
                break
            lo /= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self(mid) < y:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def _log_deriv(self, logs):
        """log of phi'(s) at s = exp(logs); vectorized and overflow-safe."""
        s = np.exp(np.clip(logs, -700, 700))
        if self.family == "power":
            return math.log(self.coeff * self.r) + (self.r - 1.0) * logs
        if self.family == "power_log":
            big = logs > 680
            ssafe = np.where(big, 1.0, s)
            ell = np.where(big, logs, np.log(_E + ssafe))
            corr = self.r + self.delta * np.where(big, 1.0 / ell,
                                                  ssafe / ((_E + ssafe) * ell))
            corr = np.maximum(corr, 1e-12)
            return (math.log(self.coeff) + (self.r - 1.0) * logs
                    + self.delta * np.log(ell) + np.log(corr))
        # grid: phi = exp(yhat(x)) with x = log t, so phi' = phi * yhat'/t
        x = logs
        yhat = np.log(np.maximum(
            backend.young_eval(np.maximum(s, 1e-300), self.kernel_params),
            1e-300))
        slope = self._loglog_slope(x)
        return yhat + np.log(np.maximum(slope, 1e-300)) - x

    def _loglog_slope(self, x):
        xs, ds = self.logt, self.deriv
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        out[x <= xs[0]] = ds[0]
        out[x >= xs[-1]] = ds[-1]
        mid = (x > xs[0]) & (x < xs[-1])
        if np.any(mid):
            i = np.clip(np.searchsorted(xs, x[mid], side="right") - 1,
                        0, len(xs) - 2)
            # derivative of the cubic Hermite segment
            h = xs[i + 1] - xs[i]
            s = (x[mid] - xs[i]) / h
            ys = self.logv
            out[mid] = (ys[i] * (6 * s * s - 6 * s) / h
                        + ds[i] * (3 * s * s - 4 * s + 1)
                        + ys[i + 1] * (-6 * s * s + 6 * s) / h
                        + ds[i + 1] * (3 * s * s - 2 * s))
        return out

    # -- associate ----------------------------------------------------------

    def associate(self):
        """Legendre-type conjugate sup_s { s t - phi(s) }; cached."""
        if self._assoc is None:
            self._assoc = self._build_associate()
        return self._assoc

    def _build_associate(self):
        if self.family == "power" and self.r > 1:
            r, c = self.r, self.coeff
            rp = r / (r - 1.0)
            cbar = (r - 1.0) * r ** (-rp) * c ** (1.0 - rp)
            return YoungFn.power(rp, coeff=cbar)
        if self.family == "power" and self.r == 1:
            raise DomainError("power(1) has no superlinear associate")
        return self._conjugate_grid()

    def _conjugate_asymp(self):
        if self.asymp is None:
            ra = float(self.deriv[-1]) if self.family == "grid" else None
            da = 0.0
        else:
            ra, da = self.asymp
        if ra is None or ra <= 1.0 + 1e-9:
            return None
        rp = ra / (ra - 1.0)
        return (rp, -da * (rp - 1.0))

    def _conjugate_grid(self, npts=512):
        # slope at zero decides where the conjugate starts being positive
        t0 = float(self(1e-300)) * 1e300
        knots = np.geomspace(1e-8, 1e8, npts)
        if t0 > 1e-12:
            knots = np.concatenate(
                [knots[knots > t0 * (1 + 1e-10)],
                 t0 * (1.0 + np.geomspace(1e-8, 2.0, 64))])
            knots = np.unique(knots)
        # solve log phi'(s) = log t by bisection on log s, one pass for all t
        logt = np.log(knots)
        lo = np.full_like(logt, -700.0)
        hi = np.full_like(logt, 650.0)
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            below = self._log_deriv(mid) < logt
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        s = np.exp(0.5 * (lo + hi))
        vals = s * knots - self(s)
        vals = np.maximum(vals, 0.0)
        pos = vals > 1e-290
        if pos.sum() < 8:
            raise DomainError("associate is degenerate on the cached grid")
        lt = np.log(knots[pos])
        lv = np.log(vals[pos])
        return YoungFn._grid(lt, lv, _pchip_slopes(lt, lv),
                             zero_below=t0, asymp=self._conjugate_asymp(),
                             _validate=False)

    # -- validation ---------------------------------------------------------

    def _validate(self):
        if self(0.0) != 0.0:
            raise DomainError("Young function must vanish at 0")
        for tmax in (1e-3, 1.0, 1e3):
            t = np.linspace(0.0, tmax, 65)
            v = self(t)
            if not np.all(np.isfinite(v)):
                raise DomainError("non-finite Young function values")
            scale = max(abs(v[-1]), 1e-300)
            if np.any(np.diff(v) < -1e-12 * scale):
                raise DomainError("Young function must be increasing")
            if np.any(np.diff(v, 2) < -1e-12 * scale):
                raise DomainError("Young function must be convex")
        t = np.geomspace(1.0, 1e6, 40)
        ratio = self(t) / t
        if np.any(ratio[1:] < ratio[:-1] * (1 - 1e-12)):
            raise DomainError("Young function must grow superlinearly")

    # -- serialization ------------------------------------------------------

    def to_json_dict(self):
        if self.family == "power":
            d = {"family": "power", "r": self.r}
        elif self.family == "power_log":
            d = {"family": "power_log", "r": self.r, "delta": self.delta}
        else:
            # grid families round-trip through their knots
            t = np.exp(self.logt)
            v = np.exp(self.logv)
            return {"family": "tabulated",
                    "points": [[float(a), float(b)] for a, b in zip(t, v)]}
        if self.coeff != 1.0:
            d["coeff"] = self.coeff
        return d

    @classmethod
    def from_json_dict(cls, d):
        fam = d.get("family")
        if fam == "power":
            return cls.power(d["r"], coeff=d.get("coeff", 1.0))
        if fam == "power_log":
            return cls.power_log(d["r"], d["delta"], coeff=d.get("coeff", 1.0))
        if fam == "tabulated":
            return cls.tabulated(d["points"])
        raise DomainError(f"unknown Young function family {fam!r}")

    def __repr__(self):
        if self.family == "power":
            return f"YoungFn.power({self.r:g}, coeff={self.coeff:g})"
        if self.family == "power_log":
            return (f"YoungFn.power_log({self.r:g}, {self.delta:g}, "
                    f"coeff={self.coeff:g})")
        return f"YoungFn.grid({len(self.logt)} knots)"


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def eval_young(phi: YoungFn, t):
    """Evaluate phi(t); rejects negative arguments."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("Young functions are defined on [0, inf)")
    return phi(t)


def associate(phi: YoungFn) -> YoungFn:
    return phi.associate()


@dataclass(frozen=True)
class BClassification:
    member: bool | None          # None = inconclusive (tabulated tails)
    tail_integral: float | None  # int_1^inf phi(t)^{q/p} t^{-q} dt/t
    method: str


def classify_b(phi: YoungFn, p: float, q: float | None = None) -> BClassification:
    """Membership of phi in B_{p,q} (B_p when q == p)."""
    if q is None:
        q = p
    if p <= 1 or q < p:
        raise DomainError("classify_b needs 1 < p <= q")

    def _tail_quad():
        # integrate phi(t)^{q/p} t^{-q-1} on [1, 1e8] on a log grid
        x = np.linspace(0.0, math.log(1e8), 4001)
        t = np.exp(x)
        integrand = phi(t) ** (q / p) * t**(-q)  # extra t from dt = t dx
        return float(np.trapezoid(integrand, x))

    if phi.family == "power":
        member = phi.r < p
        if member:
            tail = phi.coeff ** (q / p) * p / (q * (p - phi.r))
        else:
            tail = math.inf
        return BClassification(member, tail, "analytic")

    if phi.asymp is not None:
        ra, da = phi.asymp
        if ra < p:
            member = True
        elif ra > p:
            member = False
        else:
            member = da * q / p < -1.0
        tail = _tail_quad() if member else math.inf
        return BClassification(member, tail, "analytic")

    # tabulated / grid without asymptotic metadata: decide from tail slope
    slope = float(phi.deriv[-1])
    eff = slope * q / p - q
    if eff < -1e-6:
        return BClassification(True, _tail_quad(), "quadrature+extrapolation")
    if eff > 1e-6:
        return BClassification(False, math.inf, "quadrature+extrapolation")
    return BClassification(None, None, "inconclusive")


@dataclass(frozen=True)
class LuxemburgContext:
    """Cell values of |f| on a cube, uniform cell measure."""

    values: np.ndarray

    def __init__(self, values):
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            raise DomainError("empty cube")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DomainError("cell values must be finite and nonnegative")
        object.__setattr__(self, "values", v)


def luxemburg_norm(values, phi: YoungFn, weights=None,
                   force_bisect=False) -> float:
    """Luxemburg norm inf{lambda > 0 : avg phi(v/lambda) <= 1}.

    ``values`` may be a LuxemburgContext or an array of nonnegative cell
    values; ``weights`` (optional) are cell measures summing to 1.  For pure
    power functions the closed form coeff^{1/r} (avg v^r)^{1/r} is used
    unless ``force_bisect`` is set; all other families bisect to 1e-10
    relative tolerance.
    """
    if isinstance(values, LuxemburgContext):
        v = values.values
    else:
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            raise DomainError("empty cube")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DomainError("cell values must be finite and nonnegative")
    if weights is None:
        w = np.full(v.size, 1.0 / v.size)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != v.shape or np.any(w < 0) or \
                abs(float(w.sum()) - 1.0) > 1e-9:
            raise DomainError("weights must be nonnegative cell measures "
                              "summing to 1")
    if phi.family == "power" and not force_bisect:
        return float(phi.coeff ** (1.0 / phi.r) * ((v**phi.r) @ w) ** (1.0 / phi.r))
    return float(backend.lux_rows(v[None, :], w, phi.kernel_params)[0])


def luxemburg_rows(values, phi: YoungFn, weights=None,
                   force_bisect=False) -> np.ndarray:
    """Row-wise Luxemburg norms of a (m, c) value matrix."""
    V = np.asarray(values, dtype=float)
    if weights is None:
        w = np.full(V.shape[1], 1.0 / V.shape[1])
    else:
        w = np.asarray(weights, dtype=float)
    if phi.family == "power" and not force_bisect:
        return phi.coeff ** (1.0 / phi.r) * ((V**phi.r) @ w) ** (1.0 / phi.r)
    return backend.lux_rows(V, w, phi.kernel_params)
