"""
Generating triplets, polar-decomposed Levy measures and the cumulant.

A Levy measure on R^d (d <= 3) is stored as finitely many directions
``xi`` with positive weights ``lambda`` and a radial measure on (0, inf)
for each.  Radial measures come in several concrete kinds that all share
one small protocol:

``integrate(phi, lo, hi)``
    ``int_{(lo, hi)} phi(r) nu(dr)`` for a vectorised ``phi`` that may
    return trailing axes (used to evaluate the cumulant on a whole z grid
    in one quadrature).
``tail(r)``
    ``nu([r, inf))``, vectorised.
``pdf(r)``
    Lebesgue density, for absolutely continuous kinds.
``levy_masses()``
    ``(int_0^1 r^2 nu(dr), nu([1, inf)))`` with ``inf`` on divergence.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator

from .expr import Expr
from .numerics import (
    DomainError,
    integrate_finite,
    integrate_halfline,
    integrate_positive,
)

__all__ = [
    "MixingMeasure",
    "RadialMeasure",
    "Atoms",
    "AtomSeries",
    "Density",
    "CMRep",
    "CMDensity",
    "TabulatedDensity",
    "RadialSum",
    "Direction",
    "LevyMeasure",
    "GeneratingTriplet",
    "LevyReport",
    "eval_cumulant",
    "validate_levy_measure",
    "log_moment_order",
    "convolve",
    "is_symmetric",
    "radial_from_dict",
    "triplet_from_dict",
    "QUAD_TOL",
]

QUAD_TOL = 1e-11


def _as_array(x):
    return np.asarray(x, dtype=float)


def _unscalar(out, x):
    return float(out) if np.ndim(x) == 0 else out


def _integrate_range(f, lo, hi, tol=QUAD_TOL, points=(), rtol=0.0):
    if hi <= lo:
        return 0.0
    if rtol > 0:
        # purely relative accuracy, for integrands whose scale is unknown
        tol = 1e-250
    if math.isinf(hi):
        return integrate_halfline(f, tol=tol, a=lo, rtol=rtol, points=points).value
    return integrate_finite(f, lo, hi, tol=tol, rtol=rtol, points=points).value


def _lower_gamma(a, x):
    return special.gammainc(a, x) * special.gamma(a)


# --------------------------------------------------------------------------
# mixing measures
# --------------------------------------------------------------------------


class MixingMeasure:
    """Borel measure Q on (0, inf): finitely many atoms plus an optional density.

    The density is a vectorised callable in ``t`` supported on ``(lo, hi)``.
    Supplying ``expr`` (text in the variable ``t``) makes the measure JSON
    serialisable.
    """

    def __init__(self, atoms=(), density=None, lo=0.0, hi=math.inf, expr=None, breaks=()):
        atoms = list(atoms)
        t = np.array([a[0] for a in atoms], dtype=float)
        q = np.array([a[1] for a in atoms], dtype=float)
        if np.any(t <= 0):
            raise DomainError("mixing measure atoms must sit at t > 0 (no mass at 0)")
        if np.any(q < 0) or not np.all(np.isfinite(q)) or not np.all(np.isfinite(t)):
            raise DomainError("mixing measure atom masses must be finite and nonnegative")
        keep = q > 0
        self.t, inv = np.unique(t[keep], return_inverse=True)
        self.q = np.bincount(inv.reshape(-1), weights=q[keep], minlength=len(self.t))
        if expr is not None and density is None:
            density = Expr(expr, var="t")
        if isinstance(density, Expr):
            expr = density.text
        self.density = density
        self.expr = expr
        self.lo = float(lo)
        self.hi = float(hi)
        self.breaks = tuple(float(b) for b in breaks)
        if self.lo < 0 or self.hi <= self.lo:
            raise DomainError("density support must satisfy 0 <= lo < hi")

    @classmethod
    def delta(cls, t, q=1.0):
        return cls([(t, q)])

    @property
    def is_atomic(self):
        return self.density is None

    @property
    def is_zero(self):
        return self.density is None and len(self.t) == 0

    def _dens(self, t):
        t = _as_array(t)
        with np.errstate(all="ignore"):
            v = np.asarray(self.density(t), dtype=float)
        inside = (t > self.lo) & (t < self.hi)
        return np.where(inside, np.nan_to_num(v, nan=0.0, posinf=0.0), 0.0)

    def density_at(self, t):
        if self.density is None:
            return np.zeros_like(_as_array(t))
        return self._dens(t)

    def integrate(self, phi, lo=0.0, hi=math.inf, tol=QUAD_TOL, rtol=0.0):
        """``int_{(lo, hi]} phi(t) Q(dt)``; phi may return trailing axes."""
        sel = (self.t > lo) & (self.t <= hi)
        total = 0.0
        if np.any(sel):
            vals = np.asarray(phi(self.t[sel]))
            w = self.q[sel].reshape((-1,) + (1,) * (vals.ndim - 1))
            total = (vals * w).sum(axis=0)
        if self.density is not None:
            a, b = max(lo, self.lo), min(hi, self.hi)
            if a < b:
                def f(t):
                    v = np.asarray(phi(t))
                    d = self._dens(t).reshape((-1,) + (1,) * (v.ndim - 1))
                    with np.errstate(invalid="ignore"):
                        out = v * d
                    return np.where(d == 0, 0.0, out)
                total = total + _integrate_range(f, a, b, tol=tol, points=self.breaks, rtol=rtol)
        return total

    def integrate_positive(self, phi, lo=0.0, hi=math.inf):
        """Like :meth:`integrate` for scalar nonnegative phi, returning inf on divergence."""
        sel = (self.t > lo) & (self.t <= hi)
        total = float(np.sum(np.asarray(phi(self.t[sel])) * self.q[sel])) if np.any(sel) else 0.0
        if self.density is not None:
            a, b = max(lo, self.lo), min(hi, self.hi)
            if a < b:
                def f(t):
                    v = np.asarray(phi(t), dtype=float)
                    d = self._dens(t)
                    return np.where(d == 0, 0.0, v * d)
                total += integrate_positive(f, a, b, points=self.breaks) if a == 0 or math.isinf(b) \
                    else _positive_finite(f, a, b, self.breaks)
        return total

    def laplace(self, s):
        """``int exp(-s t) Q(dt)`` for s > 0 (vectorised in s)."""
        s = _as_array(s)
        if np.any(s <= 0):
            raise DomainError("Laplace transform is evaluated at s > 0")
        flat = s.reshape(-1)
        # relative accuracy matters: cm_test differences live far below 1e-11
        out = self.integrate(lambda t: np.exp(-np.outer(t, flat)), tol=1e-300, rtol=1e-12)
        out = np.broadcast_to(np.asarray(out, dtype=float), flat.shape).reshape(s.shape)
        return _unscalar(out, s)

    def mass(self):
        return self.integrate_positive(lambda t: np.ones_like(t))

    def scaled(self, c):
        dens = self.density
        expr = None
        if dens is not None:
            if self.expr is not None:
                expr = f"({c!r})*({self.expr})"
                dens = Expr(expr, var="t")
            else:
                base = dens
                dens = lambda t: c * base(t)  # noqa: E731
        return MixingMeasure(zip(self.t, self.q * c), dens, self.lo, self.hi, expr, self.breaks)

    def __add__(self, other):
        if self.density is not None and other.density is not None:
            raise ValueError("sum of two density-bearing mixing measures is not representable")
        base = self if self.density is not None else other
        atoms = list(zip(self.t, self.q)) + list(zip(other.t, other.q))
        return MixingMeasure(atoms, base.density, base.lo, base.hi, base.expr, base.breaks)

    def to_dict(self):
        out = {"atoms": [{"t": float(t), "q": float(q)} for t, q in zip(self.t, self.q)]}
        if self.density is not None:
            if self.expr is None:
                raise ValueError("a callable-only mixing density cannot be serialised")
            out["density"] = {"expr": self.expr, "lo": self.lo,
                              "hi": None if math.isinf(self.hi) else self.hi}
        return out

    @classmethod
    def from_dict(cls, d):
        atoms = [(a["t"], a["q"]) for a in d.get("atoms", [])]
        dens = d.get("density")
        if dens is None:
            return cls(atoms)
        hi = dens.get("hi")
        return cls(atoms, expr=dens["expr"], lo=dens.get("lo", 0.0),
                   hi=math.inf if hi is None else hi)

    def __repr__(self):
        dens = "" if self.density is None else f", density={self.expr or 'callable'} on ({self.lo}, {self.hi})"
        return f"MixingMeasure(atoms={list(zip(self.t.tolist(), self.q.tolist()))}{dens})"


def _positive_finite(f, a, b, breaks):
    try:
        return float(integrate_finite(f, a, b, rtol=1e-10, points=breaks).value)
    except Exception:
        return math.inf


# --------------------------------------------------------------------------
# radial measures
# --------------------------------------------------------------------------


class RadialMeasure:
    """Common behaviour for measures on (0, inf)."""

    kind = "abstract"
    absolutely_continuous = True

    def integrate(self, phi, lo=0.0, hi=math.inf, rtol=0.0):
        raise NotImplementedError

    def tail(self, r):
        raise NotImplementedError

    def pdf(self, r):
        raise TypeError(f"{type(self).__name__} has no Lebesgue density")

    def levy_masses(self):
        near = self._positive(lambda r: r * r, 0.0, 1.0)
        far = self._positive(lambda r: np.ones_like(r), 1.0, math.inf)
        return near, far

    def _positive(self, phi, lo, hi):
        # generic: integrate phi * pdf with divergence scans
        def f(r):
            return np.asarray(phi(r)) * self.pdf(r)
        if lo == 0.0 or math.isinf(hi):
            return integrate_positive(f, lo, hi)
        return _positive_finite(f, lo, hi, ())

    def log_moment(self, m):
        return self._positive(lambda r: np.log(r) ** m, 1.0, math.inf)

    def mass(self):
        return self._positive(lambda r: np.ones_like(r), 0.0, math.inf)

    def scaled(self, c):
        raise NotImplementedError

    @property
    def is_zero(self):
        return False

    def __add__(self, other):
        if isinstance(other, RadialMeasure):
            if other.is_zero:
                return self
            if self.is_zero:
                return other
        return RadialSum([self, other])

    def to_dict(self):
        raise NotImplementedError


class Atoms(RadialMeasure):
    """Finitely many point masses ``w_i`` at radii ``r_i > 0``."""

    kind = "atoms"
    absolutely_continuous = False

    def __init__(self, radii=(), weights=()):
        r = np.atleast_1d(np.asarray(radii, dtype=float))
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if r.shape != w.shape:
            raise ValueError("radii and weights must have equal length")
        if np.any(r <= 0) or not np.all(np.isfinite(r)):
            raise DomainError("radial atoms must lie in (0, inf); no atom at radius 0")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError("atom weights must be finite and nonnegative")
        keep = w > 0
        r, w = r[keep], w[keep]
        # merge coincident radii
        ur, inv = np.unique(r, return_inverse=True)
        self.r = ur
        self.w = np.bincount(inv, weights=w, minlength=len(ur)).astype(float) if len(ur) else np.zeros(0)

    @property
    def is_zero(self):
        return len(self.r) == 0

    def integrate(self, phi, lo=0.0, hi=math.inf, rtol=0.0):
        sel = (self.r > lo) & (self.r < hi) if lo > 0 else (self.r < hi)
        if not np.any(sel):
            return 0.0
        vals = np.asarray(phi(self.r[sel]))
        w = self.w[sel].reshape((-1,) + (1,) * (vals.ndim - 1))
        return (vals * w).sum(axis=0)

    def tail(self, r):
        r = _as_array(r)
        out = (self.w[None, :] * (self.r[None, :] >= r.reshape(-1, 1))).sum(axis=1).reshape(r.shape)
        return _unscalar(out, r)

    def levy_masses(self):
        near = float(np.sum(self.w[self.r < 1] * self.r[self.r < 1] ** 2))
        far = float(np.sum(self.w[self.r >= 1]))
        return near, far

    def log_moment(self, m):
        sel = self.r > 1
        return float(np.sum(np.log(self.r[sel]) ** m * self.w[sel]))

    def mass(self):
        return float(self.w.sum())

    def scaled(self, c):
        return Atoms(self.r, self.w * c)

    def __add__(self, other):
        if isinstance(other, Atoms):
            return Atoms(np.concatenate([self.r, other.r]), np.concatenate([self.w, other.w]))
        return super().__add__(other)

    def to_dict(self):
        return {"kind": "atoms", "atoms": [{"r": float(r), "w": float(w)} for r, w in zip(self.r, self.w)]}

    def __repr__(self):
        return f"Atoms(r={self.r.tolist()}, w={self.w.tolist()})"


class AtomSeries(RadialMeasure):
    """Countably many atoms ``w(k)`` at ``r(k) = exp(log_r(k))``, k = 1, 2, ...

    Series are decided convergent by comparing the decay of the summand at
    k = 1e6 and k = 1e7 against ``1/k``; integrals are summed over the first
    ``n_terms`` atoms whose radius is representable in floating point.
    """

    kind = "atom_series"
    absolutely_continuous = False

    def __init__(self, log_r, w, n_terms=200_000, scale=1.0):
        self.log_r = Expr(log_r, var="k") if isinstance(log_r, str) else log_r
        self.w = Expr(w, var="k") if isinstance(w, str) else w
        self.n_terms = int(n_terms)
        self.scale = float(scale)
        k = np.arange(1, self.n_terms + 1, dtype=float)
        self._logr = self.log_r(k)
        self._w = self.scale * self.w(k)
        if np.any(self._w < 0) or np.any(np.isnan(self._logr)):
            raise DomainError("atom series must have nonnegative weights at positive radii")
        finite = self._logr < 700.0
        self._r = np.exp(self._logr[finite])
        self._wr = self._w[finite]

    def _series(self, term):
        """Sum over k >= 1 of term(log r_k) * w_k, or inf if it decays no faster than 1/k."""
        def full(k):
            k = np.asarray(k, dtype=float)
            return np.asarray(term(self.log_r(k))) * self.scale * self.w(k)
        tb = np.abs(full(np.array([1e6, 1e7])))
        if np.any(tb == 0) or not np.all(np.isfinite(tb)):
            slope = -math.inf if np.all(np.isfinite(tb)) else math.inf
        else:
            slope = math.log(tb[1] / tb[0]) / math.log(10.0)
        if slope >= -1.0 - 1e-3:
            return math.inf
        return float(np.sum(np.asarray(term(self._logr)) * self._w))

    def levy_masses(self):
        near = self._series(lambda lr: np.where(lr < 0, np.exp(2 * np.minimum(lr, 0.0)), 0.0))
        far = self._series(lambda lr: np.where(lr >= 0, 1.0, 0.0))
        return near, far

    def log_moment(self, m):
        return self._series(lambda lr: np.where(lr > 0, np.maximum(lr, 0.0) ** m, 0.0))

    def mass(self):
        return self._series(lambda lr: np.ones_like(lr))

    def integrate(self, phi, lo=0.0, hi=math.inf, rtol=0.0):
        sel = (self._r > lo) & (self._r < hi)
        vals = np.asarray(phi(self._r[sel]))
        w = self._wr[sel].reshape((-1,) + (1,) * (vals.ndim - 1))
        return (vals * w).sum(axis=0)

    def tail(self, r):
        r = _as_array(r)
        lr = np.log(r.reshape(-1))
        out = np.array([self._w[self._logr >= x].sum() for x in lr]).reshape(r.shape)
        return _unscalar(out, r)

    def scaled(self, c):
        return AtomSeries(self.log_r, self.w, self.n_terms, self.scale * c)

    def to_dict(self):
        return {"kind": "atom_series", "log_r": self.log_r.text, "w": self.w.text,
                "scale": self.scale, "n_terms": self.n_terms}


class Density(RadialMeasure):
    """Absolutely continuous radial measure with a vectorised density.

    Parameters
    ----------
    func : callable or Expr
        Density in ``r``; values outside ``(lo, hi)`` are ignored.
    lo, hi : float
        Support bounds.
    breaks : sequence of float
        Interior kinks, passed to the quadrature as panel edges.
    near0 : float, optional
        Exponent p with density ~ r^p as r -> 0.  Used to decide
        integrability of ``r^2`` near the origin without a scan.
    tail_func : callable, optional
        Closed form of ``nu([r, inf))``; avoids a quadrature per call.
    """

    kind = "density"

    def __init__(self, func, lo=0.0, hi=math.inf, breaks=(), near0=None, tail_func=None,
                 expr=None, tail_expr=None):
        if isinstance(func, str):
            expr = func
            func = Expr(func, var="r")
        elif isinstance(func, Expr):
            expr = func.text
        if isinstance(tail_func, str):
            tail_expr = tail_func
            tail_func = Expr(tail_func, var="r")
        elif isinstance(tail_func, Expr):
            tail_expr = tail_func.text
        self.func = func
        self.expr = expr
        self.lo = float(lo)
        self.hi = float(hi)
        if self.lo < 0 or not self.hi > self.lo:
            raise DomainError("density support must satisfy 0 <= lo < hi")
        self.breaks = tuple(sorted(float(b) for b in breaks if self.lo < b < self.hi))
        self.near0 = near0
        self.tail_func = tail_func
        self.tail_expr = tail_expr

    def pdf(self, r):
        r = _as_array(r)
        with np.errstate(all="ignore"):
            v = np.asarray(self.func(r), dtype=float)
        inside = (r > self.lo) & (r < self.hi)
        out = np.where(inside, np.nan_to_num(v, nan=0.0, posinf=0.0, neginf=0.0), 0.0)
        return _unscalar(out, r)

    def _points(self):
        pts = list(self.breaks)
        if self.lo < 1.0 < self.hi:
            pts.append(1.0)
        return pts

    def integrate(self, phi, lo=0.0, hi=math.inf, rtol=0.0):
        a, b = max(lo, self.lo), min(hi, self.hi)
        if not a < b:
            return 0.0

        def f(r):
            v = np.asarray(phi(r))
            d = np.asarray(self.pdf(r)).reshape((-1,) + (1,) * (v.ndim - 1))
            with np.errstate(invalid="ignore"):
                out = v * d
            return np.where(d == 0, 0.0, out)
        return _integrate_range(f, a, b, points=[p for p in self._points() if a < p < b], rtol=rtol)

    def _positive(self, phi, lo, hi):
        a, b = max(lo, self.lo), min(hi, self.hi)
        if not a < b:
            return 0.0
        if a == 0.0 and self.near0 is not None:
            # decide the origin analytically from the exponent hint
            probe = np.asarray(phi(np.array([1e-10, 1e-8])), dtype=float)
            if probe[0] > 0 and probe[1] > 0:
                p = math.log(probe[1] / probe[0]) / math.log(100.0)
                if p + self.near0 <= -1.0:
                    return math.inf

        def f(r):
            return np.asarray(phi(r), dtype=float) * self.pdf(r)
        pts = [p for p in self._points() if a < p < b]
        if a == 0.0 or math.isinf(b):
            return integrate_positive(f, a, b, points=pts)
        return _positive_finite(f, a, b, pts)

    def tail(self, r):
        r = _as_array(r)
        flat = r.reshape(-1)
        if self.tail_func is not None:
            a = np.clip(flat, self.lo, self.hi)
            with np.errstate(all="ignore"):
                out = np.asarray(self.tail_func(a), dtype=float) * np.ones_like(a)
            out = np.where(flat >= self.hi, 0.0, out)
            return _unscalar(out.reshape(r.shape), r)
        out = _tail_by_quadrature(self.pdf, flat, self.lo, self.hi)
        return _unscalar(out.reshape(r.shape), r)

    def scaled(self, c):
        if self.expr is not None:
            func = Expr(f"({c!r})*({self.expr})", var="r")
        else:
            base = self.func
            func = lambda r: c * np.asarray(base(r))  # noqa: E731
        tail = None
        if self.tail_expr is not None:
            tail = Expr(f"({c!r})*({self.tail_expr})", var="r")
        elif self.tail_func is not None:
            tb = self.tail_func
            tail = lambda r: c * np.asarray(tb(r))  # noqa: E731
        return Density(func, self.lo, self.hi, self.breaks, self.near0, tail)

    def to_dict(self):
        if self.expr is None:
            return TabulatedDensity.from_radial(self).to_dict()
        out = {"kind": "density", "expr": self.expr, "lo": self.lo,
               "hi": None if math.isinf(self.hi) else self.hi}
        if self.tail_expr is not None:
            out["tail_expr"] = self.tail_expr
        if self.near0 is not None:
            out["near0"] = self.near0
        if self.breaks:
            out["breaks"] = list(self.breaks)
        return out

    def __repr__(self):
        return f"Density({self.expr or self.func!r}, lo={self.lo}, hi={self.hi})"


def _tail_by_quadrature(pdf, r, lo, hi):
    """``int_{max(r, lo)}^{hi} pdf`` for an array of r, as one quadrature."""
    a = np.maximum(r, lo)
    active = a < hi
    out = np.zeros_like(a)
    if not np.any(active):
        return out
    aa = a[active]
    if math.isinf(hi):
        pos = aa > 0
        res = np.zeros_like(aa)
        if np.any(pos):
            ap = aa[pos]
            # x = a v, v in (1, inf)
            res[pos] = np.atleast_1d(integrate_halfline(
                lambda v: ap[None, :] * pdf(np.outer(v, ap)), tol=1e-300, rtol=1e-12, a=1.0).value)
        if np.any(~pos):
            res[~pos] = integrate_halfline(lambda x: pdf(x), tol=QUAD_TOL).value
        out[active] = res
    else:
        width = hi - aa
        out[active] = np.atleast_1d(integrate_finite(
            lambda u: width[None, :] * pdf(aa[None, :] + np.outer(u, width)), 0.0, 1.0,
            tol=1e-300, rtol=1e-12).value)
    return out


class CMDensity(Density):
    """Density ``r^(alpha-1) g(r^alpha)`` given the function ``g``."""

    kind = "cm_density"

    def __init__(self, alpha, g, lo=0.0, hi=math.inf, g_expr=None):
        self.alpha = float(alpha)
        self.g = Expr(g, var="y") if isinstance(g, str) else g
        self.g_expr = g_expr or (self.g.text if isinstance(self.g, Expr) else None)
        a = self.alpha
        gf = self.g

        def func(r):
            r = np.asarray(r, dtype=float)
            with np.errstate(all="ignore"):
                return r ** (a - 1.0) * np.asarray(gf(r ** a))
        expr = None
        if self.g_expr is not None:
            expr = Expr(self.g_expr, var="y").substitute(f"r^{a!r}", var="r").text
            expr = f"r^({a!r}-1)*({expr})"
        super().__init__(func, lo, hi, expr=expr)

    def to_dict(self):
        if self.g_expr is None:
            return TabulatedDensity.from_radial(self).to_dict()
        return {"kind": "density", "expr": self.expr, "lo": self.lo,
                "hi": None if math.isinf(self.hi) else self.hi}


class TabulatedDensity(Density):
    """Density interpolated monotonically in log-log coordinates.

    Outside the table the density is continued as a power law matching the
    end slopes.
    """

    kind = "tabulated"
    GRID = (1e-4, 50.0, 400)

    def __init__(self, r, pdf_values):
        r = np.asarray(r, dtype=float)
        p = np.asarray(pdf_values, dtype=float)
        if np.any(p < 0):
            raise DomainError("tabulated density must be nonnegative")
        self.r_grid = r
        self.p_grid = p
        logp = np.log(np.maximum(p, 1e-300))
        self._interp = PchipInterpolator(np.log(r), logp, extrapolate=False)
        lr = np.log(r)
        self._s0 = (logp[1] - logp[0]) / (lr[1] - lr[0])
        self._s1 = (logp[-1] - logp[-2]) / (lr[-1] - lr[-2])
        self._lr, self._lp = lr, logp

        def func(x):
            x = np.asarray(x, dtype=float)
            lx = np.log(np.maximum(x, 1e-300))
            v = self._interp(lx)
            v = np.where(lx < self._lr[0], self._lp[0] + self._s0 * (lx - self._lr[0]), v)
            v = np.where(lx > self._lr[-1], self._lp[-1] + self._s1 * (lx - self._lr[-1]), v)
            return np.exp(v)
        super().__init__(func, 0.0, math.inf, near0=float(self._s0))

    @classmethod
    def from_radial(cls, radial, grid=None):
        lo, hi, n = grid or cls.GRID
        r = np.geomspace(lo, hi, n)
        return cls(r, radial.pdf(r))

    def scaled(self, c):
        return TabulatedDensity(self.r_grid, self.p_grid * c)

    def to_dict(self):
        return {"kind": "tabulated", "r": self.r_grid.tolist(), "pdf": self.p_grid.tolist()}


class CMRep(RadialMeasure):
    """Radial density ``r^(alpha-1) g(r^alpha)`` with ``g`` the Laplace transform of Q."""

    kind = "cmrep"

    def __init__(self, alpha, mixing):
        if not alpha > 0:
            raise DomainError("CM representation needs alpha > 0")
        self.alpha = float(alpha)
        self.mixing = mixing

    @property
    def is_zero(self):
        return self.mixing.is_zero

    def g(self, y):
        y = _as_array(y)
        if self.mixing.is_zero:
            return _unscalar(np.zeros_like(y), y)
        return self.mixing.laplace(y)

    def pdf(self, r):
        r = _as_array(r)
        if self.mixing.is_zero:
            return _unscalar(np.zeros_like(r), r)
        a = self.alpha
        with np.errstate(all="ignore"):
            out = r ** (a - 1.0) * np.asarray(self.mixing.laplace(r ** a))
        return _unscalar(out, r)

    def tail(self, r):
        r = _as_array(r)
        flat = r.reshape(-1)
        a = self.alpha
        ra = flat ** a
        out = self.mixing.integrate(lambda t: np.exp(-np.outer(t, ra)) / (a * t[:, None]),
                                    tol=1e-300, rtol=1e-12)
        out = np.broadcast_to(np.asarray(out, dtype=float), flat.shape).reshape(r.shape)
        return _unscalar(out, r)

    def integrate(self, phi, lo=0.0, hi=math.inf, rtol=0.0):
        Q, a = self.mixing, self.alpha
        if Q.is_zero:
            return 0.0
        total = 0.0
        if len(Q.t):
            # substitute v = t r^alpha: int phi(r) r^(a-1) e^{-t r^a} dr = (a t)^-1 int phi((v/t)^(1/a)) e^-v dv
            t, q = Q.t, Q.q
            c = q / (a * t)
            if lo == 0.0 and math.isinf(hi):
                def f(v):
                    rr = (np.outer(v, 1.0 / t)) ** (1.0 / a)
                    vals = np.asarray(phi(rr.reshape(-1)))
                    vals = vals.reshape(rr.shape + vals.shape[1:])
                    w = (np.exp(-v)[:, None] * c[None, :]).reshape(rr.shape + (1,) * (vals.ndim - 2))
                    return (vals * w).sum(axis=1)
                total = _integrate_range(f, 0.0, math.inf, points=[1.0], rtol=rtol)
            else:
                for tj, cj in zip(t, c):
                    va, vb = tj * lo ** a, tj * hi ** a if not math.isinf(hi) else math.inf

                    def f(v, tj=tj, cj=cj):
                        vals = np.asarray(phi((v / tj) ** (1.0 / a)))
                        return vals * (cj * np.exp(-v)).reshape((-1,) + (1,) * (vals.ndim - 1))
                    total = total + _integrate_range(f, va, vb, rtol=rtol)
        if Q.density is not None:
            dens_only = CMRep(a, MixingMeasure((), Q.density, Q.lo, Q.hi, Q.expr, Q.breaks))

            def f(r):
                v = np.asarray(phi(r))
                d = np.asarray(dens_only.pdf(r)).reshape((-1,) + (1,) * (v.ndim - 1))
                return np.where(d == 0, 0.0, v * d)
            total = total + _integrate_range(f, lo, hi, points=[1.0] if lo < 1 < hi else [], rtol=rtol)
        return total

    def levy_masses(self):
        a = self.alpha
        Q = self.mixing
        near = Q.integrate_positive(
            lambda t: t ** (-1.0 - 2.0 / a) * _lower_gamma(1.0 + 2.0 / a, t) / a)
        far = Q.integrate_positive(lambda t: np.exp(-t) / (a * t))
        return near, far

    def log_moment(self, m):
        # int_1^inf (log r)^m r^(a-1) e^{-t r^a} dr = (a t)^-1 int_0^inf (log(1+w/t)/a)^m e^{-t-w} dw
        a = self.alpha
        Q = self.mixing

        def inner(t):
            t = np.atleast_1d(np.asarray(t, dtype=float))
            out = np.zeros_like(t)
            ok = (t > 0) & (t < 700.0)
            if np.any(ok):
                tt = t[ok]
                val = integrate_halfline(
                    lambda w: (np.log1p(np.outer(w, 1.0 / tt)) / a) ** m * np.exp(-np.add.outer(w, tt)),
                    tol=1e-300, rtol=1e-10, points=[1.0]).value
                out[ok] = np.atleast_1d(val) / (a * tt)
            return out
        if Q.density is None:
            return float(np.sum(inner(Q.t) * Q.q)) if len(Q.t) else 0.0
        return Q.integrate_positive(inner)

    def mass(self):
        return self.mixing.integrate_positive(lambda t: 1.0 / (self.alpha * t))

    def scaled(self, c):
        return CMRep(self.alpha, self.mixing.scaled(c))

    def __add__(self, other):
        if isinstance(other, CMRep) and other.alpha == self.alpha and (
                self.mixing.density is None or other.mixing.density is None):
            return CMRep(self.alpha, self.mixing + other.mixing)
        return super().__add__(other)

    def to_dict(self):
        return {"kind": "cmrep", "alpha": self.alpha, "mixing": self.mixing.to_dict()}

    def __repr__(self):
        return f"CMRep(alpha={self.alpha}, mixing={self.mixing!r})"


class RadialSum(RadialMeasure):
    """Sum of radial measures (for instance atoms plus a density)."""

    kind = "sum"

    def __init__(self, parts):
        flat = []
        for p in parts:
            if isinstance(p, RadialSum):
                flat.extend(p.parts)
            elif not p.is_zero:
                flat.append(p)
        self.parts = flat

    @property
    def absolutely_continuous(self):
        return all(p.absolutely_continuous for p in self.parts)

    @property
    def is_zero(self):
        return not self.parts

    def integrate(self, phi, lo=0.0, hi=math.inf, rtol=0.0):
        return sum((p.integrate(phi, lo, hi, rtol) for p in self.parts), 0.0)

    def tail(self, r):
        return sum((p.tail(r) for p in self.parts), 0.0 * _as_array(r))

    def pdf(self, r):
        return sum((p.pdf(r) for p in self.parts), 0.0 * _as_array(r))

    def levy_masses(self):
        pairs = [p.levy_masses() for p in self.parts]
        return sum(a for a, _ in pairs), sum(b for _, b in pairs)

    def log_moment(self, m):
        return sum(p.log_moment(m) for p in self.parts)

    def mass(self):
        return sum(p.mass() for p in self.parts)

    def scaled(self, c):
        return RadialSum([p.scaled(c) for p in self.parts])

    def to_dict(self):
        return {"kind": "sum", "parts": [p.to_dict() for p in self.parts]}

    def __repr__(self):
        return f"RadialSum({self.parts!r})"


def radial_from_dict(d):
    kind = d["kind"]
    if kind == "atoms":
        atoms = d.get("atoms", [])
        return Atoms([a["r"] for a in atoms], [a["w"] for a in atoms])
    if kind == "density":
        hi = d.get("hi")
        return Density(d["expr"], d.get("lo", 0.0), math.inf if hi is None else hi,
                       breaks=d.get("breaks", ()), near0=d.get("near0"),
                       tail_func=d.get("tail_expr"))
    if kind == "tabulated":
        return TabulatedDensity(d["r"], d["pdf"])
    if kind == "cmrep":
        return CMRep(d["alpha"], MixingMeasure.from_dict(d["mixing"]))
    if kind == "atom_series":
        return AtomSeries(d["log_r"], d["w"], d.get("n_terms", 200_000), d.get("scale", 1.0))
    if kind == "sum":
        return RadialSum([radial_from_dict(p) for p in d["parts"]])
    raise ValueError(f"unknown radial kind {kind!r}")


# --------------------------------------------------------------------------
# Levy measures and triplets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Direction:
    xi: np.ndarray
    weight: float
    radial: RadialMeasure

    def __post_init__(self):
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        object.__setattr__(self, "xi", xi)
        if abs(np.linalg.norm(xi) - 1.0) > 1e-12:
            raise DomainError(f"direction {xi} is not a unit vector")
        if not self.weight > 0:
            raise DomainError("direction weights must be positive")


class LevyMeasure:
    """Finitely many directions, each with a weight and a radial measure."""

    def __init__(self, dim, directions=()):
        if dim not in (1, 2, 3):
            raise DomainError("dimension must be 1, 2 or 3")
        self.dim = dim
        dirs = []
        for d in directions:
            if not isinstance(d, Direction):
                d = Direction(*d)
            if d.xi.shape != (dim,):
                raise DomainError(f"direction {d.xi} does not live in R^{dim}")
            if dim == 1 and abs(abs(d.xi[0]) - 1.0) > 1e-12:
                raise DomainError("in one dimension directions must be +1 or -1")
            if not d.radial.is_zero:
                dirs.append(d)
        self.directions = tuple(dirs)

    @classmethod
    def zero(cls, dim=1):
        return cls(dim, ())

    @classmethod
    def one_sided(cls, radial, sign=1.0):
        return cls(1, [Direction([float(sign)], 1.0, radial)])

    @property
    def is_zero(self):
        return not self.directions

    def to_dict(self):
        return {"directions": [{"xi": d.xi.tolist(), "weight": float(d.weight),
                                "radial": d.radial.to_dict()} for d in self.directions]}

    @classmethod
    def from_dict(cls, dim, d):
        dirs = [Direction(x["xi"], x.get("weight", 1.0), radial_from_dict(x["radial"]))
                for x in d.get("directions", [])]
        return cls(dim, dirs)

    def __repr__(self):
        return f"LevyMeasure(dim={self.dim}, directions={list(self.directions)!r})"


class GeneratingTriplet:
    """The triplet (A, nu, gamma) of an infinitely divisible law on R^d."""

    def __init__(self, gaussian=None, levy=None, gamma=None, dim=None):
        if dim is None:
            if levy is not None:
                dim = levy.dim
            elif gaussian is not None:
                dim = np.atleast_2d(gaussian).shape[0]
            elif gamma is not None:
                dim = np.atleast_1d(gamma).shape[0]
            else:
                dim = 1
        A = np.zeros((dim, dim)) if gaussian is None else np.atleast_2d(np.asarray(gaussian, dtype=float))
        g = np.zeros(dim) if gamma is None else np.atleast_1d(np.asarray(gamma, dtype=float))
        levy = LevyMeasure.zero(dim) if levy is None else levy
        if A.shape != (dim, dim) or g.shape != (dim,) or levy.dim != dim:
            raise DomainError("triplet components disagree on the dimension")
        if not np.allclose(A, A.T, atol=1e-12):
            raise DomainError("Gaussian covariance must be symmetric")
        ev = np.linalg.eigvalsh(A)
        if np.any(ev < -1e-12 * max(np.trace(A), 1.0)):
            raise DomainError("Gaussian covariance must be positive semidefinite")
        A.setflags(write=False)
        g.setflags(write=False)
        self.dim = dim
        self.gaussian = A
        self.gamma = g
        self.levy = levy

    @classmethod
    def delta0(cls, dim=1):
        return cls(dim=dim)

    @classmethod
    def gaussian_law(cls, A):
        return cls(gaussian=A)

    @classmethod
    def compound_poisson(cls, radial, sign=1.0, gamma=0.0):
        return cls(levy=LevyMeasure.one_sided(radial, sign), gamma=[gamma])

    def to_dict(self):
        return {"dim": self.dim, "gaussian": self.gaussian.tolist(), "gamma": self.gamma.tolist(),
                "levy": self.levy.to_dict()}

    @classmethod
    def from_dict(cls, d):
        dim = int(d.get("dim", 1))
        return cls(d.get("gaussian"), LevyMeasure.from_dict(dim, d.get("levy", {})), d.get("gamma"), dim)

    def __repr__(self):
        return (f"GeneratingTriplet(A={self.gaussian.tolist()}, gamma={self.gamma.tolist()}, "
                f"levy={self.levy!r})")


triplet_from_dict = GeneratingTriplet.from_dict


def _levy_integrand(s):
    """phi(r) = e^{isr} - 1 - isr/(1+r^2) on a vector of s values."""
    s = np.asarray(s, dtype=float)

    def phi(r):
        sr = np.outer(r, s)
        rr = (r / (1.0 + r * r))[:, None]
        re = -2.0 * np.sin(0.5 * sr) ** 2
        im = np.sin(sr) - rr * s[None, :]
        return re + 1j * im
    return phi


def eval_cumulant(mu, z, rtol=0.0):
    """Cumulant C(z) = log of the characteristic function, vectorised.

    ``z`` may be a d-vector, or an array of shape (m, d); for d = 1 also a
    scalar or a 1-d array of points.  The return value has the matching
    shape (scalar for a single point).  ``rtol > 0`` switches the Lévy
    part to a purely relative accuracy target.
    """
    d = mu.dim
    z = np.asarray(z, dtype=float)
    if d == 1:
        single = z.ndim == 0
        pts = z.reshape(-1, 1)
        out_shape = z.shape
    else:
        single = z.ndim == 1
        pts = z.reshape(-1, d)
        out_shape = () if single else z.shape[:-1]
    if not np.all(np.isfinite(pts)):
        raise DomainError("cumulant argument must be finite")
    A = mu.gaussian
    val = -0.5 * np.einsum("mi,ij,mj->m", pts, A, pts) + 1j * (pts @ mu.gamma)
    val = val.astype(complex)
    for dr in mu.levy.directions:
        s = pts @ dr.xi
        nz = s != 0
        if not np.any(nz):
            continue
        contrib = np.zeros(len(s), dtype=complex)
        contrib[nz] = np.atleast_1d(dr.radial.integrate(_levy_integrand(s[nz]), rtol=rtol))
        val = val + dr.weight * contrib
    val[np.all(pts == 0, axis=1)] = 0.0
    if single or out_shape == ():
        return complex(val[0])
    return val.reshape(out_shape)


@dataclass(frozen=True)
class LevyReport:
    ok: bool
    mass2_near_0: float
    mass_far: float
    divergent: bool = False
    per_direction: list = field(default_factory=list)

    def to_dict(self):
        return {"ok": self.ok, "mass2_near_0": self.mass2_near_0, "mass_far": self.mass_far,
                "divergent": self.divergent}


def validate_levy_measure(nu):
    """Check ``int (r^2 ^ 1) nu(dr) < inf`` direction by direction."""
    near = far = 0.0
    per = []
    for d in nu.directions:
        a, b = d.radial.levy_masses()
        per.append((d.xi.tolist(), d.weight * a, d.weight * b))
        near += d.weight * a
        far += d.weight * b
    divergent = math.isinf(near) or math.isinf(far) or math.isnan(near) or math.isnan(far)
    return LevyReport(not divergent, near, far, divergent, per)


def log_moment_order(nu, m):
    """True iff ``int_{|x|>1} (log |x|)^m nu(dx)`` is finite."""
    if m < 1 or int(m) != m:
        raise ValueError("log-moment order must be a positive integer")
    total = sum(d.weight * d.radial.log_moment(m) for d in nu.directions)
    return bool(np.isfinite(total))


def convolve(mu1, mu2):
    """Triplet of the convolution: components add."""
    if mu1.dim != mu2.dim:
        raise DomainError(f"cannot convolve laws on R^{mu1.dim} and R^{mu2.dim}")
    dirs = list(mu1.levy.directions)
    for d2 in mu2.levy.directions:
        for i, d1 in enumerate(dirs):
            if np.allclose(d1.xi, d2.xi, atol=1e-12, rtol=0):
                if d1.weight == d2.weight:
                    dirs[i] = Direction(d1.xi, d1.weight, d1.radial + d2.radial)
                else:
                    dirs[i] = Direction(d1.xi, 1.0, d1.radial.scaled(d1.weight) + d2.radial.scaled(d2.weight))
                break
        else:
            dirs.append(d2)
    return GeneratingTriplet(mu1.gaussian + mu2.gaussian, LevyMeasure(mu1.dim, dirs),
                             mu1.gamma + mu2.gamma, mu1.dim)


def _directional_tail(nu, xi, r):
    total = np.zeros_like(r)
    for d in nu.directions:
        if np.allclose(d.xi, xi, atol=1e-12, rtol=0):
            total = total + d.weight * np.asarray(d.radial.tail(r))
    return total


def is_symmetric(mu, tol=1e-9):
    """True iff gamma is within tol of 0 and nu(B) = nu(-B) on tail sets.

    The tail sets are ``{r xi : r >= r0}`` for every direction present and
    r0 on a geometric grid refined at every atom location.
    """
    if np.max(np.abs(mu.gamma), initial=0.0) > tol:
        return False
    grid = list(np.geomspace(1e-3, 1e3, 31))
    for d in mu.levy.directions:
        for part in getattr(d.radial, "parts", [d.radial]):
            if isinstance(part, Atoms):
                grid.extend(part.r.tolist())
                grid.extend((part.r * (1 + 1e-9)).tolist())
    grid = np.unique(np.asarray(grid))
    seen = []
    for d in mu.levy.directions:
        if any(np.allclose(d.xi, s, atol=1e-12, rtol=0) for s in seen):
            continue
        seen.append(d.xi)
        t_plus = _directional_tail(mu.levy, d.xi, grid)
        t_minus = _directional_tail(mu.levy, -d.xi, grid)
        scale = np.maximum(1.0, np.maximum(np.abs(t_plus), np.abs(t_minus)))
        if np.any(np.abs(t_plus - t_minus) > max(tol, 1e-8) * scale):
            return False
    return True
