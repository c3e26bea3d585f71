"""
Mixing measures versus monotone integrands.

For an exponent alpha and a mixing measure Q on (0, inf) put
``F(x) = int_(0,x] t^-1 Q(dt)`` and ``h_Q = (F^<-)^(-1/alpha)`` with the
left-continuous inverse ``F^<-(s) = inf{y : F(y) >= s}``.  Integrating
``h_Q`` against the compound Poisson process with jump density
``x^(alpha-1) exp(-x^alpha)`` (one-sided ``Z``) or ``|x|^(alpha-1)
exp(-|x|^alpha)`` (symmetric ``Y``) produces the law whose radial Levy
density is ``r^(alpha-1) g(r^alpha)`` with g the Laplace transform of Q.
This module builds ``h_Q``, recovers Q from h, checks the tail identity
behind that correspondence and classifies integrands by how their
improper integral exists.
"""

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from .core import CMRep, MixingMeasure
from .expr import Expr
from .numerics import (
    DomainError,
    QuadratureError,
    integrate_finite,
    integrate_halfline,
    integrate_positive,
)

__all__ = [
    "Integrand",
    "InterleavedIntegrand",
    "QVerdict",
    "DomVerdict",
    "validate_Q",
    "F_of",
    "F_left_inverse",
    "h_from_Q",
    "Q_from_h",
    "tail_identity_check",
    "dom_classify",
    "interleave",
    "levy_tail_of_integral",
    "represent_one_sided",
    "jump_drift",
    "integrand_from_dict",
]

INTEGRATORS = ("Y_alpha", "Z_alpha")
ADAPTOR_BREAKS = 2 ** 12


# --------------------------------------------------------------------------
# integrands
# --------------------------------------------------------------------------


def _apply_nonzero(phi, v):
    """phi(v) with phi(0) taken as 0; supports trailing output axes."""
    v = np.asarray(v, dtype=float)
    nz = v != 0
    if np.all(nz):
        return np.asarray(phi(v))
    if not np.any(nz):
        probe = np.asarray(phi(np.array([1.0])))
        return np.zeros((len(v),) + probe.shape[1:], dtype=probe.dtype)
    vals = np.asarray(phi(v[nz]))
    out = np.zeros((len(v),) + vals.shape[1:], dtype=vals.dtype)
    out[nz] = vals
    return out


class Integrand:
    """Function h on (0, inf) given by left-closed steps plus an optional tail.

    ``breaks`` are increasing positive numbers b_1 < ... < b_n and
    ``values[i]`` is the value of h on ``(b_{i-1}, b_i]`` (with b_0 = 0), so
    h is left-continuous at every break.  For ``t > b_n`` the integrand is
    ``tail(t)`` if a tail is given and 0 otherwise.  ``tail_points`` are
    known kinks of the tail, used as quadrature panel edges.
    """

    def __init__(self, breaks=(), values=(), tail=None, tail_expr=None, tail_points=()):
        b = np.asarray(breaks, dtype=float).reshape(-1)
        v = np.asarray(values, dtype=float).reshape(-1)
        if b.shape != v.shape:
            raise ValueError("breaks and values must have equal length")
        if np.any(b <= 0) or np.any(np.diff(b) <= 0):
            raise ValueError("breaks must be positive and strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("step values must be finite")
        if tail_expr is not None and tail is None:
            tail = Expr(tail_expr, var="s")
        if isinstance(tail, Expr):
            tail_expr = tail.text
        self.breaks = b
        self.values = v
        self.tail = tail
        self.tail_expr = tail_expr
        self.tail_points = tuple(float(p) for p in tail_points)

    @property
    def start_of_tail(self):
        return float(self.breaks[-1]) if len(self.breaks) else 0.0

    @classmethod
    def indicator(cls, a, b=None, value=1.0):
        """``value`` on (a, b] (or on (0, a] if b is omitted)."""
        if b is None:
            return cls([a], [value])
        if a == 0:
            return cls([b], [value])
        return cls([a, b], [0.0, value])

    @classmethod
    def from_callable(cls, f, lo=1e-8, hi=1e8, n=ADAPTOR_BREAKS, keep_tail=True):
        """Step discretisation of a callable on ``n`` log-spaced breaks.

        Each step carries the value of f at its right end; beyond ``hi`` the
        callable itself is used as the tail when ``keep_tail`` is set.
        """
        b = np.geomspace(lo, hi, n)
        vals = np.asarray(f(b), dtype=float)
        return cls(b, vals, tail=f if keep_tail else None)

    @property
    def is_zero(self):
        return not np.any(self.values) and self.tail is None

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        idx = np.searchsorted(self.breaks, flat, side="left")
        out = np.zeros_like(flat)
        inside = idx < len(self.breaks)
        out[inside] = self.values[idx[inside]]
        if self.tail is not None and np.any(~inside):
            with np.errstate(all="ignore"):
                out[~inside] = np.asarray(self.tail(flat[~inside]), dtype=float)
        out = np.where(flat > 0, out, 0.0)
        return float(out[0]) if t.ndim == 0 else out.reshape(t.shape)

    def _tail_fn(self):
        tail = self.tail

        def f(s):
            with np.errstate(all="ignore"):
                return np.asarray(tail(s), dtype=float)
        return f

    def integrate(self, phi, p=0.0, q=math.inf, tol=1e-11):
        """``int_p^q phi(h(s)) ds`` with ``phi(0) = 0``; phi may return trailing axes."""
        if q <= p:
            return 0.0
        lefts = np.concatenate([[0.0], self.breaks[:-1]]) if len(self.breaks) else np.zeros(0)
        lengths = np.clip(np.minimum(self.breaks, q) - np.maximum(lefts, p), 0.0, None)
        total = 0.0
        sel = (lengths > 0) & (self.values != 0)
        if np.any(sel):
            vals = np.asarray(phi(self.values[sel]))
            total = (vals * lengths[sel].reshape((-1,) + (1,) * (vals.ndim - 1))).sum(axis=0)
        if self.tail is not None:
            a = max(p, self.start_of_tail)
            if a < q:
                tf = self._tail_fn()
                pts = [x for x in self.tail_points if a < x < q]

                def f(s):
                    return _apply_nonzero(phi, tf(s))
                if math.isinf(q):
                    total = total + integrate_halfline(f, tol=tol, a=a, points=pts).value
                else:
                    total = total + integrate_finite(f, a, q, tol=tol, points=pts).value
        return total

    def integrate_positive(self, phi, p=0.0, q=math.inf):
        """As :meth:`integrate` for nonnegative scalar phi; ``inf`` on divergence."""
        lefts = np.concatenate([[0.0], self.breaks[:-1]]) if len(self.breaks) else np.zeros(0)
        lengths = np.clip(np.minimum(self.breaks, q) - np.maximum(lefts, p), 0.0, None)
        sel = (lengths > 0) & (self.values != 0)
        total = float(np.sum(np.asarray(phi(self.values[sel])) * lengths[sel])) if np.any(sel) else 0.0
        if self.tail is not None:
            a = max(p, self.start_of_tail)
            if a < q:
                tf = self._tail_fn()

                def f(s):
                    return np.asarray(_apply_nonzero(phi, tf(s)), dtype=float)
                pts = [x for x in self.tail_points if a < x < q]
                if a == 0.0 or math.isinf(q):
                    total += integrate_positive(f, a, q, points=pts)
                else:
                    try:
                        total += float(integrate_finite(f, a, q, rtol=1e-10, points=pts).value)
                    except QuadratureError:
                        return math.inf
        return total

    def positive_part(self):
        tail = None
        if self.tail is not None:
            tf = self._tail_fn()
            tail = lambda s: np.maximum(tf(s), 0.0)  # noqa: E731
        return Integrand(self.breaks, np.maximum(self.values, 0.0), tail, tail_points=self.tail_points)

    def negative_part(self):
        tail = None
        if self.tail is not None:
            tf = self._tail_fn()
            tail = lambda s: np.maximum(-tf(s), 0.0)  # noqa: E731
        return Integrand(self.breaks, np.maximum(-self.values, 0.0), tail, tail_points=self.tail_points)

    def scaled(self, c):
        tail = None
        if self.tail is not None:
            tf = self._tail_fn()
            tail = lambda s: c * tf(s)  # noqa: E731
        return Integrand(self.breaks, c * self.values, tail, tail_points=self.tail_points)

    def is_nonnegative(self, probe=None):
        if np.any(self.values < 0):
            return False
        if self.tail is not None:
            s = self._probe(probe)
            return bool(np.all(self._tail_fn()(s) >= 0))
        return True

    def _probe(self, probe):
        a = self.start_of_tail
        return np.asarray(probe) if probe is not None else a + np.geomspace(1e-6, 1e8, 400) * max(a, 1.0)

    def is_nonincreasing(self, probe=None):
        """Exact on the steps; on a probe grid for the tail."""
        if np.any(np.diff(self.values) > 0):
            return False
        if self.tail is not None:
            s = self._probe(probe)
            tv = self._tail_fn()(s)
            if np.any(np.diff(tv) > 1e-14 * np.maximum(1.0, np.abs(tv[:-1]))):
                return False
            if len(self.values) and tv[0] > self.values[-1] * (1 + 1e-12) + 1e-300:
                return False
        return True

    def vanishes_at_infinity(self):
        if self.tail is None:
            return True
        v = self._tail_fn()(np.array([1e12, 1e15]))
        return bool(abs(v[-1]) < 1e-3 and abs(v[-1]) <= abs(v[0]) + 1e-300)

    @property
    def signature(self):
        return "nonnegative" if self.is_nonnegative() else "signed"

    def to_dict(self):
        out = {"steps": [{"t": float(b), "v": float(v)} for b, v in zip(self.breaks, self.values)]}
        if self.tail is not None:
            if self.tail_expr is not None:
                out["tail"] = {"expr": self.tail_expr, "from": self.start_of_tail}
            else:
                # tabulate the callable tail on the adaptor grid
                start = self.start_of_tail
                grid = start + np.geomspace(1e-6, 1e8, ADAPTOR_BREAKS) * max(start, 1.0)
                vals = self._tail_fn()(grid)
                out["steps"].extend({"t": float(t), "v": float(v)} for t, v in zip(grid, vals))
        return out

    def __repr__(self):
        tail = "" if self.tail is None else f", tail={self.tail_expr or 'callable'}"
        return f"Integrand(breaks={self.breaks.tolist()[:8]}, values={self.values.tolist()[:8]}{tail})"


def integrand_from_dict(d):
    if "interleave" in d:
        parts = d["interleave"]
        return InterleavedIntegrand(integrand_from_dict(parts["plus"]), integrand_from_dict(parts["minus"]))
    steps = d.get("steps", [])
    tail = d.get("tail")
    return Integrand([s["t"] for s in steps], [s["v"] for s in steps],
                     tail_expr=None if tail is None else tail["expr"])


class InterleavedIntegrand:
    """Signed integrand built by alternating blocks of ``h_plus`` and ``-h_minus``.

    On ``(2n, 2n+1]`` it equals ``h_plus(t - n)`` and on ``(2n+1, 2n+2]`` it
    equals ``-h_minus(t - n - 1)`` for n >= 1.  On the dyadic blocks
    ``(2^-k, 2^-k + 2^-k-1]`` it is ``h_plus(t - 2^-k-1)`` and on
    ``(2^-k + 2^-k-1, 2^-k+1]`` it is ``-h_minus(t - 2^-k)`` for k >= 0.
    Each of h_plus and h_minus is thereby laid out exactly once over
    (0, inf).
    """

    def __init__(self, h_plus, h_minus):
        self.h_plus = h_plus
        self.h_minus = h_minus

    @property
    def is_zero(self):
        return self.h_plus.is_zero and self.h_minus.is_zero

    def _locate(self, t):
        """Return (sign, u) for each t > 0."""
        t = np.asarray(t, dtype=float)
        sign = np.zeros_like(t)
        u = np.zeros_like(t)
        small = (t > 0) & (t <= 2.0)
        if np.any(small):
            ts = t[small]
            k = np.floor(-np.log2(ts)) + 1.0
            # guard floating point at exact powers of two
            lo = 2.0 ** (-k)
            k = np.where(ts <= lo, k + 1, k)
            k = np.where(ts > 2.0 * 2.0 ** (-k), k - 1, k)
            lo = 2.0 ** (-k)
            pos = ts <= lo + 0.5 * lo
            sign[small] = np.where(pos, 1.0, -1.0)
            u[small] = np.where(pos, ts - 0.5 * lo, ts - lo)
        big = t > 2.0
        if np.any(big):
            tb = t[big]
            n = np.ceil(tb / 2.0) - 1.0
            pos = tb <= 2.0 * n + 1.0
            sign[big] = np.where(pos, 1.0, -1.0)
            u[big] = np.where(pos, tb - n, tb - n - 1.0)
        return sign, u

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        sign, u = self._locate(flat)
        out = np.zeros_like(flat)
        p = sign > 0
        m = sign < 0
        if np.any(p):
            out[p] = np.asarray(self.h_plus(u[p]), dtype=float)
        if np.any(m):
            out[m] = -np.asarray(self.h_minus(u[m]), dtype=float)
        return float(out[0]) if t.ndim == 0 else out.reshape(t.shape)

    def blocks(self, p, q):
        """Pieces ``(sign, u_lo, u_hi)`` such that (p, q] is covered by h = sign * h_sign(u).

        Contiguous u-ranges of the same sign are merged, so an integral over
        (p, q] needs at most a handful of integrals of h_plus and h_minus.
        """
        pieces = []
        if p < 2.0:
            kmax = 60 if p <= 0 else int(math.floor(-math.log2(p))) + 2
            for k in range(kmax + 1):
                lo = 2.0 ** (-k)
                for sign, a, b, shift in ((1.0, lo, 1.5 * lo, 0.5 * lo), (-1.0, 1.5 * lo, 2.0 * lo, lo)):
                    a, b = max(a, p), min(b, q)
                    if a < b:
                        pieces.append((sign, a - shift, b - shift))
            if p <= 0:
                last = 2.0 ** (-kmax - 1)
                pieces.append((1.0, 0.0, last))
                pieces.append((-1.0, 0.0, last))
        if q > 2.0:
            n_first = max(1, int(math.floor(p / 2.0)))
            n_last = math.inf if math.isinf(q) else int(math.ceil(q / 2.0))
            single = [n for n in (n_first, n_first + 1, n_last - 1, n_last)
                      if not math.isinf(n) and n_first <= n <= n_last]
            for n in sorted(set(single)):
                for sign, a, b, shift in ((1.0, 2.0 * n, 2.0 * n + 1.0, float(n)),
                                          (-1.0, 2.0 * n + 1.0, 2.0 * n + 2.0, float(n + 1))):
                    a, b = max(a, p), min(b, q)
                    if a < b:
                        pieces.append((sign, a - shift, b - shift))
            # blocks strictly between the end blocks lie inside (p, q] and
            # lay h_plus and h_minus over one contiguous u-range
            lo_mid = n_first + 2
            hi_mid = n_last - 2
            if hi_mid >= lo_mid:
                end = math.inf if math.isinf(hi_mid) else hi_mid + 1.0
                pieces.append((1.0, float(lo_mid), end))
                pieces.append((-1.0, float(lo_mid), end))
        merged = []
        for sign in (1.0, -1.0):
            segs = sorted((a, b) for s_, a, b in pieces if s_ == sign)
            cur = None
            for a, b in segs:
                if cur is not None and abs(a - cur[1]) <= 1e-15 * max(1.0, abs(a)):
                    cur = (cur[0], b)
                else:
                    if cur is not None:
                        merged.append((sign, *cur))
                    cur = (a, b)
            if cur is not None:
                merged.append((sign, *cur))
        return merged

    def integrate(self, phi, p=0.0, q=math.inf, positive=False):
        """``int_p^q phi(h(s)) ds`` evaluated block by block on h_plus and h_minus."""
        total = 0.0
        for sign, ulo, uhi in self.blocks(p, q):
            if sign > 0:
                base, psi = self.h_plus, phi
            else:
                base, psi = self.h_minus, (lambda v: phi(-np.asarray(v)))
            if positive:
                total = total + base.integrate_positive(psi, ulo, uhi)
            else:
                total = total + base.integrate(psi, ulo, uhi)
        return total

    def integrate_positive(self, phi, p=0.0, q=math.inf):
        return self.integrate(phi, p, q, positive=True)

    def positive_part(self):
        return InterleavedIntegrand(self.h_plus, Integrand())

    def negative_part(self):
        return InterleavedIntegrand(Integrand(), self.h_minus)

    def is_nonnegative(self, probe=None):
        return self.h_minus.is_zero

    @property
    def signature(self):
        return "nonnegative" if self.is_nonnegative() else "signed"

    def vanishes_at_infinity(self):
        return self.h_plus.vanishes_at_infinity() and self.h_minus.vanishes_at_infinity()

    def to_dict(self):
        return {"interleave": {"plus": self.h_plus.to_dict(), "minus": self.h_minus.to_dict()}}


def interleave(h_plus, h_minus):
    """Signed integrand whose positive jumps come from h_plus and negative from h_minus."""
    return InterleavedIntegrand(h_plus, h_minus)


# --------------------------------------------------------------------------
# mixing measures
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QVerdict:
    ok: bool
    mode: str
    alpha: float
    near: float
    far_levy: float
    far_bv: float

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"ok": self.ok, "mode": self.mode, "alpha": self.alpha, "near": self.near,
                "far_levy": self.far_levy, "far_bv": self.far_bv}


def validate_Q(Q, alpha, mode="levy"):
    """Check the integrability conditions on a mixing measure.

    ``near = int_(0,1] t^-1 Q(dt)`` must be finite in both modes;
    ``far_levy = int_(1,inf) t^(-1-2/alpha) Q(dt)`` in ``levy`` mode and
    ``far_bv = int_(1,inf) t^(-1-1/alpha) Q(dt)`` in ``bounded_variation``
    mode.  All three values are reported.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if mode in ("bv", "bounded_variation"):
        mode = "bounded_variation"
    elif mode != "levy":
        raise ValueError(f"unknown mode {mode!r}")
    near = Q.integrate_positive(lambda t: 1.0 / t, 0.0, 1.0)
    far_levy = Q.integrate_positive(lambda t: t ** (-1.0 - 2.0 / alpha), 1.0, math.inf)
    far_bv = Q.integrate_positive(lambda t: t ** (-1.0 - 1.0 / alpha), 1.0, math.inf)
    far = far_levy if mode == "levy" else far_bv
    ok = bool(np.isfinite(near) and np.isfinite(far))
    return QVerdict(ok, mode, float(alpha), float(near), float(far_levy), float(far_bv))


class _FTable:
    """Accumulated ``F(x) = int_(0,x] t^-1 Q(dt)`` on a geometric grid, with exact refinement."""

    N = 4096

    def __init__(self, Q):
        self.Q = Q
        if Q.density is not None:
            lo = max(Q.lo, 1e-14)
            hi = min(Q.hi, 1e30)
            if Q.lo > 0:
                lo = Q.lo
            grid = np.geomspace(lo, hi, self.N)
        else:
            grid = np.zeros(0)
        self.grid = grid
        # density increments per panel via a fixed Gauss-Kronrod rule on each panel
        if len(grid):
            inc = _panel_integrals(lambda t: Q.density_at(t) / t, grid[:-1], grid[1:])
            head = 0.0
            if Q.lo == 0.0 and Q.density is not None:
                try:
                    head = float(integrate_finite(lambda t: Q.density_at(t) / t, 0.0, grid[0],
                                                  tol=1e-14).value)
                except QuadratureError as exc:
                    head = float(exc.result.value)
            self.dens_cum = head + np.concatenate([[0.0], np.cumsum(inc)])
        else:
            self.dens_cum = np.zeros(0)

    def density_F(self, x):
        """Density part of F at points x (vectorised)."""
        x = np.asarray(x, dtype=float)
        if not len(self.grid):
            return np.zeros_like(x)
        g = self.grid
        xc = np.clip(x, 0.0, g[-1])
        idx = np.clip(np.searchsorted(g, xc, side="right") - 1, 0, len(g) - 1)
        base = np.where(xc < g[0], 0.0, self.dens_cum[idx])
        left = np.where(xc < g[0], 0.0, g[idx])
        Q = self.Q
        extra = _panel_integrals(lambda t: Q.density_at(t) / t, left, np.maximum(xc, left))
        if np.any(xc < g[0]) and Q.lo == 0.0:
            small = xc < g[0]
            # below the grid: F is at most the head mass; interpolate linearly
            extra = np.where(small, self.dens_cum[0] * xc / g[0], extra)
        return base + extra

    def F(self, x):
        x = np.asarray(x, dtype=float)
        Q = self.Q
        atoms = np.zeros_like(x)
        if len(Q.t):
            c = np.concatenate([[0.0], np.cumsum(Q.q / Q.t)])
            atoms = c[np.searchsorted(Q.t, x, side="right")]
        return atoms + self.density_F(x)

    def total(self):
        Q = self.Q
        tot = float(np.sum(Q.q / Q.t)) if len(Q.t) else 0.0
        if len(self.grid):
            tot += float(self.dens_cum[-1])
            if math.isinf(Q.hi) and Q.hi > self.grid[-1]:
                tail = Q.integrate_positive(lambda t: 1.0 / t, self.grid[-1], math.inf)
                tot += tail
        return tot


def _panel_integrals(f, a, b):
    """Fixed 21-point Gauss-Kronrod rule on each panel (a[i], b[i])."""
    from .numerics import _KW, _NODES

    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    return (fx @ _KW) * half


def F_of(Q, x):
    """``F(x) = int_(0,x] t^-1 Q(dt)`` (vectorised, right-continuous)."""
    x = np.asarray(x, dtype=float)
    out = _FTable(Q).F(x)
    return float(out) if x.ndim == 0 else out


def _inverse_from_table(table, s):
    """Left-continuous inverse of F at the points s (array, s > 0)."""
    Q = table.Q
    s = np.asarray(s, dtype=float)
    out = np.full_like(s, math.inf)
    # candidate points where F may first reach s: atoms and the density grid
    cand = np.unique(np.concatenate([Q.t, table.grid]))
    if not len(cand):
        return out
    Fc = table.F(cand)
    j = np.searchsorted(Fc, s, side="left")  # first candidate with F >= s
    found = j < len(cand)
    out[~found] = math.inf
    if not np.any(found):
        return out
    jj = j[found]
    xr = cand[jj]
    xl = np.where(jj > 0, cand[np.maximum(jj - 1, 0)], 0.0)
    ss = s[found]
    if Q.density is None:
        out[found] = xr
        return out
    # F is continuous on (xl, xr) apart from the jump at xr when xr is an atom;
    # solve F(x) = s inside (xl, xr] by safeguarded bisection/secant.
    lo = xl.copy()
    hi = xr.copy()
    Flo = np.where(jj > 0, Fc[np.maximum(jj - 1, 0)], 0.0)
    Fhi_left = table.F(np.nextafter(xr, 0.0))
    need = Fhi_left >= ss  # otherwise the jump at xr is what reaches s
    res = xr.copy()
    if np.any(need):
        a, b = lo[need], hi[need]
        fa, fb = Flo[need] - ss[need], Fhi_left[need] - ss[need]
        target = ss[need]
        for _ in range(200):
            # secant inside the bracket, bisection as a safeguard
            with np.errstate(invalid="ignore", divide="ignore"):
                x = a - fa * (b - a) / (fb - fa)
            bad = ~np.isfinite(x) | (x <= a) | (x >= b)
            x = np.where(bad, 0.5 * (a + b), x)
            geo = (a > 0) & (b / np.maximum(a, 1e-300) > 4.0)
            x = np.where(geo, np.sqrt(a * np.maximum(b, 1e-300)), x)
            fx = table.F(x) - target
            left = fx >= 0
            b = np.where(left, x, b)
            fb = np.where(left, fx, fb)
            a = np.where(left, a, x)
            fa = np.where(left, fa, fx)
            if np.all((b - a) <= 1e-13 * np.maximum(b, 1e-300)):
                break
        res[need] = b
    out[found] = res
    return out


def F_left_inverse(Q, s):
    """``F^<-(s) = inf{y : F(y) >= s}``; ``inf`` beyond the total mass of t^-1 Q."""
    s = np.asarray(s, dtype=float)
    flat = s.reshape(-1)
    out = np.zeros_like(flat)
    pos = flat > 0
    table = _FTable(Q)
    if np.any(pos):
        out[pos] = _inverse_from_table(table, flat[pos])
    return float(out[0]) if s.ndim == 0 else out.reshape(s.shape)


def h_from_Q(Q, alpha, check=True):
    """Nonincreasing left-continuous integrand ``h_Q = (F^<-)^(-1/alpha)``.

    For purely atomic Q the result is an exact step function.  With a
    density part, h is the exact inverse evaluated on demand (a tail
    callable starting at 0) and the steps are empty.
    """
    if check:
        v = validate_Q(Q, alpha, "levy")
        if not v.ok:
            raise DomainError(f"mixing measure violates the Levy integrability conditions: {v.to_dict()}")
    if Q.density is None:
        if not len(Q.t):
            return Integrand()
        c = np.cumsum(Q.q / Q.t)
        return Integrand(c, Q.t ** (-1.0 / alpha))
    table = _FTable(Q)

    def h(s):
        s = np.asarray(s, dtype=float)
        x = _inverse_from_table(table, np.maximum(s, 1e-300).reshape(-1)).reshape(s.shape)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(np.isinf(x), 0.0, x ** (-1.0 / alpha))
    points = []
    if len(Q.t):
        points = list(table.F(Q.t)) + list(table.F(np.nextafter(Q.t, 0.0)))
    return Integrand(tail=h, tail_points=sorted(p for p in points if p > 0))


def Q_from_h(h, alpha, lo=1e-8, hi=1e8):
    """Mixing measure with ``t^-1 Q`` the image of Lebesgue measure under ``h^-alpha``.

    A step of value v > 0 and length l becomes an atom at ``v^-alpha`` of mass
    ``v^-alpha * l``.  A tail callable is first discretised with the
    log-spaced step adaptor between its start and ``hi``.
    """
    if isinstance(h, InterleavedIntegrand):
        raise TypeError("Q_from_h needs a nonnegative integrand")
    if np.any(h.values < 0):
        raise DomainError("Q_from_h needs a nonnegative integrand")
    breaks, values = h.breaks, h.values
    if h.tail is not None:
        start = h.start_of_tail
        grid = np.geomspace(max(start, lo), hi, ADAPTOR_BREAKS)
        if start == 0.0:
            tb = grid
        else:
            tb = grid if grid[0] > start else grid[1:]
        tv = np.asarray(h._tail_fn()(tb), dtype=float)
        breaks = np.concatenate([breaks, tb])
        values = np.concatenate([values, tv])
    lefts = np.concatenate([[0.0], breaks[:-1]])
    lengths = breaks - lefts
    sel = values > 0
    t = values[sel] ** (-alpha)
    q = t * lengths[sel]
    tu, inv = np.unique(t, return_inverse=True)
    qu = np.bincount(inv, weights=q, minlength=len(tu))
    return MixingMeasure(zip(tu, qu))


def tail_identity_check(Q, h, alpha, r_grid=(0.25, 0.5, 1.0, 2.0, 4.0)):
    """Max relative gap between ``int t^-1 e^{-r^a t} Q(dt)`` and ``int e^{-r^a/|h|^a} ds``."""
    r = np.asarray(r_grid, dtype=float)
    ra = r ** alpha
    lhs = np.atleast_1d(Q.integrate(lambda t: np.exp(-np.outer(t, ra)) / t[:, None]))
    lhs = np.broadcast_to(lhs, ra.shape)

    def phi(v):
        with np.errstate(divide="ignore", over="ignore"):
            return np.exp(-np.outer(np.abs(v) ** (-alpha), ra))
    msg = "tail integral of h diverges: h is not in the domain"
    try:
        rhs = np.atleast_1d(h.integrate(phi))
    except (QuadratureError, ValueError) as exc:
        raise DomainError(f"{msg} ({exc})") from None
    rhs = np.broadcast_to(rhs, ra.shape)
    if not np.all(np.isfinite(rhs)):
        raise DomainError(msg)
    denom = np.maximum(np.abs(lhs), 1e-300)
    return float(np.max(np.abs(lhs - rhs) / denom))


# --------------------------------------------------------------------------
# domain classification
# --------------------------------------------------------------------------


def _psi2(v, alpha):
    """int ((v x)^2 ^ 1) x^(a-1) e^{-x^a} dx for v > 0."""
    v = np.abs(np.asarray(v, dtype=float))
    a = alpha
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        c = v ** (-a)
        out = v * v * special.gammainc(1 + 2 / a, c) * special.gamma(1 + 2 / a) / a + np.exp(-c) / a
    return np.where(v > 0, out, 0.0)


def _psi1(v, alpha):
    """int (|v x| ^ 1) x^(a-1) e^{-x^a} dx for v > 0."""
    v = np.abs(np.asarray(v, dtype=float))
    a = alpha
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        c = v ** (-a)
        out = v * special.gammainc(1 + 1 / a, c) * special.gamma(1 + 1 / a) / a + np.exp(-c) / a
    return np.where(v > 0, out, 0.0)


def _drift_direct(w, alpha):
    """Quadrature for delta at positive points w, a chunk at a time."""
    out = np.empty_like(w)
    a = alpha
    for i in range(0, len(w), 64):
        ww = w[i:i + 64]

        def f(u, ww=ww):
            # u = x^a, x^(a-1) dx = du / a
            vx = np.outer(u ** (1.0 / a), ww)
            return vx / (1.0 + vx * vx) * (np.exp(-u) / a)[:, None]
        out[i:i + 64] = np.atleast_1d(integrate_halfline(f, tol=1e-14, rtol=1e-12, points=[1.0]).value)
    return out


@functools.lru_cache(maxsize=16)
def _drift_table(alpha):
    lv = np.linspace(math.log(1e-8), math.log(1e8), 2001)
    d = _drift_direct(np.exp(lv), alpha)
    spline = CubicSpline(lv, np.log(d))
    slope_hi = (math.log(d[-1]) - math.log(d[-2])) / (lv[-1] - lv[-2])
    return lv, d, spline, slope_hi


def jump_drift(v, alpha):
    """``delta(v) = int v x / (1 + v^2 x^2) x^(a-1) e^{-x^a} dx`` (odd in v).

    Interpolated in log-log coordinates from a table on [1e-8, 1e8] that is
    built once per alpha; linear in v below the table and a power law
    above it.
    """
    v = np.asarray(v, dtype=float)
    flat = v.reshape(-1)
    av = np.abs(flat)
    out = np.zeros_like(flat)
    nz = av > 0
    if np.any(nz):
        lv, d, spline, slope_hi = _drift_table(float(alpha))
        lw = np.log(av[nz])
        mid = np.exp(spline(np.clip(lw, lv[0], lv[-1])))
        low = d[0] * np.exp(lw - lv[0])
        high = d[-1] * np.exp(slope_hi * (lw - lv[-1]))
        val = np.where(lw < lv[0], low, np.where(lw > lv[-1], high, mid))
        out[nz] = np.sign(flat[nz]) * val
    return float(out[0]) if v.ndim == 0 else out.reshape(v.shape)


LEVELS = ("not_integrable", "dom_es", "dom", "dom_bv")


@dataclass(frozen=True)
class DomVerdict:
    level: str
    integrator: str
    alpha: float
    checks: dict = field(default_factory=dict)

    def at_least(self, level):
        return LEVELS.index(self.level) >= LEVELS.index(level)

    def to_dict(self):
        return {"level": self.level, "integrator": self.integrator, "alpha": self.alpha,
                "checks": dict(self.checks)}


def _drift_limit(h, alpha, kmax=40):
    """Partial drift integrals over (2^-k, 2^k]; returns (limit or None, trace)."""
    trace = []
    for k in range(2, kmax + 1, 2):
        p, q = 2.0 ** (-k), 2.0 ** k
        val = float(h.integrate(lambda v: jump_drift(v, alpha), p, q))
        trace.append(val)
    diffs = np.abs(np.diff(trace[-6:]))
    if np.all(diffs <= 1e-6 * max(1.0, abs(trace[-1]))):
        return trace[-1], trace
    return None, trace


def dom_classify(h, integrator="Z_alpha", alpha=1.0):
    """Decide how the improper integral of h against Y or Z exists.

    Levels: ``not_integrable`` (the jump-mass condition fails),
    ``dom_es`` (definable after centering), ``dom`` (definable as an
    improper limit) and ``dom_bv`` (``dom`` and the integral has bounded
    variation).  For the symmetric Y only the jump-mass integral decides
    ``dom``; for Z the drift integrals are checked as well.
    """
    if integrator not in INTEGRATORS:
        raise ValueError(f"integrator must be one of {INTEGRATORS}")
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    factor = 2.0 if integrator == "Y_alpha" else 1.0
    checks = {}
    i1 = factor * h.integrate_positive(lambda v: _psi2(v, alpha))
    checks["jump_mass"] = i1
    if not np.isfinite(i1):
        return DomVerdict("not_integrable", integrator, alpha, checks)
    i4 = factor * h.integrate_positive(lambda v: _psi1(v, alpha))
    checks["variation"] = i4
    if integrator == "Y_alpha":
        checks["local_drift"] = 0.0
        checks["drift_limit"] = 0.0
        level = "dom_bv" if np.isfinite(i4) else "dom"
        return DomVerdict(level, integrator, alpha, checks)
    # Z: |delta| <= 1/(2 alpha) so the local drift condition always holds
    checks["local_drift"] = float(h.integrate_positive(lambda v: np.abs(jump_drift(v, alpha)), 0.5, 2.0))
    if h.is_nonnegative():
        d = h.integrate_positive(lambda v: jump_drift(v, alpha))
        checks["drift_limit"] = d
        has_limit = bool(np.isfinite(d))
    else:
        lim, trace = _drift_limit(h, alpha)
        checks["drift_limit"] = lim if lim is not None else math.inf
        checks["drift_trace"] = trace
        has_limit = lim is not None
    if not has_limit:
        return DomVerdict("dom_es", integrator, alpha, checks)
    level = "dom_bv" if np.isfinite(i4) else "dom"
    return DomVerdict(level, integrator, alpha, checks)


def levy_tail_of_integral(h, alpha, r, side="+", integrator="Z_alpha"):
    """Mass of the Levy measure of ``int h dZ`` (or dY) on ``[r, inf)`` (side +) or ``(-inf, -r]``."""
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    r = float(r)
    sgn = 1.0 if side == "+" else -1.0

    def tail(v, want):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            val = np.exp(-(r / np.abs(v)) ** alpha) / alpha
        return np.where(np.sign(v) == want, val, 0.0)
    if integrator == "Z_alpha":
        val = h.integrate_positive(lambda v: tail(v, sgn))
    elif integrator == "Y_alpha":
        val = h.integrate_positive(lambda v: tail(v, 1.0) + tail(v, -1.0))
    else:
        raise ValueError(f"integrator must be one of {INTEGRATORS}")
    if not np.isfinite(val):
        raise DomainError("the tail integral diverges: h is outside the essential domain")
    return float(val)


def represent_one_sided(Q, alpha):
    """Integrand h >= 0 with ``int h dZ`` having radial Levy density from CMRep(alpha, Q).

    Requires the bounded-variation condition on Q, in which case ``h_Q``
    lies in the improper-integral domain.  Otherwise the candidate ``h_Q``
    is classified and, when it falls short of the domain, a DomainError is
    raised carrying the verdict: no nonnegative integrand can represent a
    one-sided law of infinite variation as an improper integral.
    """
    lv = validate_Q(Q, alpha, "levy")
    if not lv.ok:
        raise DomainError(f"mixing measure violates the Levy integrability conditions: {lv.to_dict()}")
    h = h_from_Q(Q, alpha, check=False)
    verdict = dom_classify(h, "Z_alpha", alpha)
    if not verdict.at_least("dom"):
        err = DomainError(
            "no nonnegative integrand in the improper-integral domain represents this law: "
            f"the candidate h_Q is only {verdict.level} (bounded-variation integral "
            f"int_1^inf t^(-1-1/alpha) Q(dt) = {lv.far_bv})")
        err.verdict = verdict
        err.h = h
        raise err
    return h, verdict


def radial_of_integral(h, alpha):
    """CMRep of the Levy measure of ``int h dZ`` for nonnegative step h."""
    return CMRep(alpha, Q_from_h(h, alpha))
