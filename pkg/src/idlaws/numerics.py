"""
Quadrature, special functions and monotone inversion.

Every integral in the package goes through :func:`integrate_finite` or
:func:`integrate_halfline`.  Both run a globally adaptive Gauss-Kronrod
(10/21 point) scheme that evaluates the integrand on whole batches of
nodes at once, so integrands must accept a 1-d array of abscissae and
return an array whose first axis matches it.  Trailing axes are allowed
and are integrated component-wise, which is how nested integrals are
vectorised.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "QuadratureError",
    "QuadratureResult",
    "integrate_finite",
    "integrate_halfline",
    "integrate_positive",
    "endpoint_exponent",
    "gamma_fn",
    "exp_integral_e1",
    "invert_monotone",
    "laplace_of_measure",
    "inverse_e1",
    "EULER_GAMMA",
]

EULER_GAMMA = 0.57721566490153286061

DEFAULT_ATOL = 1e-10
DEFAULT_LIMIT = 4000


class DomainError(ValueError):
    """An argument lies outside the set on which an operation is defined."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed; ``result`` holds the best estimate."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class QuadratureResult:
    value: object
    abs_error_estimate: float
    subdivisions: int


# Gauss-Kronrod 21-point rule (QUADPACK qk21).
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525029962,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# full 21-node layout on [-1, 1]
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(21)
_GW[[1, 3, 5, 7, 9]] = _WG
_GW[[19, 17, 15, 13, 11]] = _WG

_EPS = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny


def _gk21(f, lo, hi):
    """Apply the 21-point rule to every panel (lo[i], hi[i]) at once."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()))
    vshape = fx.shape[1:]
    fx = fx.reshape((len(lo), 21) + vshape)
    if not np.all(np.isfinite(fx)):
        bad = x.reshape(-1)[~np.isfinite(fx.reshape(len(lo) * 21, -1)).all(axis=1)]
        raise ValueError(f"integrand is not finite at x={bad[:3]}")
    hk = half.reshape((-1,) + (1,) * len(vshape))
    kron = np.einsum("pn...,n->p...", fx, _KW)
    gauss = np.einsum("pn...,n->p...", fx, _GW)
    mean = kron / 2.0
    resasc = np.einsum("pn...,n->p...", np.abs(fx - mean[:, None]), _KW)
    resabs = np.einsum("pn...,n->p...", np.abs(fx), _KW)
    kron = kron * hk
    resasc = resasc * np.abs(hk)
    resabs = resabs * np.abs(hk)
    err = np.abs((kron - gauss * hk))
    # QUADPACK error scaling
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPS * resabs
    err = np.where(resabs > _UFLOW / (50 * _EPS), np.maximum(err, floor), err)
    return kron, err


def _adaptive(f, edges, atol, rtol, limit):
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1].copy(), edges[1:].copy()
    val, err = _gk21(f, lo, hi)
    vaxes = tuple(range(1, val.ndim))
    while True:
        total = val.sum(axis=0)
        toterr = err.sum(axis=0)
        allowed = np.maximum(atol, rtol * np.abs(total))
        if np.all(toterr <= allowed):
            return QuadratureResult(_scalarise(total), float(np.max(toterr)), len(lo))
        # panels sorted by their share of the (normalised) error budget
        score = err / allowed
        if vaxes:
            score = score.max(axis=vaxes)
        width_ok = (hi - lo) > 64 * _EPS * np.maximum(np.abs(lo), np.abs(hi))
        score = np.where(width_ok, score, 0.0)
        order = np.argsort(-score)
        csum = np.cumsum(score[order])
        excess = csum[-1] - 0.5
        nsel = int(np.searchsorted(csum, excess) + 1) if excess > 0 else 1
        nsel = min(max(nsel, 1), limit - len(lo))
        if nsel <= 0 or score[order[0]] == 0.0:
            res = QuadratureResult(_scalarise(total), float(np.max(toterr)), len(lo))
            why = "subdivision limit reached" if nsel <= 0 else "roundoff prevents further subdivision"
            raise QuadratureError(f"quadrature did not converge: {why} "
                                  f"(error estimate {res.abs_error_estimate:.3e})", res)
        sel = order[:nsel]
        keep = np.ones(len(lo), dtype=bool)
        keep[sel] = False
        m = 0.5 * (lo[sel] + hi[sel])
        nlo = np.concatenate([lo[sel], m])
        nhi = np.concatenate([m, hi[sel]])
        nval, nerr = _gk21(f, nlo, nhi)
        lo = np.concatenate([lo[keep], nlo])
        hi = np.concatenate([hi[keep], nhi])
        val = np.concatenate([val[keep], nval])
        err = np.concatenate([err[keep], nerr])


def _scalarise(v):
    if np.ndim(v) == 0:
        return v.item() if hasattr(v, "item") else v
    return v


def integrate_finite(f, a, b, tol=DEFAULT_ATOL, rtol=0.0, limit=DEFAULT_LIMIT, points=()):
    """Integrate a vectorised ``f`` over the finite interval (a, b).

    Parameters
    ----------
    f : callable
        Maps a 1-d array ``x`` to an array with leading dimension ``len(x)``.
        Integrable endpoint singularities are allowed; the rule never
        evaluates at the endpoints.
    a, b : float
        Integration limits with ``a < b``.
    tol, rtol : float
        Absolute and relative tolerance; convergence requires the summed
        error estimate to be below ``max(tol, rtol * |value|)`` for every
        component.
    points : sequence of float
        Known kinks or jumps inside (a, b) used as initial panel edges.

    Raises
    ------
    QuadratureError
        When the subdivision limit is exhausted.  The exception carries the
        best available :class:`QuadratureResult`.
    """
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    inner = sorted(float(p) for p in points if a < p < b)
    return _adaptive(f, [a, *inner, b], tol, rtol, limit)


def integrate_halfline(f, tol=DEFAULT_ATOL, a=0.0, rtol=0.0, limit=DEFAULT_LIMIT, points=()):
    """Integrate a vectorised ``f`` over (a, inf).

    For ``a == 0`` the interval is split at 1 and the tail is mapped to a
    finite interval with ``t = 1/u``; for ``a > 0`` the whole range is
    rescaled by ``t = a/u``.  Both pieces share a single adaptive budget
    and both endpoints of (0, inf) are mapped next to the origin, so
    algebraic endpoint singularities resolve to full floating precision.
    """
    a = float(a)
    if a < 0:
        raise ValueError("integrate_halfline needs a >= 0")
    if a == 0.0:
        # x in (0, 1] is t itself, x in (-1, 0) is t = -1/x; both ends of
        # (0, inf) sit next to x = 0 where floating point resolution is finest
        def g(x):
            x = np.asarray(x, dtype=float)
            res = None
            pos = x > 0
            for mask, tmap in ((pos, None), (~pos, True)):
                if not np.any(mask):
                    continue
                xm = x[mask]
                if tmap is None:
                    fv = np.asarray(f(xm))
                else:
                    t = -1.0 / xm
                    fv = _tail_weight(t, np.asarray(f(t)))
                if res is None:
                    res = np.zeros((len(x),) + fv.shape[1:], dtype=np.result_type(fv, float))
                res[mask] = fv
            return res

        mapped = [0.0]
        for p in points:
            if 0 < p <= 1:
                mapped.append(p)
            elif p > 1:
                mapped.append(-1.0 / p)
        return integrate_finite(g, -1.0, 1.0, tol=tol, rtol=rtol, limit=limit, points=mapped)

    def g(u):
        u = np.asarray(u, dtype=float)
        t = a / u
        ft = np.asarray(f(t))
        return _tail_weight(t, ft) / a

    mapped = [a / p for p in points if p > a]
    return integrate_finite(g, 0.0, 1.0, tol=tol, rtol=rtol, limit=limit, points=mapped)


def _tail_weight(t, ft):
    """Compute ``f(t) * t**2`` without forming ``0 * inf``."""
    tt = t.reshape((-1,) + (1,) * (ft.ndim - 1))
    with np.errstate(over="ignore", invalid="ignore"):
        w = (ft * tt) * tt
    return np.where(ft == 0, 0.0, w)


def endpoint_exponent(f, x1, x2):
    """Local power-law exponent of ``|f|`` between x1 and x2.

    Returns ``-inf`` if ``f`` vanishes at the point farther from the origin
    and ``+inf`` if it vanishes at the nearer one.  When both values vanish
    the probe is read as sitting in a flat zero region: ``+inf`` for probes
    below 1, ``-inf`` above, so compactly supported and super-polynomially
    decaying integrands are classified as integrable at either end.
    """
    v = np.abs(np.asarray(f(np.array([x1, x2], dtype=float)), dtype=complex))
    v = v.reshape(2, -1).max(axis=1)
    f1, f2 = float(v[0]), float(v[1])
    if not (np.isfinite(f1) and np.isfinite(f2)):
        return math.nan
    if f1 == 0.0 and f2 == 0.0:
        return math.inf if max(x1, x2) <= 1.0 else -math.inf
    if f2 == 0.0:
        return -math.inf
    if f1 == 0.0:
        return math.inf
    return math.log(f2 / f1) / math.log(x2 / x1)


_EXP_MARGIN = 1e-3


def integrate_positive(f, a=0.0, b=math.inf, tol=DEFAULT_ATOL, rtol=1e-10, points=()):
    """Integral of a nonnegative ``f`` over (a, b), or ``inf`` if it diverges.

    Divergence is decided from the local power-law exponent of ``f`` near
    an open endpoint at 0 (evaluated at 1e-12 and 1e-10) and near infinity
    (1e10 and 1e12).  A quadrature failure is also reported as divergence.
    This is a heuristic that is exact for power-law behaviour.
    """
    if a == 0.0:
        e0 = endpoint_exponent(f, 1e-12, 1e-10)
        if not math.isnan(e0) and e0 <= -1.0 + _EXP_MARGIN:
            return math.inf
    if math.isinf(b):
        einf = endpoint_exponent(f, 1e10, 1e12)
        if not math.isnan(einf) and einf >= -1.0 - _EXP_MARGIN:
            return math.inf
    try:
        if math.isinf(b):
            res = integrate_halfline(f, tol=tol, a=a, rtol=rtol, points=points)
        else:
            res = integrate_finite(f, a, b, tol=tol, rtol=rtol, points=points)
    except QuadratureError:
        return math.inf
    return float(np.real(res.value))


def gamma_fn(x):
    """Euler's gamma function for x > 0 (scipy backed)."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("gamma_fn is only defined here for x > 0")
    out = special.gamma(xa)
    return float(out) if out.ndim == 0 else out


def exp_integral_e1(x):
    """Exponential integral E1(x) = int_x^inf exp(-u)/u du for x > 0."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("E1 diverges at 0 and is not real for x < 0")
    out = special.exp1(xa)
    return float(out) if out.ndim == 0 else out


def invert_monotone(f, target, lo, hi, tol=1e-12, maxiter=400):
    """Solve ``f(x) = target`` for strictly monotone ``f`` on [lo, hi].

    Illinois-modified false position, falling back to bisection whenever
    the secant step stalls.  Stops when ``|f(x) - target| <= tol`` or the
    bracket can no longer be split in floating point.
    """
    lo, hi = float(lo), float(hi)
    flo = float(f(lo)) - target
    fhi = float(f(hi)) - target
    if abs(flo) <= tol:
        return lo
    if abs(fhi) <= tol:
        return hi
    if flo * fhi > 0:
        increasing = f(hi) > f(lo)
        too_low = (flo < 0) if increasing else (flo > 0)
        side = "above f(hi)" if too_low else "below f(lo)"
        if not increasing:
            side = "below f(hi)" if too_low else "above f(lo)"
        raise ValueError(f"target {target!r} is not bracketed: it lies {side}")
    side = 0
    x = lo
    for _ in range(maxiter):
        if fhi != flo:
            x = (lo * fhi - hi * flo) / (fhi - flo)
        if not (min(lo, hi) < x < max(lo, hi)):
            x = 0.5 * (lo + hi)
        fx = float(f(x)) - target
        if abs(fx) <= tol:
            return x
        if fx * fhi > 0:
            hi, fhi = x, fx
            if side == -1:
                flo *= 0.5
            side = -1
        else:
            lo, flo = x, fx
            if side == 1:
                fhi *= 0.5
            side = 1
        if abs(hi - lo) <= 4 * _EPS * max(abs(lo), abs(hi)):
            return x
    return x


def laplace_of_measure(Q, s):
    """Laplace transform ``int exp(-s t) Q(dt)`` of a mixing measure, s > 0."""
    sa = np.asarray(s, dtype=float)
    if np.any(sa <= 0):
        raise DomainError("laplace_of_measure needs s > 0")
    return Q.laplace(s)


# E1 inverse: table in log-space, polished by Newton in (log x, log E1).
_E1_X = np.geomspace(1e-14, 690.0, 1024)
_E1_LOGY = np.log(special.exp1(_E1_X))


def inverse_e1(y):
    """Vectorised inverse of E1 on (0, inf): returns x with E1(x) = y."""
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("E1 takes values in (0, inf)")
    logy = np.log(y)
    # table is decreasing in logy; interp needs increasing abscissae
    logx = np.interp(logy, _E1_LOGY[::-1], np.log(_E1_X)[::-1])
    big = logy > _E1_LOGY[0]
    logx = np.where(big, -EULER_GAMMA - y, logx)
    small = logy < _E1_LOGY[-1]
    logx = np.where(small, np.log(np.maximum(-logy, 1.0)), logx)
    for _ in range(6):
        x = np.exp(logx)
        e1 = special.exp1(x)
        # d log E1 / d log x = -exp(-x) / E1(x)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            ratio = special.exp1(x) * np.exp(np.minimum(x, 700.0))
            step = (np.log(e1) - logy) * ratio
        step = np.where(np.isfinite(step), step, 0.0)
        logx = logx + np.clip(step, -2.0, 2.0)
    out = np.exp(logx)
    return float(out) if out.ndim == 0 else out
