"""
Membership tests for the classes B, L, M, T and E_alpha.

Complete monotonicity cannot be decided from samples, so :func:`cm_test`
checks the necessary condition ``(-1)^n Delta_h^n g >= 0`` for all orders
up to ``max_order`` on a geometric grid.  Measures given as a CM
representation with the right exponent pass structurally.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .core import Atoms, AtomSeries, CMRep, Density, MixingMeasure, RadialSum
from .numerics import DomainError
from .qrep import validate_Q

__all__ = [
    "CMVerdict",
    "ClassVerdict",
    "cm_test",
    "default_grid",
    "is_member_E_alpha",
    "is_member",
    "radial_of_transform",
    "preimage_radial",
]

GRID_LO, GRID_HI, GRID_N = 1e-3, 1e3, 64
DEFAULT_ORDER = 8
DEFAULT_TOL = 1e-9


def default_grid():
    return np.geomspace(GRID_LO, GRID_HI, GRID_N)


@dataclass(frozen=True)
class CMVerdict:
    passed: bool
    max_violation: float
    order_checked: int
    witness: dict = None
    reason: str = ""

    def to_dict(self):
        out = {"passed": self.passed, "max_violation": self.max_violation,
               "order_checked": self.order_checked}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.reason:
            out["reason"] = self.reason
        return out


def cm_test(g, grid=None, max_order=DEFAULT_ORDER, tol=DEFAULT_TOL):
    """Finite-difference test of complete monotonicity.

    At every grid point x the step is ``h = (rho - 1) x`` with rho the grid
    ratio, and ``(-1)^n sum_j (-1)^(n-j) C(n,j) g(x + j h)`` must be at
    least ``-tol`` times ``sum_j C(n,j) |g(x + j h)|`` for n = 0..max_order.
    The first violation found (lowest order, then smallest x) is reported
    as the witness.
    """
    x = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if x.ndim != 1 or len(x) < 2 or np.any(x <= 0):
        raise ValueError("grid must be an increasing geometric grid of positive points")
    rho = x[1] / x[0]
    h = (rho - 1.0) * x
    j = np.arange(max_order + 1)
    pts = x[:, None] + h[:, None] * j[None, :]
    vals = np.asarray(g(pts.ravel()), dtype=float).reshape(pts.shape)
    if not np.all(np.isfinite(vals)):
        bad = pts[~np.isfinite(vals)]
        raise ValueError(f"g is not finite at {bad[:3]}")
    worst = 0.0
    witness = None
    for n in range(max_order + 1):
        c = comb(n, np.arange(n + 1))
        signs = (-1.0) ** (n - np.arange(n + 1))
        diff = (vals[:, : n + 1] * (signs * c)).sum(axis=1) * (-1.0) ** n
        scale = (np.abs(vals[:, : n + 1]) * c).sum(axis=1)
        viol = np.where(scale > 0, -diff / np.where(scale > 0, scale, 1.0), 0.0)
        if np.max(viol) > worst:
            worst = float(np.max(viol))
        bad = viol > tol
        if np.any(bad) and witness is None:
            i = int(np.argmax(bad))
            witness = {"x": float(x[i]), "order": n, "signed_difference": float(diff[i])}
    passed = witness is None
    return CMVerdict(passed, worst, max_order, witness)


def _structural_fail(reason, x=None):
    return CMVerdict(False, math.inf, 0, {"x": x, "order": None}, reason)


def _radial_atoms(radial):
    parts = getattr(radial, "parts", [radial])
    for p in parts:
        if isinstance(p, Atoms) and not p.is_zero:
            return float(p.r[0])
        if isinstance(p, AtomSeries):
            return float(p._r[0]) if len(p._r) else 1.0
    return None


def _radial_verdict_E(radial, alpha, tol, max_order, grid):
    if radial.is_zero:
        return CMVerdict(True, 0.0, max_order, None, "zero measure")
    if not radial.absolutely_continuous:
        return _structural_fail("not absolutely continuous", _radial_atoms(radial))
    if isinstance(radial, CMRep) and radial.alpha == alpha:
        v = validate_Q(radial.mixing, alpha, "levy")
        if v.ok:
            return CMVerdict(True, 0.0, max_order, None, "CM representation")
        return _structural_fail("mixing measure violates the integrability conditions")

    def g(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            return np.asarray(radial.pdf(y ** (1.0 / alpha))) * y ** ((1.0 - alpha) / alpha)
    return cm_test(g, grid, max_order, tol)


@dataclass(frozen=True)
class ClassVerdict:
    class_tag: str
    alpha: float
    per_direction: list

    @property
    def passed(self):
        return all(v.passed for _, v in self.per_direction)

    def to_dict(self):
        out = {"class": self.class_tag, "passed": self.passed, "per_direction": []}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        for xi, v in self.per_direction:
            d = {"xi": list(xi), "passed": v.passed, "max_violation": v.max_violation}
            if v.witness is not None:
                d["witness"] = v.witness
            if v.reason:
                d["reason"] = v.reason
            out["per_direction"].append(d)
        return out


def is_member_E_alpha(nu, alpha, tol=DEFAULT_TOL, max_order=DEFAULT_ORDER, grid=None):
    """Per-direction test that each radial part is ``r^(alpha-1) g(r^alpha) dr`` with g CM."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    per = [(d.xi.tolist(), _radial_verdict_E(d.radial, alpha, tol, max_order, grid))
           for d in nu.directions]
    return ClassVerdict("E", float(alpha), per)


def _monotone_verdict(k, grid, tol):
    x = default_grid() if grid is None else np.asarray(grid, dtype=float)
    v = np.asarray(k(x), dtype=float)
    # pairwise comparison: k(x_j) <= k(x_i) for all i < j
    runmax_from_right = np.maximum.accumulate(v[::-1])[::-1]
    inc = runmax_from_right[1:] - v[:-1]
    scale = np.maximum(np.abs(v[:-1]), np.abs(runmax_from_right[1:]))
    viol = np.where(scale > 0, inc / np.where(scale > 0, scale, 1.0), 0.0)
    worst = float(max(np.max(viol), 0.0))
    if np.any(viol > tol):
        i = int(np.argmax(viol > tol))
        return CMVerdict(False, worst, 1, {"x": float(x[i]), "order": 1})
    return CMVerdict(True, worst, 1)


def is_member(class_tag, nu, tol=DEFAULT_TOL, max_order=DEFAULT_ORDER, grid=None):
    """Class test for B, L, M or T on every direction of nu."""
    tag = class_tag.upper()
    if tag == "B":
        v = is_member_E_alpha(nu, 1.0, tol, max_order, grid)
        return ClassVerdict("B", None, v.per_direction)
    if tag == "E":
        raise ValueError("use is_member_E_alpha for the E_alpha classes")
    if tag not in ("L", "M", "T"):
        raise ValueError(f"unknown class {class_tag!r}")
    per = []
    for d in nu.directions:
        radial = d.radial
        if radial.is_zero:
            per.append((d.xi.tolist(), CMVerdict(True, 0.0, max_order, None, "zero measure")))
            continue
        if not radial.absolutely_continuous:
            per.append((d.xi.tolist(), _structural_fail("not absolutely continuous", _radial_atoms(radial))))
            continue
        if tag == "L":
            v = _monotone_verdict(lambda r: r * np.asarray(radial.pdf(r)), grid, tol)
        elif tag == "M":
            v = cm_test(lambda y: np.asarray(radial.pdf(np.sqrt(y))) * np.sqrt(y), grid, max_order, tol)
        else:
            v = cm_test(lambda r: r * np.asarray(radial.pdf(r)), grid, max_order, tol)
        per.append((d.xi.tolist(), v))
    return ClassVerdict(tag, None, per)


def radial_of_transform(nu_xi, alpha):
    """Mixing measure of the radial part after the E_alpha mapping, as a CMRep.

    ``Q(B) = alpha int 1_B(x^-alpha) x^-alpha nu_xi(dx)``: atoms move to
    atoms, a density p becomes the density ``p(t^(-1/alpha)) t^(-1/alpha)``.
    """
    a = float(alpha)
    if nu_xi.is_zero:
        return CMRep(a, MixingMeasure())
    if isinstance(nu_xi, RadialSum):
        mix = MixingMeasure()
        for part in nu_xi.parts:
            mix = mix + radial_of_transform(part, a).mixing
        return CMRep(a, mix)
    if isinstance(nu_xi, Atoms):
        t = nu_xi.r ** (-a)
        return CMRep(a, MixingMeasure(zip(t, a * t * nu_xi.w)))
    if isinstance(nu_xi, AtomSeries):
        raise DomainError("countable atom series have no finite mixing-measure representation")
    # absolutely continuous: density q(t) = p(t^(-1/a)) t^(-1/a)
    lo = 0.0
    hi = math.inf
    if isinstance(nu_xi, Density):
        lo = 0.0 if math.isinf(nu_xi.hi) else nu_xi.hi ** (-a)
        hi = math.inf if nu_xi.lo == 0.0 else nu_xi.lo ** (-a)
        if nu_xi.expr is not None and type(nu_xi) is Density:
            from .expr import Expr

            inner = Expr(nu_xi.expr, var="r").substitute(f"t^(-1/{a!r})", var="t").text
            expr = f"({inner})*t^(-1/{a!r})"
            breaks = [b ** (-a) for b in nu_xi.breaks]
            return CMRep(a, MixingMeasure((), Expr(expr, var="t"), lo, hi, expr, breaks))
    pdf = nu_xi.pdf

    def q(t):
        t = np.asarray(t, dtype=float)
        x = t ** (-1.0 / a)
        return np.asarray(pdf(x)) * x
    return CMRep(a, MixingMeasure((), q, lo, hi))


def preimage_radial(Qtilde, alpha):
    """Radial measure whose E_alpha image has mixing measure ``Qtilde``.

    ``nu(B) = alpha^-1 int 1_B(t^(-1/alpha)) t^-1 Qtilde(dt)``; requires
    ``int_0^1 t^-1 Qtilde(dt) < inf`` and the far condition for alpha.
    """
    a = float(alpha)
    v = validate_Q(Qtilde, a, "levy")
    if not v.ok:
        raise DomainError(f"mixing measure violates the preimage conditions: {v.to_dict()}")
    if Qtilde.is_zero:
        return Atoms()
    atoms = Atoms(Qtilde.t ** (-1.0 / a), Qtilde.q / (a * Qtilde.t)) if len(Qtilde.t) else Atoms()
    if Qtilde.density is None:
        return atoms
    dens = Qtilde.density_at
    lo = 0.0 if math.isinf(Qtilde.hi) else Qtilde.hi ** (-1.0 / a)
    hi = math.inf if Qtilde.lo == 0.0 else Qtilde.lo ** (-1.0 / a)
    if Qtilde.expr is not None:
        from .expr import Expr

        inner = Expr(Qtilde.expr, var="t").substitute(f"r^(-{a!r})", var="r").text
        part = Density(f"({inner})/r", lo, hi)
    else:
        part = Density(lambda r: np.asarray(dens(np.asarray(r) ** (-a))) / np.asarray(r), lo, hi)
    return atoms + part
