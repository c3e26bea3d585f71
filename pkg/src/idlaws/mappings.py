"""
Stochastic-integral mappings ``mu -> law of int f(t) dX_t^(mu)``.

Three kernel families are implemented:

* ``E_alpha``: ``f(t) = (log 1/t)^(1/alpha)`` on (0, 1];
* ``Phi``: ``f(t) = exp(-t)`` on (0, inf);
* ``N_alpha``: ``f = n_alpha^*``, the inverse of ``n_alpha(x) = alpha^-1 E1(x^alpha)``.

``psi`` is an alias for ``N_1`` and ``m`` for ``N_2``.

Everything is expressed through the image ``K`` of Lebesgue measure under
f, which has a density ``k(u)`` on (0, inf): the transformed Lévy measure
is ``nu~(B) = int K(du) nu(u^-1 B)``, the cumulant is
``int K(du) C_mu(u z)`` and the drift picks up a correction
``int nu(dx) c_K(|x|) x/|x|``.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .classes import radial_of_transform
from .core import (
    Atoms,
    CMDensity,
    CMRep,
    Density,
    Direction,
    GeneratingTriplet,
    LevyMeasure,
    RadialSum,
    eval_cumulant,
    log_moment_order,
    validate_levy_measure,
)
from .numerics import (
    DomainError,
    QuadratureError,
    exp_integral_e1,
    gamma_fn,
    integrate_finite,
    inverse_e1,
)

__all__ = [
    "Kernel",
    "KernelImage",
    "make_kernel",
    "n_alpha",
    "n_alpha_inverse",
    "transform_triplet",
    "transform_cumulant",
    "compose_check",
    "embed_E_alpha_in_E_beta",
]

KERNEL_NAMES = ("E_alpha", "Phi", "N_alpha")
_ALIASES = {
    "e_alpha": ("E_alpha", None),
    "e": ("E_alpha", None),
    "phi": ("Phi", None),
    "n_alpha": ("N_alpha", None),
    "n": ("N_alpha", None),
    "psi": ("N_alpha", 1.0),
    "m": ("N_alpha", 2.0),
}
CUMULANT_TOL = 1e-10
NESTED_RTOL = 1e-12


def n_alpha(x, alpha):
    """``int_x^inf u^-1 exp(-u^alpha) du = alpha^-1 E1(x^alpha)`` for x > 0."""
    x = np.asarray(x, dtype=float)
    return exp_integral_e1(x ** alpha) / alpha


def n_alpha_inverse(t, alpha):
    """The decreasing inverse ``n_alpha^*(t) = (E1^-1(alpha t))^(1/alpha)``."""
    t = np.asarray(t, dtype=float)
    out = np.asarray(inverse_e1(alpha * t)) ** (1.0 / alpha)
    return float(out) if out.ndim == 0 else out


def _drift_window(alpha):
    # smallest v with v^(1+2/alpha) e^-v below e^-40: bounds u^2 k(u) u^2 at the top end
    v = 40.0
    for _ in range(30):
        v = 40.0 + (1.0 + 2.0 / alpha) * math.log(v)
    return v


@dataclass(frozen=True, eq=False)
class Kernel:
    """A deterministic integrand f together with the image measure of dt under f."""

    name: str
    alpha: float = None
    support: float = field(init=False)

    def __post_init__(self):
        if self.name not in KERNEL_NAMES:
            raise ValueError(f"unknown kernel {self.name!r}")
        if self.name == "Phi":
            object.__setattr__(self, "alpha", None)
            object.__setattr__(self, "support", math.inf)
            return
        if self.alpha is None or not self.alpha > 0:
            raise DomainError(f"{self.name} needs alpha > 0")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "support", 1.0 if self.name == "E_alpha" else math.inf)

    @property
    def label(self):
        return self.name if self.alpha is None else f"{self.name}({self.alpha:g})"

    @property
    def requires_log_moment(self):
        return self.name != "E_alpha"

    def evaluate(self, t):
        """f(t) on the support, 0 beyond it."""
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise DomainError("kernels are evaluated at t > 0")
        if self.name == "E_alpha":
            with np.errstate(divide="ignore"):
                out = np.where(t < 1.0, np.log(1.0 / np.minimum(t, 1.0)) ** (1.0 / self.alpha), 0.0)
        elif self.name == "Phi":
            out = np.exp(-t)
        else:
            out = n_alpha_inverse(t, self.alpha)
        return float(out) if np.ndim(out) == 0 else out

    __call__ = evaluate

    @cached_property
    def squared_integral(self):
        if self.name == "E_alpha":
            return float(gamma_fn(1.0 + 2.0 / self.alpha))
        if self.name == "Phi":
            return 0.5
        return float(gamma_fn(2.0 / self.alpha) / self.alpha)

    @cached_property
    def first_integral(self):
        if self.name == "Phi":
            return 1.0
        return float(gamma_fn(1.0 + 1.0 / self.alpha))

    # ---- image measure K of Lebesgue measure under f -------------------

    def image_density(self, u):
        """Density k(u) of K."""
        u = np.asarray(u, dtype=float)
        a = self.alpha
        with np.errstate(all="ignore"):
            if self.name == "E_alpha":
                out = a * u ** (a - 1.0) * np.exp(-(u ** a))
            elif self.name == "Phi":
                out = np.where((u > 0) & (u < 1.0), 1.0 / u, 0.0)
            else:
                out = np.exp(-(u ** a)) / u
        return np.where(u > 0, out, 0.0)

    def image_tail(self, c):
        """``K((c, inf)) = Leb{t : f(t) > c}``."""
        c = np.asarray(c, dtype=float)
        a = self.alpha
        with np.errstate(all="ignore"):
            if self.name == "E_alpha":
                out = np.exp(-(c ** a))
            elif self.name == "Phi":
                out = np.where(c < 1.0, -np.log(np.minimum(c, 1.0)), 0.0)
            else:
                out = np.where(c > 0, exp_integral_e1(np.maximum(c, 1e-300) ** a) / a, np.inf)
        return out

    @property
    def image_upper(self):
        return 1.0 if self.name == "Phi" else math.inf

    def drift_correction(self, r):
        """``c_K(r) = int K(du) u r (1/(1+u^2 r^2) - 1/(1+r^2))`` for r >= 0.

        Phi has a closed form.  For the other kernels the integral is taken
        in ``s = log u`` by the trapezoid rule: the integrand is analytic in
        a strip around the real axis and decays exponentially at both ends,
        so the rule converges geometrically in the step.
        """
        r = np.asarray(r, dtype=float)
        flat = r.reshape(-1)
        out = np.zeros_like(flat)
        pos = flat > 0
        if not np.any(pos):
            return out.reshape(r.shape) if r.ndim else 0.0
        rp = flat[pos]
        if self.name == "Phi":
            out[pos] = np.arctan(rp) - rp / (1.0 + rp * rp)
        else:
            out[pos] = np.concatenate([self._drift_trapezoid(rp[i:i + 2048])
                                       for i in range(0, len(rp), 2048)])
        return out.reshape(r.shape) if r.ndim else float(out[0])

    def _drift_trapezoid(self, r):
        a = self.alpha
        p = a + 1.0 if self.name == "E_alpha" else 1.0
        h = 0.2 / max(1.0, a)
        s_hi = math.log(_drift_window(a)) / a
        s_lo = -max(0.0, math.log(float(np.max(r)))) - 40.0 / p
        s = np.arange(s_lo, s_hi + h, h)
        u = np.exp(s)
        # u * k(u) * du/ds = u^2 k(u)
        if self.name == "E_alpha":
            w = a * np.exp((a + 1.0) * s - u ** a)
        else:
            w = u * np.exp(-(u ** a))
        u2 = (u * u)[:, None]
        rr = r[None, :]
        # r^3 (1-u^2) / ((1+u^2 r^2)(1+r^2)) split into bounded factors
        with np.errstate(over="ignore"):
            integrand = w[:, None] * (1.0 - u2) * (rr / (1.0 + u2 * rr * rr)) / (1.0 + rr ** -2.0)
        return h * integrand.sum(axis=0)

    def __repr__(self):
        return f"Kernel({self.label})"

    def __eq__(self, other):
        return isinstance(other, Kernel) and (self.name, self.alpha) == (other.name, other.alpha)

    def __hash__(self):
        return hash((self.name, self.alpha))


def make_kernel(name, alpha=None):
    """Kernel by name; accepts the aliases e_alpha, phi, n_alpha, psi (N_1) and m (N_2)."""
    key = str(name)
    if key in KERNEL_NAMES:
        return Kernel(key, alpha)
    try:
        canon, fixed = _ALIASES[key.lower()]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; expected one of "
                         f"{sorted(set(KERNEL_NAMES) | set(_ALIASES))}") from None
    if fixed is not None:
        if alpha is not None and float(alpha) != fixed:
            raise ValueError(f"{name} is N_alpha with alpha = {fixed:g}")
        alpha = fixed
    return Kernel(canon, alpha)


# --------------------------------------------------------------------------
# image radial measures
# --------------------------------------------------------------------------


def _support_hi(radial):
    if isinstance(radial, Atoms):
        return float(np.max(radial.r)) if len(radial.r) else 0.0
    if isinstance(radial, RadialSum):
        return max(_support_hi(p) for p in radial.parts)
    if isinstance(radial, Density):
        return radial.hi
    return math.inf


class KernelImage(Density):
    """Radial part of the image measure ``int K(du) nu(u^-1 .)``.

    Density ``y -> int nu(dx) k(y/x)/x`` and tail ``y -> int nu(dx) K((y/x, inf))``,
    both computed by quadrature over nu (exact sums for atoms).
    """

    kind = "kernel_image"

    def __init__(self, kernel, radial):
        self.kernel = kernel
        self.source = radial
        hi = _support_hi(radial) * kernel.image_upper
        super().__init__(self._pdf, 0.0, hi if hi > 0 else math.inf, tail_func=self._tail)

    def _pdf(self, y):
        y = np.asarray(y, dtype=float)
        flat = y.reshape(-1)
        out = np.zeros_like(flat)
        pos = flat > 0
        if np.any(pos):
            yp = flat[pos]
            if self.kernel.name == "Phi":
                # k(u) = 1/u on (0, 1): the density is nu((y, inf)) / y
                out[pos] = np.asarray(self.source.tail(yp), dtype=float) / yp
            else:
                k = self.kernel.image_density
                res = []
                for i in range(0, len(yp), 256):
                    yc = yp[i:i + 256]
                    res.append(np.atleast_1d(self.source.integrate(
                        lambda x, yc=yc: k(yc[None, :] / x[:, None]) / x[:, None], rtol=NESTED_RTOL)))
                out[pos] = np.concatenate(res)
        return out.reshape(y.shape)

    def _tail(self, y):
        y = np.asarray(y, dtype=float)
        flat = y.reshape(-1)
        Kbar = self.kernel.image_tail
        if self.kernel.name == "Phi":
            # the kink of log(x/y)^+ sits at x = y, so integrate above it per point
            out = np.array([float(self.source.integrate(
                lambda x, yy=yy: np.log(x / yy), lo=yy, rtol=NESTED_RTOL)) if yy > 0 else math.inf
                for yy in flat])
        else:
            out = np.concatenate([np.atleast_1d(self.source.integrate(
                lambda x, yc=flat[i:i + 256]: Kbar(yc[None, :] / x[:, None]), rtol=NESTED_RTOL))
                for i in range(0, len(flat), 256)]) if len(flat) else flat
        return out.reshape(y.shape)

    def scaled(self, c):
        return KernelImage(self.kernel, self.source.scaled(c))

    def __repr__(self):
        return f"KernelImage({self.kernel.label}, {self.source!r})"


def _atom_image(kernel, atoms):
    """Closed-form image of finitely many atoms as a sum of explicit densities."""
    parts = []
    a = kernel.alpha
    for x, w in zip(atoms.r.tolist(), atoms.w.tolist()):
        if kernel.name == "Phi":
            parts.append(Density(f"{w!r}/r", 0.0, x, tail_func=f"{w!r}*log({x!r}/r)"))
        else:
            def tail(y, x=x, w=w):
                return w * n_alpha(np.maximum(np.asarray(y, dtype=float), 1e-300) / x, a)
            parts.append(Density(f"{w!r}*exp(-(r/{x!r})^{a!r})/r", 0.0, math.inf, tail_func=tail))
    return parts[0] if len(parts) == 1 else RadialSum(parts)


def image_radial(kernel, radial):
    """Radial part of the transformed Lévy measure along one direction."""
    if radial.is_zero:
        return Atoms()
    if isinstance(radial, RadialSum):
        out = None
        for p in radial.parts:
            img = image_radial(kernel, p)
            out = img if out is None else out + img
        return out
    if kernel.name == "E_alpha":
        try:
            return radial_of_transform(radial, kernel.alpha)
        except DomainError:
            return KernelImage(kernel, radial)
    if isinstance(radial, Atoms):
        return _atom_image(kernel, radial)
    return KernelImage(kernel, radial)


def _check_domain(kernel, mu):
    rep = validate_levy_measure(mu.levy)
    if not rep.ok:
        raise DomainError(f"input is not a Lévy measure: {rep.to_dict()}")
    if kernel.requires_log_moment and not log_moment_order(mu.levy, 1):
        raise DomainError(
            f"{kernel.label} is only defined on I_log, the laws with "
            "int_{|x|>1} log|x| nu(dx) < inf; this Lévy measure has no finite log moment")


def transform_triplet(kernel, mu):
    """Triplet of the law of ``int f(t) dX_t`` where X has law mu at time 1."""
    _check_domain(kernel, mu)
    A = kernel.squared_integral * mu.gaussian
    gamma = kernel.first_integral * np.asarray(mu.gamma, dtype=float)
    dirs = []
    for d in mu.levy.directions:
        corr = d.radial.integrate(kernel.drift_correction)
        gamma = gamma + d.xi * d.weight * float(np.real(corr))
        dirs.append(Direction(d.xi, d.weight, image_radial(kernel, d.radial)))
    return GeneratingTriplet(A, LevyMeasure(mu.dim, dirs), gamma, mu.dim)


def transform_cumulant(kernel, mu, z, tol=CUMULANT_TOL):
    """``int K(du) C_mu(u z)``, computed by quadrature over u around eval_cumulant."""
    _check_domain(kernel, mu)
    d = mu.dim
    z = np.asarray(z, dtype=float)
    if d == 1:
        pts = z.reshape(-1, 1)
        single = z.ndim == 0
        shape = z.shape
    else:
        pts = z.reshape(-1, d)
        single = z.ndim == 1
        shape = () if single else z.shape[:-1]

    def f(u):
        k = kernel.image_density(u)
        out = np.zeros((len(u), len(pts)), dtype=complex)
        live = k > 0
        if np.any(live):
            uz = u[live, None, None] * pts[None, :, :]
            arg = uz.reshape(-1) if d == 1 else uz.reshape(-1, d)
            c = np.asarray(eval_cumulant(mu, arg, rtol=NESTED_RTOL)).reshape(-1, len(pts))
            out[live] = k[live, None] * c
        return out

    # |C_mu(uz)| grows at most like u^2; beyond u_max the weight k(u) u^2 is below e^-40
    u_max = kernel.image_upper
    if math.isinf(u_max):
        u_max = _drift_window(kernel.alpha) ** (1.0 / kernel.alpha)
    try:
        val = integrate_finite(f, 0.0, u_max, tol=tol, points=[1.0] if u_max > 1 else ()).value
    except QuadratureError as exc:
        raise QuadratureError(
            f"cumulant of {kernel.label}(mu) did not converge: a nested quadrature stopped "
            f"with error estimate {exc.result.abs_error_estimate:.3g} after "
            f"{exc.result.subdivisions} panels (outer budget {tol:g}, inner relative "
            f"budget {NESTED_RTOL:g})", exc.result) from None
    val = np.asarray(val, dtype=complex).reshape(-1)
    val[np.all(pts == 0, axis=1)] = 0.0
    if single or shape == ():
        return complex(val[0])
    return val.reshape(shape)


def compose_check(alpha, mu, z_grid):
    """Compare Phi after E_alpha, E_alpha after Phi and N_alpha on a z grid.

    Returns a dict with the three cumulant arrays, the pairwise maximum
    discrepancies and their overall maximum.
    """
    E, P, N = make_kernel("E_alpha", alpha), make_kernel("Phi"), make_kernel("N_alpha", alpha)
    _check_domain(N, mu)
    z = np.asarray(z_grid, dtype=float)
    pe = transform_triplet(P, transform_triplet(E, mu))
    ep = transform_triplet(E, transform_triplet(P, mu))
    nn = transform_triplet(N, mu)
    c = {name: np.atleast_1d(eval_cumulant(m, z)) for name, m in
         (("phi_after_e", pe), ("e_after_phi", ep), ("n_alpha", nn))}
    pairs = {
        "phi_after_e-e_after_phi": float(np.max(np.abs(c["phi_after_e"] - c["e_after_phi"]))),
        "phi_after_e-n_alpha": float(np.max(np.abs(c["phi_after_e"] - c["n_alpha"]))),
        "e_after_phi-n_alpha": float(np.max(np.abs(c["e_after_phi"] - c["n_alpha"]))),
    }
    return {"alpha": float(alpha), "z": z.tolist(), "cumulants": c, "pairwise": pairs,
            "max_discrepancy": max(pairs.values())}


def _g_of(rep):
    if isinstance(rep, CMRep):
        Q = rep.mixing
        text = None
        if Q.is_atomic and len(Q.t):
            text = "+".join(f"{q!r}*exp(-{t!r}*y)" for t, q in zip(Q.t.tolist(), Q.q.tolist()))
        return rep.alpha, rep.g, text
    if isinstance(rep, CMDensity):
        return rep.alpha, rep.g, rep.g_expr
    raise TypeError("expected a CMRep or CMDensity")


def embed_E_alpha_in_E_beta(rep, beta):
    """Rewrite ``r^(alpha-1) g(r^alpha)`` as ``r^(beta-1) h(r^beta)`` for beta > alpha.

    ``h(x) = g(x^(alpha/beta)) x^((alpha-beta)/beta)`` is completely monotone
    whenever g is, as a CM function of a Bernstein function times a CM power.
    """
    alpha, g, text = _g_of(rep)
    beta = float(beta)
    if not beta > alpha:
        raise DomainError(f"embedding needs beta > alpha, got alpha={alpha:g}, beta={beta:g}")
    p = alpha / beta

    def h(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            return np.asarray(g(x ** p)) * x ** (p - 1.0)
    h_expr = None
    if text is not None:
        from .expr import Expr

        inner = Expr(text, var="y").substitute(f"y^{p!r}").text
        h_expr = f"({inner})*y^({p - 1.0!r})"
    return CMDensity(beta, h, g_expr=h_expr)
