"""
Seeded Monte Carlo for compound Poisson integrators and mapped laws.

Y^(alpha) jumps at rate 2/alpha with symmetric sizes, Z^(alpha) at rate
1/alpha with positive sizes; in both cases ``|J|`` has tail
``exp(-x^alpha)`` and is drawn as ``(-log U)^(1/alpha)``.

Reproducibility: replicates are processed in fixed chunks of
:data:`CHUNK`, and chunk ``c`` of stream ``tag`` draws from
``SeedSequence(seed, spawn_key=(tag, c))``.  Results therefore do not
depend on how many worker threads run the chunks.
"""

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Atoms, Direction, GeneratingTriplet, LevyMeasure, eval_cumulant
from .mappings import Kernel, _check_domain, transform_cumulant
from .numerics import DomainError
from .qrep import INTEGRATORS, InterleavedIntegrand, dom_classify, jump_drift

__all__ = [
    "CHUNK",
    "JumpPath",
    "EcfReport",
    "IntegralSamples",
    "sample_path",
    "weibull_jumps",
    "integral_sample",
    "improper_integral_sample",
    "sample_integral",
    "simulate_mapped_law",
    "ecf",
    "ecf_compare",
    "write_csv",
    "residual_activity",
    "symmetric_cp_triplet",
]

CHUNK = 8192
DEFAULT_Z = np.linspace(-3.0, 3.0, 13)
NEGLIGIBLE_JUMP = 1e-12
RESIDUAL_ACTIVITY = 1e-6
MAPPED_HORIZON = 40.0

_STREAM_PATH, _STREAM_MAPPED, _STREAM_BAND = 1, 2, 3


def _rng(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def _rate(integrator, alpha):
    if integrator == "Y_alpha":
        return 2.0 / alpha
    if integrator == "Z_alpha":
        return 1.0 / alpha
    raise ValueError(f"integrator must be one of {INTEGRATORS} or custom_cp")


def weibull_jumps(rng, m, alpha, symmetric):
    """m jump sizes with ``P(|J| > x) = exp(-x^alpha)``, random signs if symmetric."""
    mag = (-np.log(rng.random(m))) ** (1.0 / alpha)
    if symmetric:
        mag = np.where(rng.random(m) < 0.5, -mag, mag)
    return mag


@dataclass(frozen=True)
class JumpPath:
    horizon: float
    arrivals: np.ndarray
    jumps: np.ndarray
    rate: float
    seed: int

    def value_at(self, t):
        """Path value X_t (sum of jumps up to and including t)."""
        return float(self.jumps[self.arrivals <= t].sum())


def sample_path(integrator, alpha=1.0, horizon=1.0, seed=0, rate=None, jump_sampler=None):
    """One compound Poisson path on (0, horizon].

    ``integrator`` is ``Y_alpha``, ``Z_alpha`` or ``custom_cp``; the last
    needs ``rate`` and ``jump_sampler(rng, m) -> m jump sizes``.
    """
    if not horizon >= 0:
        raise ValueError("horizon must be nonnegative")
    if integrator == "custom_cp":
        if rate is None or jump_sampler is None:
            raise ValueError("custom_cp needs rate and jump_sampler")
        lam = float(rate)
    else:
        if not alpha > 0:
            raise DomainError("alpha must be positive")
        lam = _rate(integrator, alpha)
    rng = _rng(seed, _STREAM_PATH)
    times = []
    t = 0.0
    if horizon > 0 and lam > 0:
        # exponential spacings, drawn in blocks
        block = max(16, int(lam * horizon * 1.2) + 16)
        while True:
            gaps = rng.exponential(1.0 / lam, block)
            cum = t + np.cumsum(gaps)
            keep = cum[cum <= horizon]
            times.append(keep)
            if len(keep) < block:
                break
            t = float(cum[-1])
    arrivals = np.concatenate(times) if times else np.zeros(0)
    m = len(arrivals)
    if integrator == "custom_cp":
        jumps = np.asarray(jump_sampler(rng, m), dtype=float)
    else:
        jumps = weibull_jumps(rng, m, alpha, integrator == "Y_alpha")
    return JumpPath(float(horizon), arrivals, jumps, lam, int(seed))


def integral_sample(h, path, p=0.0, q=None):
    """``sum_{p < tau_i <= q} h(tau_i) J_i`` for one path."""
    q = path.horizon if q is None else q
    if q > path.horizon:
        raise ValueError(f"path horizon {path.horizon} is shorter than q = {q}")
    sel = (path.arrivals > p) & (path.arrivals <= q)
    if not np.any(sel):
        return 0.0
    return float(np.sum(np.asarray(h(path.arrivals[sel])) * path.jumps[sel]))


def _support_end(h):
    if isinstance(h, InterleavedIntegrand):
        u = max(_support_end(h.h_plus), _support_end(h.h_minus))
        return 2.0 * math.ceil(u) + 2.0
    return h.start_of_tail


def _has_tail(h):
    if isinstance(h, InterleavedIntegrand):
        return _has_tail(h.h_plus) or _has_tail(h.h_minus)
    return h.tail is not None


def residual_activity(h, integrator, alpha, q, r=NEGLIGIBLE_JUMP):
    """Expected number of jumps after time q whose contribution exceeds r."""
    lam = _rate(integrator, alpha)

    def phi(v):
        v = np.abs(np.asarray(v, dtype=float))
        with np.errstate(divide="ignore", over="ignore"):
            return lam * np.exp(-(r / v) ** alpha)
    return float(h.integrate_positive(phi, q, math.inf))


def _centering(h, integrator, alpha, verdict, centering):
    if callable(centering):
        return centering
    if centering is None or centering is False:
        return None
    if centering != "auto":
        raise ValueError("centering must be 'auto', None or a callable (p, q) -> float")
    if integrator == "Z_alpha" and verdict.level == "dom_es":
        return lambda p, q: float(h.integrate(lambda v: jump_drift(v, alpha), p, q))
    return None


def _classify(h, integrator, alpha, verdict):
    verdict = verdict or dom_classify(h, integrator, alpha)
    if not verdict.at_least("dom_es"):
        raise DomainError(f"the improper integral of h does not exist ({verdict.level})")
    return verdict


def improper_integral_sample(h, integrator="Y_alpha", alpha=1.0, seed=0, schedule=None,
                             centering="auto", verdict=None, max_jumps=10_000_000):
    """One draw of the improper integral of h along a dyadic schedule.

    ``schedule`` is a sequence of (p_k, q_k) with p_k decreasing and q_k
    increasing; the default is ``(2^-k, 2^k)`` for k = 0..60.  The path is
    extended until the expected number of jumps after q_k contributing
    more than 1e-12 drops below 1e-6.  Returns a dict with ``value``,
    ``converged`` and ``trace`` (one entry per schedule step).
    """
    verdict = _classify(h, integrator, alpha, verdict)
    center = _centering(h, integrator, alpha, verdict, centering)
    if schedule is None:
        schedule = [(2.0 ** -k, 2.0 ** k) for k in range(61)]
    lam = _rate(integrator, alpha)
    end = _support_end(h)
    horizon = None
    for _, q in schedule:
        if q >= end and (not _has_tail(h) or residual_activity(h, integrator, alpha, q) < RESIDUAL_ACTIVITY):
            horizon = q
            break
        if lam * q > max_jumps:
            break
    converged = horizon is not None
    if horizon is None:
        horizon = min(max(q for _, q in schedule), max_jumps / lam)
    path = sample_path(integrator, alpha, horizon, seed)
    first = float(path.arrivals[0]) if len(path.arrivals) else horizon
    trace = []
    for p, q in schedule:
        q_eff = min(q, horizon)
        v = integral_sample(h, path, p, q_eff)
        if center is not None:
            v -= center(p, q_eff)
        trace.append({"p": p, "q": q_eff, "value": v})
        # once past the horizon and below the first arrival the partial sums are final
        if q >= horizon and p < first:
            break
    return {"value": trace[-1]["value"], "converged": converged, "horizon": horizon,
            "verdict": verdict.level, "trace": trace}


# --------------------------------------------------------------------------
# vectorised replicates
# --------------------------------------------------------------------------


def _band_sums(h, integrator, alpha, lo, hi, n, seed, tag, workers):
    """Per-replicate ``sum_{lo < tau <= hi} h(tau) J`` for n replicates."""
    lam = _rate(integrator, alpha)
    sym = integrator == "Y_alpha"

    def chunk(c):
        m = min(CHUNK, n - c * CHUNK)
        rng = _rng(seed, _STREAM_BAND, tag, c)
        counts = rng.poisson(lam * (hi - lo), m)
        total = int(counts.sum())
        times = lo + (hi - lo) * rng.random(total)
        jumps = weibull_jumps(rng, total, alpha, sym)
        owner = np.repeat(np.arange(m), counts)
        return np.bincount(owner, weights=np.asarray(h(times)) * jumps, minlength=m)
    return _run_chunks(chunk, n, workers)


def _run_chunks(fn, n, workers):
    nchunks = (n + CHUNK - 1) // CHUNK
    if workers and workers > 1 and nchunks > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(fn, range(nchunks)))
    else:
        parts = [fn(c) for c in range(nchunks)]
    return np.concatenate(parts) if parts else np.zeros(0)


def ecf(samples, z):
    """Empirical characteristic function at the points z."""
    x = np.asarray(samples, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.ndim == 1:
        return np.exp(1j * np.outer(z.reshape(-1), x)).mean(axis=1).reshape(z.shape)
    zz = z.reshape(-1, x.shape[1])
    return np.exp(1j * zz @ x.T).mean(axis=1).reshape(z.shape[:-1])


@dataclass
class IntegralSamples:
    values: np.ndarray
    horizon: float
    converged: bool
    verdict: str
    trace: list = field(default_factory=list)


def sample_integral(h, integrator="Y_alpha", alpha=1.0, n=100_000, seed=0, centering="auto",
                    verdict=None, probe=DEFAULT_Z, ecf_tol=1e-3, q_max=2.0 ** 30, workers=1):
    """n independent draws of the improper integral of h.

    The integral over (0, q] is simulated exactly.  q starts at the end of
    the step part of h and doubles while the law is still moving: the
    expansion stops once the residual jump activity is below 1e-6, or once
    two successive doublings change the ECF on ``probe`` by less than
    ``ecf_tol`` each.
    """
    verdict = _classify(h, integrator, alpha, verdict)
    center = _centering(h, integrator, alpha, verdict, centering)
    q = max(_support_end(h), 1.0)
    vals = _band_sums(h, integrator, alpha, 0.0, q, n, seed, 0, workers)
    trace = [{"q": q, "ecf_change": None}]
    converged = not _has_tail(h) or residual_activity(h, integrator, alpha, q) < RESIDUAL_ACTIVITY
    calm = 0
    band = 1
    while not converged and 2 * q <= q_max:
        prev = ecf(vals - (center(0.0, q) if center else 0.0), probe)
        vals = vals + _band_sums(h, integrator, alpha, q, 2 * q, n, seed, band, workers)
        q *= 2
        band += 1
        change = float(np.max(np.abs(ecf(vals - (center(0.0, q) if center else 0.0), probe) - prev)))
        trace.append({"q": q, "ecf_change": change})
        calm = calm + 1 if change < ecf_tol else 0
        converged = calm >= 2 or residual_activity(h, integrator, alpha, q) < RESIDUAL_ACTIVITY
    if center is not None:
        vals = vals - center(0.0, q)
    return IntegralSamples(vals, q, converged, verdict.level, trace)


# --------------------------------------------------------------------------
# mapped laws
# --------------------------------------------------------------------------


def _radial_sampler(radial):
    """Sampler for the normalised finite radial measure: rng, m -> radii."""
    if isinstance(radial, Atoms):
        p = radial.w / radial.w.sum()
        return lambda rng, m: radial.r[rng.choice(len(p), size=m, p=p)]
    mass = radial.mass()
    # inverse of the tail on a log grid wide enough to hold all but 1e-12 of the mass
    lo, hi = 1e-12, 1e12
    grid = np.geomspace(lo, hi, 6001)
    tail = np.asarray(radial.tail(grid), dtype=float) / mass
    cdf = 1.0 - tail
    cdf = np.maximum.accumulate(np.clip(cdf, 0.0, 1.0))
    lg = np.log(grid)

    def sample(rng, m):
        u = rng.random(m)
        return np.exp(np.interp(u, cdf, lg))
    return sample


def simulate_mapped_law(kernel, mu, n=100_000, seed=0, method="direct", workers=1):
    """n draws from the law of ``int f(t) dX_t`` for Gaussian plus compound Poisson mu.

    ``method="reversed"`` (E_alpha only) uses ``f(1 - t)`` in place of f,
    which has the same law; it is an independent check of the sampler.
    Infinite-activity Lévy measures are refused.
    """
    if not isinstance(kernel, Kernel):
        raise TypeError("kernel must be a Kernel")
    if method not in ("direct", "reversed"):
        raise ValueError("method must be 'direct' or 'reversed'")
    if method == "reversed" and kernel.name != "E_alpha":
        raise ValueError("the time-reversed form exists only for E_alpha")
    _check_domain(kernel, mu)
    d = mu.dim
    dirs = mu.levy.directions
    masses = np.array([dr.weight * dr.radial.mass() for dr in dirs], dtype=float)
    if not np.all(np.isfinite(masses)):
        raise DomainError("only Gaussian and compound Poisson laws can be simulated "
                          "(this Lévy measure has infinite mass)")
    total_rate = float(masses.sum())
    # drift of the compound Poisson part without compensation
    gamma0 = np.asarray(mu.gamma, dtype=float).copy()
    for dr in dirs:
        gamma0 = gamma0 - dr.xi * dr.weight * float(dr.radial.integrate(lambda r: r / (1.0 + r * r)))
    T = kernel.support if math.isfinite(kernel.support) else MAPPED_HORIZON
    A = kernel.squared_integral * mu.gaussian
    w, V = np.linalg.eigh(A)
    root = V * np.sqrt(np.clip(w, 0.0, None))
    shift = kernel.first_integral * gamma0
    samplers = [_radial_sampler(dr.radial) for dr in dirs]
    xis = np.array([dr.xi for dr in dirs]).reshape(len(dirs), d)
    pdir = masses / total_rate if total_rate > 0 else masses

    def f_of(t):
        if method == "reversed":
            return kernel.evaluate(np.maximum(1.0 - t, np.finfo(float).tiny))
        return kernel.evaluate(t)

    def chunk(c):
        m = min(CHUNK, n - c * CHUNK)
        rng = _rng(seed, _STREAM_MAPPED, c)
        out = np.tile(shift, (m, 1))
        if np.any(w > 0):
            out += rng.standard_normal((m, d)) @ root.T
        if total_rate > 0:
            counts = rng.poisson(total_rate * T, m)
            tot = int(counts.sum())
            times = T * (1.0 - rng.random(tot))  # in (0, T]
            which = rng.choice(len(dirs), size=tot, p=pdir)
            radii = np.empty(tot)
            for j, smp in enumerate(samplers):
                sel = which == j
                radii[sel] = smp(rng, int(sel.sum()))
            fv = np.asarray(f_of(times), dtype=float)
            contrib = (fv * radii)[:, None] * xis[which]
            owner = np.repeat(np.arange(m), counts)
            for k in range(d):
                out[:, k] += np.bincount(owner, weights=contrib[:, k], minlength=m)
        return out

    nchunks = (n + CHUNK - 1) // CHUNK
    if workers and workers > 1 and nchunks > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(chunk, range(nchunks)))
    else:
        parts = [chunk(c) for c in range(nchunks)]
    out = np.concatenate(parts) if parts else np.zeros((0, d))
    return out[:, 0] if d == 1 else out


# --------------------------------------------------------------------------
# ECF comparison and CSV output
# --------------------------------------------------------------------------


@dataclass
class EcfReport:
    z_grid: np.ndarray
    ecf: np.ndarray
    model_cf: np.ndarray
    max_abs_gap: float
    n_samples: int
    mc_stderr_bound: float

    @property
    def clt_bound(self):
        return 3.0 * self.mc_stderr_bound

    def to_dict(self):
        z = np.asarray(self.z_grid)
        return {"z": z.tolist(), "ecf_re": self.ecf.real.tolist(), "ecf_im": self.ecf.imag.tolist(),
                "model_re": self.model_cf.real.tolist(), "model_im": self.model_cf.imag.tolist(),
                "max_abs_gap": self.max_abs_gap, "n_samples": self.n_samples,
                "mc_stderr_bound": self.mc_stderr_bound}

    def rows(self):
        z = np.asarray(self.z_grid)
        zcols = z.reshape(len(self.ecf), -1)
        for i in range(len(self.ecf)):
            yield [*zcols[i].tolist(), self.ecf[i].real, self.ecf[i].imag,
                   self.model_cf[i].real, self.model_cf[i].imag, abs(self.ecf[i] - self.model_cf[i])]

    def header(self):
        z = np.asarray(self.z_grid)
        nz = 1 if z.ndim == 1 else z.shape[1]
        zc = ["z"] if nz == 1 else [f"z{k}" for k in range(nz)]
        return [*zc, "ecf_re", "ecf_im", "model_re", "model_im", "abs_gap"]


def ecf_compare(samples, mu, kernel=None, z_grid=DEFAULT_Z):
    """ECF of samples against ``exp(C(z))`` of mu, or of the mapped law when a kernel is given."""
    x = np.asarray(samples, dtype=float)
    z = np.asarray(z_grid, dtype=float)
    emp = np.atleast_1d(ecf(x, z))
    if kernel is None:
        c = eval_cumulant(mu, z)
    else:
        c = transform_cumulant(kernel, mu, z)
    model = np.exp(np.atleast_1d(np.asarray(c, dtype=complex)))
    gap = float(np.max(np.abs(emp - model))) if len(emp) else 0.0
    n = len(x)
    return EcfReport(z, emp, model, gap, n, 1.0 / math.sqrt(n) if n else math.inf)


def write_csv(path_or_file, metadata, header, rows):
    """CSV with a leading ``# {json}`` metadata line."""
    close = False
    fh = path_or_file
    if isinstance(path_or_file, str):
        fh = open(path_or_file, "w", newline="")
        close = True
    try:
        fh.write("# " + json.dumps(metadata, sort_keys=True) + "\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    finally:
        if close:
            fh.close()


def symmetric_cp_triplet(radial):
    """Triplet with the radial measure on both half-lines and no drift."""
    return GeneratingTriplet(levy=LevyMeasure(1, [Direction([1.0], 1.0, radial),
                                                  Direction([-1.0], 1.0, radial)]))
