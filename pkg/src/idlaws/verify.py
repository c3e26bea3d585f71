"""Verification batteries behind ``idlaws verify``.

Every suite returns a report dict ``{"suite", "passed", "checks", "seconds"}``
where each check records the measured value, its threshold and a verdict.
"""

import math
import time

import numpy as np

from .core import (Atoms, CMRep, Density, Direction, GeneratingTriplet, LevyMeasure,
                   MixingMeasure, is_symmetric)
from .mappings import compose_check, make_kernel, transform_triplet
from .qrep import Q_from_h, h_from_Q, tail_identity_check
from .simulate import (DEFAULT_Z, ecf_compare, sample_integral, simulate_mapped_law,
                       symmetric_cp_triplet)

__all__ = ["SUITES", "run_suite", "symmetry_battery", "compose_laws", "tail_identity_cases"]

GAUSSIAN_ALPHAS = (0.5, 1.0, 2.0, 3.0)
GAUSSIAN_SCALES = (1.0, 2.5)
GAUSSIAN_TOL = 1e-10
COMPOSE_ALPHAS = (1.0, 2.0)
COMPOSE_TOL = 1e-7
TAIL_ALPHAS = (0.5, 1.0, 2.0)
TAIL_TOL = 1e-8
ROUNDTRIP_TOL = 1e-9
ROUNDTRIP_S = np.geomspace(1e-2, 1e2, 9)
SYMMETRY_ALPHAS = (0.5, 1.0, 2.0)
MC_TOL = 0.015
MC_N = 200_000
MC_SEED = 42


def _check(name, value, threshold, passed=None):
    if passed is None:
        passed = bool(value <= threshold)
    return {"name": name, "value": value, "threshold": threshold, "passed": bool(passed)}


def compose_laws():
    return {
        "gaussian": GeneratingTriplet.gaussian_law([[1.0]]),
        "cp_delta1": GeneratingTriplet.compound_poisson(Atoms([1.0], [1.0])),
        "cp_exp_density": GeneratingTriplet.compound_poisson(Density("exp(-r)")),
    }


def tail_identity_cases():
    return {
        "delta1": MixingMeasure.delta(1.0),
        "3delta2": MixingMeasure([(2.0, 3.0)]),
        "delta1+delta2": MixingMeasure([(1.0, 1.0), (2.0, 1.0)]),
    }


def _two_sided(radial_plus, radial_minus=None, gaussian=None, gamma=0.0):
    radial_minus = radial_plus if radial_minus is None else radial_minus
    levy = LevyMeasure(1, [Direction([1.0], 1.0, radial_plus), Direction([-1.0], 1.0, radial_minus)])
    return GeneratingTriplet(gaussian, levy, [gamma])


def symmetry_battery():
    """Six symmetric and six asymmetric triplets, as ``(name, triplet, symmetric)``."""
    exp1 = Density("exp(-r)")
    exp2 = Density("exp(-2*r)")
    u = np.array([0.6, 0.8])
    e1 = np.array([1.0, 0.0])
    sym = [
        ("delta0", GeneratingTriplet.delta0(), True),
        ("gaussian", GeneratingTriplet.gaussian_law([[1.0]]), True),
        ("atoms_pm1", _two_sided(Atoms([1.0], [1.0])), True),
        ("exp_density_with_gaussian", _two_sided(exp1, gaussian=[[0.5]]), True),
        ("planar_pair", GeneratingTriplet(
            None, LevyMeasure(2, [Direction(e1, 1.0, exp1), Direction(-e1, 1.0, exp1)])), True),
        ("planar_four", GeneratingTriplet(
            [[1.0, 0.2], [0.2, 2.0]],
            LevyMeasure(2, [Direction(u, 0.5, Atoms([1.0, 3.0], [1.0, 2.0])),
                            Direction(-u, 0.5, Atoms([1.0, 3.0], [1.0, 2.0])),
                            Direction(e1, 2.0, exp2), Direction(-e1, 2.0, exp2)])), True),
    ]
    asym = [
        ("shifted_point", GeneratingTriplet(gamma=[0.5]), False),
        ("cp_delta1", GeneratingTriplet.compound_poisson(Atoms([1.0], [1.0])), False),
        ("unequal_weights", _two_sided(Atoms([1.0], [1.0]), Atoms([1.0], [2.0])), False),
        ("unequal_densities", _two_sided(exp1, exp2), False),
        ("planar_one_sided", GeneratingTriplet(
            None, LevyMeasure(2, [Direction(u, 1.0, Atoms([2.0], [1.0]))])), False),
        ("symmetric_jumps_with_drift", _two_sided(exp1, gamma=0.3), False),
    ]
    return sym + asym


def _suite_gaussian_factor(**_):
    checks = []
    for a in GAUSSIAN_ALPHAS:
        K = make_kernel("E_alpha", a)
        for A in GAUSSIAN_SCALES:
            out = transform_triplet(K, GeneratingTriplet.gaussian_law([[A]]))
            want = math.gamma(1.0 + 2.0 / a) * A
            rel = abs(out.gaussian[0, 0] - want) / want
            checks.append(_check(f"alpha={a} A={A}", rel, GAUSSIAN_TOL))
    return checks


def _suite_compose(alpha=None, **_):
    alphas = COMPOSE_ALPHAS if alpha is None else (float(alpha),)
    checks = []
    for a in alphas:
        for name, mu in compose_laws().items():
            res = compose_check(a, mu, DEFAULT_Z)
            checks.append(_check(f"alpha={a} {name}", res["max_discrepancy"], COMPOSE_TOL))
    return checks


def _suite_tail_identity(**_):
    checks = []
    for a in TAIL_ALPHAS:
        for name, Q in tail_identity_cases().items():
            h = h_from_Q(Q, a)
            checks.append(_check(f"tail alpha={a} Q={name}", tail_identity_check(Q, h, a), TAIL_TOL))
            back = Q_from_h(h, a)
            lq = Q.laplace(ROUNDTRIP_S)
            lb = back.laplace(ROUNDTRIP_S)
            rel = float(np.max(np.abs(lq - lb) / np.abs(lq)))
            checks.append(_check(f"roundtrip alpha={a} Q={name}", rel, ROUNDTRIP_TOL))
    return checks


def _suite_symmetry(**_):
    checks = []
    for a in SYMMETRY_ALPHAS:
        K = make_kernel("E_alpha", a)
        for name, mu, expected in symmetry_battery():
            before = is_symmetric(mu)
            after = is_symmetric(transform_triplet(K, mu))
            ok = before == expected and after == expected
            checks.append({"name": f"alpha={a} {name}", "expected": expected, "input_symmetric": before,
                           "image_symmetric": after, "passed": ok})
    return checks


def _suite_mc_law(seed=MC_SEED, n=MC_N, workers=None, **_):
    seed = MC_SEED if seed is None else seed
    n = MC_N if n is None else n
    Q = MixingMeasure.delta(1.0)
    s = sample_integral(h_from_Q(Q, 1.0), "Y_alpha", 1.0, n=n, seed=seed, workers=workers)
    rep_int = ecf_compare(s.values, symmetric_cp_triplet(CMRep(1.0, Q)))
    mu = GeneratingTriplet.compound_poisson(Atoms([1.0], [1.0]))
    K = make_kernel("E_alpha", 1.0)
    x = simulate_mapped_law(K, mu, n, seed, workers=workers)
    rep_map = ecf_compare(x, mu, K)
    return [
        dict(_check("integral of h_Q against Y", rep_int.max_abs_gap, MC_TOL), clt_bound=rep_int.clt_bound),
        dict(_check("E_1 image of CP(delta_1)", rep_map.max_abs_gap, MC_TOL), clt_bound=rep_map.clt_bound),
    ]


SUITES = {
    "gaussian-factor": _suite_gaussian_factor,
    "compose": _suite_compose,
    "tail-identity": _suite_tail_identity,
    "symmetry": _suite_symmetry,
    "mc-law": _suite_mc_law,
}


def run_suite(name, seed=None, n=None, alpha=None, workers=None):
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    t0 = time.perf_counter()
    checks = SUITES[name](seed=seed, n=n, alpha=alpha, workers=workers)
    return {"suite": name, "passed": all(c["passed"] for c in checks), "checks": checks,
            "seconds": time.perf_counter() - t0}
