"""Acceptance battery: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np
from scipy import stats

from frozen import KS_CRIT_1PCT, N_ALPHA
from idlaws.classes import cm_test, is_member, is_member_E_alpha
from idlaws.core import (Atoms, CMRep, Density, Direction, GeneratingTriplet, LevyMeasure, MixingMeasure,
                         is_symmetric)
from idlaws.mappings import (compose_check, embed_E_alpha_in_E_beta, make_kernel, n_alpha, n_alpha_inverse,
                             transform_triplet)
from idlaws.numerics import DomainError, exp_integral_e1, gamma_fn, integrate_halfline
from idlaws.qrep import Q_from_h, h_from_Q, represent_one_sided, tail_identity_check, validate_Q
from idlaws.simulate import (DEFAULT_Z, ecf_compare, sample_integral, sample_path, simulate_mapped_law,
                             symmetric_cp_triplet)
from idlaws.verify import compose_laws, symmetry_battery, tail_identity_cases

CP1 = GeneratingTriplet.compound_poisson(Atoms([1.0], [1.0]))


def test_1_gaussian_factor(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for alpha in (0.5, 1.0, 2.0, 3.0):
        k = make_kernel("E_alpha", alpha)
        for a in (1.0, 2.5):
            got = transform_triplet(k, GeneratingTriplet.gaussian_law([[a]])).gaussian[0, 0]
            want = gamma_fn(1.0 + 2.0 / alpha) * a
            worst = max(worst, abs(got - want) / want)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 1.0
    assert criterion(1, "Gaussian factor", ok, f"max rel error {worst:.2e} (tol 1e-10)", dt)


def test_2_kernel_identity(criterion):
    t0 = time.perf_counter()
    worst_id = worst_oracle = worst_inv = 0.0
    for alpha in (0.5, 1.0, 2.0):
        for x in (0.1, 0.5, 1.0, 2.0, 5.0):
            direct = integrate_halfline(lambda u: np.exp(-u ** alpha) / u, a=x, rtol=1e-13, tol=1e-300).value
            closed = exp_integral_e1(x ** alpha) / alpha
            worst_id = max(worst_id, abs(direct - closed) / closed)
            worst_oracle = max(worst_oracle, abs(n_alpha(x, alpha) - N_ALPHA[(alpha, x)]) / N_ALPHA[(alpha, x)])
            worst_inv = max(worst_inv, abs(n_alpha_inverse(n_alpha(x, alpha), alpha) - x) / x)
    dt = time.perf_counter() - t0
    ok = worst_id <= 1e-10 and worst_oracle <= 1e-10 and worst_inv <= 1e-8 and dt < 1.0
    detail = (f"quadrature vs E1 {worst_id:.1e}, vs mpmath {worst_oracle:.1e} (tol 1e-10); "
              f"inverse round trip {worst_inv:.1e} (tol 1e-8)")
    assert criterion(2, "Kernel identity", ok, detail, dt)


def test_3_composition(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for name, mu in compose_laws().items():
        for alpha in (1.0, 2.0):
            worst = max(worst, compose_check(alpha, mu, DEFAULT_Z)["max_discrepancy"])
    dt = time.perf_counter() - t0
    ok = worst <= 1e-7 and dt < 30.0
    assert criterion(3, "Composition", ok, f"max cumulant discrepancy {worst:.2e} (tol 1e-7)", dt)


def test_4_symmetry(criterion):
    t0 = time.perf_counter()
    battery = symmetry_battery()
    sym = sum(1 for _, _, s in battery if s)
    mismatches = []
    for alpha in (0.5, 1.0, 2.0):
        k = make_kernel("E_alpha", alpha)
        for name, mu, expected in battery:
            before = is_symmetric(mu)
            after = is_symmetric(transform_triplet(k, mu))
            if not (before == expected and after == expected):
                mismatches.append((name, alpha))
    dt = time.perf_counter() - t0
    ok = sym == 6 and len(battery) - sym == 6 and not mismatches and dt < 5.0
    assert criterion(4, "Symmetry equivalence", ok,
                     f"{sym} symmetric + {len(battery) - sym} asymmetric laws, mismatches {mismatches}", dt)


def _image_laws():
    laws = [mu for _, mu, _ in symmetry_battery()]
    laws += list(compose_laws().values())
    return laws


def test_5_range_and_embedding(criterion):
    t0 = time.perf_counter()
    failures = []
    worst = 0.0
    r = np.linspace(0.05, 20.0, 400)
    for alpha in (0.5, 1.0, 2.0):
        k = make_kernel("E_alpha", alpha)
        for i, mu in enumerate(_image_laws()):
            nu = transform_triplet(k, mu).levy
            if not is_member_E_alpha(nu, alpha).passed:
                failures.append(("E", alpha, i))
            for beta in (2 * alpha, 3 * alpha):
                dirs = []
                for d in nu.directions:
                    emb = embed_E_alpha_in_E_beta(d.radial, beta)
                    a, b = np.asarray(emb.pdf(r)), np.asarray(d.radial.pdf(r))
                    worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))))
                    dirs.append(Direction(d.xi, d.weight, emb))
                if not is_member_E_alpha(LevyMeasure(nu.dim, dirs), beta).passed:
                    failures.append(("embed", alpha, beta, i))
    dt = time.perf_counter() - t0
    ok = not failures and worst <= 1e-9 and dt < 10.0
    assert criterion(5, "Range and inclusion", ok,
                     f"membership failures {failures}, max rel density gap {worst:.1e} (tol 1e-9)", dt)


def test_6_tail_identity(criterion):
    t0 = time.perf_counter()
    worst = worst_rt = 0.0
    s = np.geomspace(0.1, 10.0, 9)
    for _, Q in tail_identity_cases().items():
        for alpha in (0.5, 1.0, 2.0):
            h = h_from_Q(Q, alpha)
            worst = max(worst, tail_identity_check(Q, h, alpha, (0.25, 0.5, 1.0, 2.0, 4.0)))
            back = Q_from_h(h, alpha)
            worst_rt = max(worst_rt, float(np.max(np.abs(back.laplace(s) - Q.laplace(s)) / Q.laplace(s))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and worst_rt <= 1e-9 and dt < 2.0
    assert criterion(6, "Tail identity", ok,
                     f"tail identity {worst:.1e} (tol 1e-8), round trip {worst_rt:.1e} (tol 1e-9)", dt)


def test_7_jump_law(criterion):
    t0 = time.perf_counter()
    n = 100_000
    crit = KS_CRIT_1PCT / math.sqrt(n)
    dists = {}
    for i, alpha in enumerate((0.5, 1.0, 2.0)):
        # rate 2/alpha: this horizon holds well over n jumps
        path = sample_path("Y_alpha", alpha, horizon=0.6 * n * alpha, seed=2024 + i)
        mags = np.abs(path.jumps[:n])
        assert len(mags) == n
        dists[alpha] = stats.kstest(mags, lambda x: -np.expm1(-np.maximum(x, 0.0) ** alpha)).statistic
    dt = time.perf_counter() - t0
    ok = all(d < crit for d in dists.values()) and dt < 5.0
    detail = ", ".join(f"alpha={a}: D={d:.4f}" for a, d in dists.items()) + f" (1% critical {crit:.4f})"
    assert criterion(7, "Jump law", ok, detail, dt)


def test_8_monte_carlo_closure(criterion):
    t0 = time.perf_counter()
    q = MixingMeasure.delta(1.0)
    s = sample_integral(h_from_Q(q, 1.0), "Y_alpha", 1.0, n=200_000, seed=42)
    gap_int = ecf_compare(s.values, symmetric_cp_triplet(CMRep(1.0, q)), z_grid=DEFAULT_Z).max_abs_gap
    k = make_kernel("E_alpha", 1.0)
    x = simulate_mapped_law(k, CP1, n=200_000, seed=42)
    gap_map = ecf_compare(x, CP1, kernel=k, z_grid=DEFAULT_Z).max_abs_gap
    dt = time.perf_counter() - t0
    ok = gap_int < 0.015 and gap_map < 0.015 and dt < 60.0
    assert criterion(8, "Monte Carlo law closure", ok,
                     f"integral ECF gap {gap_int:.4f}, mapped ECF gap {gap_map:.4f} (tol 0.015)", dt)


def test_9_negative_controls(criterion):
    t0 = time.perf_counter()
    results = {}
    bad_q = MixingMeasure(expr="t^(-1/2)", hi=1.0)
    try:
        h_from_Q(bad_q, 1.0)
        refused = False
    except DomainError:
        refused = True
    results["invalid Q rejected"] = refused and not validate_Q(bad_q, 1.0).ok
    results["L fails on increasing k"] = not is_member("L", LevyMeasure.one_sided(Density("exp(-1/r)/r"))).passed
    v = cm_test(lambda r: np.exp(-(r - 1.0) ** 2))
    results["cm_test witness"] = (not v.passed) and v.witness is not None
    refusals = []
    for alpha in (0.5, 1.0, 2.0):
        witness = MixingMeasure([(1.0, 1.0)], expr=f"t^({3 / (2 * alpha)!r})", lo=1.0)
        try:
            represent_one_sided(witness, alpha)
            refusals.append(False)
        except DomainError as exc:
            refusals.append(validate_Q(witness, alpha).ok and not exc.verdict.at_least("dom"))
    results["one-sided infinite variation refused"] = all(refusals)
    dt = time.perf_counter() - t0
    ok = all(results.values()) and dt < 5.0
    detail = ", ".join(f"{k}: {'yes' if v else 'NO'}" for k, v in results.items())
    assert criterion(9, "Negative controls", ok, detail, dt)
