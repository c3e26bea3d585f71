import math

import numpy as np
import pytest

from frozen import (E_CP_DELTA1, E_CP_EXP, E_DRIFT_CP_DELTA1, N_CP_DELTA1, N_CP_EXP,
                    N_DRIFT_CP_DELTA1, PHI_CP_DELTA1)
from idlaws.classes import is_member_E_alpha
from idlaws.core import (Atoms, AtomSeries, Density, Direction, GeneratingTriplet, LevyMeasure, convolve,
                         eval_cumulant, is_symmetric, log_moment_order)
from idlaws.mappings import (KernelImage, compose_check, make_kernel, transform_cumulant,
                             transform_triplet)
from idlaws.numerics import (DomainError, QuadratureError, exp_integral_e1, gamma_fn, integrate_finite,
                             integrate_halfline)
from idlaws.verify import symmetry_battery

CP1 = GeneratingTriplet.compound_poisson(Atoms([1.0], [1.0]))
CP_EXP = GeneratingTriplet.compound_poisson(Density("exp(-r)"))
GAUSS = GeneratingTriplet.gaussian_law([[1.0]])


# -- kernels ------------------------------------------------------------------


def test_kernel_examples():
    assert make_kernel("E_alpha", 1.0)(math.exp(-1.0)) == pytest.approx(1.0, abs=1e-15)
    assert make_kernel("N_alpha", 1.0)(exp_integral_e1(1.0)) == pytest.approx(1.0, abs=1e-10)
    assert make_kernel("Phi")(math.log(2.0)) == pytest.approx(0.5, abs=1e-15)


def test_kernel_names_and_errors():
    assert make_kernel("psi").name == "N_alpha" and make_kernel("psi").alpha == 1.0
    assert make_kernel("m").alpha == 2.0
    assert make_kernel("e_alpha", 3).alpha == 3.0
    with pytest.raises(ValueError):
        make_kernel("gamma", 1.0)
    with pytest.raises(DomainError):
        make_kernel("E_alpha", 0.0)
    with pytest.raises(ValueError):
        make_kernel("psi", 2.0)
    assert not make_kernel("E_alpha", 1.0).requires_log_moment
    assert make_kernel("Phi").requires_log_moment and make_kernel("N_alpha", 2.0).requires_log_moment


def test_e_alpha_kernel_support():
    k = make_kernel("E_alpha", 2.0)
    np.testing.assert_array_equal(k(np.array([1.0, 2.0, 5.0])), [0.0, 0.0, 0.0])
    assert k(0.25) == pytest.approx(math.sqrt(math.log(4.0)))


@pytest.mark.parametrize("name, alpha, sq, first", [
    ("E_alpha", 0.5, gamma_fn(5.0), gamma_fn(3.0)),
    ("E_alpha", 2.0, gamma_fn(2.0), gamma_fn(1.5)),
    ("Phi", None, 0.5, 1.0),
    ("N_alpha", 1.0, gamma_fn(2.0), gamma_fn(1.0)),
    ("N_alpha", 2.0, gamma_fn(1.0) / 2, gamma_fn(0.5) / 2),
])
def test_cached_integrals_match_quadrature(name, alpha, sq, first):
    k = make_kernel(name, alpha)
    assert k.squared_integral == pytest.approx(sq, rel=1e-12)
    assert k.first_integral == pytest.approx(first, rel=1e-12)
    f = k.evaluate
    if math.isinf(k.support):
        q2 = integrate_halfline(lambda t: f(t) ** 2, rtol=1e-12, tol=1e-300).value
        q1 = integrate_halfline(f, rtol=1e-12, tol=1e-300).value
    else:
        q2 = integrate_finite(lambda t: f(t) ** 2, 0.0, k.support, rtol=1e-12, tol=1e-300).value
        q1 = integrate_finite(f, 0.0, k.support, rtol=1e-12, tol=1e-300).value
    assert k.squared_integral == pytest.approx(q2, rel=1e-10)
    assert k.first_integral == pytest.approx(q1, rel=1e-10)


@pytest.mark.parametrize("name, alpha", [("E_alpha", 0.5), ("E_alpha", 2.0), ("Phi", None), ("N_alpha", 1.0)])
def test_kernels_nonincreasing_nonnegative(name, alpha):
    k = make_kernel(name, alpha)
    t = np.geomspace(1e-8, min(k.support, 50.0) * (1 - 1e-12), 400)
    v = k(t)
    assert np.all(v >= 0) and np.all(np.diff(v) <= 0)


# -- transform_triplet --------------------------------------------------------


def test_gaussian_factor_examples():
    out = transform_triplet(make_kernel("E_alpha", 2.0), GAUSS)
    assert out.gaussian[0, 0] == pytest.approx(1.0, rel=1e-14)
    out = transform_triplet(make_kernel("E_alpha", 1.0), GeneratingTriplet.gaussian_law([[2.0]]))
    assert out.gaussian[0, 0] == pytest.approx(4.0, rel=1e-14)
    out = transform_triplet(make_kernel("Phi"), GeneratingTriplet.gaussian_law([[2.0, 0.5], [0.5, 1.0]]))
    np.testing.assert_allclose(out.gaussian, [[1.0, 0.25], [0.25, 0.5]], rtol=1e-14)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0])
def test_point_mass_image_tail(alpha):
    out = transform_triplet(make_kernel("E_alpha", alpha), CP1)
    r = np.array([0.2, 1.0, 3.0])
    np.testing.assert_allclose(out.levy.directions[0].radial.tail(r), np.exp(-r ** alpha), rtol=1e-9)
    assert out.gamma[0] == pytest.approx(E_DRIFT_CP_DELTA1[alpha], abs=1e-10)


def test_drift_of_phi_and_n_images():
    out = transform_triplet(make_kernel("Phi"), CP1)
    assert out.gamma[0] == pytest.approx(math.pi / 4 - 0.5, abs=1e-12)
    for alpha in (1.0, 2.0):
        out = transform_triplet(make_kernel("N_alpha", alpha), CP1)
        assert out.gamma[0] == pytest.approx(N_DRIFT_CP_DELTA1[alpha], abs=1e-10)


def test_drift_scales_with_first_integral():
    mu = GeneratingTriplet(gamma=[0.7])
    for k in (make_kernel("E_alpha", 2.0), make_kernel("Phi"), make_kernel("N_alpha", 0.5)):
        assert transform_triplet(k, mu).gamma[0] == pytest.approx(0.7 * k.first_integral, rel=1e-13)


def test_delta0_unchanged():
    for name in ("E_alpha", "Phi", "N_alpha"):
        out = transform_triplet(make_kernel(name, 1.5), GeneratingTriplet.delta0())
        assert out.to_dict() == GeneratingTriplet.delta0().to_dict()


def test_log_moment_violation_refused():
    mu = GeneratingTriplet(levy=LevyMeasure.one_sided(AtomSeries("k", "1/k^2")))
    for k in (make_kernel("Phi"), make_kernel("N_alpha", 1.0)):
        with pytest.raises(DomainError, match="I_log"):
            transform_triplet(k, mu)
    # E_alpha needs no log moment
    transform_triplet(make_kernel("E_alpha", 1.0), mu)


def test_not_a_levy_measure_refused():
    mu = GeneratingTriplet(levy=LevyMeasure.one_sided(Density("r^(-3)", hi=1.0)))
    with pytest.raises(DomainError):
        transform_triplet(make_kernel("E_alpha", 1.0), mu)


def test_density_images_have_expected_types():
    out = transform_triplet(make_kernel("Phi"), CP_EXP)
    radial = out.levy.directions[0].radial
    assert isinstance(radial, KernelImage)
    r = np.array([0.3, 1.0, 2.0])
    np.testing.assert_allclose(radial.pdf(r), np.exp(-r) / r, rtol=1e-9)


# -- transform_cumulant -------------------------------------------------------


def test_cumulant_examples():
    assert transform_cumulant(make_kernel("E_alpha", 2.0), CP1, 0.0) == 0
    assert transform_cumulant(make_kernel("E_alpha", 2.0), GAUSS, 1.0) == pytest.approx(-0.5, abs=1e-12)


@pytest.mark.parametrize("key", sorted(N_CP_DELTA1))
def test_n_alpha_cumulant_against_oracle(key):
    alpha, z = key
    assert transform_cumulant(make_kernel("N_alpha", alpha), CP1, z) == pytest.approx(N_CP_DELTA1[key], abs=1e-9)


@pytest.mark.parametrize("key", sorted(E_CP_DELTA1))
def test_e_alpha_cumulant_against_oracle(key):
    alpha, z = key
    k = make_kernel("E_alpha", alpha)
    assert transform_cumulant(k, CP1, z) == pytest.approx(E_CP_DELTA1[key], abs=1e-9)
    assert eval_cumulant(transform_triplet(k, CP1), z) == pytest.approx(E_CP_DELTA1[key], abs=1e-9)


@pytest.mark.parametrize("z", sorted(PHI_CP_DELTA1))
def test_phi_cumulant_against_oracle(z):
    k = make_kernel("Phi")
    assert transform_cumulant(k, CP1, z) == pytest.approx(PHI_CP_DELTA1[z], abs=1e-9)
    assert eval_cumulant(transform_triplet(k, CP1), z) == pytest.approx(PHI_CP_DELTA1[z], abs=1e-9)


@pytest.mark.parametrize("key", sorted(E_CP_EXP))
def test_density_inputs_against_oracle(key):
    alpha, z = key
    e = transform_triplet(make_kernel("E_alpha", alpha), CP_EXP)
    assert eval_cumulant(e, z) == pytest.approx(E_CP_EXP[key], abs=1e-9)
    n = transform_triplet(make_kernel("N_alpha", alpha), CP_EXP)
    assert eval_cumulant(n, z) == pytest.approx(N_CP_EXP[key], abs=1e-8)


@pytest.mark.parametrize("name, alpha", [("E_alpha", 0.5), ("E_alpha", 3.0), ("Phi", None), ("N_alpha", 2.0)])
@pytest.mark.parametrize("mu", [
    GeneratingTriplet([[0.5]], LevyMeasure.one_sided(Atoms([0.5, 2.0], [1.0, 0.3]), -1.0), [0.2]),
    CP_EXP,
], ids=["atoms", "density"])
def test_triplet_and_cumulant_routes_agree(name, alpha, mu):
    k = make_kernel(name, alpha)
    z = np.array([-4.0, -1.5, 0.5, 2.0, 4.0])
    if alpha == 0.5 and mu is CP_EXP:
        z = np.array([-0.5, 0.1, 0.25, 0.5])
    direct = transform_cumulant(k, mu, z)
    via = eval_cumulant(transform_triplet(k, mu), z)
    np.testing.assert_allclose(via, direct, atol=1e-7, rtol=0)


def test_direct_route_reports_nonconvergence():
    # a heavy E_0.5 weight reaches |u z| ~ 1e4, where the oscillatory inner integral fails
    with pytest.raises(QuadratureError, match="did not converge"):
        transform_cumulant(make_kernel("E_alpha", 0.5), CP_EXP, 4.0)


def test_cumulant_planar():
    mu = GeneratingTriplet([[1.0, 0.0], [0.0, 0.5]],
                           LevyMeasure(2, [Direction([0.6, 0.8], 1.0, Atoms([1.0], [2.0]))]), [0.1, 0.0])
    k = make_kernel("E_alpha", 1.0)
    z = np.array([[1.0, -0.5], [0.2, 0.4]])
    np.testing.assert_allclose(eval_cumulant(transform_triplet(k, mu), z), transform_cumulant(k, mu, z), atol=1e-8)


# -- compose_check ------------------------------------------------------------


def test_compose_examples():
    z = np.linspace(-3, 3, 13)
    assert compose_check(1.0, GeneratingTriplet.delta0(), z)["max_discrepancy"] == 0
    res = compose_check(2.0, GAUSS, z)
    assert res["max_discrepancy"] <= 1e-8
    # all three give the variance Gamma(2) * 1/2
    np.testing.assert_allclose(res["cumulants"]["n_alpha"], -0.5 * 0.5 * z ** 2, atol=1e-12)
    res = compose_check(1.0, CP1, [-2.0, -1.0, 1.0, 2.0])
    assert res["max_discrepancy"] <= 1e-7


# -- invariants ---------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_symmetry_both_ways(alpha):
    k = make_kernel("E_alpha", alpha)
    for name, mu, expected in symmetry_battery():
        assert is_symmetric(mu) == expected, name
        assert is_symmetric(transform_triplet(k, mu)) == expected, name


@pytest.mark.parametrize("name, alpha", [("E_alpha", 1.0), ("Phi", None), ("N_alpha", 2.0)])
def test_convolution_morphism(name, alpha):
    k = make_kernel(name, alpha)
    a = GeneratingTriplet([[0.3]], LevyMeasure.one_sided(Atoms([1.0, 3.0], [1.0, 0.5])), [0.4])
    b = GeneratingTriplet([[1.0]], LevyMeasure.one_sided(Atoms([0.5], [2.0]), -1.0), [-0.1])
    z = np.linspace(-4, 4, 9)
    lhs = eval_cumulant(transform_triplet(k, convolve(a, b)), z)
    rhs = eval_cumulant(transform_triplet(k, a), z) + eval_cumulant(transform_triplet(k, b), z)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9, rtol=0)


LOG_BATTERY = [
    ("point mass", GeneratingTriplet.compound_poisson(Atoms([3.0], [1.0]))),
    ("exp density", CP_EXP),
    ("power tail", GeneratingTriplet.compound_poisson(Density("r^(-2)", lo=1.0))),
    ("log^1 only", GeneratingTriplet.compound_poisson(AtomSeries("k", "1/k^3"))),
    ("no log", GeneratingTriplet.compound_poisson(AtomSeries("k", "1/k^2"))),
]


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("m", [1, 2])
def test_log_moments_preserved(alpha, m):
    k = make_kernel("E_alpha", alpha)
    for name, mu in LOG_BATTERY:
        if isinstance(mu.levy.directions[0].radial, AtomSeries):
            # countable atoms have no finite E_alpha image representation
            continue
        assert log_moment_order(mu.levy, m) == log_moment_order(transform_triplet(k, mu).levy, m), name


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0])
def test_range_property(alpha):
    k = make_kernel("E_alpha", alpha)
    for _, mu, _ in symmetry_battery():
        assert is_member_E_alpha(transform_triplet(k, mu).levy, alpha).passed
    assert is_member_E_alpha(transform_triplet(k, CP_EXP).levy, alpha).passed


@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_selfdecomposable_instance(alpha):
    # mu = Phi(rho) with rho = CP(e^-r) is selfdecomposable with k(r) = e^-r;
    # its E_alpha image equals N_alpha(rho) and lies in E_alpha
    phi = make_kernel("Phi")
    mu = transform_triplet(phi, CP_EXP)
    r = np.array([0.1, 1.0, 4.0])
    np.testing.assert_allclose(mu.levy.directions[0].radial.pdf(r) * r, np.exp(-r), rtol=1e-9)
    e_mu = transform_triplet(make_kernel("E_alpha", alpha), mu)
    assert is_member_E_alpha(e_mu.levy, alpha).passed
    z = np.linspace(-3, 3, 7)
    n_rho = eval_cumulant(transform_triplet(make_kernel("N_alpha", alpha), CP_EXP), z)
    np.testing.assert_allclose(eval_cumulant(e_mu, z), n_rho, atol=1e-7, rtol=0)
    # the same selfdecomposable law built directly from its Levy density
    direct = GeneratingTriplet(levy=LevyMeasure.one_sided(Density("exp(-r)/r")), gamma=mu.gamma)
    np.testing.assert_allclose(eval_cumulant(transform_triplet(make_kernel("E_alpha", alpha), direct), z),
                               n_rho, atol=1e-7, rtol=0)
