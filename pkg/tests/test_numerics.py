import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frozen import E1, GAMMA_1_5, N_ALPHA
from idlaws.core import MixingMeasure
from idlaws.mappings import n_alpha, n_alpha_inverse
from idlaws.numerics import (EULER_GAMMA, DomainError, QuadratureError, endpoint_exponent,
                             exp_integral_e1, gamma_fn, integrate_finite, integrate_halfline,
                             integrate_positive, inverse_e1, invert_monotone, laplace_of_measure)

# Lanczos approximation (g = 7, n = 9): an independent gamma reference
_LANCZOS = [0.99999999999980993, 676.5203681218851, -1259.1392167224028, 771.32342877765313,
            -176.61502916214059, 12.507343278686905, -0.13857109526572012,
            9.9843695780195716e-6, 1.5056327351493116e-7]


def lanczos_gamma(x):
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * lanczos_gamma(1 - x))
    x -= 1
    a = _LANCZOS[0] + sum(c / (x + i) for i, c in enumerate(_LANCZOS[1:], start=1))
    t = x + 7.5
    return math.sqrt(2 * math.pi) * t ** (x + 0.5) * math.exp(-t) * a


def test_lanczos_oracle_reproduces_factorials():
    for n in range(1, 15):
        assert lanczos_gamma(n + 1.0) == pytest.approx(math.factorial(n), rel=1e-13)


# -- quadrature ---------------------------------------------------------------


@pytest.mark.parametrize("f, a, b, want", [
    (lambda t: np.ones_like(t), 0.0, 1.0, 1.0),
    (lambda t: np.log(1.0 / t) ** 2, 0.0, 1.0, 2.0),
    (lambda t: t ** -0.5, 0.0, 1.0, 2.0),
    (lambda t: 3 * t ** 2 - 2 * t + 5, -1.0, 2.0, 9.0 - 3.0 + 15.0),
])
def test_integrate_finite(f, a, b, want):
    res = integrate_finite(f, a, b)
    assert res.value == pytest.approx(want, abs=1e-10)
    assert res.abs_error_estimate >= 0
    assert res.subdivisions >= 1


def test_gauss_kronrod_exact_on_polynomials():
    # the 21-point Kronrod rule integrates degree <= 31 exactly on one panel
    rng = np.random.default_rng(7)
    c = rng.normal(size=25)
    poly = np.polynomial.Polynomial(c)
    want = poly.integ()(1.5) - poly.integ()(-0.5)
    assert integrate_finite(poly, -0.5, 1.5).value == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("f, want", [
    (lambda t: np.exp(-t), 1.0),
    (lambda t: t ** 2 * np.exp(-t), 2.0),
    (lambda t: t * np.exp(-t * t), 0.5),
    (lambda t: 1.0 / (1.0 + t * t), math.pi / 2),
])
def test_integrate_halfline(f, want):
    assert integrate_halfline(f).value == pytest.approx(want, abs=1e-10)


def test_integrate_vectorised_output():
    s = np.array([1.0, 2.0, 4.0])
    res = integrate_halfline(lambda t: np.exp(-np.outer(t, s)))
    np.testing.assert_allclose(res.value, 1.0 / s, rtol=1e-12)


def test_quadrature_failure_carries_estimate():
    with pytest.raises(QuadratureError) as exc:
        integrate_finite(lambda t: np.sin(1.0 / t) / t, 0.0, 1.0, tol=1e-14, limit=20)
    assert exc.value.result is not None


def test_integrate_positive_detects_divergence():
    assert integrate_positive(lambda t: 1.0 / t, 0.0, 1.0) == math.inf
    assert integrate_positive(lambda t: t ** -1.5, 1.0, math.inf) == pytest.approx(2.0, rel=1e-10)
    assert integrate_positive(lambda t: t ** -0.5, 1.0, math.inf) == math.inf


def test_endpoint_exponent_reads_power_laws():
    assert endpoint_exponent(lambda t: t ** -1.5, 1e-12, 1e-10) == pytest.approx(-1.5, abs=1e-9)
    assert endpoint_exponent(lambda t: np.zeros_like(t), 1e10, 1e12) == -math.inf
    assert endpoint_exponent(lambda t: np.zeros_like(t), 1e-12, 1e-10) == math.inf


# -- special functions --------------------------------------------------------


@pytest.mark.parametrize("x, want", [(2.0, 1.0), (3.0, 2.0), (1.5, GAMMA_1_5)])
def test_gamma_examples(x, want):
    assert gamma_fn(x) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("x", np.linspace(0.3, 12.0, 40))
def test_gamma_against_lanczos(x):
    assert gamma_fn(x) == pytest.approx(lanczos_gamma(x), rel=1e-12)


@given(st.floats(0.5, 10.0))
def test_gamma_recurrence(x):
    assert gamma_fn(x + 1) == pytest.approx(x * gamma_fn(x), rel=1e-11)


def test_gamma_rejects_nonpositive():
    with pytest.raises(DomainError):
        gamma_fn(0.0)
    with pytest.raises(DomainError):
        gamma_fn(-1.5)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_e1_against_brute_force_quadrature(x):
    brute = integrate_halfline(lambda u: np.exp(-u) / u, a=x, rtol=1e-13, tol=1e-300).value
    assert exp_integral_e1(x) == pytest.approx(brute, rel=1e-12)
    assert exp_integral_e1(x) == pytest.approx(E1[x], rel=1e-12)


def test_e1_examples():
    assert exp_integral_e1(1.0) == pytest.approx(0.2193839344, abs=1e-10)
    assert exp_integral_e1(10.0) == pytest.approx(E1[10.0], rel=1e-12)
    # asymptotic series e^-x/x (1 - 1/x + 2/x^2 - 6/x^3 + ...)
    x = 10.0
    asym = math.exp(-x) / x * (1 - 1 / x + 2 / x ** 2 - 6 / x ** 3 + 24 / x ** 4)
    assert exp_integral_e1(x) == pytest.approx(asym, rel=1e-3)
    for x in (1e-6, 1e-8):
        assert exp_integral_e1(x) + math.log(x) == pytest.approx(-EULER_GAMMA, abs=1e-5)


def test_e1_rejects_nonpositive():
    with pytest.raises(DomainError):
        exp_integral_e1(0.0)


# -- inversion ----------------------------------------------------------------


def test_invert_monotone_examples():
    assert invert_monotone(exp_integral_e1, exp_integral_e1(1.0), 1e-3, 50.0) == pytest.approx(1.0, abs=1e-10)
    assert invert_monotone(lambda x: x * x, 4.0, 0.0, 10.0) == pytest.approx(2.0, abs=1e-10)
    # n_2^*(m(1)) = 1 with m(x) = E1(x^2)/2
    assert n_alpha_inverse(0.5 * exp_integral_e1(1.0), 2.0) == pytest.approx(1.0, abs=1e-10)


def test_invert_monotone_names_violated_side():
    with pytest.raises(ValueError, match="above"):
        invert_monotone(lambda x: x, 20.0, 0.0, 10.0)
    with pytest.raises(ValueError, match="below"):
        invert_monotone(lambda x: x, -1.0, 0.0, 10.0)


@settings(max_examples=60)
@given(st.floats(-3.0, 2.0), st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_invert_monotone_round_trip(logx, alpha):
    x = 10.0 ** logx
    tol = 1e-12
    y = exp_integral_e1(x)
    got = invert_monotone(exp_integral_e1, y, 1e-5, 200.0, tol=tol)
    assert abs(exp_integral_e1(got) - y) <= tol
    if y > 1e3 * tol:
        # |x' - x| <= |E1(x') - E1(x)| / |E1'(x)| with E1'(x) = -e^-x / x
        assert abs(got - x) <= 10 * tol * x * math.exp(x) + 1e-15 * x
    got = invert_monotone(lambda u: u ** alpha, x ** alpha, 0.0, 200.0, tol=tol)
    assert abs(got ** alpha - x ** alpha) <= 10 * tol


@given(st.floats(-12.0, 2.5))
def test_inverse_e1_round_trip(logx):
    x = 10.0 ** logx
    assert inverse_e1(exp_integral_e1(x)) == pytest.approx(x, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_n_alpha_matches_direct_quadrature(alpha, x):
    direct = integrate_halfline(lambda u: np.exp(-u ** alpha) / u, a=x, rtol=1e-13, tol=1e-300).value
    assert n_alpha(x, alpha) == pytest.approx(direct, rel=1e-10)
    assert n_alpha(x, alpha) == pytest.approx(N_ALPHA[(alpha, x)], rel=1e-10)
    assert n_alpha_inverse(n_alpha(x, alpha), alpha) == pytest.approx(x, rel=1e-8)


# -- Laplace transforms -------------------------------------------------------


def test_laplace_examples():
    s = np.array([0.1, 1.0, 3.0])
    np.testing.assert_allclose(laplace_of_measure(MixingMeasure.delta(1.0), s), np.exp(-s), rtol=1e-14)
    dens = MixingMeasure(expr="exp(-t)")
    np.testing.assert_allclose(laplace_of_measure(dens, s), 1.0 / (1.0 + s), rtol=1e-10)
    two = MixingMeasure([(3.0, 2.0)])
    assert laplace_of_measure(two, 1e-12) == pytest.approx(2.0, rel=1e-10)
    with pytest.raises(DomainError):
        laplace_of_measure(two, 0.0)
