import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from idlaws.expr import Expr, ExprError


@pytest.mark.parametrize("text, x, want", [
    ("exp(-r)", 1.0, math.exp(-1.0)),
    ("r^2 + 3*r - 1", 2.0, 9.0),
    ("-r^2", 3.0, -9.0),
    ("log(r)/r", math.e, 1.0 / math.e),
    ("sqrt(abs(r))*pi", -4.0, 2 * math.pi),
    ("e^r", 0.0, 1.0),
    ("1/(1+r)", 1.0, 0.5),
])
def test_evaluates(text, x, want):
    assert Expr(text)(x) == pytest.approx(want, rel=1e-15)


def test_vectorised_and_constant_broadcast():
    r = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(Expr("r*exp(-r)")(r), r * np.exp(-r))
    np.testing.assert_array_equal(Expr("2.5")(r), np.full(3, 2.5))


@pytest.mark.parametrize("text", [
    "__import__('os')",
    "r.real",
    "sin(r)",
    "r if r else 1",
    "[r]",
    "'abc'",
    "r % 2",
    "lambda: 1",
    "exp(r, 2)",
    "t + 1",
    "r +",
])
def test_rejects_outside_grammar(text):
    with pytest.raises(ExprError):
        Expr(text)


def test_substitute_changes_variable():
    e = Expr("exp(-r)*r").substitute("t^(-1/2)", var="t")
    assert e.var == "t"
    t = np.array([0.25, 4.0])
    np.testing.assert_allclose(e(t), np.exp(-t ** -0.5) * t ** -0.5, rtol=1e-15)


def test_equality_and_hash():
    assert Expr("r+1") == Expr("r+1")
    assert Expr("r+1") != Expr("t+1", var="t")
    assert len({Expr("r"), Expr("r")}) == 1


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_linear_forms_match_python(a, b):
    e = Expr(f"({a!r})*r + ({b!r})")
    assert e(1.5) == pytest.approx(a * 1.5 + b, rel=1e-12, abs=1e-12)
