import numpy as np
import sympy as sp
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from gradplate import _jet as J
from gradplate._jet import Jet

X, Y, T = sp.symbols("X Y T")
POINT = {X: 0.3, Y: -0.7, T: 0.4}


def _jet_of(expr, degree=4):
    """Jet built from sympy derivatives at POINT (independent oracle)."""

    def deriv(i, j, k):
        return float(sp.diff(expr, X, i, Y, j, T, k).subs(POINT))

    return Jet.from_derivatives(deriv, degree, ())


def _variables(degree=4):
    return [_jet_of(v, degree) for v in (X, Y, T)]


def _check(jet, expr, degree=4):
    for i, j, k in J.monomials(degree):
        want = float(sp.diff(expr, X, i, Y, j, T, k).subs(POINT))
        assert_allclose(jet.partial(i, j, k), want, rtol=1e-12, atol=1e-12)


def test_product_and_power_match_symbolic():
    x, y, t = _variables()
    _check(x * y * y + 3 * t**3 - x, X * Y**2 + 3 * T**3 - X)


def test_reciprocal_and_sqrt_match_symbolic():
    x, y, t = _variables()
    _check(J.sqrt(2 + x * x + y * t), sp.sqrt(2 + X**2 + Y * T))
    _check((1 + x * x) / (3 + y), (1 + X**2) / (3 + Y))


def test_diff_shifts_derivatives():
    x, y, t = _variables()
    f = x**3 * t
    _check(f.diff(J.Y1), sp.diff(X**3 * T, X), degree=3)
    _check(f.diff(J.T), X**3, degree=3)


def test_inv3_matches_numpy_inverse(rng):
    A = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    jet = Jet.constant(A, 2)
    assert_allclose(J.inv3(jet).value, np.linalg.inv(A), rtol=1e-13)


def test_cross_and_dot_values(rng):
    a, b = rng.normal(size=(2, 3))
    ja, jb = Jet.constant(a, 1), Jet.constant(b, 1)
    assert_allclose(J.cross(ja, jb).value, np.cross(a, b))
    assert_allclose(J.dot(ja, jb).value, a @ b)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.5, 3))
def test_division_inverts_multiplication(u, v, w):
    x, y, t = _variables(3)
    f = u + v * x + y * t
    g = w + x * x
    back = (f * g) / g
    for idx in J.monomials(3):
        assert_allclose(back.partial(*idx), f.partial(*idx), atol=1e-10)
