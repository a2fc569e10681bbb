import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gradplate.motion import FourierMode, SurfaceMotion, TimeLaw, parse_motion_text


def test_time_law_parse_and_value():
    law = TimeLaw.parse("poly(1;2)*sin(3,0.5)")
    t = 0.7
    assert_allclose(law.derivative(t, 0), (1 + 2 * t) * math.sin(3 * t + 0.5), rtol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_time_law_derivatives_match_finite_differences(n):
    law = TimeLaw.parse("poly(0.5;-1;0.25)*cos(1.3,0.2)")
    h, t = 1e-3, 0.4
    f = lambda s: law.derivative(s, n - 1)
    fd = (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)
    assert_allclose(law.derivative(t, n), fd, rtol=1e-8)


@pytest.mark.parametrize("bad", ["tan(1)", "cos(1)*sin(2)", "cos", "static(1)"])
def test_time_law_rejects_malformed(bad):
    with pytest.raises(ValueError):
        TimeLaw.parse(bad)


def test_fourier_mode_value():
    m = SurfaceMotion.fourier([FourierMode(2, 1, 2, 0.5, 0.1, TimeLaw.parse("cos(2)"))], eps=0.1)
    Y = np.array([0.3, 0.4])
    y = m(Y, 0.25)
    assert_allclose(y, [0.3, 0.4, 0.1 * 0.5 * math.cos(0.3 + 0.8 + 0.1) * math.cos(0.5)], rtol=1e-15)


def test_cylinder_maps_onto_radius():
    R = 3.0
    Y = np.array([[0.2, 1.0], [1.5, -2.0]])
    y = SurfaceMotion.cylinder(R)(Y)
    assert_allclose(y[:, 1] ** 2 + (R - y[:, 2]) ** 2, R**2, rtol=1e-14)


def test_parse_motion_rows():
    m = parse_motion_text("# comp m1 m2 amp phase law\nw 1 0 1.0 0.0 static\nu1 0 1 0.5 0.2 sin(1)\n", eps=0.2)
    assert len(m.terms) == 2 and m.eps == 0.2
    with pytest.raises(ValueError, match="component"):
        parse_motion_text("q 1 0 1 0 static")
