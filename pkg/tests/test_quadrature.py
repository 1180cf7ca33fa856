import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastodg import segment_rule, triangle_rule
from elastodg.quadrature import (SEGMENT_MAX_DEGREE, TRIANGLE_MAX_DEGREE,
                                 triangle_bary)


def monomial_integral(a: int, b: int) -> float:
    # int over {x,y>=0, x+y<=1} of x^a y^b = a! b! / (a+b+2)!
    return math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)


def test_reference_measures():
    for d in range(TRIANGLE_MAX_DEGREE + 1):
        r = triangle_rule(d)
        assert abs(r.weights.sum() - 0.5) < 1e-14
        assert np.all(r.weights > 0)
    for d in range(SEGMENT_MAX_DEGREE + 1):
        r = segment_rule(d)
        assert abs(r.weights.sum() - 1.0) < 1e-14
        assert np.all(r.weights > 0)
        assert np.all((r.points > 0) & (r.points < 1))


@pytest.mark.parametrize("degree", range(TRIANGLE_MAX_DEGREE + 1))
def test_triangle_monomial_exactness(degree):
    r = triangle_rule(degree)
    x, y = r.points[:, 0], r.points[:, 1]
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            approx = np.sum(r.weights * x**a * y**b)
            exact = monomial_integral(a, b)
            assert abs(approx - exact) < 1e-13 * max(1.0, abs(exact))


def test_triangle_subdivision_oracle_x2y():
    # Brute-force oracle: refine the reference triangle and sum midpoint
    # values; compare the degree-3 rule against it and the closed form.
    n = 400
    total = 0.0
    h = 1.0 / n
    for i in range(n):
        for j in range(n - i):
            # lower sub-triangle centroid
            cx, cy = (i + 1 / 3) * h, (j + 1 / 3) * h
            total += cx * cx * cy * (h * h / 2)
            if j < n - i - 1:
                cx, cy = (i + 2 / 3) * h, (j + 2 / 3) * h
                total += cx * cx * cy * (h * h / 2)
    r = triangle_rule(3)
    quad = np.sum(r.weights * r.points[:, 0] ** 2 * r.points[:, 1])
    assert abs(total - 1.0 / 60.0) < 1e-5
    assert abs(quad - 1.0 / 60.0) < 1e-15


def test_triangle_degree2_linear():
    r = triangle_rule(2)
    assert np.sum(r.weights * (r.points[:, 0] + r.points[:, 1])) == pytest.approx(1 / 3)


def test_triangle_degree1_constant():
    r = triangle_rule(1)
    assert np.sum(r.weights) == pytest.approx(0.5)


def test_segment_examples():
    assert np.sum(segment_rule(1).weights) == pytest.approx(1.0)
    r3 = segment_rule(3)
    assert np.sum(r3.weights * r3.points**3) == pytest.approx(0.25, abs=1e-15)
    r11 = segment_rule(11)
    approx = np.sum(r11.weights * np.cos(5.0 * r11.points))
    assert abs(approx - math.sin(5.0) / 5.0) < 1e-10


@settings(deadline=None, max_examples=30)
@given(degree=st.integers(0, SEGMENT_MAX_DEGREE))
def test_segment_monomial_exactness(degree):
    r = segment_rule(degree)
    for k in range(degree + 1):
        assert abs(np.sum(r.weights * r.points**k) - 1.0 / (k + 1)) < 1e-13


@pytest.mark.parametrize("degree", [-1, TRIANGLE_MAX_DEGREE + 1])
def test_triangle_unsupported_degree(degree):
    with pytest.raises(ValueError):
        triangle_rule(degree)


@pytest.mark.parametrize("degree", [-2, SEGMENT_MAX_DEGREE + 1])
def test_segment_unsupported_degree(degree):
    with pytest.raises(ValueError):
        segment_rule(degree)


@settings(deadline=None, max_examples=25)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_affine_pushforward_preserves_measure(coords):
    # Integrating the constant 1 over an arbitrary triangle via push-forward
    # must give its area: sum w_q * |2 area| with 2*area the Jacobian.
    p0 = np.array(coords[0:2])
    p1 = np.array(coords[2:4])
    p2 = np.array(coords[4:6])
    area2 = (p1 - p0)[0] * (p2 - p0)[1] - (p1 - p0)[1] * (p2 - p0)[0]
    r = triangle_rule(4)
    assert abs(np.sum(r.weights) * area2 - area2 / 2.0) < 1e-12 * max(1.0, abs(area2))


def test_barycentric_helper():
    r = triangle_rule(5)
    lam = triangle_bary(r)
    assert np.allclose(lam.sum(axis=1), 1.0, atol=1e-14)
    assert np.all(lam > 0)
    assert np.allclose(lam[:, 1], r.points[:, 0])
