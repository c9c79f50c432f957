import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import eval_genlaguerre, eval_hermite

from cscoherent.exceptions import DomainError
from cscoherent.special import MAX_DEGREE, hermite, hermite_derivative, laguerre, laguerre_derivative


@pytest.mark.parametrize("m, x, expected", [(0, 1.7, 1.0), (2, 1.0, 2.0), (3, 1.0, -4.0)])
def test_hermite_values(m, x, expected):
    assert hermite(m, x) == pytest.approx(expected)


@pytest.mark.parametrize("n, a, x, expected", [(0, 6, 3.2, 1.0), (1, 6, 2, 5.0), (2, 0.5, 0, 1.875)])
def test_laguerre_values(n, a, x, expected):
    assert laguerre(n, a, x) == pytest.approx(expected)


@pytest.mark.parametrize("m", range(0, 13))
def test_hermite_matches_reference(m):
    x = np.linspace(-3, 3, 41)
    np.testing.assert_allclose(hermite(m, x), eval_hermite(m, x), rtol=1e-12, atol=1e-12 * 2**m)


@pytest.mark.parametrize("n", range(0, 9))
@pytest.mark.parametrize("a", [-0.5, 0.0, 0.5, 2.0, 6.0])
def test_laguerre_matches_reference(n, a):
    x = np.linspace(0, 12, 37)
    np.testing.assert_allclose(laguerre(n, a, x), eval_genlaguerre(n, a, x), rtol=1e-11, atol=1e-11)


@given(st.integers(0, 10), st.floats(-3, 3))
def test_hermite_parity(m, x):
    assert hermite(m, -x) == pytest.approx((-1) ** m * hermite(m, x), rel=1e-12, abs=1e-9)


@given(st.integers(0, 8), st.floats(-0.9, 8), st.floats(0.05, 10))
def test_laguerre_ode_residual(n, a, x):
    # x y'' + (a + 1 - x) y' + n y = 0
    y1 = laguerre_derivative(n, a, x)
    y2 = laguerre_derivative(n, a, x, order=2)
    res = x * y2 + (a + 1 - x) * y1 + n * laguerre(n, a, x)
    scale = 1 + abs(x * y2) + abs((a + 1 - x) * y1) + abs(n * laguerre(n, a, x))
    assert abs(res) < 1e-10 * scale


def test_derivative_examples():
    np.testing.assert_allclose(hermite_derivative(1, np.linspace(-2, 2, 5)), 2.0)
    assert laguerre_derivative(0, 1.3, 2.2) == 0.0
    h = 1e-5
    fd = (hermite(3, 0.7 + h) - hermite(3, 0.7 - h)) / (2 * h)
    assert hermite_derivative(3, 0.7) == pytest.approx(fd, rel=1e-8)


def test_laguerre_derivative_fd():
    h = 1e-5
    fd = (laguerre(4, 1.5, 2.0 + h) - laguerre(4, 1.5, 2.0 - h)) / (2 * h)
    assert laguerre_derivative(4, 1.5, 2.0) == pytest.approx(fd, rel=1e-8)


def test_broadcasting():
    x = np.ones((3, 4))
    assert hermite(2, x).shape == (3, 4)
    assert laguerre(2, 1.0, x).shape == (3, 4)


def test_domain_errors():
    with pytest.raises(DomainError):
        laguerre(2, -1.0, 1.0)
    with pytest.raises(DomainError):
        hermite(-1, 1.0)
    with pytest.raises(DomainError):
        hermite(MAX_DEGREE + 1, 1.0)
