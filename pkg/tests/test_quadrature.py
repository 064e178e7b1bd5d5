import math

import numpy as np
import pytest

from liouville_billiards.quadrature import (
    BracketError,
    IntegralEstimate,
    NonConvergenceError,
    NonFiniteIntegrandError,
    find_root_monotone,
    integrate_singular,
)


def test_arcsine_integral():
    # closed form: arcsin antiderivative
    r = integrate_singular(lambda x: 1.0 / np.sqrt(x * (1.0 - x)), 0.0, 1.0)
    assert abs(r.value - math.pi) <= 1e-12
    assert r.error_estimate >= 0.0
    assert r.evaluations > 0


@pytest.mark.parametrize("a1,a2", [(2.0, 3.0), (1.0, 1.1), (0.25, 7.5), (1.0, 100.0)])
def test_sqrt_pair_integral_is_pi(a1, a2):
    r = integrate_singular(
        lambda s: 1.0 / np.sqrt((a2 - s) * (s - a1)), a1, a2
    )
    assert abs(r.value - math.pi) <= 1e-10


def test_asinh_integral():
    r = integrate_singular(lambda y: 1.0 / np.sqrt(1.0 + y * y), -1.0, 1.0)
    assert abs(r.value - 2.0 * math.log(1.0 + math.sqrt(2.0))) <= 1e-12


@pytest.mark.parametrize("degree", range(11))
def test_polynomial_exactness(degree):
    coeffs = [((-1) ** j) * (j + 1) for j in range(degree + 1)]
    exact = sum(c / (j + 1) for j, c in enumerate(coeffs))

    def poly(x):
        out = np.zeros_like(x)
        for j, c in enumerate(coeffs):
            out = out + c * x ** j
        return out

    r = integrate_singular(poly, 0.0, 1.0)
    assert abs(r.value - exact) <= 1e-13 * max(1.0, abs(exact))


def test_halving_tol_stays_within_error_estimate():
    f = lambda t: np.sqrt(t) / (np.sqrt((t - 1.0) * (2.0 - t)) * (3.0 - t))
    for tol in (1e-6, 1e-8, 1e-10):
        coarse = integrate_singular(f, 1.2, 2.0, tol=tol)
        fine = integrate_singular(f, 1.2, 2.0, tol=tol / 2.0)
        assert abs(fine.value - coarse.value) <= coarse.error_estimate + 1e-15


def test_nonfinite_interior_raises():
    def bad(x):
        return np.where(np.abs(x - 0.5) < 0.01, np.nan, 1.0)

    with pytest.raises(NonFiniteIntegrandError):
        integrate_singular(bad, 0.0, 1.0)


def test_interior_singularity_raises_nonconvergence():
    # integrable, but the blowup sits away from the endpoints where the
    # transformation cannot cluster nodes
    with pytest.raises(NonConvergenceError):
        integrate_singular(lambda x: np.abs(x - 0.37) ** -0.9, 0.0, 1.0)


def test_invalid_interval_raises():
    with pytest.raises(ValueError):
        integrate_singular(lambda x: x, 1.0, 0.0)


def test_estimate_requires_positive_evaluations():
    with pytest.raises(ValueError):
        IntegralEstimate(1.0, 0.0, 0)


def test_root_linear():
    assert abs(find_root_monotone(lambda x: x - 0.5, 0.0, 1.0) - 0.5) < 1e-14


def test_root_sin_squared():
    # sin(pi/4)^2 = 1/2
    root = find_root_monotone(
        lambda x: math.sin(2.0 * math.pi * x) ** 2 - 0.5, 0.0, 0.25
    )
    assert abs(root - 0.125) < 1e-12


def test_root_stays_inside_bracket():
    lo, hi = 0.3, 1.7
    root = find_root_monotone(lambda x: math.atan(x) - 1.0, lo, hi)
    assert lo <= root <= hi
    assert abs(math.atan(root) - 1.0) < 1e-12


def test_root_bracket_error():
    with pytest.raises(BracketError):
        find_root_monotone(lambda x: x + 2.0, 0.0, 1.0)
