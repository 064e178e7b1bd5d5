import math

import numpy as np
import pytest

from liouville_billiards.quadrature import integrate_singular
from liouville_billiards.special_functions import (
    EllipticDomainError,
    elliptic_E,
    elliptic_K,
    zeta_Z,
)


def quad_K(k):
    """Defining integral of K, the independent oracle for the AGM path."""
    kk = k * k
    return integrate_singular(
        lambda s: 1.0 / np.sqrt((1.0 - s * s) * (1.0 - kk * s * s)), 0.0, 1.0
    ).value


def quad_E(k):
    kk = k * k
    return integrate_singular(
        lambda s: np.sqrt(1.0 - kk * s * s) / np.sqrt(1.0 - s * s), 0.0, 1.0
    ).value


def test_K_trivial():
    assert abs(elliptic_K(0.0) - math.pi / 2.0) < 1e-15


def test_E_trivial():
    assert abs(elliptic_E(0.0) - math.pi / 2.0) < 1e-15
    assert elliptic_E(1.0) == 1.0


def test_K_lemniscatic_point():
    # frozen from the quadrature oracle; agrees with Gamma(1/4)^2/(4 sqrt(pi))
    assert abs(elliptic_K(1.0 / math.sqrt(2.0)) - 1.8540746773013719) < 1e-12


def test_K_high_modulus_vs_quadrature():
    k = 0.99
    assert abs(elliptic_K(k) - quad_K(k)) <= 1e-12 * elliptic_K(k)


def test_E_vs_quadrature():
    k = 0.5
    assert abs(elliptic_E(k) - quad_E(k)) <= 1e-12 * elliptic_E(k)


@pytest.mark.parametrize("k", [0.05, 0.2, 0.45, 0.7, 0.85, 0.95])
def test_agm_matches_defining_integrals(k):
    assert abs(elliptic_K(k) - quad_K(k)) <= 1e-12 * elliptic_K(k)
    assert abs(elliptic_E(k) - quad_E(k)) <= 1e-12 * elliptic_E(k)


def test_scipy_cross_check():
    from scipy.special import ellipe, ellipk

    for k in np.linspace(0.0, 0.99, 34):
        assert abs(elliptic_K(k) - ellipk(k * k)) < 1e-13 * elliptic_K(k)
        assert abs(elliptic_E(k) - ellipe(k * k)) < 1e-13 * elliptic_E(k)


def test_monotonicity():
    ks = np.linspace(0.0, 0.999, 200)
    K = [elliptic_K(k) for k in ks]
    E = [elliptic_E(k) for k in ks]
    assert all(b > a for a, b in zip(K, K[1:]))
    assert all(b < a for a, b in zip(E, E[1:]))


def test_Z_small_k_limit():
    # Z ~ (pi/4) k^2 as k -> 0+
    assert 0.0 < zeta_Z(1e-6) < 1e-9


def test_Z_positive_on_grid():
    for k in np.linspace(0.01, 0.995, 50):
        assert zeta_Z(k) > 0.0


def dK_dk(k, depth=5):
    """Central differences of K with a Richardson tableau; the entry with the
    smallest successive change wins (the modulus-dependent optimal step)."""
    h0 = min(1e-3, 0.05 * (1.0 - k))
    steps = [h0 * 2.0 ** -j for j in range(depth)]
    table = [[(elliptic_K(k + h) - elliptic_K(k - h)) / (2.0 * h)] for h in steps]
    for j in range(1, depth):
        fac = 4.0 ** j
        for i in range(depth - j):
            table[i].append((fac * table[i + 1][j - 1] - table[i][j - 1]) / (fac - 1.0))
    row = table[0]
    gaps = [abs(row[j] - row[j - 1]) for j in range(1, len(row))]
    return row[int(np.argmin(gaps)) + 1]


def test_Z_equals_k_dKdk_at_point():
    k = 0.6
    assert abs(zeta_Z(k) - k * dK_dk(k)) < 1e-8


def test_Z_identity_on_grid():
    for k in np.linspace(0.02, 0.999, 40):
        assert abs(zeta_Z(k) - k * dK_dk(k)) < 1e-8


@pytest.mark.parametrize("k", [-0.1, 1.0, 1.5, 1.0 - 1e-12])
def test_K_domain_errors(k):
    with pytest.raises(EllipticDomainError):
        elliptic_K(k)


def test_E_domain_errors():
    with pytest.raises(EllipticDomainError):
        elliptic_E(-0.01)
    with pytest.raises(EllipticDomainError):
        elliptic_E(1.01)


def test_Z_domain_errors():
    for k in (0.0, 1.0, -0.2, 1.2):
        with pytest.raises(EllipticDomainError):
            zeta_Z(k)
