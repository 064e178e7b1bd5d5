"""Complete elliptic integrals via arithmetic-geometric-mean iteration.

K(k) = integral_0^1 ds / sqrt((1-s^2)(1-k^2 s^2))
E(k) = integral_0^1 sqrt(1-k^2 s^2) / sqrt(1-s^2) ds
Z(k) = E(k)/(1-k^2) - K(k) = k dK/dk(k),  strictly positive on (0, 1).

Z is the quantity behind the twist-sign certificate of the first-type
billiards; its positivity is what makes the lambda -> a0 limit of the twist
integral positive.
"""

from __future__ import annotations

import math

__all__ = ["elliptic_K", "elliptic_E", "zeta_Z", "EllipticDomainError"]

# AGM stops when successive means agree to this relative gap; quadratic
# convergence reaches it in <= 8 iterations for any admissible modulus.
_AGM_RTOL = 1e-16
_MAX_ITER = 64

# K blows up logarithmically at k=1; values this close to 1 cannot be
# delivered at full accuracy and the paper never evaluates there.
_K_SINGULAR_GAP = 1e-10


class EllipticDomainError(ValueError):
    """Modulus outside the admissible interval."""


def _agm_sequence(k: float):
    """AGM of (1, sqrt(1-k^2)) with the c_n = (a_n - b_n)/2 sum for E."""
    a = 1.0
    b = math.sqrt((1.0 - k) * (1.0 + k))
    c = k
    c_sq_sum = 0.5 * k * k  # n=0 term: 2^(n-1) c_n^2 with c_0 = k
    power = 0.5
    for _ in range(_MAX_ITER):
        if abs(a - b) <= _AGM_RTOL * a:
            break
        a_next = 0.5 * (a + b)
        # c_{n+1} = c_n^2 / (4 a_{n+1}) avoids the cancellation of (a-b)/2
        c = c * c / (4.0 * a_next)
        a, b = a_next, math.sqrt(a * b)
        power *= 2.0
        c_sq_sum += power * c * c
    return a, c_sq_sum


def elliptic_K(k: float) -> float:
    """Complete elliptic integral of the first kind, 0 <= k < 1."""
    if not (0.0 <= k < 1.0):
        raise EllipticDomainError(f"elliptic_K requires 0 <= k < 1, got {k!r}")
    if k > 1.0 - _K_SINGULAR_GAP:
        raise EllipticDomainError(
            f"elliptic_K cannot be evaluated accurately for k={k!r} "
            f"(within {_K_SINGULAR_GAP:g} of the logarithmic singularity)"
        )
    agm, _ = _agm_sequence(k)
    return 0.5 * math.pi / agm


def elliptic_E(k: float) -> float:
    """Complete elliptic integral of the second kind, 0 <= k <= 1."""
    if not (0.0 <= k <= 1.0):
        raise EllipticDomainError(f"elliptic_E requires 0 <= k <= 1, got {k!r}")
    if k == 1.0:
        return 1.0
    agm, c_sq_sum = _agm_sequence(k)
    big_k = 0.5 * math.pi / agm
    return big_k * (1.0 - c_sq_sum)


def zeta_Z(k: float) -> float:
    """Z(k) = E(k)/(1-k^2) - K(k) on 0 < k < 1; diverges as k -> 1."""
    if not (0.0 < k < 1.0):
        raise EllipticDomainError(f"zeta_Z requires 0 < k < 1, got {k!r}")
    return elliptic_E(k) / ((1.0 - k) * (1.0 + k)) - elliptic_K(k)
