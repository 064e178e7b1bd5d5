"""Twist invariants of integrable billiards on the triaxial ellipsoid.

Computes the rotation number dL/dI(0) and twist coefficient d^2L/dI^2(0) of
the bouncing-ball fixed point of the squared billiard map, both for generic
separable-profile billiard tables and, in closed form, for the two families
of confocal billiards on an ellipsoid.  An independent geodesic simulator
cross-checks the closed forms through the linearized return map.
"""

from .quadrature import (
    IntegralEstimate,
    integrate_singular,
    find_root_monotone,
)
from .special_functions import elliptic_K, elliptic_E, zeta_Z

__version__ = "0.1.0"

__all__ = [
    "IntegralEstimate",
    "integrate_singular",
    "find_root_monotone",
    "elliptic_K",
    "elliptic_E",
    "zeta_Z",
    "__version__",
]
