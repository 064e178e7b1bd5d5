"""Confocal billiards on the triaxial ellipsoid x0^2/a0 + x1^2/a1 + x2^2/a2 = 1.

Two families of tables are cut out of the ellipsoid by the confocal quadric
with parameter lambda: first type for lambda in (a0, a1) (one-sheet
hyperboloid, component with x0 > 0) and second type for lambda in (a1, a2)
(two-sheet hyperboloid, component with x2 > 0).

The separable structure comes from the elliptic coordinates (u1, u2) with
a0 <= u1 <= a1 <= u2 <= a2.  The chart functions

    X(u2) = int_{a1}^{u2} sqrt(s) ds / (2 sqrt((s-a0)(s-a1)(a2-s)))
    Y(u1) = int_{u1}^{a1} sqrt(t) dt / (2 sqrt((t-a0)(a1-t)(a2-t)))

turn the induced metric into the separable form with profile pair
f = X^{-1}, q = Y^{-1}; the second type is handled in the reflected frame
(b0, b1, b2) = (-a2, -a1, -a0), which reuses the same machinery verbatim.

Everything the closed forms claim (Taylor data, rotation/twist integrals,
sign certificates, bounds, exceptional parameters) lives here; the generic
profile route through :mod:`.liouville` and the dynamical simulator provide
the independent cross-checks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from .liouville import FixedPointClass, LiouvilleProfile, TaylorData, classify
from .quadrature import find_root_monotone, integrate_singular
from .special_functions import elliptic_E, elliptic_K

__all__ = [
    "AxesError",
    "SelectorError",
    "CertificateError",
    "MonotonicityError",
    "BilliardKind",
    "EllipsoidAxes",
    "BilliardSelector",
    "EllipticChart",
    "SignCertificate",
    "ExceptionalBilliard",
    "TwistReport",
    "elliptic_to_cartesian",
    "cartesian_to_elliptic",
    "chart_X",
    "chart_Y",
    "build_chart",
    "chart_profiles",
    "taylor_closed_form",
    "rotation_closed_form",
    "twist_closed_form",
    "sign_certificate",
    "rotation_bound",
    "rotation_lower_bound_at_a2",
    "exceptional_lambdas",
    "full_report",
]

RESONANT_FRACTIONS = (0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.75)


class AxesError(ValueError):
    """Semi-axis parameters out of order or insufficiently separated."""


class SelectorError(ValueError):
    """Billiard parameter lambda outside the open interval of its type."""


class CertificateError(RuntimeError):
    """A proven inequality failed numerically: implementation bug, not bad input."""


class MonotonicityError(RuntimeError):
    """Sampled rotation values violate the proven monotonicity in lambda."""


class BilliardKind(enum.Enum):
    FIRST = "I"
    SECOND = "II"

    @classmethod
    def parse(cls, text: str) -> "BilliardKind":
        t = str(text).strip().upper()
        if t in ("I", "1", "FIRST"):
            return cls.FIRST
        if t in ("II", "2", "SECOND"):
            return cls.SECOND
        raise SelectorError(f"unknown billiard type {text!r} (want I or II)")


@dataclass(frozen=True)
class EllipsoidAxes:
    """Squared semi-axes 0 < a0 < a1 < a2."""

    a0: float
    a1: float
    a2: float

    def __post_init__(self):
        margin = 1e-12 * self.a2
        if not (0.0 < self.a0 and self.a0 + margin < self.a1 and self.a1 + margin < self.a2):
            raise AxesError(
                f"need 0 < a0 < a1 < a2 with separation > {margin:g}, "
                f"got ({self.a0!r}, {self.a1!r}, {self.a2!r})"
            )

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.a0, self.a1, self.a2)


@dataclass(frozen=True)
class BilliardSelector:
    kind: BilliardKind
    lam: float


def _check_selector(axes: EllipsoidAxes, selector: BilliardSelector) -> None:
    lo, hi = (
        (axes.a0, axes.a1)
        if selector.kind is BilliardKind.FIRST
        else (axes.a1, axes.a2)
    )
    if not (lo < selector.lam < hi):
        raise SelectorError(
            f"type {selector.kind.value} requires lambda in ({lo!r}, {hi!r}), "
            f"got {selector.lam!r}"
        )


@dataclass(frozen=True)
class EllipticChart:
    """Quarter periods of the separable chart in the frame of one type."""

    axes: EllipsoidAxes
    kind: BilliardKind
    quarter_period_x: float
    quarter_period_y: float

    def __post_init__(self):
        if not (
            0.0 < self.quarter_period_x < math.inf
            and 0.0 < self.quarter_period_y < math.inf
        ):
            raise AxesError("chart quarter periods must be positive and finite")


def elliptic_to_cartesian(
    axes: EllipsoidAxes,
    u1: float,
    u2: float,
    signs: Tuple[int, int, int] = (1, 1, 1),
) -> np.ndarray:
    """Point of the ellipsoid with confocal coordinates (u1, u2) and octant signs."""
    a0, a1, a2 = axes.as_tuple()
    if not (a0 <= u1 <= a1 <= u2 <= a2):
        raise ValueError(
            f"need a0 <= u1 <= a1 <= u2 <= a2, got u1={u1!r}, u2={u2!r}"
        )

    def safe_sqrt(v: float) -> float:
        return math.sqrt(max(v, 0.0))

    x0 = safe_sqrt(a0 * (u1 - a0) * (u2 - a0) / ((a1 - a0) * (a2 - a0)))
    x1 = safe_sqrt(a1 * (a1 - u1) * (u2 - a1) / ((a1 - a0) * (a2 - a1)))
    x2 = safe_sqrt(a2 * (a2 - u1) * (a2 - u2) / ((a2 - a0) * (a2 - a1)))
    s = [1.0 if si >= 0 else -1.0 for si in signs]
    return np.array([s[0] * x0, s[1] * x1, s[2] * x2])


def cartesian_to_elliptic(axes: EllipsoidAxes, p) -> Tuple[float, float]:
    """Confocal coordinates of a point on the ellipsoid.

    The cubic prod(a_i - u) - sum_i p_i^2 prod_{j != i}(a_j - u) has roots
    u = 0 (the surface itself), u1 and u2; deflating the zero root leaves a
    quadratic for (u1, u2).
    """
    a0, a1, a2 = axes.as_tuple()
    p = np.asarray(p, dtype=float)
    residual = p[0] ** 2 / a0 + p[1] ** 2 / a1 + p[2] ** 2 / a2 - 1.0
    if abs(residual) > 1e-8:
        raise ValueError(f"point off the ellipsoid by {residual:.3e}")
    sq = p * p
    others_sum = np.array([a1 + a2, a0 + a2, a0 + a1])
    # -u^3 + alpha u^2 - beta u + gamma with gamma ~ 0 on the surface
    alpha = (a0 + a1 + a2) - float(np.sum(sq))
    beta = (a0 * a1 + a0 * a2 + a1 * a2) - float(np.sum(sq * others_sum))
    disc = alpha * alpha - 4.0 * beta
    if disc < 0.0:
        if disc < -1e-10 * max(alpha * alpha, 1.0):
            raise ValueError(f"root ordering failed, discriminant {disc!r}")
        disc = 0.0
    root = math.sqrt(disc)
    u1 = 0.5 * (alpha - root)
    u2 = 0.5 * (alpha + root)
    u1 = min(max(u1, a0), a1)
    u2 = min(max(u2, a1), a2)
    return u1, u2


# -- chart integrals ---------------------------------------------------------
#
# The generic frame (t0, t1, t2) is either (a0, a1, a2) (first type) or
# (-a2, -a1, -a0) (second type); the integrands carry sqrt(|s|) so both
# frames share one code path.


# chart evaluations run at a tighter tolerance than the package default:
# the profile inversion differentiates them twice more, so their noise floor
# multiplies by 1/h^4 in the Taylor extraction
_CHART_TOL = 1e-14


def _chart_x_frame(t0: float, t1: float, t2: float, u: float) -> float:
    if u - t1 <= 1e-13 * (t2 - t1):
        return 0.0
    r = integrate_singular(
        lambda s: np.sqrt(np.abs(s))
        / (2.0 * np.sqrt((s - t0) * (s - t1) * (t2 - s))),
        t1,
        u,
        tol=_CHART_TOL,
    )
    return r.value


def _chart_y_frame(t0: float, t1: float, t2: float, u: float) -> float:
    if t1 - u <= 1e-13 * (t1 - t0):
        return 0.0
    r = integrate_singular(
        lambda t: np.sqrt(np.abs(t))
        / (2.0 * np.sqrt((t - t0) * (t1 - t) * (t2 - t))),
        u,
        t1,
        tol=_CHART_TOL,
    )
    return r.value


def _frame(axes: EllipsoidAxes, kind: BilliardKind) -> Tuple[float, float, float]:
    a0, a1, a2 = axes.as_tuple()
    if kind is BilliardKind.FIRST:
        return (a0, a1, a2)
    return (-a2, -a1, -a0)


def chart_X(axes: EllipsoidAxes, u2: float) -> float:
    """X(u2) on [a1, a2]; X(a1) = 0, increasing, X(a2) = omega1/4."""
    a0, a1, a2 = axes.as_tuple()
    if not (a1 <= u2 <= a2):
        raise ValueError(f"chart_X requires u2 in [{a1!r}, {a2!r}], got {u2!r}")
    return _chart_x_frame(a0, a1, a2, u2)


def chart_Y(axes: EllipsoidAxes, u1: float) -> float:
    """Y(u1) on [a0, a1]; Y(a1) = 0, decreasing in u1, Y(a0) = omega2/4."""
    a0, a1, a2 = axes.as_tuple()
    if not (a0 <= u1 <= a1):
        raise ValueError(f"chart_Y requires u1 in [{a0!r}, {a1!r}], got {u1!r}")
    return _chart_y_frame(a0, a1, a2, u1)


def build_chart(axes: EllipsoidAxes, kind: BilliardKind = BilliardKind.FIRST) -> EllipticChart:
    t0, t1, t2 = _frame(axes, kind)
    return EllipticChart(
        axes=axes,
        kind=kind,
        quarter_period_x=_chart_x_frame(t0, t1, t2, t2),
        quarter_period_y=_chart_y_frame(t0, t1, t2, t0),
    )


class _InversionTable:
    """Monotone seed table for inverting one chart integral on [lo, hi]."""

    def __init__(self, values_of_u, lo: float, hi: float, n: int = 257):
        angles = np.linspace(0.0, 0.5 * math.pi, n)
        self.u = lo + (hi - lo) * np.sin(angles) ** 2
        self.u[0], self.u[-1] = lo, hi
        self.vals = np.array([values_of_u(float(u)) for u in self.u])
        self.fn = values_of_u
        increasing = self.vals[-1] > self.vals[0]
        self.sign = 1.0 if increasing else -1.0

    def invert(self, target: float) -> float:
        v = self.sign * self.vals
        t = self.sign * target
        idx = int(np.searchsorted(v, t))
        idx = min(max(idx, 1), len(v) - 1)
        u_lo, u_hi = self.u[idx - 1], self.u[idx]
        if u_lo == u_hi:
            return float(u_lo)
        g = lambda u: self.fn(u) - target
        g_lo, g_hi = self.vals[idx - 1] - target, self.vals[idx] - target
        if g_lo == 0.0:
            return float(u_lo)
        if g_hi == 0.0:
            return float(u_hi)
        if g_lo * g_hi > 0.0:
            # target at a table edge; widen to the full domain
            return find_root_monotone(g, float(self.u[0]), float(self.u[-1]), tol=1e-15 * (self.u[-1] - self.u[0]))
        # secant within the bracketing cell
        x_lo, x_hi = float(u_lo), float(u_hi)
        f_lo, f_hi = float(g_lo), float(g_hi)
        for _ in range(60):
            if x_hi - x_lo < 1e-15 * max(abs(x_lo), abs(x_hi), 1.0):
                break
            denom = f_hi - f_lo
            x_new = 0.5 * (x_lo + x_hi) if denom == 0.0 else x_lo - f_lo * (x_hi - x_lo) / denom
            if not (x_lo < x_new < x_hi):
                x_new = 0.5 * (x_lo + x_hi)
            f_new = float(g(x_new))
            if f_new == 0.0:
                return x_new
            if f_lo * f_new < 0.0:
                x_hi, f_hi = x_new, f_new
            else:
                x_lo, f_lo = x_new, f_new
        return x_lo if abs(f_lo) <= abs(f_hi) else x_hi


@lru_cache(maxsize=32)
def _chart_tables(axes_tuple: Tuple[float, float, float], kind_value: str):
    axes = EllipsoidAxes(*axes_tuple)
    kind = BilliardKind(kind_value)
    t0, t1, t2 = _frame(axes, kind)
    x_table = _InversionTable(lambda u: _chart_x_frame(t0, t1, t2, u), t1, t2)
    y_table = _InversionTable(lambda u: _chart_y_frame(t0, t1, t2, u), t0, t1)
    quarter_x = float(x_table.vals[-1])
    quarter_y = float(y_table.vals[0]) if y_table.vals[0] > y_table.vals[-1] else float(y_table.vals[-1])
    return x_table, y_table, quarter_x, quarter_y


def chart_profiles(
    axes: EllipsoidAxes, kind: BilliardKind, lam: float
) -> LiouvilleProfile:
    """Profile pair (f, q) = (X^{-1}, Y^{-1}) of the billiard X^lambda.

    The x-period is 4 X(t2) (quarter-domain continued by evenness and the
    half-period symmetry) and N = Y(lambda-in-frame), so that the boundary
    u = lambda sits at y = +-N.
    """
    selector = BilliardSelector(kind, lam)
    _check_selector(axes, selector)
    x_table, y_table, quarter_x, quarter_y = _chart_tables(axes.as_tuple(), kind.value)
    lam_frame = lam if kind is BilliardKind.FIRST else -lam
    t0, t1, t2 = _frame(axes, kind)
    N = _chart_y_frame(t0, t1, t2, lam_frame)
    period = 4.0 * quarter_x

    def fold(x: np.ndarray) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float)) % period
        x = np.where(x > 0.5 * period, period - x, x)
        return np.where(x > quarter_x, 0.5 * period - x, x)

    def f(x):
        xf = np.atleast_1d(fold(x))
        return np.array([x_table.invert(min(v, quarter_x)) for v in xf])

    def q(y):
        ya = np.abs(np.atleast_1d(np.asarray(y, dtype=float)))
        return np.array([y_table.invert(min(v, quarter_y)) for v in ya])

    return LiouvilleProfile(f=f, q=q, period=period, N=N)


# -- closed forms ------------------------------------------------------------


def taylor_closed_form(axes: EllipsoidAxes, kind: BilliardKind) -> TaylorData:
    """Taylor data of f = X^{-1} at the quarter period, in closed form."""
    a0, a1, a2 = axes.as_tuple()
    if kind is BilliardKind.FIRST:
        alpha0 = a2
        alpha1 = -(a2 - a0) * (a2 - a1) / a2
        alpha2 = (a2 - a0) * (a2 - a1) * (a2 * a2 - a0 * a1) / (3.0 * a2 ** 3)
    else:
        alpha0 = -a0
        alpha1 = -(a2 - a0) * (a1 - a0) / a0
        alpha2 = (a2 - a0) * (a1 - a0) * (a2 * a1 - a0 * a0) / (3.0 * a0 ** 3)
    return TaylorData.from_alphas(alpha0, alpha1, alpha2)


def _rotation_integral(axes: EllipsoidAxes, selector: BilliardSelector, tol: float) -> float:
    a0, a1, a2 = axes.as_tuple()
    lam = selector.lam
    if selector.kind is BilliardKind.FIRST:
        f = lambda t: np.sqrt(t) / (np.sqrt((t - a0) * (a1 - t)) * (a2 - t))
        return integrate_singular(f, lam, a1, tol=tol).value
    f = lambda s: np.sqrt(s) / (np.sqrt((a2 - s) * (s - a1)) * (s - a0))
    return integrate_singular(f, a1, lam, tol=tol).value


def rotation_closed_form(
    axes: EllipsoidAxes, selector: BilliardSelector, tol: float = 1e-12
) -> float:
    """dL/dI(0, lambda); strictly negative for both types."""
    _check_selector(axes, selector)
    t = taylor_closed_form(axes, selector.kind)
    return -math.sqrt(-t.alpha1) / math.pi * _rotation_integral(axes, selector, tol)


def twist_closed_form(
    axes: EllipsoidAxes, selector: BilliardSelector, tol: float = 1e-12
) -> float:
    """d2L/dI2(0, lambda); negative for the first type, positive for the second."""
    _check_selector(axes, selector)
    a0, a1, a2 = axes.as_tuple()
    t = taylor_closed_form(axes, selector.kind)
    kappa = t.kappa
    lam = selector.lam
    if selector.kind is BilliardKind.FIRST:
        f = lambda s: (
            np.sqrt(s)
            * (2.0 - kappa * (a2 - s))
            / (np.sqrt((s - a0) * (a1 - s)) * (a2 - s) ** 2)
        )
        integral = integrate_singular(f, lam, a1, tol=tol).value
    else:
        f = lambda s: (
            np.sqrt(s)
            * (2.0 - kappa * (s - a0))
            / (np.sqrt((a2 - s) * (s - a1)) * (s - a0) ** 2)
        )
        integral = integrate_singular(f, a1, lam, tol=tol).value
    return t.alpha1 / (4.0 * math.pi ** 2) * integral


@dataclass(frozen=True)
class SignCertificate:
    """Numeric witnesses of the twist-sign proof for one type."""

    kind: BilliardKind
    vanishing_point: float           # t* (first type) or s* (second type)
    below_a1: bool
    e1_quadrature: Optional[float]   # first type only
    e1_elliptic: Optional[float]
    e1_rel_gap: Optional[float]


def sign_certificate(axes: EllipsoidAxes, kind: BilliardKind) -> SignCertificate:
    """Certify the sign mechanism of the twist for the given type.

    First type: the linear factor 2 - kappa (a2 - t) vanishes at t* < a1 and
    the lambda -> a0+ twist integral is positive, verified against its
    complete-elliptic-integral expression.  Second type: the factor
    kappa (s - a0) - 2 vanishes at s* < a1, making the integrand positive on
    all of (a1, a2).
    """
    a0, a1, a2 = axes.as_tuple()
    if kind is BilliardKind.FIRST:
        t_star = a2 - 2.0 * a2 * (a2 - a0) * (a2 - a1) / (a2 * a2 - a0 * a1)
        if not (t_star < a1):
            raise CertificateError(
                f"vanishing point t*={t_star!r} >= a1={a1!r}"
            )
        kappa = taylor_closed_form(axes, kind).kappa
        quad = integrate_singular(
            lambda t: (
                np.sqrt(t)
                * (2.0 - kappa * (a2 - t))
                / (np.sqrt((t - a0) * (a1 - t)) * (a2 - t) ** 2)
            ),
            a0,
            a1,
        ).value
        k_mod = math.sqrt(1.0 - a0 / a1)
        elliptic = (
            2.0
            * a0
            * math.sqrt(a1)
            / (a2 * (a2 - a0) * (a2 - a1))
            * ((a2 / a0) * elliptic_E(k_mod) - elliptic_K(k_mod))
        )
        rel_gap = abs(quad - elliptic) / abs(elliptic)
        if rel_gap > 1e-8:
            raise CertificateError(
                f"twist integral {quad!r} disagrees with elliptic expression "
                f"{elliptic!r} (relative gap {rel_gap:.3e})"
            )
        if not (quad > 0.0):
            raise CertificateError(f"lambda->a0+ twist integral {quad!r} not positive")
        return SignCertificate(kind, t_star, True, quad, elliptic, rel_gap)

    s_star = a0 + 2.0 * a0 * (a2 - a0) * (a1 - a0) / (a2 * a1 - a0 * a0)
    if not (s_star < a1):
        raise CertificateError(f"vanishing point s*={s_star!r} >= a1={a1!r}")
    kappa = taylor_closed_form(axes, kind).kappa
    samples = np.linspace(a1 + 0.01 * (a2 - a1), a2 - 0.01 * (a2 - a1), 7)
    if not np.all(kappa * (samples - a0) - 2.0 > 0.0):
        raise CertificateError("integrand positivity failed on the sample grid")
    return SignCertificate(kind, s_star, True, None, None, None)


def rotation_bound(axes: EllipsoidAxes, kind: BilliardKind) -> float:
    """Supremum of -dL/dI(0, .) over the type's parameter interval."""
    a0, a1, a2 = axes.as_tuple()
    if kind is BilliardKind.FIRST:
        return math.sqrt(a1 / a2)
    return math.sqrt(a2 * (a2 - a0) / (a0 * (a1 - a0)))


def rotation_lower_bound_at_a2(axes: EllipsoidAxes) -> float:
    """Certified lower bound of -dL/dI(0, a2-) for the second type."""
    a0, a1, a2 = axes.as_tuple()
    return math.sqrt(a1 * (a1 - a0) / (a0 * (a2 - a0)))


@dataclass(frozen=True)
class ExceptionalBilliard:
    lam: float
    target: float     # the resonant value of -dL/dI(0, lambda)
    residual: float   # fractional-part mismatch after re-evaluation


def _frac_distance(rotation: float, target: float) -> float:
    r = (rotation + target) % 1.0
    return min(r, 1.0 - r)


def exceptional_lambdas(
    axes: EllipsoidAxes,
    kind: BilliardKind,
    residual_tol: float = 1e-9,
) -> List[ExceptionalBilliard]:
    """All lambda whose fixed point fails ellipticity or 4-elementarity.

    Solves -dL/dI(0, lambda) = v for every resonant value v (the five
    fractions of the exclusion set shifted by nonnegative integers, plus the
    positive integers themselves) inside the attained range, using the strict
    monotonicity of the rotation in lambda.
    """
    lo, hi = (
        (axes.a0, axes.a1) if kind is BilliardKind.FIRST else (axes.a1, axes.a2)
    )
    shrink = 1e-9 * (hi - lo)
    lam_lo, lam_hi = lo + shrink, hi - shrink

    def neg_rotation(lam: float) -> float:
        return -rotation_closed_form(axes, BilliardSelector(kind, lam), tol=1e-10)

    grid = np.linspace(lam_lo, lam_hi, 17)
    values = [neg_rotation(l) for l in grid]
    diffs = np.diff(values)
    if kind is BilliardKind.FIRST:
        if np.any(diffs > 1e-10):
            raise MonotonicityError(
                "-rotation must decrease strictly in lambda for the first type"
            )
        max_attained = values[0]
    else:
        if np.any(diffs < -1e-10):
            raise MonotonicityError(
                "-rotation must increase strictly in lambda for the second type"
            )
        max_attained = values[-1]

    targets = set()
    for n in range(int(math.floor(max_attained)) + 1):
        for r in RESONANT_FRACTIONS:
            targets.add(n + r)
        if n >= 1:
            targets.add(float(n))
    targets = sorted(v for v in targets if 0.0 < v < max_attained)

    found: List[ExceptionalBilliard] = []
    for v in targets:
        g = lambda lam: neg_rotation(lam) - v
        root = find_root_monotone(g, lam_lo, lam_hi, tol=1e-14 * (hi - lo))
        rot = rotation_closed_form(axes, BilliardSelector(kind, root), tol=1e-12)
        residual = _frac_distance(rot, v)
        if residual >= residual_tol:
            raise MonotonicityError(
                f"resonance solve at target {v!r} re-verified poorly "
                f"(residual {residual:.3e})"
            )
        found.append(ExceptionalBilliard(lam=root, target=v, residual=residual))
    found.sort(key=lambda e: e.lam)
    return found


@dataclass(frozen=True)
class TwistReport:
    selector: BilliardSelector
    taylor: TaylorData
    rotation: float
    twist: float
    classification: FixedPointClass
    rotation_bound: float
    certificate: SignCertificate

    @property
    def certificate_vanishing_point(self) -> float:
        return self.certificate.vanishing_point


def full_report(axes: EllipsoidAxes, selector: BilliardSelector) -> TwistReport:
    """Assemble and cross-validate the invariants of one billiard table."""
    _check_selector(axes, selector)
    taylor = taylor_closed_form(axes, selector.kind)
    rotation = rotation_closed_form(axes, selector)
    twist = twist_closed_form(axes, selector)
    bound = rotation_bound(axes, selector.kind)
    certificate = sign_certificate(axes, selector.kind)

    if not (0.0 < -rotation < bound):
        raise CertificateError(
            f"rotation {rotation!r} outside the certified range (-{bound!r}, 0)"
        )
    expected_sign = -1.0 if selector.kind is BilliardKind.FIRST else 1.0
    if not (twist * expected_sign > 0.0):
        raise CertificateError(
            f"twist {twist!r} has the wrong sign for type {selector.kind.value}"
        )
    return TwistReport(
        selector=selector,
        taylor=taylor,
        rotation=rotation,
        twist=twist,
        classification=classify(rotation, twist),
        rotation_bound=bound,
        certificate=certificate,
    )
