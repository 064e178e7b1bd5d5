"""Dynamical billiard simulator on the ellipsoid.

Independent of every closed-form path in the package: geodesic legs are
integrated as a constrained second-order ODE (acceleration parallel to the
ellipsoid normal, per-step projection), reflection at the confocal boundary
is elastic, and the boundary return map is expressed in Birkhoff coordinates
(s, p_t) = (arclength along the boundary, tangential momentum).  The
linearization of the squared map P = B^2 at the bouncing-ball fixed point
recovers the rotation number via trace(DP)/2 = cos(2 pi dL/dI(0, lambda)),
which is the fast cross-check against the closed forms.

The only chart knowledge used here is the separation constant

    h = u2 - p1^2 = u1 + p2^2,    p1 = (u2 - u1) dx/dt,  p2 = (u2 - u1) dy/dt,

with x = X(u2), y = Y(u1) evaluated through a trigonometric substitution
that removes the square-root endpoints (a Gauss-Legendre sum, deliberately
a different quadrature than the tanh-sinh route used by the closed forms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .ellipsoid import (
    BilliardKind,
    BilliardSelector,
    EllipsoidAxes,
    cartesian_to_elliptic,
    _check_selector,
)

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap

__all__ = [
    "SimulationError",
    "TangencyError",
    "MaxTimeError",
    "ConstraintDriftError",
    "ChartConsistencyError",
    "PhaseState",
    "BoundaryPhasePoint",
    "LinearizedMap",
    "make_phase_state",
    "validate_phase_state",
    "bouncing_ball_vertex",
    "geodesic_until_boundary",
    "reflect",
    "billiard_map",
    "squared_billiard_map",
    "conserved_h",
    "linearized_P",
    "rotation_action_profile",
    "trajectory_dump",
]


class SimulationError(RuntimeError):
    """Base class for simulator failures."""


class TangencyError(SimulationError):
    """Velocity grazes the boundary (|v . nu| below threshold)."""


class MaxTimeError(SimulationError):
    """Geodesic leg exceeded the allowed flight time."""


class ConstraintDriftError(SimulationError):
    """Phase-state invariants broke beyond tolerance mid-flight."""


class ChartConsistencyError(SimulationError):
    """The two separable evaluations of h disagree (chart or integrator fault)."""


GRAZING_THRESHOLD = 1e-8
_H_DELTA = 1e-6          # time offset for chart-velocity finite differences
_H_AGREE_HARD = 1e-5     # beyond this gap the two h evaluations signal a fault


@dataclass(frozen=True)
class PhaseState:
    position: np.ndarray
    velocity: np.ndarray


@dataclass(frozen=True)
class BoundaryPhasePoint:
    s: float
    p_t: float

    def __post_init__(self):
        if not (-1.0 < self.p_t < 1.0):
            raise ValueError(f"|p_t| must be < 1, got {self.p_t!r}")


@dataclass(frozen=True)
class LinearizedMap:
    m: np.ndarray
    det: float
    trace: float
    fd_disagreement: float


def _surface_residual(axes: EllipsoidAxes, x: np.ndarray) -> float:
    a = np.array(axes.as_tuple())
    return float(np.sum(x * x / a) - 1.0)


def validate_phase_state(axes: EllipsoidAxes, state: PhaseState, tol: float = 1e-10) -> None:
    a = np.array(axes.as_tuple())
    x, v = state.position, state.velocity
    if abs(float(np.sum(x * x / a)) - 1.0) > tol:
        raise ValueError("position off the ellipsoid")
    grad = 2.0 * x / a
    if abs(float(np.dot(v, grad))) / float(np.linalg.norm(grad)) > tol:
        raise ValueError("velocity not tangent to the ellipsoid")
    if abs(float(np.linalg.norm(v)) - 1.0) > tol:
        raise ValueError("velocity not unit length")


def make_phase_state(axes: EllipsoidAxes, position, velocity) -> PhaseState:
    """Project (position, velocity) onto the constraint set and validate."""
    a = np.array(axes.as_tuple())
    x = np.asarray(position, dtype=float)
    x = x / math.sqrt(float(np.sum(x * x / a)))
    v = np.asarray(velocity, dtype=float)
    grad = 2.0 * x / a
    n = grad / np.linalg.norm(grad)
    v = v - np.dot(v, n) * n
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("velocity projects to zero")
    state = PhaseState(position=x, velocity=v / norm)
    validate_phase_state(axes, state)
    return state


# -- geodesic kernel ---------------------------------------------------------


@njit(cache=True)
def _accel(x, v, a):
    num = v[0] * v[0] / a[0] + v[1] * v[1] / a[1] + v[2] * v[2] / a[2]
    den = 2.0 * (
        x[0] * x[0] / (a[0] * a[0])
        + x[1] * x[1] / (a[1] * a[1])
        + x[2] * x[2] / (a[2] * a[2])
    )
    mult = -num / den
    out = np.empty(3)
    out[0] = mult * 2.0 * x[0] / a[0]
    out[1] = mult * 2.0 * x[1] / a[1]
    out[2] = mult * 2.0 * x[2] / a[2]
    return out


@njit(cache=True)
def _rk4_step(x, v, a, h):
    k1x = v
    k1v = _accel(x, v, a)
    x2 = x + 0.5 * h * k1x
    v2 = v + 0.5 * h * k1v
    k2x = v2
    k2v = _accel(x2, v2, a)
    x3 = x + 0.5 * h * k2x
    v3 = v + 0.5 * h * k2v
    k3x = v3
    k3v = _accel(x3, v3, a)
    x4 = x + h * k3x
    v4 = v + h * k3v
    k4x = v4
    k4v = _accel(x4, v4, a)
    xn = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    vn = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return xn, vn


@njit(cache=True)
def _project(x, v, a):
    scale = math.sqrt(x[0] * x[0] / a[0] + x[1] * x[1] / a[1] + x[2] * x[2] / a[2])
    xn = x / scale
    g0 = 2.0 * xn[0] / a[0]
    g1 = 2.0 * xn[1] / a[1]
    g2 = 2.0 * xn[2] / a[2]
    gn = math.sqrt(g0 * g0 + g1 * g1 + g2 * g2)
    n0, n1, n2 = g0 / gn, g1 / gn, g2 / gn
    dot = v[0] * n0 + v[1] * n1 + v[2] * n2
    vn = np.empty(3)
    vn[0] = v[0] - dot * n0
    vn[1] = v[1] - dot * n1
    vn[2] = v[2] - dot * n2
    speed = math.sqrt(vn[0] * vn[0] + vn[1] * vn[1] + vn[2] * vn[2])
    return xn, vn / speed


@njit(cache=True)
def _gval(x, a, lam):
    return (
        x[0] * x[0] / (a[0] - lam)
        + x[1] * x[1] / (a[1] - lam)
        + x[2] * x[2] / (a[2] - lam)
        - 1.0
    )


@njit(cache=True)
def _fly_kernel(a, lam, exit_sign, x0, v0, h, max_steps):
    """Integrate until g_lambda changes to the exterior sign.

    Returns (x, v, elapsed, status): status 0 = on boundary (|g| <= 1e-12),
    1 = max_steps exceeded, 2 = constraint drift.
    """
    x = x0.copy()
    v = v0.copy()
    t = 0.0
    prev_exit = _gval(x, a, lam) * exit_sign
    for step in range(max_steps):
        x_prev = x.copy()
        v_prev = v.copy()
        xn, vn = _rk4_step(x, v, a, h)
        drift = abs(
            xn[0] * xn[0] / a[0] + xn[1] * xn[1] / a[1] + xn[2] * xn[2] / a[2] - 1.0
        )
        if drift > 1e-8:
            return x, v, t, 2
        x, v = _project(xn, vn, a)
        t += h
        exit_val = _gval(x, a, lam) * exit_sign
        if exit_val > 0.0 and (step >= 1 or prev_exit < -1e-12):
            # refine the crossing time within the last step
            dt_lo, dt_hi = 0.0, h
            best_x, best_v, best_dt = x, v, h
            for _ in range(80):
                dt_mid = 0.5 * (dt_lo + dt_hi)
                xm, vm = _rk4_step(x_prev, v_prev, a, dt_mid)
                xm, vm = _project(xm, vm, a)
                gm = _gval(xm, a, lam) * exit_sign
                if abs(gm) <= 1e-13:
                    return xm, vm, t - h + dt_mid, 0
                if gm > 0.0:
                    dt_hi = dt_mid
                    best_x, best_v, best_dt = xm, vm, dt_mid
                else:
                    dt_lo = dt_mid
            if abs(_gval(best_x, a, lam)) <= 1e-12:
                return best_x, best_v, t - h + best_dt, 0
            return best_x, best_v, t - h + best_dt, 3
        prev_exit = exit_val
    return x, v, t, 1


# -- boundary geometry -------------------------------------------------------


class _BoundaryGeometry:
    """Arclength parametrization of the boundary curve of one billiard.

    The boundary projects to an ellipse in the coordinate plane of its type;
    theta is the elliptic angle with theta = 0 at the bouncing-ball vertex,
    s the induced arclength (cached spline), both orientations fixed once.
    """

    N_GRID = 4096

    def __init__(self, axes: EllipsoidAxes, kind: BilliardKind, lam: float):
        self.axes = axes
        self.kind = kind
        self.lam = lam
        a0, a1, a2 = axes.as_tuple()
        if kind is BilliardKind.FIRST:
            self.semi_u = math.sqrt(a1 * (a1 - lam) / (a1 - a0))   # x1 amplitude
            self.semi_w = math.sqrt(a2 * (a2 - lam) / (a2 - a0))   # x2 amplitude
            self.exit_sign = 1.0
        else:
            self.semi_u = math.sqrt(a1 * (lam - a1) / (a2 - a1))   # x1 amplitude
            self.semi_w = math.sqrt(a0 * (lam - a0) / (a2 - a0))   # x0 amplitude
            self.exit_sign = -1.0
        theta = np.linspace(0.0, 2.0 * math.pi, self.N_GRID + 1)
        speed = np.array([np.linalg.norm(self.d_point(t)) for t in theta])
        spline = CubicSpline(theta, speed, bc_type="periodic")
        self._arclength = spline.antiderivative()
        self.total_length = float(self._arclength(2.0 * math.pi))
        self._theta_grid = theta
        self._s_grid = self._arclength(theta)

    # point and derivative on the boundary; builds the third coordinate from
    # the ellipsoid equation (positive root on the component of the table)
    def point(self, theta: float) -> np.ndarray:
        a0, a1, a2 = self.axes.as_tuple()
        if self.kind is BilliardKind.FIRST:
            x1 = self.semi_u * math.cos(theta)
            x2 = self.semi_w * math.sin(theta)
            x0 = math.sqrt(max(a0 * (1.0 - x1 * x1 / a1 - x2 * x2 / a2), 0.0))
            return np.array([x0, x1, x2])
        x1 = self.semi_u * math.cos(theta)
        x0 = self.semi_w * math.sin(theta)
        x2 = math.sqrt(max(a2 * (1.0 - x0 * x0 / a0 - x1 * x1 / a1), 0.0))
        return np.array([x0, x1, x2])

    def d_point(self, theta: float) -> np.ndarray:
        a0, a1, a2 = self.axes.as_tuple()
        if self.kind is BilliardKind.FIRST:
            x1 = self.semi_u * math.cos(theta)
            x2 = self.semi_w * math.sin(theta)
            d1 = -self.semi_u * math.sin(theta)
            d2 = self.semi_w * math.cos(theta)
            x0 = math.sqrt(max(a0 * (1.0 - x1 * x1 / a1 - x2 * x2 / a2), 0.0))
            d0 = -(a0 / x0) * (x1 * d1 / a1 + x2 * d2 / a2)
            return np.array([d0, d1, d2])
        x1 = self.semi_u * math.cos(theta)
        x0 = self.semi_w * math.sin(theta)
        d1 = -self.semi_u * math.sin(theta)
        d0 = self.semi_w * math.cos(theta)
        x2 = math.sqrt(max(a2 * (1.0 - x0 * x0 / a0 - x1 * x1 / a1), 0.0))
        d2 = -(a2 / x2) * (x0 * d0 / a0 + x1 * d1 / a1)
        return np.array([d0, d1, d2])

    def theta_of_point(self, x: np.ndarray) -> float:
        if self.kind is BilliardKind.FIRST:
            return math.atan2(x[2] / self.semi_w, x[1] / self.semi_u)
        return math.atan2(x[0] / self.semi_w, x[1] / self.semi_u)

    def s_of_theta(self, theta: float) -> float:
        theta = theta % (2.0 * math.pi)
        return float(self._arclength(theta))

    def theta_of_s(self, s: float) -> float:
        s = s % self.total_length
        theta = float(np.interp(s, self._s_grid, self._theta_grid))
        for _ in range(8):
            err = float(self._arclength(theta)) - s
            speed = float(np.linalg.norm(self.d_point(theta)))
            step = err / speed
            theta -= step
            if abs(step) < 1e-15:
                break
        return theta

    def wrap_s(self, s: float) -> float:
        s = s % self.total_length
        if s > 0.5 * self.total_length:
            s -= self.total_length
        return s

    def tangent(self, theta: float) -> np.ndarray:
        d = self.d_point(theta)
        return d / np.linalg.norm(d)

    def inward_normal(self, theta: float) -> np.ndarray:
        """Unit vector tangent to the ellipsoid, normal to the boundary,
        pointing into the billiard domain."""
        a = np.array(self.axes.as_tuple())
        x = self.point(theta)
        grad_surface = 2.0 * x / a
        n = grad_surface / np.linalg.norm(grad_surface)
        grad_g = 2.0 * x / (a - self.lam)
        nu = grad_g - np.dot(grad_g, n) * n
        nu = nu / np.linalg.norm(nu)
        # interior has g*exit_sign < 0: flip nu to point that way
        if np.dot(grad_g, nu) * self.exit_sign > 0.0:
            nu = -nu
        return nu

    def step_size(self) -> float:
        a0, a1, a2 = self.axes.as_tuple()
        return 1e-4 * (math.sqrt(a1) + math.sqrt(a2))


@lru_cache(maxsize=64)
def _geometry(axes_tuple, kind_value, lam) -> _BoundaryGeometry:
    return _BoundaryGeometry(EllipsoidAxes(*axes_tuple), BilliardKind(kind_value), lam)


def _geom(axes: EllipsoidAxes, selector: BilliardSelector) -> _BoundaryGeometry:
    _check_selector(axes, selector)
    return _geometry(axes.as_tuple(), selector.kind.value, selector.lam)


def bouncing_ball_vertex(axes: EllipsoidAxes, selector: BilliardSelector) -> np.ndarray:
    """Vertex of the period-two orbit: boundary point in the symmetry plane.

    Solves the 2x2 linear system (ellipsoid and confocal quadric restricted
    to the plane) for the squared coordinates and takes positive roots.
    """
    _check_selector(axes, selector)
    a0, a1, a2 = axes.as_tuple()
    lam = selector.lam
    if selector.kind is BilliardKind.FIRST:
        mat = np.array([[1.0 / a0, 1.0 / a1], [1.0 / (a0 - lam), 1.0 / (a1 - lam)]])
        sq = np.linalg.solve(mat, np.ones(2))
        return np.array([math.sqrt(sq[0]), math.sqrt(sq[1]), 0.0])
    mat = np.array([[1.0 / a1, 1.0 / a2], [1.0 / (a1 - lam), 1.0 / (a2 - lam)]])
    sq = np.linalg.solve(mat, np.ones(2))
    return np.array([0.0, math.sqrt(sq[0]), math.sqrt(sq[1])])


def geodesic_until_boundary(
    axes: EllipsoidAxes,
    selector: BilliardSelector,
    state: PhaseState,
    max_time: float = 200.0,
) -> Tuple[PhaseState, float]:
    """Fly one geodesic leg until the confocal boundary is crossed."""
    geom = _geom(axes, selector)
    a = np.array(axes.as_tuple())
    h = geom.step_size()
    max_steps = int(max_time / h)
    x, v, elapsed, status = _fly_kernel(
        a,
        selector.lam,
        geom.exit_sign,
        np.asarray(state.position, dtype=float),
        np.asarray(state.velocity, dtype=float),
        h,
        max_steps,
    )
    if status == 1:
        raise MaxTimeError(f"no boundary crossing within time {max_time!r}")
    if status == 2:
        raise ConstraintDriftError("surface constraint drift exceeded 1e-8 mid-flight")
    if status == 3:
        raise SimulationError("boundary refinement failed to reach |g| <= 1e-12")
    return PhaseState(position=x, velocity=v), elapsed


def reflect(axes: EllipsoidAxes, selector: BilliardSelector, state: PhaseState) -> PhaseState:
    """Elastic reflection at the boundary: negate the component along the
    in-surface boundary normal."""
    geom = _geom(axes, selector)
    a = np.array(axes.as_tuple())
    x = np.asarray(state.position, dtype=float)
    g_val = _gval(x, a, selector.lam)
    if abs(g_val) > 1e-10:
        raise ValueError(f"state not on the boundary (g = {g_val:.3e})")
    grad_surface = 2.0 * x / a
    n = grad_surface / np.linalg.norm(grad_surface)
    grad_g = 2.0 * x / (a - selector.lam)
    nu = grad_g - np.dot(grad_g, n) * n
    nu = nu / np.linalg.norm(nu)
    v = np.asarray(state.velocity, dtype=float)
    normal_component = float(np.dot(v, nu))
    if abs(normal_component) < GRAZING_THRESHOLD:
        raise TangencyError(
            f"|v . nu| = {abs(normal_component):.3e} below grazing threshold"
        )
    return PhaseState(position=x, velocity=v - 2.0 * normal_component * nu)


def _lift(geom: _BoundaryGeometry, bp: BoundaryPhasePoint) -> PhaseState:
    theta = geom.theta_of_s(bp.s)
    x = geom.point(theta)
    t_hat = geom.tangent(theta)
    nu_in = geom.inward_normal(theta)
    v = bp.p_t * t_hat + math.sqrt(1.0 - bp.p_t * bp.p_t) * nu_in
    return PhaseState(position=x, velocity=v)


def _project_to_boundary_coords(
    geom: _BoundaryGeometry, state: PhaseState
) -> BoundaryPhasePoint:
    theta = geom.theta_of_point(state.position)
    s = geom.wrap_s(geom.s_of_theta(theta))
    p_t = float(np.dot(state.velocity, geom.tangent(theta)))
    p_t = min(max(p_t, -1.0 + 1e-15), 1.0 - 1e-15)
    return BoundaryPhasePoint(s=s, p_t=p_t)


def billiard_map(
    axes: EllipsoidAxes, selector: BilliardSelector, bp: BoundaryPhasePoint
) -> BoundaryPhasePoint:
    """One reflection step B of the billiard in (s, p_t) coordinates."""
    geom = _geom(axes, selector)
    state = _lift(geom, bp)
    arrived, _ = geodesic_until_boundary(axes, selector, state)
    outgoing = reflect(axes, selector, arrived)
    return _project_to_boundary_coords(geom, outgoing)


def squared_billiard_map(
    axes: EllipsoidAxes, selector: BilliardSelector, bp: BoundaryPhasePoint
) -> BoundaryPhasePoint:
    """P = B^2, whose fixed point is the bouncing-ball vertex."""
    return billiard_map(axes, selector, billiard_map(axes, selector, bp))


# -- separation constant -----------------------------------------------------


_GAUSS_N = 64
_GW_NODES, _GW_WEIGHTS = np.polynomial.legendre.leggauss(_GAUSS_N)


def _chart_x_fast(axes: EllipsoidAxes, u2: float) -> float:
    """X(u2) via s = a1 + (a2 - a1) sin^2(psi): smooth Gauss-Legendre sum."""
    a0, a1, a2 = axes.as_tuple()
    ratio = min(max((u2 - a1) / (a2 - a1), 0.0), 1.0)
    psi2 = math.asin(math.sqrt(ratio))
    mid, half = 0.5 * psi2, 0.5 * psi2
    psi = mid + half * _GW_NODES
    s = a1 + (a2 - a1) * np.sin(psi) ** 2
    return half * float(np.sum(_GW_WEIGHTS * np.sqrt(s / (s - a0))))


def _chart_y_fast(axes: EllipsoidAxes, u1: float) -> float:
    """Y(u1) via t = a0 + (a1 - a0) sin^2(phi)."""
    a0, a1, a2 = axes.as_tuple()
    ratio = min(max((u1 - a0) / (a1 - a0), 0.0), 1.0)
    phi1 = math.asin(math.sqrt(ratio))
    mid = 0.5 * (phi1 + 0.5 * math.pi)
    half = 0.5 * (0.5 * math.pi - phi1)
    phi = mid + half * _GW_NODES
    t = a0 + (a1 - a0) * np.sin(phi) ** 2
    return half * float(np.sum(_GW_WEIGHTS * np.sqrt(t / (a2 - t))))


# Near the chart edges u2 -> a2 (plane x2 = 0) and u1 -> a0 (plane x0 = 0)
# the chart derivatives blow up like 1/sqrt(edge gap), so the absolute ~1e-15
# precision of u from the quadratic formula is amplified catastrophically.
# There the gap eps is recomputed from the position itself (relative
# precision) and the chart value from its sqrt(eps)-complement integral.

_EDGE_FRACTION = 0.05


def _edge_gap_u2(axes: EllipsoidAxes, x: np.ndarray) -> float:
    """eps = a2 - u2, accurate relatively, from x2^2 and the confocal identity."""
    a0, a1, a2 = axes.as_tuple()
    x2sq = x[2] * x[2]
    eps = 0.0
    for _ in range(60):
        new = x2sq / (
            1.0 + x[0] * x[0] / (a2 - a0 - eps) + x[1] * x[1] / (a2 - a1 - eps)
        )
        if abs(new - eps) <= 1e-16 * new:
            return new
        eps = new
    return eps


def _edge_gap_u1(axes: EllipsoidAxes, x: np.ndarray) -> float:
    """eps = u1 - a0, accurate relatively, from x0^2 and the confocal identity."""
    a0, a1, a2 = axes.as_tuple()
    x0sq = x[0] * x[0]
    eps = 0.0
    for _ in range(60):
        new = x0sq / (
            x[1] * x[1] / (a1 - a0 - eps) + x[2] * x[2] / (a2 - a0 - eps) - 1.0
        )
        if abs(new - eps) <= 1e-16 * new:
            return new
        eps = new
    return eps


def _edge_gap_u2_low(axes: EllipsoidAxes, x: np.ndarray) -> float:
    """eps = u2 - a1 from x1^2, on the u2-branch of the plane x1 = 0."""
    a0, a1, a2 = axes.as_tuple()
    x1sq = x[1] * x[1]
    eps = 0.0
    for _ in range(60):
        new = x1sq / (
            x[2] * x[2] / (a2 - a1 - eps) - x[0] * x[0] / (a1 - a0 + eps) - 1.0
        )
        if abs(new - eps) <= 1e-16 * new:
            return new
        eps = new
    return eps


def _edge_gap_u1_high(axes: EllipsoidAxes, x: np.ndarray) -> float:
    """eps = a1 - u1 from x1^2, on the u1-branch of the plane x1 = 0."""
    a0, a1, a2 = axes.as_tuple()
    x1sq = x[1] * x[1]
    eps = 0.0
    for _ in range(60):
        new = x1sq / (
            1.0 + x[0] * x[0] / (a1 - a0 - eps) - x[2] * x[2] / (a2 - a1 + eps)
        )
        if abs(new - eps) <= 1e-16 * new:
            return new
        eps = new
    return eps


def _gauss_half_pi(values_fn) -> float:
    tau = 0.25 * math.pi * (_GW_NODES + 1.0)
    return 0.25 * math.pi * float(np.sum(_GW_WEIGHTS * values_fn(tau)))


def _chart_x_robust(axes: EllipsoidAxes, x: np.ndarray, u2: float) -> float:
    a0, a1, a2 = axes.as_tuple()
    span = a2 - a1
    if a2 - u2 <= _EDGE_FRACTION * span:
        eps = _edge_gap_u2(axes, x)
        # X(a2) - X(a2 - eps) = sqrt(eps) int sqrt(s/((s-a0)(s-a1))) cos,
        # s = a2 - eps sin^2
        comp = math.sqrt(eps) * _gauss_half_pi(
            lambda tau: np.sqrt(
                (a2 - eps * np.sin(tau) ** 2)
                / (
                    (a2 - eps * np.sin(tau) ** 2 - a0)
                    * (a2 - eps * np.sin(tau) ** 2 - a1)
                )
            )
            * np.cos(tau)
        )
        return _chart_x_fast(axes, a2) - comp
    if u2 - a1 <= _EDGE_FRACTION * span:
        eps = _edge_gap_u2_low(axes, x)
        # X(a1 + eps) = sqrt(eps) int sqrt(s/((s-a0)(a2-s))) cos, s = a1 + eps sin^2
        return math.sqrt(eps) * _gauss_half_pi(
            lambda tau: np.sqrt(
                (a1 + eps * np.sin(tau) ** 2)
                / (
                    (a1 + eps * np.sin(tau) ** 2 - a0)
                    * (a2 - a1 - eps * np.sin(tau) ** 2)
                )
            )
            * np.cos(tau)
        )
    return _chart_x_fast(axes, u2)


def _chart_y_robust(axes: EllipsoidAxes, x: np.ndarray, u1: float) -> float:
    a0, a1, a2 = axes.as_tuple()
    span = a1 - a0
    if u1 - a0 <= _EDGE_FRACTION * span:
        eps = _edge_gap_u1(axes, x)
        # Y(a0) - Y(a0 + eps) = sqrt(eps) int sqrt(t/((a1-t)(a2-t))) cos,
        # t = a0 + eps sin^2
        comp = math.sqrt(eps) * _gauss_half_pi(
            lambda tau: np.sqrt(
                (a0 + eps * np.sin(tau) ** 2)
                / (
                    (a1 - a0 - eps * np.sin(tau) ** 2)
                    * (a2 - a0 - eps * np.sin(tau) ** 2)
                )
            )
            * np.cos(tau)
        )
        return _chart_y_fast(axes, a0) - comp
    if a1 - u1 <= _EDGE_FRACTION * span:
        eps = _edge_gap_u1_high(axes, x)
        # Y(a1 - eps) = sqrt(eps) int sqrt(t/((t-a0)(a2-t))) cos, t = a1 - eps sin^2
        return math.sqrt(eps) * _gauss_half_pi(
            lambda tau: np.sqrt(
                (a1 - eps * np.sin(tau) ** 2)
                / (
                    (a1 - eps * np.sin(tau) ** 2 - a0)
                    * (a2 - a1 + eps * np.sin(tau) ** 2)
                )
            )
            * np.cos(tau)
        )
    return _chart_y_fast(axes, u1)


def conserved_h(axes: EllipsoidAxes, state: PhaseState) -> float:
    """Separation constant of the geodesic flow at a phase state.

    Chart velocities come from central finite differences of x = X(u2(t)),
    y = Y(u1(t)) along the geodesic over +-delta; h is evaluated both as
    u2 - p1^2 and u1 + p2^2 and the mean returned.
    """
    a = np.array(axes.as_tuple())
    x0 = np.asarray(state.position, dtype=float)
    v0 = np.asarray(state.velocity, dtype=float)

    def chart_at(dt: float):
        if dt == 0.0:
            xx = x0
        else:
            xn, vn = _rk4_step(x0, v0, a, dt)
            xx, _ = _project(xn, vn, a)
        u1, u2 = cartesian_to_elliptic(axes, xx)
        return u1, u2, _chart_x_robust(axes, xx, u2), _chart_y_robust(axes, xx, u1)

    u1_m, u2_m, x_m, y_m = chart_at(-_H_DELTA)
    u1_0, u2_0, x_0, y_0 = chart_at(0.0)
    u1_p, u2_p, x_p, y_p = chart_at(_H_DELTA)

    def abs_slope(w_m: float, w_0: float, w_p: float) -> float:
        """|dw/dt| by central differences; when the window straddles a chart
        fold (the value has a |t - t*| kink at a symmetry-plane crossing)
        fall back to the steeper one-sided slope."""
        lo, hi = w_0 - w_m, w_p - w_0
        if abs(hi - lo) > 0.5 * max(abs(lo), abs(hi)):
            return max(abs(lo), abs(hi)) / _H_DELTA
        return abs(w_p - w_m) / (2.0 * _H_DELTA)

    conformal = u2_0 - u1_0
    p1 = conformal * abs_slope(x_m, x_0, x_p)
    p2 = conformal * abs_slope(y_m, y_0, y_p)
    h_from_f = u2_0 - p1 * p1
    h_from_q = u1_0 + p2 * p2
    if abs(h_from_f - h_from_q) > _H_AGREE_HARD:
        raise ChartConsistencyError(
            f"h disagreement {abs(h_from_f - h_from_q):.3e} between the two "
            f"separable evaluations"
        )
    return 0.5 * (h_from_f + h_from_q)


# -- linearization and rotation-number estimates ------------------------------


def _fixed_point() -> BoundaryPhasePoint:
    return BoundaryPhasePoint(0.0, 0.0)


def _dP_matrix(axes, selector, e: float) -> np.ndarray:
    cols = []
    for ds, dp in ((e, 0.0), (0.0, e)):
        plus = squared_billiard_map(axes, selector, BoundaryPhasePoint(ds, dp))
        minus = squared_billiard_map(axes, selector, BoundaryPhasePoint(-ds, -dp))
        cols.append([(plus.s - minus.s) / (2.0 * e), (plus.p_t - minus.p_t) / (2.0 * e)])
    return np.array(cols).T


def linearized_P(
    axes: EllipsoidAxes, selector: BilliardSelector, step: float = 1e-5
) -> LinearizedMap:
    """Differential of P = B^2 at the bouncing-ball fixed point by central
    finite differences, with a step-halving consistency diagnostic."""
    if not (step > 0.0):
        raise ValueError("step must be positive")
    m_coarse = _dP_matrix(axes, selector, step)
    m_fine = _dP_matrix(axes, selector, 0.5 * step)
    disagreement = float(np.max(np.abs(m_fine - m_coarse)))
    m = m_fine
    return LinearizedMap(
        m=m,
        det=float(np.linalg.det(m)),
        trace=float(np.trace(m)),
        fd_disagreement=disagreement,
    )


def _eigenframe(m: np.ndarray) -> np.ndarray:
    """Basis (Re v, Im v) of the elliptic eigenvector, as columns."""
    eigvals, eigvecs = np.linalg.eig(m)
    idx = int(np.argmax(np.imag(eigvals)))
    if abs(np.imag(eigvals[idx])) < 1e-12:
        raise SimulationError("linearized map is not elliptic (real eigenvalues)")
    v = eigvecs[:, idx]
    frame = np.column_stack([np.real(v), np.imag(v)])
    return frame


def rotation_action_profile(
    axes: EllipsoidAxes,
    selector: BilliardSelector,
    radii,
    iterations: int = 10000,
) -> List[Tuple[float, float]]:
    """(action, rotation-number) pairs of invariant curves around the fixed
    point; the slope of rotation against action estimates the twist sign.

    Long-running: each radius iterates P ``iterations`` times.
    """
    lin = linearized_P(axes, selector)
    frame = _eigenframe(lin.m)
    frame_inv = np.linalg.inv(frame)
    geom = _geom(axes, selector)
    out: List[Tuple[float, float]] = []
    for radius in radii:
        if not (0.0 < radius < 0.2 * geom.total_length):
            raise ValueError(f"radius {radius!r} out of the perturbative range")
        bp = BoundaryPhasePoint(radius, 0.0)
        pts = np.empty((iterations + 1, 2))
        pts[0] = (bp.s, bp.p_t)
        z_prev = frame_inv @ pts[0]
        angle_prev = math.atan2(z_prev[1], z_prev[0])
        total_turn = 0.0
        for i in range(1, iterations + 1):
            bp = squared_billiard_map(axes, selector, bp)
            pts[i] = (bp.s, bp.p_t)
            if abs(bp.s) > 0.25 * geom.total_length:
                raise SimulationError(
                    f"orbit escaped the elliptic island at radius {radius!r}"
                )
            z = frame_inv @ pts[i]
            angle = math.atan2(z[1], z[0])
            d = angle - angle_prev
            while d > math.pi:
                d -= 2.0 * math.pi
            while d < -math.pi:
                d += 2.0 * math.pi
            total_turn += d
            angle_prev = angle
        if abs(total_turn) < 4.0 * math.pi:
            raise SimulationError("insufficient winding to estimate a rotation number")
        rotation = total_turn / (2.0 * math.pi * iterations)
        # enclosed action: shoelace area of the invariant curve, points
        # ordered by eigenframe angle for star-shapedness
        z_all = (frame_inv @ pts.T).T
        order = np.argsort(np.arctan2(z_all[:, 1], z_all[:, 0]))
        loop = pts[order]
        x, y = loop[:, 0], loop[:, 1]
        area = 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))
        out.append((area, rotation))
    return out


def trajectory_dump(
    axes: EllipsoidAxes,
    selector: BilliardSelector,
    start: BoundaryPhasePoint,
    bounces: int,
) -> List[Tuple[int, float, float, float]]:
    """Rows (bounce index, s, p_t, h) along an orbit of the one-step map B."""
    geom = _geom(axes, selector)
    rows: List[Tuple[int, float, float, float]] = []
    bp = start
    for i in range(bounces + 1):
        state = _lift(geom, bp)
        rows.append((i, bp.s, bp.p_t, conserved_h(axes, state)))
        if i < bounces:
            bp = billiard_map(axes, selector, bp)
    return rows
