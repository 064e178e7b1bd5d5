"""Cross-oracle verification suite.

Each check pits two independent computational routes against each other:
closed forms vs the generic profile machinery, analytic elliptic-integral
identities vs direct quadrature, and the dynamical simulator vs the formula
for the rotation number.  The CLI ``verify`` subcommand runs the whole list
and reports one pass/fail line per check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .ellipsoid import (
    BilliardKind,
    BilliardSelector,
    EllipsoidAxes,
    chart_profiles,
    rotation_closed_form,
    sign_certificate,
    taylor_closed_form,
    twist_closed_form,
)
from .liouville import (
    model_profile,
    rescale_profile,
    rescaled_taylor,
    rotation_at_center,
    taylor_from_profile,
    twist_at_center,
)
from .special_functions import elliptic_K, zeta_Z

__all__ = ["CheckResult", "run_verification"]

DEFAULT_SEED = 20250810


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def _mid_selector(axes: EllipsoidAxes, kind: BilliardKind) -> BilliardSelector:
    lo, hi = (axes.a0, axes.a1) if kind is BilliardKind.FIRST else (axes.a1, axes.a2)
    return BilliardSelector(kind, lo + 0.5 * (hi - lo))


def check_two_path_taylor(axes: EllipsoidAxes, tol: float = 1e-5) -> List[CheckResult]:
    out = []
    for kind in (BilliardKind.FIRST, BilliardKind.SECOND):
        sel = _mid_selector(axes, kind)
        fd = taylor_from_profile(chart_profiles(axes, kind, sel.lam))
        cf = taylor_closed_form(axes, kind)
        gap = max(
            abs(fd.alpha0 - cf.alpha0),
            abs(fd.alpha1 - cf.alpha1),
            abs(fd.alpha2 - cf.alpha2),
            abs(fd.kappa - cf.kappa),
        )
        out.append(
            _check(
                f"two_path_taylor_{kind.value}",
                gap < tol,
                f"max componentwise gap {gap:.3e} (tol {tol:g})",
            )
        )
    return out


def check_two_path_invariants(axes: EllipsoidAxes, tol: float = 1e-6) -> List[CheckResult]:
    out = []
    for kind in (BilliardKind.FIRST, BilliardKind.SECOND):
        sel = _mid_selector(axes, kind)
        prof = chart_profiles(axes, kind, sel.lam)
        taylor = taylor_from_profile(prof)
        rot_gap = abs(rotation_at_center(prof, taylor) - rotation_closed_form(axes, sel))
        twist_gap = abs(twist_at_center(prof, taylor) - twist_closed_form(axes, sel))
        out.append(
            _check(
                f"two_path_invariants_{kind.value}",
                rot_gap < tol and twist_gap < tol,
                f"rotation gap {rot_gap:.3e}, twist gap {twist_gap:.3e} (tol {tol:g})",
            )
        )
    return out


def check_simulator_trace(axes: EllipsoidAxes, tol: float = 1e-4) -> List[CheckResult]:
    from .simulator import linearized_P

    out = []
    for kind in (BilliardKind.FIRST, BilliardKind.SECOND):
        sel = _mid_selector(axes, kind)
        lin = linearized_P(axes, sel)
        rot = rotation_closed_form(axes, sel)
        trace_gap = abs(lin.trace / 2.0 - math.cos(2.0 * math.pi * rot))
        det_gap = abs(lin.det - 1.0)
        out.append(
            _check(
                f"simulator_trace_{kind.value}",
                trace_gap < tol and det_gap < 1e-6,
                f"trace identity gap {trace_gap:.3e}, |det-1| {det_gap:.3e}",
            )
        )
    return out


def check_e1_certificate(axes: EllipsoidAxes) -> List[CheckResult]:
    cert = sign_certificate(axes, BilliardKind.FIRST)
    cert2 = sign_certificate(axes, BilliardKind.SECOND)
    return [
        _check(
            "e1_certificate",
            cert.e1_rel_gap < 1e-8 and cert.below_a1 and cert2.below_a1,
            f"E1 relative gap {cert.e1_rel_gap:.3e}, t*={cert.vanishing_point:.6g}, "
            f"s*={cert2.vanishing_point:.6g}",
        )
    ]


def check_z_identity(tol: float = 1e-8) -> List[CheckResult]:
    worst = 0.0
    positive = True
    for k in np.linspace(0.02, 0.999, 20):
        z = zeta_Z(k)
        positive = positive and z > 0.0
        h0 = min(1e-3, 0.05 * (1.0 - k))
        steps = [h0 * 2.0 ** -j for j in range(5)]
        row = [(elliptic_K(k + h) - elliptic_K(k - h)) / (2.0 * h) for h in steps]
        table = [[v] for v in row]
        for j in range(1, 5):
            fac = 4.0 ** j
            for i in range(5 - j):
                table[i].append(
                    (fac * table[i + 1][j - 1] - table[i][j - 1]) / (fac - 1.0)
                )
        gaps = [abs(table[0][j] - table[0][j - 1]) for j in range(1, 5)]
        dk = table[0][int(np.argmin(gaps)) + 1]
        worst = max(worst, abs(z - k * dk))
    return [
        _check(
            "z_identity",
            worst < tol and positive,
            f"max |Z - k dK/dk| = {worst:.3e} on 20-point grid, positivity {positive}",
        )
    ]


def check_scaling_invariance(tol: float = 1e-10) -> List[CheckResult]:
    prof = model_profile()
    taylor = taylor_from_profile(prof)
    rot = rotation_at_center(prof, taylor)
    twist = twist_at_center(prof, taylor)
    worst = 0.0
    for mu in (0.5, 2.0, 10.0):
        scaled = rescale_profile(prof, mu)
        t_mu = rescaled_taylor(taylor, mu)
        worst = max(
            worst,
            abs(rotation_at_center(scaled, t_mu) - rot),
            abs(twist_at_center(scaled, t_mu) - twist),
        )
    return [
        _check(
            "scaling_invariance",
            worst < tol,
            f"max invariant gap {worst:.3e} over mu in (0.5, 2, 10)",
        )
    ]


def check_model_table(tol: float = 1e-8) -> List[CheckResult]:
    prof = model_profile()
    taylor = taylor_from_profile(prof)
    rot_gap = abs(
        rotation_at_center(prof, taylor) + 4.0 * math.log(1.0 + math.sqrt(2.0))
    )
    twist_gap = abs(
        twist_at_center(prof, taylor)
        + 2.0 * (math.sqrt(2.0) - math.log(1.0 + math.sqrt(2.0)))
    )
    return [
        _check(
            "model_table",
            rot_gap < tol and twist_gap < tol,
            f"rotation gap {rot_gap:.3e}, twist gap {twist_gap:.3e} (tol {tol:g})",
        )
    ]


def check_simulator_conservation(
    axes: EllipsoidAxes, seed: int, bounces: int = 200
) -> List[CheckResult]:
    from .simulator import BoundaryPhasePoint, trajectory_dump

    rng = np.random.default_rng(seed)
    out = []
    for kind in (BilliardKind.FIRST, BilliardKind.SECOND):
        sel = _mid_selector(axes, kind)
        worst = 0.0
        for _ in range(2):
            bp = BoundaryPhasePoint(
                float(rng.uniform(-0.2, 0.2)), float(rng.uniform(-0.3, 0.3))
            )
            hs = np.array([r[3] for r in trajectory_dump(axes, sel, bp, bounces)])
            worst = max(worst, float(hs.max() - hs.min()))
        out.append(
            _check(
                f"simulator_h_conservation_{kind.value}",
                worst < 1e-7,
                f"max h spread {worst:.3e} over {bounces} bounces (seeded ICs)",
            )
        )
    return out


def run_verification(
    axes: EllipsoidAxes,
    seed: int = DEFAULT_SEED,
    tolerances: Optional[Dict[str, float]] = None,
) -> List[CheckResult]:
    """Run the full cross-oracle suite; deterministic for a fixed seed."""
    tolerances = tolerances or {}
    results: List[CheckResult] = []
    results += check_two_path_taylor(axes, tolerances.get("two_path_taylor", 1e-5))
    results += check_two_path_invariants(
        axes, tolerances.get("two_path_invariants", 1e-6)
    )
    results += check_simulator_trace(axes, tolerances.get("simulator_trace", 1e-4))
    results += check_e1_certificate(axes)
    results += check_z_identity(tolerances.get("z_identity", 1e-8))
    results += check_scaling_invariance(tolerances.get("scaling_invariance", 1e-10))
    results += check_model_table(tolerances.get("model_table", 1e-8))
    results += check_simulator_conservation(axes, seed)
    return results
