"""Command-line front end.

Subcommands: invariants, scan, exceptional, verify, simulate, model-table.
Exit codes: 0 success, 1 usage or validation error, 2 certificate or
verification failure.  Output is byte-deterministic for a fixed
configuration; JSON uses sorted keys, CSV uses 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

from .ellipsoid import (
    AxesError,
    BilliardKind,
    BilliardSelector,
    CertificateError,
    EllipsoidAxes,
    MonotonicityError,
    SelectorError,
    exceptional_lambdas,
    full_report,
    rotation_closed_form,
    rotation_lower_bound_at_a2,
    twist_closed_form,
)
from .liouville import (
    classify,
    model_profile,
    rotation_at_center,
    taylor_from_profile,
    twist_at_center,
)
from .verification import DEFAULT_SEED, run_verification

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CERTIFICATE = 2

_FLOAT_FMT = "%.17g"


class UsageError(ValueError):
    pass


def _parse_axes(text: str) -> EllipsoidAxes:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"--axes wants A0,A1,A2 (squared semi-axes), got {text!r}")
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"--axes values must be numeric: {exc}") from None
    try:
        return EllipsoidAxes(*values)
    except AxesError as exc:
        raise UsageError(str(exc)) from None


def _parse_grid(text: str) -> Tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--lambda-grid wants LO:HI:N, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"--lambda-grid parse failure: {exc}") from None
    if not (lo < hi):
        raise UsageError("--lambda-grid needs LO < HI")
    if not (2 <= n <= 10_000):
        raise UsageError("--lambda-grid size must be in [2, 10000]")
    return lo, hi, n


def _parse_tols(pairs: Optional[Sequence[str]]) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise UsageError(f"--tol wants NAME=VALUE, got {pair!r}")
        name, _, value = pair.partition("=")
        try:
            v = float(value)
        except ValueError:
            raise UsageError(f"--tol value for {name!r} must be numeric") from None
        if not (v > 0.0):
            raise UsageError(f"--tol {name!r} must be positive, got {v!r}")
        out[name] = v
    return out


def _write_output(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _report_payload(axes: EllipsoidAxes, report) -> dict:
    cert = report.certificate
    certificate = {
        "vanishing_point": cert.vanishing_point,
        "below_a1": cert.below_a1,
    }
    if cert.e1_quadrature is not None:
        certificate.update(
            {
                "e1_quadrature": cert.e1_quadrature,
                "e1_elliptic": cert.e1_elliptic,
                "e1_rel_gap": cert.e1_rel_gap,
            }
        )
    return {
        "axes": list(axes.as_tuple()),
        "kind": report.selector.kind.value,
        "lambda": float(report.selector.lam),
        "rotation": float(report.rotation),
        "twist": float(report.twist),
        "alpha0": float(report.taylor.alpha0),
        "alpha1": float(report.taylor.alpha1),
        "alpha2": float(report.taylor.alpha2),
        "kappa": float(report.taylor.kappa),
        "elliptic": report.classification.is_elliptic,
        "four_elementary": report.classification.is_four_elementary,
        "bound": float(report.rotation_bound),
        "certificate": certificate,
    }


def _json_dump(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2)


def cmd_invariants(args) -> int:
    axes = _parse_axes(args.axes)
    kind = BilliardKind.parse(args.type)
    if args.lam is None:
        raise UsageError("invariants needs --lambda")
    selector = BilliardSelector(kind, args.lam)
    report = full_report(axes, selector)
    _write_output(_json_dump(_report_payload(axes, report)), args.out)
    return EXIT_OK


def _scan_point(packed) -> Tuple[float, float, float]:
    a0, a1, a2, kind_value, lam = packed
    axes = EllipsoidAxes(a0, a1, a2)
    sel = BilliardSelector(BilliardKind(kind_value), lam)
    return lam, rotation_closed_form(axes, sel), twist_closed_form(axes, sel)


def cmd_scan(args) -> int:
    axes = _parse_axes(args.axes)
    kind = BilliardKind.parse(args.type)
    if args.lambda_grid is None:
        raise UsageError("scan needs --lambda-grid LO:HI:N")
    lo, hi, n = _parse_grid(args.lambda_grid)
    interval = (axes.a0, axes.a1) if kind is BilliardKind.FIRST else (axes.a1, axes.a2)
    if not (interval[0] < lo and hi < interval[1]):
        raise UsageError(
            f"grid [{lo!r}, {hi!r}] must lie inside the open interval "
            f"({interval[0]!r}, {interval[1]!r}) of type {kind.value}"
        )
    lams = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
    packed = [(axes.a0, axes.a1, axes.a2, kind.value, lam) for lam in lams]
    jobs = args.jobs or os.cpu_count() or 1

    lines = ["lambda,rotation,twist,elliptic,four_elementary"]
    rows: List[Tuple[float, float, float]] = []
    try:
        if jobs > 1 and n >= 16:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for row in pool.map(_scan_point, packed, chunksize=8):
                    rows.append(row)
        else:
            for item in packed:
                rows.append(_scan_point(item))
    finally:
        for lam, rot, twist in rows:
            cls = classify(rot, twist)
            lines.append(
                ",".join(
                    [
                        _FLOAT_FMT % lam,
                        _FLOAT_FMT % rot,
                        _FLOAT_FMT % twist,
                        str(cls.is_elliptic).lower(),
                        str(cls.is_four_elementary).lower(),
                    ]
                )
            )
    neg = [-r for _, r, _ in rows]
    monotone = all(b < a for a, b in zip(neg, neg[1:])) if kind is BilliardKind.FIRST else all(
        b > a for a, b in zip(neg, neg[1:])
    )
    sign = -1.0 if kind is BilliardKind.FIRST else 1.0
    uniform = all(t * sign > 0.0 for _, _, t in rows)
    lines.append(f"# summary: strictly_monotone={str(monotone).lower()},uniform_twist_sign={str(uniform).lower()}")
    _write_output("\n".join(lines) + "\n", args.out)
    if not (monotone and uniform):
        print("scan summary violated monotonicity or sign uniformity", file=sys.stderr)
        return EXIT_CERTIFICATE
    return EXIT_OK


def cmd_exceptional(args) -> int:
    axes = _parse_axes(args.axes)
    kind = BilliardKind.parse(args.type)
    found = exceptional_lambdas(axes, kind)
    payload = [
        {"lambda": e.lam, "target": e.target, "residual": e.residual} for e in found
    ]
    _write_output(_json_dump(payload), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    axes = _parse_axes(args.axes)
    tols = _parse_tols(args.tol)
    results = run_verification(axes, seed=args.seed, tolerances=tols)
    lines = []
    first_failure = None
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{status} {r.name}: {r.detail}")
        if not r.passed and first_failure is None:
            first_failure = r.name
    summary = {
        "axes": list(axes.as_tuple()),
        "checks": [
            {"name": r.name, "passed": r.passed, "detail": r.detail} for r in results
        ],
        "all_passed": first_failure is None,
    }
    _write_output("\n".join(lines) + "\n" + _json_dump(summary), args.out)
    if first_failure is not None:
        print(f"first failing check: {first_failure}", file=sys.stderr)
        return EXIT_CERTIFICATE
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .simulator import BoundaryPhasePoint, trajectory_dump

    axes = _parse_axes(args.axes)
    kind = BilliardKind.parse(args.type)
    if args.lam is None:
        raise UsageError("simulate needs --lambda")
    from .simulator import TangencyError

    selector = BilliardSelector(kind, args.lam)
    if not (-1.0 < args.pt0 < 1.0):
        raise UsageError(f"--pt0 must be in (-1, 1), got {args.pt0!r}")
    if 1.0 - abs(args.pt0) < 1e-5:
        raise TangencyError(
            f"launch with |p_t| = {abs(args.pt0)!r} grazes the boundary; the "
            f"fixed-step integrator is not certified for near-tangent legs"
        )
    if args.bounces < 1:
        raise UsageError("--bounces must be >= 1")
    start = BoundaryPhasePoint(args.s0, args.pt0)
    rows = trajectory_dump(axes, selector, start, args.bounces)
    lines = ["bounce,s,p_t,h"]
    for idx, s, p_t, h in rows:
        lines.append(
            ",".join([str(idx), _FLOAT_FMT % s, _FLOAT_FMT % p_t, _FLOAT_FMT % h])
        )
    _write_output("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_model_table(args) -> int:
    prof = model_profile()
    taylor = taylor_from_profile(prof)
    rotation = rotation_at_center(prof, taylor)
    twist = twist_at_center(prof, taylor)
    rotation_exact = -4.0 * math.log(1.0 + math.sqrt(2.0))
    twist_exact = -2.0 * (math.sqrt(2.0) - math.log(1.0 + math.sqrt(2.0)))
    cls = classify(rotation, twist)
    payload = {
        "profile": "f = sin^2(2 pi x), q = -y^2, N = 1",
        "rotation": rotation,
        "twist": twist,
        "rotation_expected": rotation_exact,
        "twist_expected": twist_exact,
        "rotation_gap": abs(rotation - rotation_exact),
        "twist_gap": abs(twist - twist_exact),
        "alpha0": taylor.alpha0,
        "alpha1": taylor.alpha1,
        "alpha2": taylor.alpha2,
        "kappa": taylor.kappa,
        "elliptic": cls.is_elliptic,
        "four_elementary": cls.is_four_elementary,
    }
    _write_output(_json_dump(payload), args.out)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liouville-billiards",
        description=(
            "Rotation number and twist invariants of confocal billiards on a "
            "triaxial ellipsoid, with certification and an independent "
            "dynamical simulator."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_type=True):
        p.add_argument("--axes", required=True, help="squared semi-axes A0,A1,A2")
        if needs_type:
            p.add_argument("--type", required=True, help="billiard type: I or II")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument(
            "--format",
            choices=("json", "csv"),
            default=None,
            help="output format (subcommands have a natural default)",
        )

    p = sub.add_parser("invariants", help="full twist report for one billiard")
    add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("scan", help="rotation/twist over a lambda grid (CSV)")
    add_common(p)
    p.add_argument("--lambda-grid", default=None, help="LO:HI:N")
    p.add_argument("--jobs", type=int, default=None, help="worker processes")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("exceptional", help="resonant lambda values (JSON)")
    add_common(p)
    p.set_defaults(func=cmd_exceptional)

    p = sub.add_parser("verify", help="run the cross-oracle property suite")
    add_common(p, needs_type=False)
    p.add_argument("--tol", action="append", default=None, help="NAME=VALUE override")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="dump a billiard trajectory (CSV)")
    add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--s0", type=float, default=0.0, help="initial arclength")
    p.add_argument("--pt0", type=float, default=0.0, help="initial tangential momentum")
    p.add_argument("--bounces", type=int, default=100)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "model-table", help="analytic regression table f=sin^2(2 pi x), q=-y^2"
    )
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_model_table)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; remap to the documented code 1
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, SelectorError, AxesError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CertificateError, MonotonicityError) as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except Exception as exc:  # simulator and quadrature failures
        from .quadrature import QuadratureError
        from .simulator import SimulationError

        if isinstance(exc, (SimulationError, QuadratureError)):
            print(f"computation failure: {exc}", file=sys.stderr)
            return EXIT_CERTIFICATE
        raise


if __name__ == "__main__":
    sys.exit(main())
