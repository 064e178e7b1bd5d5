import json
import math

import pytest

from liouville_billiards.cli import main

AX = "1,2,3"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_invariants_first_type(capsys):
    code, out, _ = run_cli(
        capsys, "invariants", "--axes", AX, "--type", "I", "--lambda", "1.5"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["twist"] < 0.0
    assert payload["rotation"] < 0.0
    assert payload["kind"] == "I"
    expected_keys = {
        "axes", "kind", "lambda", "rotation", "twist", "alpha0", "alpha1",
        "alpha2", "kappa", "elliptic", "four_elementary", "bound", "certificate",
    }
    assert expected_keys <= set(payload)


def test_invariants_lambda_out_of_range(capsys):
    code, _, err = run_cli(
        capsys, "invariants", "--axes", AX, "--type", "I", "--lambda", "2.5"
    )
    assert code == 1
    assert "lambda" in err


def test_invariants_second_type(capsys):
    code, out, _ = run_cli(
        capsys, "invariants", "--axes", AX, "--type", "II", "--lambda", "2.5"
    )
    assert code == 0
    assert json.loads(out)["twist"] > 0.0


def test_invariants_json_roundtrip_idempotent(capsys):
    code, out, _ = run_cli(
        capsys, "invariants", "--axes", AX, "--type", "I", "--lambda", "1.5"
    )
    assert code == 0
    assert json.dumps(json.loads(out), sort_keys=True, indent=2) == out.strip()


def test_invariants_deterministic(tmp_path, capsys):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    for p in (p1, p2):
        code, _, _ = run_cli(
            capsys, "invariants", "--axes", AX, "--type", "I",
            "--lambda", "1.5", "--out", str(p),
        )
        assert code == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_scan_fifty_points(capsys):
    code, out, _ = run_cli(
        capsys, "scan", "--axes", AX, "--type", "I",
        "--lambda-grid", "1.02:1.98:50", "--jobs", "1",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "lambda,rotation,twist,elliptic,four_elementary"
    assert lines[-1].startswith("# summary: strictly_monotone=true,uniform_twist_sign=true")
    rows = [line.split(",") for line in lines[1:-1]]
    assert len(rows) == 50
    rotations = [float(r[1]) for r in rows]
    twists = [float(r[2]) for r in rows]
    assert all(t < 0.0 for t in twists)
    neg = [-r for r in rotations]
    assert all(b < a for a, b in zip(neg, neg[1:]))


def test_scan_two_point_grid(capsys):
    code, out, _ = run_cli(
        capsys, "scan", "--axes", AX, "--type", "II",
        "--lambda-grid", "2.3:2.7:2", "--jobs", "1",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 4  # header + 2 rows + summary


def test_scan_parallel_pool(capsys):
    code, out, _ = run_cli(
        capsys, "scan", "--axes", AX, "--type", "I",
        "--lambda-grid", "1.1:1.9:16", "--jobs", "2",
    )
    assert code == 0
    assert len(out.strip().splitlines()) == 18


def test_scan_grid_validation(capsys):
    code, _, err = run_cli(
        capsys, "scan", "--axes", AX, "--type", "I", "--lambda-grid", "0.5:1.9:10"
    )
    assert code == 1
    code, _, _ = run_cli(
        capsys, "scan", "--axes", AX, "--type", "I", "--lambda-grid", "1.1:1.9:1"
    )
    assert code == 1


def test_exceptional_empty(capsys):
    code, out, _ = run_cli(
        capsys, "exceptional", "--axes", "1,1.1,20", "--type", "I"
    )
    assert code == 0
    assert json.loads(out) == []


def test_exceptional_standard_axes(capsys):
    code, out, _ = run_cli(capsys, "exceptional", "--axes", AX, "--type", "I")
    assert code == 0
    entries = json.loads(out)
    assert 0 < len(entries) <= 5
    for entry in entries:
        assert entry["residual"] < 1e-9
        assert 1.0 < entry["lambda"] < 2.0


def test_verify_negative_tolerance(capsys):
    code, _, err = run_cli(capsys, "verify", "--axes", AX, "--tol", "quadrature=-1")
    assert code == 1


def test_verify_degenerate_axes(capsys):
    code, _, err = run_cli(capsys, "verify", "--axes", "1,2,2")
    assert code == 1
    assert "a0 < a1 < a2" in err


def test_verify_full_suite(capsys):
    code, out, _ = run_cli(capsys, "verify", "--axes", AX)
    assert code == 0
    assert "FAIL" not in out
    summary = json.loads(out[out.index("{"):])
    assert summary["all_passed"] is True
    assert len(summary["checks"]) >= 8


def test_simulate_fixed_point(capsys):
    code, out, _ = run_cli(
        capsys, "simulate", "--axes", AX, "--type", "I", "--lambda", "1.5",
        "--bounces", "20",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "bounce,s,p_t,h"
    assert len(lines) == 22
    # the single-bounce map alternates between the two vertices of the
    # period-two orbit: s = 0 and s = L/2
    half_length = float(lines[2].split(",")[1])
    assert half_length > 1.0
    for line in lines[1:]:
        _, s, p_t, h = line.split(",")
        assert min(abs(float(s)), abs(abs(float(s)) - half_length)) < 1e-8
        assert abs(float(p_t)) < 1e-8
        assert abs(float(h) - 3.0) < 1e-6


def test_simulate_grazing_error(capsys):
    code, _, err = run_cli(
        capsys, "simulate", "--axes", AX, "--type", "I", "--lambda", "1.5",
        "--pt0", "0.999999", "--bounces", "3",
    )
    assert code == 2
    assert "graz" in err.lower()


def test_model_table(capsys):
    code, out, _ = run_cli(capsys, "model-table")
    assert code == 0
    payload = json.loads(out)
    assert payload["rotation_gap"] < 1e-8
    assert payload["twist_gap"] < 1e-8
    assert payload["rotation_expected"] == pytest.approx(
        -4.0 * math.log(1.0 + math.sqrt(2.0))
    )


def test_unknown_type_rejected(capsys):
    code, _, _ = run_cli(
        capsys, "invariants", "--axes", AX, "--type", "III", "--lambda", "1.5"
    )
    assert code == 1
