import math

import numpy as np
import pytest

from liouville_billiards.liouville import (
    DegenerateProfileError,
    LiouvilleProfile,
    ProfileError,
    TaylorData,
    action_function,
    classify,
    length_function,
    model_profile,
    rescale_profile,
    rescaled_taylor,
    rotation_at_center,
    taylor_from_profile,
    twist_at_center,
)

ROT_MODEL = -4.0 * math.log(1.0 + math.sqrt(2.0))
TWIST_MODEL = -2.0 * (math.sqrt(2.0) - math.log(1.0 + math.sqrt(2.0)))


@pytest.fixture(scope="module")
def model():
    return model_profile()


@pytest.fixture(scope="module")
def model_taylor(model):
    return taylor_from_profile(model)


def fold_quarter(x, period=1.0):
    """Map x onto [0, period/4] using evenness and the half-period symmetry."""
    x = np.abs(np.asarray(x, dtype=float)) % period
    x = np.where(x > period / 2.0, period - x, x)
    return np.where(x > period / 4.0, period / 2.0 - x, x)


def test_model_taylor(model_taylor):
    t = model_taylor
    assert t.alpha0 == pytest.approx(1.0, abs=1e-14)
    assert t.alpha1 == pytest.approx(-4.0 * math.pi ** 2, abs=1e-9)
    assert t.alpha2 == pytest.approx(16.0 * math.pi ** 4 / 3.0, abs=1e-6)
    assert t.kappa == pytest.approx(1.0, abs=1e-9)


def test_quadratic_profile_has_zero_alpha2():
    prof = LiouvilleProfile(
        f=lambda x: 1.0 - 16.0 * (fold_quarter(x) - 0.25) ** 2,
        q=lambda y: -np.asarray(y, dtype=float) ** 2,
    )
    t = taylor_from_profile(prof)
    assert t.alpha1 == pytest.approx(-16.0, abs=1e-10)
    assert abs(t.alpha2) < 1e-9
    assert abs(t.kappa) < 1e-9


def test_flat_top_profile_raises_degeneracy():
    prof = LiouvilleProfile(
        f=lambda x: 1.0 - 256.0 * (fold_quarter(x) - 0.25) ** 4,
        q=lambda y: -np.asarray(y, dtype=float) ** 2,
    )
    with pytest.raises(DegenerateProfileError):
        taylor_from_profile(prof)


def test_length_model_h1(model):
    # antiderivative of sqrt(1+y^2): (y sqrt(1+y^2) + asinh y)/2
    exact = 2.0 * (math.sqrt(2.0) + math.asinh(1.0))
    assert length_function(model, 1.0) == pytest.approx(exact, abs=1e-10)


def test_length_weak_profile_limit():
    eps = 1e-6
    prof = LiouvilleProfile(
        f=lambda x: np.sin(2.0 * math.pi * np.asarray(x)) ** 2,
        q=lambda y: -eps * np.asarray(y, dtype=float) ** 2,
    )
    assert length_function(prof, 1.0) == pytest.approx(4.0, abs=1e-5)


def test_length_vs_midpoint_oracle(model):
    h = 0.5

    def midpoint(n):
        y = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
        return np.sum(np.sqrt(h + y * y)) * (2.0 / n) * 2.0

    m1, m2 = midpoint(4096), midpoint(8192)
    oracle = (4.0 * m2 - m1) / 3.0
    assert length_function(model, h) == pytest.approx(oracle, abs=1e-8)


def test_length_domain(model):
    with pytest.raises(ValueError):
        length_function(model, 0.0)
    with pytest.raises(ValueError):
        length_function(model, 1.5)


def test_action_zero_at_top(model):
    assert action_function(model, 1.0) == 0.0


def test_action_first_derivative(model):
    # dI/dh(alpha0) = -pi/sqrt(-alpha1) = -1/2 for alpha1 = -4 pi^2
    deltas = [0.02, 0.01, 0.005]
    ests = [-action_function(model, 1.0 - d) / d for d in deltas]
    r1 = [2.0 * ests[i + 1] - ests[i] for i in range(2)]
    extrapolated = (4.0 * r1[1] - r1[0]) / 3.0
    assert extrapolated == pytest.approx(-0.5, abs=1e-4)


def test_action_second_derivative(model):
    # d2I/dh2(alpha0) = 3 pi alpha2 / (4 alpha1^2 sqrt(-alpha1)) = 1/8
    deltas = [0.02, 0.01]
    ests = [
        (
            action_function(model, 1.0)
            - 2.0 * action_function(model, 1.0 - d)
            + action_function(model, 1.0 - 2.0 * d)
        )
        / (d * d)
        for d in deltas
    ]
    extrapolated = 2.0 * ests[1] - ests[0]
    assert extrapolated == pytest.approx(0.125, abs=1e-3)


def test_rotation_model_closed_form(model, model_taylor):
    assert rotation_at_center(model, model_taylor) == pytest.approx(
        ROT_MODEL, abs=1e-8
    )


def test_twist_model_closed_form(model, model_taylor):
    assert twist_at_center(model, model_taylor) == pytest.approx(
        TWIST_MODEL, abs=1e-8
    )


def test_rotation_always_negative(model):
    assert rotation_at_center(model) < 0.0
    narrow = LiouvilleProfile(
        f=lambda x: np.sin(2.0 * math.pi * np.asarray(x)) ** 2,
        q=lambda y: -2.0 * np.asarray(y, dtype=float) ** 2 - 0.1 * np.asarray(y) ** 4,
        N=0.7,
    )
    assert rotation_at_center(narrow) < 0.0


def test_twist_sign_for_zero_kappa():
    prof = LiouvilleProfile(
        f=lambda x: 1.0 - 16.0 * (fold_quarter(x) - 0.25) ** 2,
        q=lambda y: -np.asarray(y, dtype=float) ** 2,
    )
    assert twist_at_center(prof) < 0.0


def test_rotation_length_action_ratio(model, model_taylor):
    # (L(h) - L(alpha0)) / (I(h) - I(alpha0)) -> dL/dI(0) as h -> alpha0
    rot = rotation_at_center(model, model_taylor)
    l_top = length_function(model, 1.0)
    deltas = [0.02, 0.01, 0.005]
    ratios = [
        (length_function(model, 1.0 - d) - l_top) / action_function(model, 1.0 - d)
        for d in deltas
    ]
    r1 = [2.0 * ratios[i + 1] - ratios[i] for i in range(2)]
    extrapolated = (4.0 * r1[1] - r1[0]) / 3.0
    assert extrapolated == pytest.approx(rot, abs=1e-4)


@pytest.mark.parametrize("mu", [0.5, 2.0, 10.0])
def test_scaling_invariance(model, model_taylor, mu):
    rot = rotation_at_center(model, model_taylor)
    twist = twist_at_center(model, model_taylor)
    scaled = rescale_profile(model, mu)
    t_scaled = rescaled_taylor(model_taylor, mu)
    assert rotation_at_center(scaled, t_scaled) == pytest.approx(rot, abs=1e-10)
    assert twist_at_center(scaled, t_scaled) == pytest.approx(twist, abs=1e-10)


@pytest.mark.parametrize("mu", [0.5, 2.0, 10.0])
def test_scaling_invariance_independent_taylor(model, model_taylor, mu):
    # full re-extraction carries the eps/h^4 finite-difference noise floor
    rot = rotation_at_center(model, model_taylor)
    twist = twist_at_center(model, model_taylor)
    scaled = rescale_profile(model, mu)
    assert rotation_at_center(scaled) == pytest.approx(rot, abs=1e-8)
    assert twist_at_center(scaled) == pytest.approx(twist, abs=1e-7)


def test_classify_half_resonance():
    c = classify(-0.5, -1.0)
    assert c.is_elliptic and not c.is_four_elementary and c.is_nondegenerate


def test_classify_model_values():
    c = classify(-3.5254943480774703, -1.0656799508766987)
    assert c.is_elliptic and c.is_four_elementary and c.is_nondegenerate


def test_classify_integer_rotation():
    assert not classify(-1.0, -0.3).is_elliptic
    assert not classify(2.0, 0.4).is_elliptic


def test_classify_integer_shift_invariance():
    for rot in (-0.37, -0.5, 0.123, -2.75):
        base = classify(rot, 1.0)
        for n in (-3, 1, 7):
            shifted = classify(rot + n, 1.0)
            assert shifted.is_elliptic == base.is_elliptic
            assert shifted.is_four_elementary == base.is_four_elementary


def test_classify_degenerate_twist():
    assert not classify(-0.37, 0.0).is_nondegenerate


def test_taylor_requires_negative_alpha1():
    with pytest.raises(DegenerateProfileError):
        TaylorData.from_alphas(1.0, 0.5, 0.1)


def test_profile_rejects_mismatched_offset():
    with pytest.raises(ProfileError):
        LiouvilleProfile(
            f=lambda x: np.sin(2.0 * math.pi * np.asarray(x)) ** 2 + 1.0,
            q=lambda y: -np.asarray(y, dtype=float) ** 2,
        )


def test_profile_rejects_positive_q():
    with pytest.raises(ProfileError):
        LiouvilleProfile(
            f=lambda x: np.sin(2.0 * math.pi * np.asarray(x)) ** 2,
            q=lambda y: np.asarray(y, dtype=float) ** 2,
        )


def test_profile_rejects_flat_q_origin():
    with pytest.raises(ProfileError):
        LiouvilleProfile(
            f=lambda x: np.sin(2.0 * math.pi * np.asarray(x)) ** 2,
            q=lambda y: -np.asarray(y, dtype=float) ** 4,
        )


def test_profile_rejects_odd_f():
    with pytest.raises(ProfileError):
        LiouvilleProfile(
            f=lambda x: np.sin(2.0 * math.pi * np.asarray(x)) ** 2
            + 0.05 * np.sin(2.0 * math.pi * np.asarray(x)),
            q=lambda y: -np.asarray(y, dtype=float) ** 2,
        )
