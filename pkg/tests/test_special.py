import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hupconst.special import (
    KummerParams,
    decay_exponent,
    kummer_dm,
    kummer_m,
    kummer_ode_residual,
    psi_ode_residual,
    psi_profile,
)


def mp_kummer(b, a, t):
    mpmath.mp.dps = 40
    return float(mpmath.hyp1f1(b, a, t))


def test_value_at_zero():
    assert kummer_m(KummerParams(1.7, 2.3), 0.0) == 1.0


def test_equal_parameters_give_exponential():
    assert kummer_m(KummerParams(2.5, 2.5), -1.0) == pytest.approx(math.exp(-1), rel=1e-14)


def test_closed_form_b1_a2():
    assert kummer_m(KummerParams(1.0, 2.0), -2.0) == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-14)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        KummerParams(1.0, -2.0)
    with pytest.raises(ValueError):
        KummerParams(1.0, 0.0)
    with pytest.raises(ValueError):
        KummerParams(-0.5, 1.0)


@pytest.mark.parametrize("b,a", [(0.5, 1.5), (2.0, 3.0), (2.5, 4.5), (3.7, 3.9), (6.0, 9.5), (1.0, 1.0)])
@pytest.mark.parametrize("t", [-400.0, -120.0, -30.0, -5.0, -0.3, 0.7, 4.0, 25.0])
def test_against_mpmath(b, a, t):
    ref = mp_kummer(b, a, t)
    assert kummer_m(KummerParams(b, a), t) == pytest.approx(ref, rel=1e-11, abs=1e-300)


def test_vectorized_matches_scalar():
    p = KummerParams(2.0, 3.5)
    t = np.linspace(-50, 10, 31)
    vec = kummer_m(p, t)
    assert np.allclose(vec, [kummer_m(p, float(x)) for x in t], rtol=1e-15)


def test_psi_at_origin():
    v, dv, _ = psi_profile(KummerParams(2.0, 3.0)).derivs(np.array([0.0]))
    assert v[0] == 1.0 and dv[0] == 0.0


def test_psi_gaussian_case():
    v = psi_profile(KummerParams(1.5, 1.5))(np.array([2.0]))[0]
    assert v == pytest.approx(math.exp(-2.0), rel=1e-14)


def test_psi_b1_a2():
    v = psi_profile(KummerParams(1.0, 2.0))(np.array([2.0]))[0]
    assert v == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-14)


def test_psi_decay_metadata():
    assert psi_profile(KummerParams(1.5, 2.0)).decay.kind == "algebraic"
    assert psi_profile(KummerParams(1.5, 2.0)).decay.rate == 3.0
    assert psi_profile(KummerParams(2.0, 2.0)).decay.kind == "gauss"


def test_psi_ode_examples():
    assert psi_ode_residual(KummerParams(2.0, 3.0), 0.7) <= 1e-10
    assert psi_ode_residual(KummerParams(1.5, 1.5), 1.0) <= 1e-12
    assert psi_ode_residual(KummerParams(2.5, 3.0), 5.0) <= 1e-8


def test_psi_against_mpmath_derivative():
    p = KummerParams(2.5, 3.0)
    mpmath.mp.dps = 40
    for t in (0.3, 2.0, 5.0, 9.0):
        ref = mpmath.diff(lambda s: mpmath.hyp1f1(2.5, 3.0, -s * s / 2), t)
        _, d1, _ = psi_profile(p).derivs(np.array([t]))
        assert d1[0] == pytest.approx(float(ref), rel=1e-10, abs=1e-14)


def test_decay_examples():
    assert decay_exponent(KummerParams(1.5, 2.0), 20, 400) == pytest.approx(-3.0, rel=0.05)
    assert decay_exponent(KummerParams(1.0, 2.0), 20, 400) == pytest.approx(-2.0, rel=0.05)
    with pytest.raises(ValueError, match="Gaussian"):
        decay_exponent(KummerParams(2.0, 2.0), 20, 400)


def test_decay_requires_enough_points():
    with pytest.raises(ValueError):
        decay_exponent(KummerParams(1.0, 2.0), 20, 400, points=10)


@settings(max_examples=60, deadline=None)
@given(b=st.floats(0.0, 10.0), a=st.floats(0.05, 10.0), t=st.floats(-10.0, 10.0))
def test_kummer_ode(b, a, t):
    if b > a:
        b, a = a, b
    if a <= 0:
        return
    p = KummerParams(b, a)
    assert kummer_ode_residual(p, t) <= 1e-9 * (1 + t * t)


@settings(max_examples=60, deadline=None)
@given(b=st.floats(0.0, 10.0), a=st.floats(0.05, 10.0), t=st.floats(-10.0, 0.0))
def test_bounded_for_negative_argument(b, a, t):
    if b > a:
        b, a = a, b
    if a <= 0:
        return
    assert abs(kummer_m(KummerParams(b, a), t)) <= 1.0 + 1e-14


@settings(max_examples=40, deadline=None)
@given(b=st.floats(0.1, 6.0), a=st.floats(0.5, 8.0), t=st.floats(-5.0, 5.0))
def test_contiguous_derivative_matches_finite_difference(b, a, t):
    p = KummerParams(b, a)
    h = 1e-5
    fd = (kummer_m(p, t + h) - kummer_m(p, t - h)) / (2 * h)
    assert kummer_dm(p, t) == pytest.approx(fd, rel=1e-6, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(b=st.floats(0.0, 10.0), a=st.floats(0.5, 10.0), t=st.floats(-10.0, 10.0))
def test_psi_ode(b, a, t):
    if b > a:
        b, a = a, b
    assert psi_ode_residual(KummerParams(b, a), t) <= 1e-9 * (1 + abs(t) ** 3)
