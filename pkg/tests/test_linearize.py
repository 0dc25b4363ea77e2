import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hupconst.forms import ModeExpansion, fullspace
from hupconst.linearize import (
    PROBLEM_FUNCTIONALS,
    DeficitPair,
    ScalingError,
    ScalingTriple,
    additive_at,
    check_scaling,
    deficit_equivalence,
    dilate,
    equivalence_check,
    grid_minimum,
    optimal_lambda,
    random_expansions,
    triple_for,
)
from hupconst.profiles import PolyExpGauss, exp_poly, gauss


@pytest.mark.parametrize("N", range(2, 9))
def test_scaling_triples(N):
    assert check_scaling(ScalingTriple(4 - N, 2 - N, 3 - N)) == 1
    assert check_scaling(triple_for("hydrogen", N)) == 1
    # the product form is unchanged by a common shift of the exponents
    assert check_scaling(ScalingTriple(2 - N, -2 - N, -N)) == 2
    assert check_scaling(triple_for("hup0", N)) == 2


def test_invalid_triples():
    with pytest.raises(ScalingError):
        ScalingTriple(1, 2, 2)
    with pytest.raises(ScalingError):
        check_scaling(ScalingTriple(1, 1, 1))
    with pytest.raises(ValueError):
        triple_for("helium", 3)


def test_optimal_lambda_examples():
    lam, m = optimal_lambda(4, 1, 1)
    assert lam == pytest.approx(0.5, abs=1e-15) and m == pytest.approx(4.0, abs=1e-15)
    lam, m = optimal_lambda(1, 1, 2)
    assert lam == 1.0 and m == 2.0
    lam, m = optimal_lambda(3, 7, 1)
    assert m == pytest.approx(2 * math.sqrt(21), abs=1e-12)
    g_lam, g_min = grid_minimum(3, 7, 1)
    assert abs(g_min - m) <= 1e-10
    assert g_lam == pytest.approx(lam, rel=1e-5)


def test_optimal_lambda_rejects_nonpositive():
    with pytest.raises(ValueError):
        optimal_lambda(0, 1, 1)
    with pytest.raises(ValueError):
        optimal_lambda(1, -1, 1)
    with pytest.raises(ScalingError):
        optimal_lambda(1, 1, 0)


@settings(max_examples=100, deadline=None)
@given(H=st.floats(1e-3, 1e3), U=st.floats(1e-3, 1e3), gamma=st.sampled_from([-2, -1, 0.5, 1, 2, 3]),
       t=st.floats(-3, 3))
def test_am_gm(H, U, gamma, t):
    lam, m = optimal_lambda(H, U, gamma)
    assert lam**gamma * H + lam**-gamma * U == pytest.approx(m, rel=1e-12)
    s = math.exp(t)
    assert s**gamma * H + s**-gamma * U >= m * (1 - 1e-13)


def test_hydrogen_equivalence_at_extremal():
    u = ModeExpansion.single(5, 0, exp_poly([1.0, 1.0], 1.0))
    res = equivalence_check(u, "hydrogen")
    assert res["discrepancy"] <= 1e-9
    assert res["additive_min"] == pytest.approx(6 * res["P"], rel=1e-9)
    assert res["two_sqrt_HU"] == pytest.approx(6 * res["P"], rel=1e-9)


def test_hup0_equivalence_gaussian():
    u = ModeExpansion.single(3, 0, gauss(1.0, 1.0))
    assert equivalence_check(u, "hup0")["discrepancy"] <= 1e-9


def test_hup0_equivalence_mode1():
    u = ModeExpansion.single(2, 1, exp_poly([1.0], 1.0))
    res = equivalence_check(u, "hup0")
    assert res["discrepancy"] <= 1e-8 * (1 + res["two_sqrt_HU"])


def test_additive_form_is_minimal_at_lambda_star():
    u = ModeExpansion(4, ((0, gauss(1.0, 0.5) + gauss(0.3, 2.0)), (1, exp_poly([1.0, 0.5], 1.0))))
    res = equivalence_check(u, "hydrogen")
    lam = res["lambda_star"]
    for f in (0.5, 0.9, 1.1, 2.0):
        assert additive_at(u, "hydrogen", f * lam) >= res["additive_min"] * (1 - 1e-12)


@pytest.mark.parametrize("problem", ["hydrogen", "hup0"])
def test_additive_deficit_is_twice_the_product_deficit(problem):
    for u in random_expansions(10, seed=1):
        mu = (u.dim + 1) / 2 if problem == "hydrogen" else (u.dim + 2) / 2
        add, prod = deficit_equivalence(u, problem, mu)
        assert add == pytest.approx(prod, rel=1e-9, abs=1e-10)


@pytest.mark.parametrize("problem", ["hydrogen", "hup0"])
def test_random_expansions_equivalence(problem):
    for u in random_expansions(20, seed=3):
        res = equivalence_check(u, problem)
        assert res["relative"] <= 1e-8


@settings(max_examples=15, deadline=None)
@given(lam=st.floats(0.2, 5.0), N=st.integers(3, 6), which=st.integers(0, 1), c=st.floats(0.3, 2.0))
def test_scaling_covariance(lam, N, which, c):
    problem = ("hydrogen", "hup0")[which]
    triple = triple_for(problem, N)
    u = ModeExpansion(N, ((0, PolyExpGauss([1.0, 0.0, 0.5], c=c)), (2, gauss(1.0, c))))
    ud = dilate(u, lam)
    for name, a in zip(PROBLEM_FUNCTIONALS[problem], (triple.a1, triple.a2, triple.a3)):
        assert fullspace(ud, name) == pytest.approx(lam**a * fullspace(u, name), rel=1e-9)


def test_deficit_pair_doubles():
    d = DeficitPair(product_constant=2.5, stability_product=0.3)
    assert d.additive_constant == 5.0 and d.stability_additive == 0.6
