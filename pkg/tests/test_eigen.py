import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from hupconst.eigen import (
    ConditioningError,
    EmptyProblemError,
    SymMatrix,
    gen_eig_deflated,
    gen_eig_smallest,
    jacobi_eigh,
)


def random_spd(rng, n, cond=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q @ np.diag(np.geomspace(1.0, cond, n)) @ q.T


def sturm_count(d, e, x):
    """Number of eigenvalues of the tridiagonal (d, e) below x."""
    count, q = 0, 1.0
    for i in range(len(d)):
        q = d[i] - x - (e[i - 1] ** 2 / q if i else 0.0)
        if q == 0.0:
            q = 1e-300
        count += q < 0
    return count


def bisect_eigenvalue(d, e, j):
    bound = np.max(np.abs(d)) + 2 * np.max(np.abs(e))
    lo, hi = -bound, bound
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sturm_count(d, e, mid) > j:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("A,B,expected", [
    (np.diag([2.0, 3.0]), np.eye(2), 2.0),
    ([[2.0, 1.0], [1.0, 2.0]], np.eye(2), 1.0),
    (np.diag([4.0, 9.0]), np.diag([2.0, 3.0]), 2.0),
])
def test_smallest_examples(A, B, expected):
    res = gen_eig_smallest(A, B)
    assert res.lambda_min == pytest.approx(expected, abs=1e-13)
    assert res.trusted


def test_deflated_examples():
    assert gen_eig_deflated(np.diag([1.0, 5.0]), np.eye(2), [[1.0, 0.0]]).lambda_min == pytest.approx(5.0, abs=1e-13)
    res = gen_eig_deflated([[2.0, 1.0], [1.0, 2.0]], np.eye(2), [[1.0, 1.0]])
    assert res.lambda_min == pytest.approx(1.0, abs=1e-13)
    assert abs(res.vector[0] + res.vector[1]) <= 1e-12


def test_functional_constraint():
    # v[0] = 0 leaves the lower-right block
    A = np.array([[1.0, 0.2, 0.0], [0.2, 3.0, 0.5], [0.0, 0.5, 4.0]])
    res = gen_eig_deflated(A, np.eye(3), functionals=[[1.0, 0.0, 0.0]])
    assert res.lambda_min == pytest.approx(np.linalg.eigvalsh(A[1:, 1:])[0], abs=1e-12)
    assert abs(res.vector[0]) <= 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_deflated_matches_sampling_oracle(seed):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, 6, 50.0) - 2.0 * np.eye(6)
    B = random_spd(rng, 6, 5.0)
    C = rng.standard_normal((2, 6))
    res = gen_eig_deflated(A, B, C)

    # admissible set: c^T B v = 0, parametrized by a null-space basis
    Z = scipy.linalg.null_space(C @ B)

    def rq(y):
        v = Z @ y
        return (v @ A @ v) / (v @ B @ v)

    Y = rng.standard_normal((1_000_000, Z.shape[1]))
    V = Y @ Z.T
    q = np.einsum("ij,jk,ik->i", V, A, V) / np.einsum("ij,jk,ik->i", V, B, V)
    best = Y[np.argmin(q)]
    assert res.lambda_min <= q.min() + 1e-12
    polished = minimize(rq, best, method="BFGS", options={"gtol": 1e-12}).fun
    assert res.lambda_min == pytest.approx(polished, abs=1e-6)
    assert np.allclose(C @ B @ res.vector, 0.0, atol=1e-10)


def test_jacobi_against_sturm_bisection():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((8, 8))
    a = a + a.T
    # Householder reduction of a symmetric matrix is tridiagonal
    h = scipy.linalg.hessenberg(a)
    d, e = np.diag(h).copy(), np.diag(h, -1).copy()
    ref = [bisect_eigenvalue(d, e, j) for j in range(8)]
    w, V, _ = jacobi_eigh(a)
    assert np.allclose(w, ref, atol=1e-11)
    assert np.allclose(V.T @ V, np.eye(8), atol=1e-12)
    assert np.allclose(a @ V, V * w, atol=1e-11)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 12))
def test_rayleigh_bound(seed, n):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n, 100.0) - 3.0 * np.eye(n)
    B = random_spd(rng, n, 10.0)
    lam = gen_eig_smallest(A, B).lambda_min
    for v in rng.standard_normal((20, n)):
        assert lam <= (v @ A @ v) / (v @ B @ v) + 1e-10 * (1 + abs(lam))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 10))
def test_congruence_invariance(seed, n):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n, 20.0) - np.eye(n)
    B = random_spd(rng, n, 5.0)
    S = random_spd(rng, n, 4.0)
    lam = gen_eig_smallest(A, B).lambda_min
    assert gen_eig_smallest(S.T @ A @ S, S.T @ B @ S).lambda_min == pytest.approx(lam, rel=1e-9, abs=1e-10)


def test_matches_scipy_generalized():
    rng = np.random.default_rng(11)
    A = random_spd(rng, 9, 1e3)
    B = random_spd(rng, 9, 1e2)
    assert gen_eig_smallest(A, B).lambda_min == pytest.approx(scipy.linalg.eigh(A, B, eigvals_only=True)[0], rel=1e-11)


def test_indefinite_b_raises():
    with pytest.raises(ConditioningError):
        gen_eig_smallest(np.eye(2), np.diag([1.0, -1.0]))


def test_empty_problem():
    with pytest.raises(EmptyProblemError):
        gen_eig_deflated(np.eye(2), np.eye(2), [[1.0, 0.0], [0.0, 1.0]])


def test_dependent_constraints():
    with pytest.raises(ValueError):
        gen_eig_deflated(np.eye(3), np.eye(3), [[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])


def test_symmetry_is_enforced():
    with pytest.raises(ValueError):
        SymMatrix([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        SymMatrix([[1.0, np.nan], [np.nan, 1.0]])
