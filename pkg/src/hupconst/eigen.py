"""Smallest eigenpair of a symmetric-definite pencil A v = lam B v.

B is diagonally equilibrated and Cholesky-factored (with jitter on failure),
the reduced symmetric matrix L^{-1} A L^{-T} is diagonalized by a cyclic
Jacobi method, and constraints are handled by restricting to an orthonormal
complement in the reduced coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular

__all__ = [
    "SymMatrix",
    "GeneralizedEigenResult",
    "ConditioningError",
    "ConvergenceError",
    "EmptyProblemError",
    "jacobi_eigh",
    "gen_eig_smallest",
    "gen_eig_deflated",
    "B_CONDITION_CUTOFF",
]

B_CONDITION_CUTOFF = 1e12
RESIDUAL_CUTOFF = 1e-8
_MAX_SWEEPS = 50


class ConditioningError(np.linalg.LinAlgError):
    pass


class ConvergenceError(ArithmeticError):
    """Iteration failed to converge; ``best`` carries the last estimate."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class EmptyProblemError(ValueError):
    pass


class SymMatrix(np.ndarray):
    """A finite symmetric matrix; symmetry is enforced on construction."""

    def __new__(cls, data, *, rtol: float = 1e-10):
        a = np.array(data, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        scale = max(np.max(np.abs(a)), np.finfo(float).tiny) if a.size else 1.0
        if a.size and np.max(np.abs(a - a.T)) > rtol * scale:
            raise ValueError("matrix is not symmetric")
        return (0.5 * (a + a.T)).view(cls)

    @property
    def order(self) -> int:
        return self.shape[0]


@dataclass(frozen=True)
class GeneralizedEigenResult:
    lambda_min: float
    vector: np.ndarray
    residual: float
    b_condition: float
    jitter: float = 0.0
    sweeps: int = 0

    @property
    def trusted(self) -> bool:
        scale = max(1.0, abs(self.lambda_min))
        return self.b_condition <= B_CONDITION_CUTOFF and self.residual <= RESIDUAL_CUTOFF * scale


def _round_robin(n):
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        if pairs:
            rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(a, max_sweeps: int = _MAX_SWEEPS):
    """Eigenvalues (ascending) and eigenvectors of a symmetric matrix.

    Each sweep visits every off-diagonal pair once; pairs are grouped into
    rounds of disjoint rotations that are applied together.  A pair is left
    alone once |a_pq| is below rounding relative to sqrt(|a_pp a_qq|), and the
    iteration stops after a sweep with no rotation.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return np.diag(a).copy(), v, 0
    rounds = _round_robin(n)
    tiny = np.finfo(float).tiny
    eps = np.finfo(float).eps
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p, q in rounds:
            apq = a[p, q]
            app, aqq = a[p, p], a[q, q]
            active = np.abs(apq) > eps * np.sqrt(np.abs(app * aqq)) + tiny
            if not active.any():
                continue
            rotated = True
            p, q, apq, app, aqq = p[active], q[active], apq[active], app[active], aqq[active]
            theta = (aqq - app) / (2.0 * apq)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.hypot(t, 1.0)
            s = t * c
            # columns, then rows: A <- J^T A J
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            ap, aq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
        if not rotated:
            break
    else:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps",
                               best=np.sort(np.diag(a)))
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order], sweep


def _equilibrated_cholesky(B):
    d = np.diag(B).copy()
    if np.any(d <= 0):
        raise ConditioningError("B has a nonpositive diagonal entry")
    s = 1.0 / np.sqrt(d)
    Bs = B * np.outer(s, s)
    n = Bs.shape[0]
    jitter = 0.0
    for attempt in range(4):
        try:
            L = cholesky(Bs + jitter * np.eye(n), lower=True)
            break
        except LinAlgError:
            jitter = 1e-14 * np.trace(Bs) / n if attempt == 0 else jitter * 100.0
    else:
        raise ConditioningError("B is not positive definite even after jitter")
    cond = float(np.linalg.cond(Bs))
    return s, L, jitter, cond


def _solve(A, B, complement_of=None, functionals=None):
    A = SymMatrix(A)
    B = SymMatrix(B)
    if A.shape != B.shape:
        raise ValueError("A and B must have the same order")
    s, L, jitter, cond = _equilibrated_cholesky(np.asarray(B))
    As = np.asarray(A) * np.outer(s, s)
    Linv_A = solve_triangular(L, As, lower=True)
    C = solve_triangular(L, Linv_A.T, lower=True)
    C = 0.5 * (C + C.T)
    n = C.shape[0]
    Z = None
    cols = []
    if complement_of is not None:
        # c^T B v = 0  <=>  (L^T S^{-1} c)^T y = 0 with y = L^T S^{-1} v
        for c in complement_of:
            cols.append(L.T @ (np.asarray(c, dtype=float) / s))
    if functionals is not None:
        # g^T v = 0  <=>  (L^{-1} S g)^T y = 0
        for g in functionals:
            cols.append(solve_triangular(L, s * np.asarray(g, dtype=float), lower=True))
    if cols:
        G = np.column_stack(cols)
        Qf, R = np.linalg.qr(G, mode="complete")
        rank = int(np.sum(np.abs(np.diag(R)) > 1e-12 * np.max(np.abs(np.diag(R)))))
        if rank < G.shape[1]:
            raise ValueError("constraints are linearly dependent")
        if rank >= n:
            raise EmptyProblemError("constraints leave no admissible directions")
        Z = Qf[:, rank:]
        C = Z.T @ C @ Z
        C = 0.5 * (C + C.T)
    w, V, sweeps = jacobi_eigh(C)
    y = V[:, 0]
    if Z is not None:
        y = Z @ y
    v = s * solve_triangular(L.T, y, lower=False)
    Ao, Bo = np.asarray(A), np.asarray(B)
    Bv = Bo @ v
    v = v / np.sqrt(v @ Bv)
    Bv = Bo @ v
    lam = float(w[0])
    res_vec = Ao @ v - lam * Bv
    if Z is None:
        residual = float(np.linalg.norm(res_vec) / np.linalg.norm(Bv))
    else:
        # a restricted problem is only stationary within the admissible subspace;
        # measure the reduced-coordinate residual (the reduced Bv has unit norm)
        residual = float(np.linalg.norm(Z.T @ solve_triangular(L, s * res_vec, lower=True)))
    return GeneralizedEigenResult(lam, v, residual, cond, jitter, sweeps)


def gen_eig_smallest(A, B) -> GeneralizedEigenResult:
    """Smallest eigenpair of A v = lam B v.

    >>> round(gen_eig_smallest([[4, 0], [0, 9]], [[2, 0], [0, 3]]).lambda_min, 12)
    2.0
    """
    return _solve(A, B)


def gen_eig_deflated(A, B, constraints: Sequence[Sequence[float]] = (),
                     functionals: Sequence[Sequence[float]] = ()) -> GeneralizedEigenResult:
    """Smallest eigenpair on {v : c^T B v = 0 for c in constraints, g^T v = 0 for g in functionals}."""
    if not len(constraints) and not len(functionals):
        return _solve(A, B)
    return _solve(A, B, complement_of=list(constraints) or None, functionals=list(functionals) or None)
