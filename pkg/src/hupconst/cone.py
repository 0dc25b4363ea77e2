"""Distances to cones that are finite unions of subspaces, and to the
Gaussian cone {a e^{-b r^2}} in the gradient inner product.

The gradient inner product of two mode expansions is the sum over modes of
int r^{N+2k-1} v_k' w_k' dr, so modes are mutually orthogonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .forms import ModeExpansion, eval_form, make_form
from .profiles import Combination, gauss
from .quad import DEFAULT_QUAD, QuadratureConfig, adapted_rule

__all__ = [
    "Cone",
    "dist_to_cone",
    "dist_to_norm_sphere",
    "sphere_vs_cone_check",
    "random_cone",
    "grad_norm_sq",
    "gaussian_cone_distance",
    "sphere_slice_distance",
]


@dataclass(frozen=True)
class Cone:
    """Union of linear subspaces of R^d, each given by an orthonormal basis."""

    dim: int
    components: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("a cone needs at least one component")
        comps = []
        for c in self.components:
            c = np.atleast_2d(np.asarray(c, dtype=float))
            if c.shape[1] != self.dim:
                raise ValueError("component vectors must live in R^dim")
            if not np.allclose(c @ c.T, np.eye(c.shape[0]), atol=1e-10):
                raise ValueError("component bases must be orthonormal")
            comps.append(c)
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def from_spans(cls, dim: int, spans: Sequence[Sequence[Sequence[float]]]) -> "Cone":
        """Orthonormalize arbitrary spanning sets."""
        comps = []
        for span in spans:
            q, _ = np.linalg.qr(np.atleast_2d(np.asarray(span, dtype=float)).T)
            comps.append(q.T)
        return cls(dim, tuple(comps))

    def projections(self, u: np.ndarray) -> list[np.ndarray]:
        return [c.T @ (c @ u) for c in self.components]


def _vec(u, cone):
    u = np.asarray(u, dtype=float)
    if u.shape != (cone.dim,):
        raise ValueError("dimension mismatch")
    return u


def dist_to_cone(u, cone: Cone) -> float:
    u = _vec(u, cone)
    return min(float(np.linalg.norm(u - p)) for p in cone.projections(u))


def dist_to_norm_sphere(u, cone: Cone) -> float:
    """Distance from u to {w in the cone : |w| = |u|}."""
    u = _vec(u, cone)
    nu = float(np.linalg.norm(u))
    if nu == 0:
        raise ValueError("the norm sphere of 0 is undefined")
    best = math.inf
    for p in cone.projections(u):
        npn = float(np.linalg.norm(p))
        # nearest point of the sphere slice is |u| p / |p|; p is orthogonal to u - p,
        # so |u| - |p| = |u - p|^2 / (|u| + |p|) without cancellation
        gap = float(np.sum((u - p) ** 2)) / (nu + npn)
        d = math.sqrt(2.0 * nu * gap) if npn > 0 else math.sqrt(2.0) * nu
        best = min(best, d)
    return best


def sphere_vs_cone_check(u, cone: Cone, slack: float = 1e-12) -> tuple[float, float, bool]:
    """(dist to the norm sphere, sqrt(2) dist to the cone, inequality holds)."""
    lhs = dist_to_norm_sphere(u, cone)
    rhs = math.sqrt(2.0) * dist_to_cone(u, cone)
    return lhs, rhs, lhs <= rhs + slack


def random_cone(rng: np.random.Generator, dim: int, n_components: int, max_sub_dim: int = 3) -> Cone:
    spans = []
    for _ in range(n_components):
        k = int(rng.integers(1, min(max_sub_dim, dim - 1) + 1))
        spans.append(rng.standard_normal((k, dim)))
    return Cone.from_spans(dim, spans)


# ---------------------------------------------------------------------------
# Gaussian cone


def grad_norm_sq(u: ModeExpansion, cfg: QuadratureConfig | None = None) -> float:
    return float(sum(eval_form(make_form("Q", u.dim, k), v, cfg) for k, v in u.modes))


def _gauss_grad_norm_sq(N: int, beta: np.ndarray) -> np.ndarray:
    # int r^{N-1} (2 beta r e^{-beta r^2})^2 dr = 4 beta^2 Gamma(N/2 + 1) / (2 (2 beta)^{N/2 + 1})
    h = 0.5 * N + 1.0
    return 2.0 * beta**2 * np.exp(gammaln(h) - h * np.log(2.0 * beta))


def gaussian_cone_distance(u: ModeExpansion, cfg: QuadratureConfig | None = None,
                           *, scan_points: int = 50, tol: float = 1e-10,
                           log_bracket: tuple[float, float] = (-6.0, 6.0)):
    """(d0, alpha, beta) with d0 = inf over alpha, beta > 0 of |grad(u - alpha e^{-beta r^2})|.

    Only mode 0 can overlap the Gaussian cone.  For fixed beta the best
    alpha is an orthogonal projection; beta is found by a coarse scan in
    log beta followed by golden-section refinement.
    """
    cfg = cfg or DEFAULT_QUAD
    N = u.dim
    total = grad_norm_sq(u, cfg)
    if total == 0:
        return 0.0, 0.0, 1.0
    v0 = u.mode(0)
    if v0 is None:
        return math.sqrt(total), 0.0, 1.0
    lo, hi = log_bracket
    scan = np.linspace(lo, hi, scan_points)

    def overlap_integrand(betas):
        def fn(r):
            dv = v0.derivs(r)[1]
            # <v0, e^{-b r^2}> integrand: r^{N-1} v0' (-2 b r e^{-b r^2})
            return -2.0 * betas[:, None] * r ** N * dv * np.exp(-betas[:, None] * r * r)
        return fn

    # one adaptive rule for the whole scan, reused for the refinement
    x, w, _, _ = adapted_rule(overlap_integrand(np.exp(scan)), cfg)
    base = x ** N * v0.derivs(x)[1] * w

    def proj_sq(logb):
        b = np.exp(np.atleast_1d(logb))
        ip = -2.0 * b * (np.exp(-np.outer(b, x * x)) @ base)
        return ip * ip / _gauss_grad_norm_sq(N, b), ip

    ps, _ = proj_sq(scan)
    i = int(np.argmax(ps))
    a, c = scan[max(i - 1, 0)], scan[min(i + 1, scan_points - 1)]
    g = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = c - g * (c - a), a + g * (c - a)
    f1, f2 = proj_sq(x1)[0][0], proj_sq(x2)[0][0]
    while c - a > tol:
        if f1 > f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - g * (c - a)
            f1 = proj_sq(x1)[0][0]
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + g * (c - a)
            f2 = proj_sq(x2)[0][0]
    best = 0.5 * (a + c)
    _, ip = proj_sq(best)
    beta = math.exp(best)
    alpha = float(ip[0] / _gauss_grad_norm_sq(N, np.array([beta]))[0])
    # evaluate the residual directly: total - p2 cancels when u is near the cone
    resid = Combination([(1.0, v0), (-alpha, gauss(1.0, beta))])
    d0_sq = eval_form(make_form("Q", N, 0), resid, cfg)
    d0_sq += sum(eval_form(make_form("Q", N, k), v, cfg) for k, v in u.modes if k != 0)
    return math.sqrt(max(d0_sq, 0.0)), alpha, beta


def sphere_slice_distance(u: ModeExpansion, cfg: QuadratureConfig | None = None) -> float:
    """inf over w in the Gaussian cone with |grad w| = |grad u| of |grad(u - w)|."""
    total = grad_norm_sq(u, cfg)
    if total <= 0:
        raise ValueError("u must be nonzero")
    d0, _, _ = gaussian_cone_distance(u, cfg)
    nu = math.sqrt(total)
    npn = math.sqrt(max(total - d0 * d0, 0.0))
    if npn == 0:
        return math.sqrt(2.0) * nu
    return math.sqrt(2.0 * nu * d0 * d0 / (nu + npn))
