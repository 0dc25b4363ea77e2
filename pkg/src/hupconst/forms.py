"""Radial quadratic forms, mode expansions and the full-space functionals
they induce.

A mode expansion is u = sum_k r^k v_k(r) phi_k(sigma) with spherical
harmonics normalized so that the integral of phi_k^2 over the unit sphere
is 1.  Every full-space quantity below is a sum of one-dimensional weighted
integrals of v_k, v_k', v_k'' with power weights r^a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .profiles import RadialProfile, exp_poly, gauss, poly_gauss
from .quad import DEFAULT_QUAD, AccuracyError, QuadratureConfig, WeightSpec, gauss_nodes, integrate

__all__ = [
    "Term",
    "QuadraticFormSpec",
    "ModeExpansion",
    "make_form",
    "mode_form",
    "eval_form",
    "eval_terms",
    "polarize",
    "fullspace",
    "deficits",
    "crosscheck_radial_identity",
    "crosscheck_cases",
    "sphere_area",
    "FULLSPACE_KINDS",
]

FULLSPACE_KINDS = ("grad_sq", "lap_sq", "grad_over_r", "r_grad_sq")


@dataclass(frozen=True)
class Term:
    """``coeff * integral of weight(r) * v^(i)(r) * v^(j)(r) dr`` with i <= j."""

    i: int
    j: int
    weight: WeightSpec
    coeff: float

    def __post_init__(self):
        if not (0 <= self.i <= self.j <= 2):
            raise ValueError("derivative orders must satisfy 0 <= i <= j <= 2")

    @property
    def power(self) -> float:
        return self.weight.theta

    def as_tuple(self):
        return (self.i, self.j, self.weight.theta, self.coeff)


@dataclass(frozen=True)
class QuadraticFormSpec:
    terms: tuple[Term, ...]
    label: str = ""

    @classmethod
    def from_tuples(cls, rows: Iterable[tuple], label: str = "") -> "QuadraticFormSpec":
        """Build from ``(i, j, power, coeff)`` rows, dropping zero coefficients."""
        terms = []
        for i, j, a, c in rows:
            if c == 0:
                continue
            i, j = min(i, j), max(i, j)
            terms.append(Term(i, j, WeightSpec(float(a)), float(c)))
        return cls(tuple(terms), label)

    def as_tuples(self):
        return [t.as_tuple() for t in self.terms]

    def __add__(self, other: "QuadraticFormSpec") -> "QuadraticFormSpec":
        return QuadraticFormSpec(self.terms + other.terms, f"{self.label}+{other.label}")

    def scaled(self, c: float, label: str | None = None) -> "QuadraticFormSpec":
        terms = tuple(Term(t.i, t.j, t.weight, c * t.coeff) for t in self.terms)
        return QuadraticFormSpec(terms, label if label is not None else f"{c}*{self.label}")


@dataclass(frozen=True)
class ModeExpansion:
    dim: int
    modes: tuple[tuple[int, RadialProfile], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dimension must be at least 2")
        ks = [k for k, _ in self.modes]
        if any(k < 0 for k in ks):
            raise ValueError("mode indices must be nonnegative")
        if len(set(ks)) != len(ks):
            raise ValueError("mode indices must be distinct")
        object.__setattr__(self, "modes", tuple(self.modes))

    @classmethod
    def single(cls, dim: int, k: int, v: RadialProfile) -> "ModeExpansion":
        return cls(dim, ((k, v),))

    def mode(self, k: int) -> RadialProfile | None:
        for kk, v in self.modes:
            if kk == k:
                return v
        return None


# ---------------------------------------------------------------------------
# form catalogue


def _check_nk(N, k):
    if N < 2 or k < 0:
        raise ValueError("need N >= 2 and k >= 0")


def mode_form(which: str, N: int, k: int) -> QuadraticFormSpec:
    """Mode-k radial form of one of the four full-space functionals."""
    _check_nk(N, k)
    m = N + 2 * k
    rows = {
        "grad_sq": [(1, 1, m - 1, 1)],
        "grad_over_r": [(1, 1, m - 2, 1), (0, 0, m - 4, k)],
        "r_grad_sq": [(1, 1, m + 1, 1), (0, 0, m - 1, -2 * k)],
        "lap_sq": [(2, 2, m - 1, 1), (1, 1, m - 3, m - 1)],
    }
    if which not in rows:
        raise ValueError(f"unknown functional {which!r}")
    return QuadraticFormSpec.from_tuples(rows[which], f"{which}[N={N},k={k}]")


def make_form(which: str, N: int, k: int | None = None, alpha: float | None = None) -> QuadraticFormSpec:
    """The named radial form.

    ``J``, ``I``, ``Q``, ``R``, ``hydrogen_num`` and ``hydrogen_den`` take a
    mode index ``k``; ``E1``, ``F1`` and ``G`` live on mode 1 and ``G``
    needs ``alpha``.
    """
    if which in ("E1", "F1", "G"):
        k = 1
    if k is None:
        raise ValueError(f"form {which!r} needs a mode index")
    _check_nk(N, k)
    m = N + 2 * k
    if which == "J":
        rows = [(2, 2, m - 1, 1), (1, 1, m - 3, m - 1), (1, 1, m - 1, 1),
                (1, 1, m - 2, -(N + 1)), (0, 0, m - 4, -(N + 1) * k)]
    elif which == "I":
        rows = [(2, 2, m - 1, 1), (1, 1, m - 3, m - 1), (1, 1, m + 1, 1),
                (0, 0, m - 1, -2 * k), (1, 1, m - 1, -(N + 2))]
    elif which == "Q":
        rows = [(1, 1, m - 1, 1)]
    elif which == "R":
        rows = [(0, 0, m - 1, 1)]
    elif which in ("hydrogen_num", "E1"):
        rows = [(2, 2, m - 1, 1), (1, 1, m - 3, m - 1), (1, 1, m - 1, 1)]
    elif which in ("hydrogen_den", "F1"):
        rows = [(1, 1, m - 2, 1), (0, 0, m - 4, k)]
    elif which == "G":
        if alpha is None:
            raise ValueError("G needs alpha")
        rows = [(2, 2, m - 1, 1), (1, 1, m - 3, m - 1), (1, 1, m - 1, 1),
                (1, 1, m - 2, -alpha), (0, 0, m - 4, -alpha * k)]
    else:
        raise ValueError(f"unknown form {which!r}")
    form = QuadraticFormSpec.from_tuples(rows, f"{which}[N={N},k={k}]")
    for t in form.terms:
        # v = O(1) and v' = O(r) near 0 at worst; r^a v^2 needs a > -1
        if t.i == 0 and t.power <= -1:
            raise ValueError(f"term r^{t.power} v^2 is not integrable at the origin")
    return form


# ---------------------------------------------------------------------------
# evaluation


def _check_profile(form: QuadraticFormSpec, *profiles: RadialProfile):
    for t in form.terms:
        if t.j == 2:
            for v in profiles:
                if v.spline_order is not None and v.spline_order < 5:
                    raise ValueError("second-derivative terms need a spline of order >= 5")
        if t.power <= -1:
            # r^a (v^(i))^2 with a <= -1 is integrable only if v^(i)(0) = 0
            for v in profiles:
                at0 = v.derivs(np.array([0.0]))
                if abs(at0[t.i][0]) > 1e-12 * (1.0 + abs(at0[0][0])):
                    raise ValueError(
                        f"term r^{t.power} needs v^({t.i})(0) = 0 for integrability"
                    )


def eval_terms(form: QuadraticFormSpec, u: RadialProfile, v: RadialProfile | None = None,
               cfg: QuadratureConfig | None = None) -> np.ndarray:
    """Per-term values of the bilinear form (symmetrized when i != j)."""
    cfg = cfg or DEFAULT_QUAD
    v = u if v is None else v
    _check_profile(form, u, v)
    if not form.terms:
        return np.zeros(0)
    same = v is u

    def fn(r):
        du = u.derivs(r)
        dv = du if same else v.derivs(r)
        rows = []
        for t in form.terms:
            w = t.weight(r)
            if t.i == t.j or same:
                prod = du[t.i] * dv[t.j]
            else:
                prod = 0.5 * (du[t.i] * dv[t.j] + du[t.j] * dv[t.i])
            rows.append(w * prod)
        return np.array(rows)

    value, _ = integrate(fn, cfg)
    return np.array([t.coeff for t in form.terms]) * value


def polarize(form: QuadraticFormSpec, u: RadialProfile, v: RadialProfile,
             cfg: QuadratureConfig | None = None) -> float:
    """Symmetric bilinear form B(u, v) with B(v, v) = eval_form(form, v)."""
    return float(np.sum(eval_terms(form, u, v, cfg)))


def eval_form(form: QuadraticFormSpec, v: RadialProfile, cfg: QuadratureConfig | None = None) -> float:
    return float(np.sum(eval_terms(form, v, None, cfg)))


def fullspace(u: ModeExpansion, which: str, cfg: QuadratureConfig | None = None) -> float:
    """Full-space functional as the sum of its mode contributions."""
    return float(sum(eval_form(mode_form(which, u.dim, k), v, cfg) for k, v in u.modes))


def fullspace_all(u: ModeExpansion, cfg: QuadratureConfig | None = None) -> dict[str, float]:
    return {w: fullspace(u, w, cfg) for w in FULLSPACE_KINDS}


def deficits(u: ModeExpansion, which: str, cfg: QuadratureConfig | None = None) -> float:
    N = u.dim
    if which == "delta1":
        lap, rg, g = (fullspace(u, w, cfg) for w in ("lap_sq", "r_grad_sq", "grad_sq"))
        return math.sqrt(max(lap * rg, 0.0)) - 0.5 * (N + 2) * g
    if which == "delta2":
        lap, rg, g = (fullspace(u, w, cfg) for w in ("lap_sq", "r_grad_sq", "grad_sq"))
        return lap + rg - (N + 2) * g
    if which == "J_N":
        lap, g, gr = (fullspace(u, w, cfg) for w in ("lap_sq", "grad_sq", "grad_over_r"))
        return lap + g - (N + 1) * gr
    raise ValueError(f"unknown deficit {which!r}")


# ---------------------------------------------------------------------------
# direct N-dimensional check of the radial identities


def sphere_area(N: int) -> float:
    return 2.0 * math.exp(0.5 * N * math.log(math.pi) - gammaln(0.5 * N))


def _graded_half_axis(R: float, points: int):
    """Composite Gauss-Legendre on [0, R], graded geometrically toward 0."""
    inner_order, outer_order = 8, 8
    inner = 1.0 / 4.0 ** np.arange(11)[::-1]  # 4^-10 .. 1
    n_out = max((points - inner_order * inner.size) // outer_order, 8)
    outer = np.linspace(1.0, R, n_out + 1)[1:]
    xs, ws = [], []
    for edges, order in ((np.concatenate([[0.0], inner]), inner_order),
                         (np.concatenate([[1.0], outer]), outer_order)):
        t, w = gauss_nodes("legendre", order)
        lo, hi = edges[:-1, None], edges[1:, None]
        xs.append((0.5 * (hi - lo) * t + 0.5 * (hi + lo)).ravel())
        ws.append((0.5 * (hi - lo) * w).ravel())
    return np.concatenate(xs), np.concatenate(ws)


def _direct_density(N, k, v, which, coords):
    r = np.sqrt(sum(c * c for c in coords))
    f, df, d2f = v.derivs(r)
    S = sphere_area(N)
    if k == 0:
        c = 1.0 / math.sqrt(S)
        grad_sq = (c * df) ** 2
        lap = c * (d2f + (N - 1) * df / r)
    elif k == 1:
        # u = c x_1 v(r), phi_1 = (x_1 / r) sqrt(N / |S|)
        c = math.sqrt(N / S)
        x1 = coords[0]
        grad_sq = c * c * (f * f + 2.0 * x1 * x1 * f * df / r + x1 * x1 * df * df)
        lap = c * x1 * (d2f + (N + 1) * df / r)
    else:
        raise ValueError("direct check supports k in {0, 1}")
    if which == "grad_sq":
        return grad_sq
    if which == "grad_over_r":
        return grad_sq / r
    if which == "r_grad_sq":
        return r * r * grad_sq
    if which == "lap_sq":
        return lap * lap
    raise ValueError(f"unknown functional {which!r}")


def crosscheck_radial_identity(N: int, k: int, v: RadialProfile, which: str,
                               cfg: QuadratureConfig | None = None, *, radius: float = 12.0,
                               points: int | None = None) -> tuple[float, float]:
    """Radial-identity value and a direct tensor-grid value of the same functional.

    The direct side integrates over the box [-radius, radius]^N with
    ``points`` nodes per half axis; the profile must be negligible outside
    the box.
    """
    if N not in (2, 3) or k not in (0, 1):
        raise ValueError("direct check supports N in {2, 3} and k in {0, 1}")
    radial = eval_form(mode_form(which, N, k), v, cfg)
    # tail check: the integrand scale at the box edge must be negligible
    vr, dvr, _ = v.derivs(np.array([radius]))
    edge = (vr[0] ** 2 + dvr[0] ** 2) * radius ** (N + 2 * k + 2)
    if edge > 1e-12 * (1.0 + abs(radial)):
        raise AccuracyError("profile not negligible at the box boundary", radial, edge)
    if points is None:
        points = 400 if N == 2 else 240
    # every density here is even in each coordinate: integrate one orthant
    x, w = _graded_half_axis(radius, points)
    if N == 2:
        X, Y = np.meshgrid(x, x, indexing="ij")
        dens = _direct_density(N, k, v, which, (X, Y))
        direct = 4.0 * float(w @ dens @ w)
    else:
        direct = 0.0
        X2, Y2 = np.meshgrid(x, x, indexing="ij")
        W2 = np.outer(w, w)
        for xi, wi in zip(x, w):
            dens = _direct_density(N, k, v, which, (np.full_like(X2, xi), X2, Y2))
            direct += wi * float(np.sum(W2 * dens))
        direct *= 8.0
    return radial, direct


def as_expansion(N: int, modes: Sequence[tuple[int, RadialProfile]]) -> ModeExpansion:
    return ModeExpansion(N, tuple(modes))


def crosscheck_cases() -> list[tuple[int, int, RadialProfile, str, float]]:
    """(N, k, v, functional, box radius) cases for the direct tensor-grid check.

    The box must be large enough that the profile is negligible at its edge.
    """
    return [
        (2, 0, exp_poly([1.0], 1.0), "grad_sq", 30.0),
        (2, 1, exp_poly([1.0], 1.0), "grad_sq", 30.0),
        (3, 0, gauss(1.0, 0.5), "lap_sq", 30.0),
        (2, 0, gauss(1.0, 0.5) + gauss(0.5, 2.0), "r_grad_sq", 12.0),
        (3, 0, poly_gauss([1.0, 0.0, 0.3], 0.7), "grad_over_r", 12.0),
        (3, 1, poly_gauss([1.0, 0.0, 1.0], 1.0), "lap_sq", 12.0),
    ]
