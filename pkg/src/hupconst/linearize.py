"""Product and additive forms of an uncertainty inequality.

If H, U, P scale under u -> u(lam x) as lam^{a1}, lam^{a2}, lam^{a3} with
a1 + a2 = 2 a3 and gamma = a1 - a3 != 0, then minimizing the additive form
H + U over dilations at fixed P gives 2 sqrt(H U).  Hence H U >= mu^2 P^2
holds iff H + U >= 2 mu P, and the same factor 2 relates the stability
constants of the two forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .forms import ModeExpansion, fullspace
from .profiles import Dilated, PolyExpGauss
from .quad import QuadratureConfig

__all__ = [
    "ScalingTriple",
    "ScalingError",
    "DeficitPair",
    "HYDROGEN",
    "HUP0",
    "PROBLEM_FUNCTIONALS",
    "triple_for",
    "check_scaling",
    "optimal_lambda",
    "grid_minimum",
    "dilate",
    "additive_at",
    "equivalence_check",
    "deficit_equivalence",
    "random_expansions",
]


class ScalingError(ValueError):
    pass


@dataclass(frozen=True)
class ScalingTriple:
    """Homogeneity exponents of (H, U, P) under u -> u(lam x)."""

    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        if not math.isclose(self.a1 + self.a2, 2 * self.a3, abs_tol=1e-12):
            raise ScalingError(f"a1 + a2 = {self.a1 + self.a2} differs from 2 a3 = {2 * self.a3}")

    @property
    def gamma(self) -> float:
        return self.a1 - self.a3


def triple_for(problem: str, N: int) -> ScalingTriple:
    if problem == "hydrogen":
        # (|lap u|^2, |grad u|^2, |grad u|^2 / |x|)
        return ScalingTriple(4 - N, 2 - N, 3 - N)
    if problem == "hup0":
        # (|lap u|^2, |x|^2 |grad u|^2, |grad u|^2)
        return ScalingTriple(4 - N, -N, 2 - N)
    raise ValueError(f"unknown problem {problem!r}")


# full-space functionals (H, U, P) and the sharp product constant mu
PROBLEM_FUNCTIONALS = {
    "hydrogen": ("lap_sq", "grad_sq", "grad_over_r"),
    "hup0": ("lap_sq", "r_grad_sq", "grad_sq"),
}

HYDROGEN = "hydrogen"
HUP0 = "hup0"


def check_scaling(t: ScalingTriple) -> float:
    """gamma of a valid triple; a vanishing gamma leaves no scaling to optimize.

    >>> check_scaling(ScalingTriple(2, 0, 1))
    1
    """
    if t.gamma == 0:
        raise ScalingError("gamma = 0: the additive form is scale invariant")
    return t.gamma


@dataclass(frozen=True)
class DeficitPair:
    """Sharp constants and stability constants of the product and additive forms."""

    product_constant: float
    stability_product: float

    @property
    def additive_constant(self) -> float:
        return 2.0 * self.product_constant

    @property
    def stability_additive(self) -> float:
        return 2.0 * self.stability_product


def optimal_lambda(H: float, U: float, gamma: float) -> tuple[float, float]:
    """(lam*, min over lam > 0 of lam^gamma H + lam^-gamma U)."""
    if not (H > 0 and U > 0):
        raise ValueError("H and U must be positive")
    if gamma == 0:
        raise ScalingError("gamma must be nonzero")
    return (U / H) ** (1.0 / (2.0 * gamma)), 2.0 * math.sqrt(H * U)


def grid_minimum(H: float, U: float, gamma: float, lo: float = 1e-3, hi: float = 1e3,
                 points: int = 2001, polish: bool = True) -> tuple[float, float]:
    """Brute-force minimizer over a geometric lam grid, optionally polished in log lam."""
    t = np.linspace(math.log(lo), math.log(hi), points)
    f = np.exp(gamma * t) * H + np.exp(-gamma * t) * U
    i = int(np.argmin(f))
    if not polish:
        return math.exp(t[i]), float(f[i])
    a, b = t[max(i - 1, 0)], t[min(i + 1, points - 1)]
    res = minimize_scalar(lambda s: math.exp(gamma * s) * H + math.exp(-gamma * s) * U,
                          bounds=(a, b), method="bounded", options={"xatol": 1e-12})
    return math.exp(res.x), float(res.fun)


def dilate(u: ModeExpansion, lam: float) -> ModeExpansion:
    """Mode expansion of u(lam x)."""
    return ModeExpansion(u.dim, tuple((k, Dilated(v, lam, k)) for k, v in u.modes))


def _hup(u, problem, cfg):
    return tuple(fullspace(u, w, cfg) for w in PROBLEM_FUNCTIONALS[problem])


def additive_at(u: ModeExpansion, problem: str, lam: float, cfg: QuadratureConfig | None = None) -> float:
    """(H + U)(u_lam) rescaled by P(u) / P(u_lam), i.e. lam^gamma H + lam^-gamma U up to quadrature."""
    H, U, P = _hup(dilate(u, lam), problem, cfg)
    P0 = fullspace(u, PROBLEM_FUNCTIONALS[problem][2], cfg)
    return (H + U) * P0 / P


def equivalence_check(u: ModeExpansion, problem: str, cfg: QuadratureConfig | None = None) -> dict:
    """Additive form at the optimal dilation against 2 sqrt(H U), both from quadrature."""
    gamma = check_scaling(triple_for(problem, u.dim))
    H, U, P = _hup(u, problem, cfg)
    lam, closed = optimal_lambda(H, U, gamma)
    at_opt = additive_at(u, problem, lam, cfg)
    return {
        "lambda_star": lam,
        "additive_min": at_opt,
        "two_sqrt_HU": closed,
        "P": P,
        "discrepancy": abs(at_opt - closed),
        "relative": abs(at_opt - closed) / closed,
    }


def deficit_equivalence(u: ModeExpansion, problem: str, mu: float,
                        cfg: QuadratureConfig | None = None) -> tuple[float, float]:
    """(min over dilations of the additive deficit, twice the product deficit), both divided by P.

    The product deficit is sqrt(H U) - mu P and the additive one H + U - 2 mu P;
    the two numbers agree exactly.
    """
    gamma = check_scaling(triple_for(problem, u.dim))
    H, U, P = _hup(u, problem, cfg)
    lam, _ = optimal_lambda(H, U, gamma)
    additive = additive_at(u, problem, lam, cfg) - 2.0 * mu * P
    return additive / P, 2.0 * (math.sqrt(H * U) - mu * P) / P


def random_expansions(count: int, seed: int, dims=(2, 3, 4, 5, 6), max_mode: int = 2) -> list[ModeExpansion]:
    """Seeded expansions r^k p(r^2) e^{-c r^2} or r^k (1 + r)^2 e^{-b r}, one to three modes.

    Mode-0 parts have v'(0) = 0 so every functional is finite in N = 2.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        N = int(rng.choice(dims))
        ks = sorted(rng.choice(max_mode + 1, size=int(rng.integers(1, max_mode + 2)), replace=False))
        modes = []
        for k in ks:
            k = int(k)
            if k == 0 or rng.random() < 0.5:
                even = np.zeros(5)
                even[::2] = rng.uniform(-1.0, 1.0, 3)
                even[0] = 1.0
                modes.append((k, PolyExpGauss(even, c=float(rng.uniform(0.3, 2.0)))))
            else:
                modes.append((k, PolyExpGauss([1.0, 2.0, 1.0], b=float(rng.uniform(0.5, 2.0)))))
        out.append(ModeExpansion(N, tuple(modes)))
    return out
