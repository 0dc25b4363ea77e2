"""Weighted one-dimensional Hardy inequalities int V v'^2 >= int W v^2 with
W = -(V f')'/f, their exact deficit identity, and the Hamamoto inequality.

Weights are V = r^theta e^{-2 e r} with e in {0, 1} and f = r^p or e^{kappa r}.
W is returned as an exact list of terms c r^a e^{-2 e r} when the inputs are
rationals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Callable

import numpy as np

from .profiles import Cutoff, RadialProfile
from .quad import DEFAULT_QUAD, QuadratureConfig, integrate

__all__ = [
    "HardyPair",
    "WeightTerm",
    "derive_weight",
    "weight_terms_numeric",
    "numeric_weight",
    "cutoff_f",
    "deficit_identity_check",
    "hamamoto_check",
    "power_pair",
    "exp_pair",
    "shipped_pairs",
    "BoundaryError",
]


class BoundaryError(ValueError):
    """The boundary term of the integration by parts does not vanish."""


def _exact(x):
    if isinstance(x, Rational):
        return Fraction(x)
    return x


@dataclass(frozen=True)
class WeightTerm:
    """coeff * r^power * e^{-rate r}."""

    coeff: Real
    power: Real
    rate: Real = 0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return float(self.coeff) * r ** float(self.power) * np.exp(-float(self.rate) * r)

    def as_tuple(self) -> tuple:
        return (self.coeff, self.power, self.rate)


@dataclass(frozen=True)
class HardyPair:
    """V = r^theta e^{-2 r} (``v_exp``) or r^theta; f = r^p (``power``) or e^{kappa r} (``exp``)."""

    theta: Real
    f_kind: str
    f_param: Real
    v_exp: bool = False

    def __post_init__(self):
        if self.f_kind not in ("power", "exp"):
            raise ValueError(f"unsupported f family {self.f_kind!r}")
        object.__setattr__(self, "theta", _exact(self.theta))
        object.__setattr__(self, "f_param", _exact(self.f_param))

    @property
    def v_rate(self):
        return 2 if self.v_exp else 0

    def V(self, r):
        r = np.asarray(r, dtype=float)
        return r ** float(self.theta) * np.exp(-float(self.v_rate) * r)

    def log_f_prime(self, r):
        """f'/f."""
        r = np.asarray(r, dtype=float)
        if self.f_kind == "power":
            return float(self.f_param) / r
        return np.full_like(r, float(self.f_param))

    def label(self) -> str:
        v = f"r^{self.theta}" + (" e^(-2r)" if self.v_exp else "")
        f = f"r^{self.f_param}" if self.f_kind == "power" else f"e^({self.f_param} r)"
        return f"V={v}, f={f}"


def power_pair(theta) -> HardyPair:
    """V = r^theta with the optimal power f = r^{(1 - theta)/2}."""
    theta = _exact(theta)
    return HardyPair(theta, "power", (1 - theta) / 2)


def exp_pair(theta, kappa) -> HardyPair:
    """V = r^theta e^{-2r}, f = e^{kappa r}."""
    return HardyPair(theta, "exp", kappa, v_exp=True)


def derive_weight(p: HardyPair) -> list[WeightTerm]:
    """W = -(V f')'/f as a list of terms, zero coefficients dropped.

    >>> [tuple(str(x) for x in t.as_tuple()) for t in derive_weight(exp_pair(4, 1))]
    [('-4', '3', '2'), ('1', '4', '2')]
    """
    th, c, e = p.theta, p.f_param, p.v_rate
    if p.f_kind == "power":
        # V f'/f = c r^{th-1} e^{-e r};  W = -(V f')'/f = -(c (th + c - 1) r^{th-2} - e c r^{th-1}) e^{-e r}
        terms = [WeightTerm(-c * (th + c - 1), th - 2, e), WeightTerm(e * c, th - 1, e)]
    else:
        # V f' / f = c r^th e^{-e r};  W = -(c th r^{th-1} + c (c - e) r^th) e^{-e r}
        terms = [WeightTerm(-c * th, th - 1, e), WeightTerm(-c * (c - e), th, e)]
    return [t for t in terms if t.coeff != 0]


class _FProfile(RadialProfile):
    """f itself as a profile; only meaningful under a compact cutoff."""

    family = "hardy_f"
    decay = None

    def __init__(self, pair: HardyPair):
        if pair.f_kind == "power" and pair.f_param < 0:
            raise ValueError("f = r^p with p < 0 is singular at the origin")
        self.pair = pair

    def derivs(self, r):
        r = np.asarray(r, dtype=float)
        c = float(self.pair.f_param)
        if self.pair.f_kind == "exp":
            v = np.exp(c * r)
            return v, c * v, c * c * v
        return r**c, c * r ** (c - 1), c * (c - 1) * r ** (c - 2)


def cutoff_f(pair: HardyPair, radius: float, width: float = 1.0) -> Cutoff:
    """f multiplied by a C^2 cutoff; the deficit lives only in the transition layer."""
    return Cutoff(_FProfile(pair), radius, width)


def numeric_weight(V: Callable, f: Callable, h: float = 1e-4) -> Callable:
    """W = -(V f')'/f by central differences for pairs outside the two symbolic families.

    Accuracy is roughly h^2 relative; a RuntimeWarning marks the result as approximate.
    """
    warnings.warn("Hardy weight derived numerically; accuracy is about h^2", RuntimeWarning, stacklevel=2)

    def flux(r):
        return V(r) * (f(r + h) - f(r - h)) / (2.0 * h)

    def W(r):
        r = np.asarray(r, dtype=float)
        return -(flux(r + h) - flux(r - h)) / (2.0 * h) / f(r)
    return W


def weight_terms_numeric(terms: list[WeightTerm]) -> Callable[[np.ndarray], np.ndarray]:
    def W(r):
        return sum(t(r) for t in terms)
    return W


def _boundary_ok(p: HardyPair, v: RadialProfile) -> bool:
    """Vanishing of V (f'/f) v^2 at 0 and at infinity, from structural data."""
    th = float(p.theta)
    # behaviour at 0: V f'/f ~ r^{th - 1} (power f) or r^th (exp f)
    lead = th - 1 if p.f_kind == "power" else th
    if p.f_param != 0:
        v0 = v.value_at_zero()
        if abs(v0) > 0:
            if lead <= 0:
                return False
        elif lead + 2 <= 0:
            return False
    # behaviour at infinity
    if p.v_exp or p.f_param == 0:
        return True
    return v.decay.kills_power(lead)


def deficit_identity_check(p: HardyPair, v: RadialProfile, cfg: QuadratureConfig | None = None):
    """(int V v'^2, int W v^2, int V (v' - (f'/f) v)^2)."""
    if not _boundary_ok(p, v):
        raise BoundaryError(f"boundary term V (f'/f) v^2 does not vanish for {p.label()}")
    W = weight_terms_numeric(derive_weight(p))

    def fn(r):
        f, df, _ = v.derivs(r)
        Vr = p.V(r)
        g = df - p.log_f_prime(r) * f
        return np.array([Vr * df * df, W(r) * f * f, Vr * g * g])

    (lhs, rhs, deficit), _ = integrate(fn, cfg or DEFAULT_QUAD)
    return float(lhs), float(rhs), float(deficit)


def hamamoto_check(mu: float, eps: float, f: RadialProfile, cfg: QuadratureConfig | None = None,
                   slack: float = 1e-9):
    """Both sides of int r^{mu+1} (f''^2 + f'^2) >= eps int r^{mu-1} f^2 + (sqrt(mu^2 - 4 eps) + 1) int r^mu f'^2."""
    if eps > mu * mu / 4:
        raise ValueError("need eps <= mu^2 / 4")

    def fn(r):
        v, dv, d2v = f.derivs(r)
        return np.array([r ** (mu + 1) * (d2v * d2v + dv * dv), r ** (mu - 1) * v * v, r**mu * dv * dv])

    (lhs, a, b), _ = integrate(fn, cfg or DEFAULT_QUAD)
    rhs = eps * a + (math.sqrt(mu * mu - 4 * eps) + 1.0) * b
    return float(lhs), float(rhs), bool(lhs >= rhs - slack)


def shipped_pairs(dims=range(2, 9), alpha: Fraction = Fraction(1)) -> list[HardyPair]:
    """The power pairs for theta = 2..5 and the weighted-exponential pairs used for the hydrogen bounds.

    The pair (N - 1, 2/(N + 2)) depends on the dimension; duplicates are dropped.
    """
    pairs = [power_pair(t) for t in (2, 3, 4, 5)]
    exp_params = [(3, Fraction(1, 3)), (4, 1), (2, Fraction(2, 5)), (1, 1 - Fraction(alpha) / 3)]
    exp_params += [(N - 1, Fraction(2, N + 2)) for N in dims]
    for theta, kappa in exp_params:
        p = exp_pair(theta, kappa)
        if p not in pairs:
            pairs.append(p)
    return pairs
