"""Kummer's confluent hypergeometric function M(beta; alpha; t) and the
squared-argument profile Psi(t) = M(beta; alpha; -t^2/2).

Normalization is the standard one, M(beta; alpha; 0) = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, gammasgn

from .profiles import Decay, RadialProfile

__all__ = [
    "KummerParams",
    "KummerRangeError",
    "kummer_m",
    "kummer_dm",
    "kummer_ode_residual",
    "psi_profile",
    "psi_derivs",
    "psi_ode_residual",
    "decay_exponent",
    "KummerProfile",
]

_MAX_TERMS = 500
_SERIES_EPS = 1e-17
# beyond this |t| the negative-argument branch switches to the large-z expansion;
# the neglected part is O(e^{-z})
_ASYMPTOTIC_Z = 200.0


class KummerRangeError(ArithmeticError):
    """Series did not converge within the term cap, or the value overflows."""


@dataclass(frozen=True)
class KummerParams:
    beta_num: float
    alpha_den: float

    def __post_init__(self):
        b, a = self.beta_num, self.alpha_den
        if not (math.isfinite(b) and math.isfinite(a)):
            raise ValueError("Kummer parameters must be finite")
        if a <= 0 and float(a).is_integer():
            raise ValueError(f"alpha_den = {a} is a nonpositive integer")
        if b < 0 or a <= 0:
            raise ValueError("need beta_num >= 0 and alpha_den > 0")

    @property
    def gaussian(self) -> bool:
        return self.beta_num == self.alpha_den


def _series(a, b, z):
    """Sum_j (a)_j / (b)_j z^j / j! for z >= 0 (positive terms when a >= 0)."""
    z = np.asarray(z, dtype=float)
    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for j in range(_MAX_TERMS):
        term = np.where(active, term * ((a + j) / (b + j)) * z / (j + 1.0), 0.0)
        total = total + term
        active &= np.abs(term) > _SERIES_EPS * np.abs(total)
        if not active.any():
            break
    else:
        raise KummerRangeError(f"series did not converge in {_MAX_TERMS} terms")
    if not np.all(np.isfinite(total)):
        raise KummerRangeError("Kummer series overflow")
    return total


def _negint(x):
    return x <= 0 and float(x).is_integer()


def _large_negative(beta, alpha, z):
    """M(beta; alpha; -z) for large z via the algebraic expansion."""
    c = alpha - beta
    if _negint(c):
        # M(c; alpha; z) is a polynomial, so the result is e^{-z} times it
        poly = _series(c, alpha, z)
        with np.errstate(under="ignore"):
            return np.sign(poly) * np.exp(-z + np.log(np.abs(poly)))
    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for s in range(_MAX_TERMS):
        new = term * (beta + s) * (beta - alpha + 1.0 + s) / ((s + 1.0) * z)
        # stop at the smallest term of the divergent series
        active &= np.abs(new) < np.abs(term)
        term = np.where(active, new, 0.0)
        total = total + term
        active &= np.abs(term) > _SERIES_EPS * np.abs(total)
        if not active.any():
            break
    log_pref = gammaln(alpha) - gammaln(c) - beta * np.log(z)
    return gammasgn(c) * np.exp(log_pref) * total


def _kummer_array(beta: float, alpha: float, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("argument must be finite")
    out = np.empty_like(t)
    pos = t >= 0
    if pos.any():
        out[pos] = _series(beta, alpha, t[pos])
    neg = ~pos
    if neg.any():
        z = -t[neg]
        mid = z <= _ASYMPTOTIC_Z
        res = np.empty_like(z)
        if mid.any():
            # Kummer transformation: positive-term series, no cancellation
            res[mid] = np.exp(-z[mid]) * _series(alpha - beta, alpha, z[mid])
        if (~mid).any():
            res[~mid] = _large_negative(beta, alpha, z[~mid])
        out[neg] = res
    return out


def _as_output(x, scalar):
    return float(x[()]) if scalar else x


def kummer_m(p: KummerParams, t):
    """M(beta; alpha; t).

    >>> round(kummer_m(KummerParams(1.0, 2.0), -2.0), 7)
    0.4323324
    """
    scalar = np.ndim(t) == 0
    return _as_output(_kummer_array(p.beta_num, p.alpha_den, np.asarray(t, dtype=float)), scalar)


def kummer_dm(p: KummerParams, t, order: int = 1):
    """d^order/dt^order M(beta; alpha; t) by the contiguous relation."""
    scalar = np.ndim(t) == 0
    b, a = p.beta_num, p.alpha_den
    factor = 1.0
    for i in range(order):
        factor *= (b + i) / (a + i)
    val = factor * _kummer_array(b + order, a + order, np.asarray(t, dtype=float))
    return _as_output(val, scalar)


def kummer_ode_residual(p: KummerParams, t):
    """|t M'' + (alpha - t) M' - beta M|."""
    m0 = kummer_m(p, t)
    m1 = kummer_dm(p, t, 1)
    m2 = kummer_dm(p, t, 2)
    return np.abs(t * m2 + (p.alpha_den - t) * m1 - p.beta_num * m0)


def psi_derivs(p: KummerParams, t):
    """(Psi, Psi', Psi'') at t, Psi(t) = M(beta; alpha; -t^2/2)."""
    t = np.asarray(t, dtype=float)
    z = -0.5 * t * t
    m1 = kummer_dm(p, z, 1)
    m2 = kummer_dm(p, z, 2)
    return kummer_m(p, z), -t * m1, t * t * m2 - m1


def psi_ode_residual(p: KummerParams, t):
    """|t Psi'' + t^2 Psi' + (2 alpha - 1) Psi' + 2 beta t Psi|."""
    psi, d1, d2 = psi_derivs(p, t)
    return np.abs(t * d2 + t * t * d1 + (2.0 * p.alpha_den - 1.0) * d1 + 2.0 * p.beta_num * t * psi)


class KummerProfile(RadialProfile):
    """Psi(r) as a radial profile; decays like r^{-2 beta} unless beta = alpha."""

    family = "kummer"

    def __init__(self, params: KummerParams):
        self.params = params
        if params.gaussian:
            self.decay = Decay("gauss", 0.5)
        else:
            self.decay = Decay("algebraic", 2.0 * params.beta_num)

    def derivs(self, r):
        psi, d1, d2 = psi_derivs(self.params, r)
        return np.asarray(psi), np.asarray(d1), np.asarray(d2)

    def __repr__(self):
        return f"KummerProfile(beta={self.params.beta_num}, alpha={self.params.alpha_den})"


def psi_profile(p: KummerParams) -> KummerProfile:
    return KummerProfile(p)


def decay_exponent(p: KummerParams, t_lo: float, t_hi: float, points: int = 40) -> float:
    """Least-squares slope of log|Psi| against log t on a geometric grid."""
    if p.gaussian:
        raise ValueError("Gaussian decay, exponent undefined")
    if not 1.0 < t_lo < t_hi:
        raise ValueError("need 1 < t_lo < t_hi")
    if points < 20:
        raise ValueError("at least 20 sample points are required")
    t = np.geomspace(t_lo, t_hi, points)
    psi = psi_derivs(p, t)[0]
    if np.any(psi == 0):
        raise KummerRangeError("Psi vanishes on the fitting grid")
    slope, _ = np.polyfit(np.log(t), np.log(np.abs(psi)), 1)
    return float(slope)
