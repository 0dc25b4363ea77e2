"""Radial profiles v(r) on (0, inf) with exact first and second derivatives."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.interpolate import make_interp_spline

__all__ = [
    "Decay",
    "RadialProfile",
    "PolyExpGauss",
    "exp_poly",
    "gauss",
    "poly_gauss",
    "Combination",
    "Dilated",
    "Cutoff",
    "Sampled",
]

_DECAY_KINDS = ("exp", "gauss", "algebraic", "compact")


@dataclass(frozen=True)
class Decay:
    """Dominant behaviour at infinity.

    ``exp``: ~ e^{-rate r}; ``gauss``: ~ e^{-rate r^2}; ``algebraic``:
    ~ r^{-rate}; ``compact``: zero beyond ``rate``.
    """

    kind: str
    rate: float

    def __post_init__(self):
        if self.kind not in _DECAY_KINDS:
            raise ValueError(f"unknown decay kind {self.kind!r}")

    def slower(self, other: "Decay") -> "Decay":
        order = {"algebraic": 0, "exp": 1, "gauss": 2, "compact": 3}
        if order[self.kind] != order[other.kind]:
            return self if order[self.kind] < order[other.kind] else other
        if self.kind == "compact":
            return self if self.rate >= other.rate else other
        return self if self.rate <= other.rate else other

    def kills_power(self, power: float) -> bool:
        """True if r^power * v(r)^2 -> 0 as r -> inf."""
        if self.kind == "algebraic":
            return power - 2.0 * self.rate < 0
        return True


class RadialProfile(ABC):
    family: str = "generic"
    decay: Decay
    spline_order: int | None = None  # only sampled profiles set this

    @abstractmethod
    def derivs(self, r: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(v, v', v'')`` at the points ``r``."""

    def __call__(self, r):
        return self.derivs(np.asarray(r, dtype=float))[0]

    def value_at_zero(self) -> float:
        return float(self.derivs(np.array([0.0]))[0][0])

    def derivative_at_zero(self) -> float:
        return float(self.derivs(np.array([0.0]))[1][0])

    def __add__(self, other: "RadialProfile") -> "Combination":
        return Combination([(1.0, self), (1.0, other)])

    def __rmul__(self, c: float) -> "Combination":
        return Combination([(float(c), self)])

    def __sub__(self, other: "RadialProfile") -> "Combination":
        return Combination([(1.0, self), (-1.0, other)])


class PolyExpGauss(RadialProfile):
    """``p(r) exp(-b r - c r^2)`` with polynomial ``p`` in increasing powers."""

    def __init__(self, coeffs: Sequence[float], b: float = 0.0, c: float = 0.0):
        if b < 0 or c < 0 or (b == 0 and c == 0):
            raise ValueError("need b >= 0, c >= 0 and at least one of them positive")
        self.coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
        if self.coeffs.size == 0:
            self.coeffs = np.zeros(1)
        self.b = float(b)
        self.c = float(c)
        self._d1 = P.polyder(self.coeffs)
        self._d2 = P.polyder(self.coeffs, 2)
        if self.c > 0:
            self.family = "gauss" if self.coeffs.size == 1 else "poly_gauss"
            self.decay = Decay("gauss", self.c)
        else:
            self.family = "exp_poly"
            self.decay = Decay("exp", self.b)

    def derivs(self, r):
        r = np.asarray(r, dtype=float)
        p0 = P.polyval(r, self.coeffs)
        p1 = P.polyval(r, self._d1)
        p2 = P.polyval(r, self._d2)
        env = np.exp(-self.b * r - self.c * r * r)
        g = self.b + 2.0 * self.c * r  # -d/dr of the exponent
        v = p0 * env
        dv = (p1 - g * p0) * env
        d2v = (p2 - 2.0 * g * p1 + (g * g - 2.0 * self.c) * p0) * env
        return v, dv, d2v

    def __repr__(self):
        return f"PolyExpGauss({self.coeffs.tolist()}, b={self.b}, c={self.c})"


def exp_poly(coeffs: Sequence[float], rate: float) -> PolyExpGauss:
    """``p(r) e^{-rate r}``; ``exp_poly([1, 1], 1)`` is ``(1 + r) e^{-r}``."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    return PolyExpGauss(coeffs, b=rate)


def gauss(amplitude: float, rate: float) -> PolyExpGauss:
    """``amplitude * e^{-rate r^2}``."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    return PolyExpGauss([amplitude], c=rate)


def poly_gauss(coeffs: Sequence[float], rate: float) -> PolyExpGauss:
    if rate <= 0:
        raise ValueError("rate must be positive")
    return PolyExpGauss(coeffs, c=rate)


class Combination(RadialProfile):
    family = "combination"

    def __init__(self, parts: Sequence[tuple[float, RadialProfile]]):
        if not parts:
            raise ValueError("empty combination")
        flat = []
        for c, prof in parts:
            if isinstance(prof, Combination):
                flat.extend((c * c2, p2) for c2, p2 in prof.parts)
            else:
                flat.append((float(c), prof))
        self.parts = tuple(flat)
        dec = self.parts[0][1].decay
        for _, prof in self.parts[1:]:
            dec = dec.slower(prof.decay)
        self.decay = dec

    def derivs(self, r):
        r = np.asarray(r, dtype=float)
        out = [np.zeros_like(r) for _ in range(3)]
        for c, prof in self.parts:
            for acc, d in zip(out, prof.derivs(r)):
                acc += c * d
        return tuple(out)


class Dilated(RadialProfile):
    """Radial part of u(lam x) for a mode-k component: lam^k v(lam r)."""

    family = "dilated"

    def __init__(self, base: RadialProfile, lam: float, k: int = 0):
        if lam <= 0:
            raise ValueError("dilation factor must be positive")
        self.base, self.lam, self.k = base, float(lam), int(k)
        d = base.decay
        if d.kind == "exp":
            self.decay = Decay("exp", d.rate * self.lam)
        elif d.kind == "gauss":
            self.decay = Decay("gauss", d.rate * self.lam**2)
        elif d.kind == "compact":
            self.decay = Decay("compact", d.rate / self.lam)
        else:
            self.decay = d

    def derivs(self, r):
        v, dv, d2v = self.base.derivs(self.lam * np.asarray(r, dtype=float))
        s = self.lam**self.k
        return s * v, s * self.lam * dv, s * self.lam**2 * d2v


def _smoothstep(t):
    # C^2 quintic from 1 (t <= 0) down to 0 (t >= 1)
    t = np.clip(t, 0.0, 1.0)
    h = 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    dh = -30.0 * t * t * (1.0 - t) ** 2
    d2h = -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
    return h, dh, d2h


class Cutoff(RadialProfile):
    """``v(r) * chi(r)`` with chi = 1 on [0, R], 0 beyond R + width, C^2."""

    family = "cutoff"

    def __init__(self, base: RadialProfile, radius: float, width: float = 1.0):
        if radius <= 0 or width <= 0:
            raise ValueError("radius and width must be positive")
        self.base, self.radius, self.width = base, float(radius), float(width)
        self.decay = Decay("compact", self.radius + self.width)

    def derivs(self, r):
        r = np.asarray(r, dtype=float)
        # growing bases (f = e^{kr}) must not be evaluated far outside the support
        v, dv, d2v = self.base.derivs(np.minimum(r, self.radius + self.width))
        h, dh, d2h = _smoothstep((r - self.radius) / self.width)
        dh = dh / self.width
        d2h = d2h / self.width**2
        inside = r < self.radius + self.width
        v = np.where(inside, v, 0.0)
        dv = np.where(inside, dv, 0.0)
        d2v = np.where(inside, d2v, 0.0)
        return v * h, dv * h + v * dh, d2v * h + 2.0 * dv * dh + v * d2h


class Sampled(RadialProfile):
    """Spline through samples; zero beyond the last grid point."""

    family = "sampled"

    def __init__(self, grid: Sequence[float], values: Sequence[float], order: int = 5):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.size != values.size or grid.size <= order:
            raise ValueError("grid and values must be 1-D of equal length > order")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        self.spline_order = int(order)
        self._spl = make_interp_spline(grid, values, k=order)
        self._lo, self._hi = grid[0], grid[-1]
        self.decay = Decay("compact", float(self._hi))

    def derivs(self, r):
        r = np.asarray(r, dtype=float)
        rc = np.clip(r, self._lo, self._hi)
        inside = r <= self._hi
        v = np.where(inside, self._spl(rc), 0.0)
        dv = np.where(inside, self._spl(rc, 1), 0.0)
        d2v = np.where(inside, self._spl(rc, 2), 0.0) if self.spline_order >= 2 else np.zeros_like(r)
        return v, dv, d2v


def is_closed_form(v: RadialProfile) -> bool:
    return v.spline_order is None

