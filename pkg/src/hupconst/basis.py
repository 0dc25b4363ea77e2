"""Spectral bases on (0, inf) and exact Gram assembly.

Every basis function is phi_j(r) = P_j(x(r)) E(r) for a polynomial P_j in a
mapped variable x and an envelope E:

* ``laguerre_exp``   x = 2 s r,        E = e^{-s r}       (span r^j e^{-s r})
* ``hermite_gauss``  x = sqrt(2 s) r,  E = e^{-s r^2}     (span r^j e^{-s r^2})
* ``algebraic_map``  x = r / (r + s),  E = (1 - x)^p      (decays like r^{-p})

``polys="monomial"`` uses the literal powers r^j (x^j for the algebraic map);
``polys="orthogonal"`` uses polynomials orthonormal for x^{b0} times the
squared envelope, which span the same nested spaces but stay well
conditioned for large n.  Products of two basis functions times r^a are
polynomials against the rule's weight, so Gram matrices are exact up to
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .profiles import Decay, RadialProfile
from .quad import DEFAULT_QUAD, QuadratureConfig, gauss_nodes, integrate, recurrence

__all__ = ["Basis", "BasisCombo", "BASIS_KINDS"]

BASIS_KINDS = ("laguerre_exp", "hermite_gauss", "algebraic_map")


def _orthonormal_values(kind, n, alpha, beta, x):
    """p_j, p_j', p_j'' (j < n) from the three-term recurrence."""
    a, b = recurrence(kind, n, alpha, beta)
    out = np.zeros((3, n) + x.shape)
    p = np.full_like(x, 1.0 / math.sqrt(b[0]))
    dp = np.zeros_like(x)
    d2p = np.zeros_like(x)
    p_prev = dp_prev = d2p_prev = np.zeros_like(x)
    out[0, 0] = p
    for j in range(n - 1):
        sb = math.sqrt(b[j]) if j else 0.0
        nb = math.sqrt(b[j + 1])
        p_next = ((x - a[j]) * p - sb * p_prev) / nb
        dp_next = ((x - a[j]) * dp + p - sb * dp_prev) / nb
        d2p_next = ((x - a[j]) * d2p + 2.0 * dp - sb * d2p_prev) / nb
        p_prev, dp_prev, d2p_prev = p, dp, d2p
        p, dp, d2p = p_next, dp_next, d2p_next
        out[0, j + 1], out[1, j + 1], out[2, j + 1] = p, dp, d2p
    return out


def _monomial_values(n, x, c):
    """(x/c)^j and its x-derivatives."""
    y = x / c
    j = np.arange(n)[:, None]
    out = np.zeros((3, n) + x.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[0] = y[None, :] ** j
        out[1] = np.where(j >= 1, j * y[None, :] ** np.maximum(j - 1, 0), 0.0) / c
        out[2] = np.where(j >= 2, j * (j - 1) * y[None, :] ** np.maximum(j - 2, 0), 0.0) / c**2
    return out


@dataclass(frozen=True)
class Basis:
    kind: str
    n: int
    scale: float
    b0: float = 0.0
    polys: str = "monomial"
    power: float = 1.0  # envelope exponent p of the algebraic map

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.n < 2:
            raise ValueError("basis size must be at least 2")
        if not self.scale > 0:
            raise ValueError("basis scale must be positive")
        if self.polys not in ("monomial", "orthogonal"):
            raise ValueError("polys must be 'monomial' or 'orthogonal'")
        if self.b0 <= -1:
            raise ValueError("b0 must exceed -1")
        if self.kind == "algebraic_map" and not self.power > 0:
            raise ValueError("algebraic envelope power must be positive")

    # -- polynomial part -------------------------------------------------

    @property
    def _chain(self) -> float:
        """dx/dr for the two linear maps."""
        if self.kind == "laguerre_exp":
            return 2.0 * self.scale
        return math.sqrt(2.0 * self.scale)

    def _poly(self, x):
        if self.polys == "monomial":
            c = 1.0 if self.kind == "algebraic_map" else self._chain
            return _monomial_values(self.n, x, c)
        if self.kind == "laguerre_exp":
            return _orthonormal_values("laguerre", self.n, self.b0, 0.0, x)
        if self.kind == "hermite_gauss":
            return _orthonormal_values("half_hermite", self.n, self.b0, 0.0, x)
        return _orthonormal_values("jacobi01", self.n, 0.0, self.b0, x)

    def _reduced(self, x):
        """f_d with phi^(d)(r) = f_d(x) * envelope-related factor (see derivs)."""
        P, P1, P2 = self._poly(x)
        if self.kind == "laguerre_exp":
            s = self.scale
            return P, 2.0 * s * P1 - s * P, 4.0 * s * s * (P2 - P1) + s * s * P
        if self.kind == "hermite_gauss":
            sg = self._chain
            return P, sg * (P1 - x * P), sg * sg * (P2 - 2.0 * x * P1 + (x * x - 1.0) * P)
        p = self.power
        s1 = (1.0 - x) * P1 - p * P
        s2 = (1.0 - x) * ((1.0 - x) * P2 - (p + 1.0) * P1) - (p + 1.0) * s1
        return P, s1, s2

    # -- pointwise values ------------------------------------------------

    def variable(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "algebraic_map":
            return r / (r + self.scale)
        return self._chain * r

    def derivs(self, r) -> np.ndarray:
        """Array (3, n, len(r)) of phi_j, phi_j', phi_j''."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        x = self.variable(r)
        f = np.array(self._reduced(x))
        if self.kind == "laguerre_exp":
            return f * np.exp(-self.scale * r)
        if self.kind == "hermite_gauss":
            return f * np.exp(-self.scale * r * r)
        L, p = self.scale, self.power
        om = 1.0 - x
        return np.stack([f[0] * om**p, f[1] * om ** (p + 1) / L, f[2] * om ** (p + 2) / L**2])

    def values_at_zero(self, order: int = 0) -> np.ndarray:
        return self.derivs(np.array([0.0]))[order][:, 0]

    @property
    def decay(self) -> Decay:
        if self.kind == "laguerre_exp":
            return Decay("exp", self.scale)
        if self.kind == "hermite_gauss":
            return Decay("gauss", self.scale)
        return Decay("algebraic", self.power)

    # -- Gram matrices ---------------------------------------------------

    def _exact_rule(self, d1, d2, a):
        """Nodes, weights and the matching (x-space) integrand factor."""
        if a != int(a):
            raise ValueError("exact assembly needs integer powers")
        a = int(a)
        n = self.n
        if self.kind == "laguerre_exp":
            if a < -1:
                raise ValueError("power below -1 is not supported by exact assembly")
            x, w = gauss_nodes("laguerre", n + max(a, 0) // 2 + 2)
            c = self._chain
            r = x / c
            return x, w * r**a / c
        if self.kind == "hermite_gauss":
            if a < 0:
                raise ValueError("negative powers are not supported by exact assembly")
            x, w = gauss_nodes("half_hermite", n + (a + d1 + d2) // 2 + 2)
            c = self._chain
            return x, w * (x / c) ** a / c
        if a < 0:
            raise ValueError("negative powers are not supported by exact assembly")
        e = 2.0 * self.power + d1 + d2 - a - 2.0
        if e <= -1:
            raise ValueError("weight exponent at x = 1 is not integrable")
        x, w = gauss_nodes("jacobi01", n + a // 2 + 2, e, 0.0)
        return x, w * x**a * self.scale ** (a + 1 - d1 - d2)

    def supports_exact(self, rows: Iterable[tuple]) -> bool:
        try:
            for i, j, a, _ in rows:
                self._exact_rule(i, j, a)
        except ValueError:
            return False
        return True

    def gram(self, rows: Iterable[tuple]) -> np.ndarray:
        """Exact Gram matrix of sum coeff * int r^a phi^(i) phi^(j) over (i, j, a, coeff) rows.

        With ``laguerre_exp`` a power of -1 is accepted; entries are then only
        meaningful on the subspace where the integrand is integrable.
        """
        G = np.zeros((self.n, self.n))
        for i, j, a, coeff in rows:
            if coeff == 0:
                continue
            x, w = self._exact_rule(i, j, a)
            f = self._reduced(x)
            M = (f[i] * w) @ f[j].T
            if i != j:
                M = 0.5 * (M + M.T)
            G += coeff * M
        return 0.5 * (G + G.T)

    def gram_quad(self, rows: Iterable[tuple], cfg: QuadratureConfig | None = None) -> np.ndarray:
        """Gram matrix by adaptive quadrature (any real powers)."""
        rows = [r for r in rows if r[3] != 0]
        iu = np.triu_indices(self.n)

        def fn(r):
            d = self.derivs(r)
            total = 0.0
            for i, j, a, coeff in rows:
                prod = d[i][:, None, :] * d[j][None, :, :]
                if i != j:
                    prod = 0.5 * (prod + np.swapaxes(prod, 0, 1))
                total = total + coeff * prod * r**a
            return total[iu]

        vals, _ = integrate(fn, cfg or DEFAULT_QUAD)
        G = np.zeros((self.n, self.n))
        G[iu] = vals
        return G + np.triu(G, 1).T

    def cross(self, rows: Sequence[tuple], v: RadialProfile, cfg: QuadratureConfig | None = None) -> np.ndarray:
        """Vector of the bilinear form between each phi_j and the profile v."""
        rows = [r for r in rows if r[3] != 0]

        def fn(r):
            d = self.derivs(r)
            dv = v.derivs(r)
            total = 0.0
            for i, j, a, coeff in rows:
                prod = d[i] * dv[j]
                if i != j:
                    prod = 0.5 * (prod + d[j] * dv[i])
                total = total + coeff * prod * r**a
            return total

        vals, _ = integrate(fn, cfg or DEFAULT_QUAD)
        return np.asarray(vals)

    def combo(self, coeffs: Sequence[float]) -> "BasisCombo":
        return BasisCombo(self, coeffs)

    def describe(self) -> dict:
        out = {"kind": self.kind, "n": self.n, "scale": self.scale, "b0": self.b0, "polys": self.polys}
        if self.kind == "algebraic_map":
            out["power"] = self.power
        return out


class BasisCombo(RadialProfile):
    family = "basis_combo"

    def __init__(self, basis: Basis, coeffs: Sequence[float]):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (basis.n,):
            raise ValueError("coefficient count must match the basis size")
        self.basis, self.coeffs = basis, coeffs
        self.decay = basis.decay

    def derivs(self, r):
        r = np.asarray(r, dtype=float)
        d = self.basis.derivs(r.ravel())
        v = np.einsum("j,djk->dk", self.coeffs, d)
        return tuple(row.reshape(r.shape) for row in v)
