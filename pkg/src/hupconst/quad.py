"""Quadrature on the half line.

Gauss rules come from the Jacobi matrix of the relevant orthogonal
polynomial family (Golub-Welsch).  Weights are recomputed from the
Christoffel function so tiny weights keep their relative accuracy.

``integrate_weighted`` handles the radial integrals used everywhere else:
geometric panels toward the origin, unit panels up to ``split_radius`` and
log-spaced panels for the tail, so that algebraically decaying integrands
(the 1F1 profiles) are integrated rather than truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal
from scipy.special import gammaln

__all__ = [
    "WeightSpec",
    "QuadratureConfig",
    "AccuracyError",
    "gauss_nodes",
    "recurrence",
    "integrate",
    "adapted_rule",
    "integrate_weighted",
    "exact_moment",
]


class AccuracyError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, best: np.ndarray | float, err_est: np.ndarray | float):
        super().__init__(message)
        self.best = best
        self.err_est = err_est


@dataclass(frozen=True)
class WeightSpec:
    """Weight ``r**theta`` times an optional decay factor.

    ``decay`` is ``"none"``, ``"exp"`` (``exp(-rate*r)``) or ``"gauss"``
    (``exp(-rate*r**2)``).
    """

    theta: float = 0.0
    decay: str = "none"
    rate: float = 0.0

    def __post_init__(self):
        if self.decay not in ("none", "exp", "gauss"):
            raise ValueError(f"unknown decay kind {self.decay!r}")
        if self.decay != "none" and not self.rate > 0:
            raise ValueError("decay rate must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        w = r**self.theta
        if self.decay == "exp":
            w = w * np.exp(-self.rate * r)
        elif self.decay == "gauss":
            w = w * np.exp(-self.rate * r * r)
        return w


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    split_radius: float = 40.0
    panel_order: int = 32
    max_panels: int = 4096

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.panel_order < 4:
            raise ValueError("panel_order must be at least 4")


DEFAULT_QUAD = QuadratureConfig()


# ---------------------------------------------------------------------------
# three-term recurrences, orthonormal convention:
#   x p_j = sqrt(b_{j+1}) p_{j+1} + a_j p_j + sqrt(b_j) p_{j-1},  p_0 = 1/sqrt(b_0)


def _legendre_rec(n):
    j = np.arange(n, dtype=float)
    a = np.zeros(n)
    b = np.empty(n)
    b[0] = 2.0
    b[1:] = j[1:] ** 2 / (4.0 * j[1:] ** 2 - 1.0)
    return a, b


def _laguerre_rec(n, alpha):
    j = np.arange(n, dtype=float)
    a = 2.0 * j + alpha + 1.0
    b = j * (j + alpha)
    b[0] = math.exp(gammaln(alpha + 1.0))
    return a, b


def _jacobi01_rec(n, alpha, beta):
    """Weight (1-x)**alpha * x**beta on [0, 1]."""
    a = np.empty(n)
    b = np.empty(n)
    s = alpha + beta
    for j in range(n):
        t = 2.0 * j + s
        if j == 0:
            a_t = (beta - alpha) / (s + 2.0)
        else:
            a_t = (beta**2 - alpha**2) / (t * (t + 2.0))
        a[j] = 0.5 * (a_t + 1.0)
        if j == 0:
            b[0] = math.exp(gammaln(alpha + 1) + gammaln(beta + 1) - gammaln(s + 2))
        elif j == 1:
            b_t = 4.0 * (1 + alpha) * (1 + beta) / ((s + 2) ** 2 * (s + 3))
            b[1] = b_t / 4.0
        else:
            b_t = 4.0 * j * (j + alpha) * (j + beta) * (j + s) / (t * t * (t + 1.0) * (t - 1.0))
            b[j] = b_t / 4.0
    return a, b


def _fine_halfline_rule(weight: Callable[[np.ndarray], np.ndarray], x_max: float):
    t, w = _legendre_nodes(48)
    edges = np.concatenate([[0.0], np.geomspace(1e-6, 1.0, 14), np.arange(1.5, x_max + 0.25, 0.5)])
    lo, hi = edges[:-1, None], edges[1:, None]
    x = (0.5 * (hi - lo) * t + 0.5 * (hi + lo)).ravel()
    wx = (0.5 * (hi - lo) * w).ravel()
    return x, wx * weight(x)


@lru_cache(maxsize=None)
def _half_hermite_rec_cached(n: int, power: float):
    # discretized Stieltjes procedure on a fine composite rule
    x_max = max(12.0, math.sqrt(4.0 * n + 2 * power + 10.0) + 8.0)
    x, w = _fine_halfline_rule(lambda s: s**power * np.exp(-s * s), x_max)
    a = np.empty(n)
    b = np.empty(n)
    b[0] = w.sum()
    q_prev = np.zeros_like(x)
    q = np.full_like(x, 1.0 / math.sqrt(b[0]))
    for j in range(n):
        a[j] = np.sum(w * x * q * q)
        r = (x - a[j]) * q - (math.sqrt(b[j]) * q_prev if j else 0.0)
        nrm = np.sum(w * r * r)
        if j + 1 < n:
            b[j + 1] = nrm
        q_prev, q = q, r / math.sqrt(nrm)
    return a, b


def recurrence(kind: str, n: int, alpha: float = 0.0, beta: float = 0.0):
    """Recurrence coefficients ``(a, b)`` of length ``n`` for a weight family.

    kinds: ``legendre`` on [-1, 1]; ``laguerre`` with weight
    ``x**alpha e^{-x}``; ``jacobi01`` with ``(1-x)**alpha x**beta`` on
    [0, 1]; ``half_hermite`` with ``x**alpha e^{-x^2}`` on (0, inf).
    """
    if kind == "legendre":
        return _legendre_rec(n)
    if kind == "laguerre":
        if alpha <= -1:
            raise ValueError("laguerre alpha must exceed -1")
        return _laguerre_rec(n, alpha)
    if kind == "jacobi01":
        if alpha <= -1 or beta <= -1:
            raise ValueError("jacobi exponents must exceed -1")
        return _jacobi01_rec(n, alpha, beta)
    if kind == "half_hermite":
        if alpha <= -1:
            raise ValueError("half_hermite power must exceed -1")
        a, b = _half_hermite_rec_cached(max(n, 8), float(alpha))
        return a[:n].copy(), b[:n].copy()
    raise ValueError(f"unknown polynomial family {kind!r}")


def _christoffel(x, a, b):
    """Orthonormal p_0..p_n at x plus 1/sum p_j^2, with overflow rescaling."""
    n = len(a)
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / math.sqrt(b[0]))
    dp_prev = np.zeros_like(x)
    dp = np.zeros_like(x)
    total = p * p
    logscale = np.zeros_like(x)
    for j in range(n):
        nb = math.sqrt(b[j + 1]) if j + 1 < n else math.sqrt(_next_b(a, b))
        sb = math.sqrt(b[j]) if j else 0.0
        p_next = ((x - a[j]) * p - sb * p_prev) / nb
        dp_next = ((x - a[j]) * dp + p - sb * dp_prev) / nb
        p_prev, p, dp_prev, dp = p, p_next, dp, dp_next
        if j + 1 < n:
            total = total + p * p
        big = np.abs(p) > 1e100
        if np.any(big):
            f = np.where(big, 1e-100, 1.0)
            p, p_prev, dp, dp_prev = p * f, p_prev * f, dp * f, dp_prev * f
            total = total * f * f
            logscale = logscale + np.where(big, 100.0 * math.log(10.0), 0.0)
    return p, dp, total, logscale


def _next_b(a, b):
    # only the ratio p_n/p_n' is needed for Newton steps, any positive value works
    return b[-1] if b[-1] > 0 else 1.0


def _legendre_nodes(n):
    return gauss_nodes("legendre", n)


@lru_cache(maxsize=256)
def _gauss_cached(kind, n, alpha, beta):
    a, b = recurrence(kind, n, alpha, beta)
    x = eigvalsh_tridiagonal(a, np.sqrt(b[1:]))
    for _ in range(2):
        pn, dpn, _, _ = _christoffel(x, a, b)
        step = np.where(dpn != 0, pn / np.where(dpn != 0, dpn, 1.0), 0.0)
        # reject steps that leave the local bracket
        x = np.where(np.abs(step) < 1e-6 * (1 + np.abs(x)), x - step, x)
    _, _, total, logscale = _christoffel(x, a, b)
    w = np.exp(-2.0 * logscale) / total
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_nodes(kind: str, n: int, alpha: float = 0.0, beta: float = 0.0):
    """Gauss nodes and weights for ``kind`` (see :func:`recurrence`).

    >>> x, w = gauss_nodes("legendre", 2)
    >>> [round(float(v), 12) for v in x], [round(float(v), 12) for v in w]
    ([-0.57735026919, 0.57735026919], [1.0, 1.0])
    """
    if not 1 <= n <= 512:
        raise ValueError(f"number of nodes must lie in [1, 512], got {n}")
    return _gauss_cached(kind, int(n), float(alpha), float(beta))


# ---------------------------------------------------------------------------
# composite integration on (0, inf)


def _panel_edges(cfg: QuadratureConfig):
    R = cfg.split_radius
    geo = [0.0]
    e = 1e-12
    while e < min(1.0, R):
        geo.append(e)
        e *= 4.0
    body = np.arange(1.0, R + 1e-12, 1.0) if R >= 1 else np.array([R])
    return np.unique(np.concatenate([geo, body, [R]]))


def _rule_on(edges, order):
    t, w = gauss_nodes("legendre", order)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
    wx = 0.5 * (hi - lo) * w
    return x, wx


def _split(edges):
    mids = 0.5 * (edges[:-1] + edges[1:])
    return np.sort(np.concatenate([edges, mids]))


def _panel_sums(fn, x, wx):
    """Per-panel integrals, shape (..., n_panels)."""
    vals = np.asarray(fn(x.ravel()), dtype=float)
    lead = vals.shape[:-1]
    vals = vals.reshape(lead + x.shape)
    return np.sum(vals * wx, axis=-1)


def _finite_part(fn, edges, cfg):
    order = cfg.panel_order
    low = max(order // 2, 2)
    for _ in range(40):
        x, wx = _rule_on(edges, order)
        panels = _panel_sums(fn, x, wx)
        hi_val = panels.sum(axis=-1)
        lo_val = _panel_sums(fn, *_rule_on(edges, low)).sum(axis=-1)
        err = np.abs(hi_val - lo_val)
        tol = np.maximum(cfg.rel_tol * np.abs(hi_val), cfg.abs_tol)
        # r^theta with theta near -1 keeps mass in [0, edges[1]]: grade further toward 0
        inner = np.abs(panels[..., 0])
        if np.any(inner > 0.01 * tol):
            if edges[1] > 1e-300 and len(edges) + 40 <= cfg.max_panels:
                finer = edges[1] * 0.25 ** np.arange(40, 0, -1)
                edges = np.concatenate([[0.0], finer[finer > 1e-300], edges[1:]])
                continue
            err = err + inner
        if np.all(err <= tol) or 2 * (len(edges) - 1) > cfg.max_panels:
            break
        edges = _split(edges)
    return hi_val, err, x.ravel(), wx.ravel()


def _tail_part(fn, cfg):
    """Integral over (R, inf) in the variable s = log(r / R)."""
    R = cfg.split_radius
    order = cfg.panel_order
    t, w = gauss_nodes("legendre", order)
    low_t, low_w = gauss_nodes("legendre", max(order // 2, 2))

    def nodes(s0, s1, tt, ww):
        s = 0.5 * (s1 - s0) * tt + 0.5 * (s1 + s0)
        r = R * np.exp(s)
        return r, 0.5 * (s1 - s0) * ww * r

    total = None
    err = None
    quiet = 0
    s0 = 0.0
    xs, ws = [], []
    for _ in range(cfg.max_panels):
        s1 = s0 + 0.5
        r, wr = nodes(s0, s1, t, w)
        hi_val = np.sum(np.asarray(fn(r), dtype=float) * wr, axis=-1)
        r_lo, wr_lo = nodes(s0, s1, low_t, low_w)
        lo_val = np.sum(np.asarray(fn(r_lo), dtype=float) * wr_lo, axis=-1)
        xs.append(r)
        ws.append(wr)
        if total is None:
            total = np.zeros_like(hi_val)
            err = np.zeros_like(hi_val)
        total = total + hi_val
        err = err + np.abs(hi_val - lo_val)
        if np.all(np.abs(hi_val) <= 1e-18 * np.maximum(1.0, np.abs(total))):
            quiet += 1
            if quiet >= 2:
                return total, err, np.concatenate(xs), np.concatenate(ws)
        else:
            quiet = 0
        s0 = s1
        if s0 > 200.0:
            break
    raise AccuracyError("tail integral did not decay", total, err)


def adapted_rule(fn: Callable[[np.ndarray], np.ndarray], cfg: QuadratureConfig | None = None):
    """Run the adaptive scheme on ``fn`` and return ``(x, w, value, err)``.

    The nodes can be reused for integrands close to ``fn`` (a smooth
    parametric family, say) as a plain dot product.
    """
    cfg = cfg or DEFAULT_QUAD
    body, body_err, xb, wb = _finite_part(fn, _panel_edges(cfg), cfg)
    tail, tail_err, xt, wt = _tail_part(fn, cfg)
    return np.concatenate([xb, xt]), np.concatenate([wb, wt]), body + tail, body_err + tail_err


def integrate(fn: Callable[[np.ndarray], np.ndarray], cfg: QuadratureConfig | None = None,
              *, raise_on_fail: bool = True):
    """Integrate ``fn`` over (0, inf).

    ``fn`` maps a 1-D array of radii to an array whose last axis matches it,
    so several integrands can be integrated on one set of nodes.  Returns
    ``(value, err_est)`` with the same leading shape.
    """
    cfg = cfg or DEFAULT_QUAD
    _, _, value, err = adapted_rule(fn, cfg)
    tol = np.maximum(cfg.rel_tol * np.abs(value), cfg.abs_tol)
    if raise_on_fail and np.any(err > tol):
        raise AccuracyError(
            f"quadrature error estimate {np.max(err):.3e} exceeds tolerance", value, err
        )
    return value, err


def integrate_weighted(g: Callable[[np.ndarray], np.ndarray], w: WeightSpec,
                       cfg: QuadratureConfig | None = None):
    """``(value, err_est)`` of the integral of ``g(r) * w(r)`` over (0, inf)."""
    value, err = integrate(lambda r: np.asarray(g(r)) * w(r), cfg)
    if np.ndim(value) == 0:
        return float(value), float(err)
    return value, err


def exact_moment(w: WeightSpec) -> float:
    """Closed form of the integral of ``w`` over (0, inf)."""
    if w.decay == "none":
        raise ValueError("moment of a weight without decay diverges")
    if w.theta <= -1:
        raise ValueError("theta must exceed -1")
    if w.decay == "exp":
        return math.exp(gammaln(w.theta + 1.0) - (w.theta + 1.0) * math.log(w.rate))
    half = 0.5 * (w.theta + 1.0)
    return 0.5 * math.exp(gammaln(half) - half * math.log(w.rate))
