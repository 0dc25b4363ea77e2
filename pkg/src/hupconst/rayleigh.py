"""Rayleigh-quotient minimization over spectral bases and the constant drivers.

Hydrogen (mode k): inf over v of [lap_sq + grad_sq]_k / [grad_over_r]_k.
Stability (mode k >= 1): inf over v of I_{N,k}(v) / Q_k(v), whose closed form
is gamma_k = sqrt((N + 2k)^2 - 8k) - N.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .basis import Basis
from .eigen import (
    B_CONDITION_CUTOFF,
    ConditioningError,
    ConvergenceError,
    GeneralizedEigenResult,
    gen_eig_deflated,
    gen_eig_smallest,
)
from .forms import ModeExpansion, QuadraticFormSpec, deficits, eval_form, make_form
from .profiles import RadialProfile, exp_poly, poly_gauss
from .quad import DEFAULT_QUAD, QuadratureConfig
from .special import KummerParams, psi_profile

__all__ = [
    "ConvergenceProtocol",
    "ModeConstant",
    "ConstantReport",
    "assemble",
    "mode_basis",
    "mode_forms",
    "mode_constant",
    "hydrogen_constant",
    "stability_constant",
    "hydrogen_target",
    "stability_target",
    "t_polynomial",
    "gamma_k",
    "a_k",
    "b_k_gamma",
    "stability_extremal",
    "extremal_check",
    "radial_samples",
    "sampled_radial_stability",
    "hydrogen_stability_explorer",
]

PROBLEMS = ("hydrogen", "stability")

# hydrogen mode 0 has the exponential extremal (1 + r) e^{-r}; the higher
# hydrogen modes and all stability modes have algebraically decaying minimizers
_DEFAULT_KIND = {"hydrogen": ("laguerre_exp", "algebraic_map"), "stability": ("algebraic_map",) * 2}
_DEFAULT_SCALES = {
    "laguerre_exp": (0.25, 0.5, 1.0, 2.0),
    "algebraic_map": (0.5, 1.0, 2.0, 4.0),
    "hermite_gauss": (0.25, 0.5, 1.0),
}


@dataclass(frozen=True)
class ConvergenceProtocol:
    sizes: tuple[int, ...] = (10, 20, 40, 80)
    scales: tuple[float, ...] | None = None  # None: problem default
    tol: float = 1e-7
    cond_cutoff: float = B_CONDITION_CUTOFF
    basis_kind: str | None = None

    def __post_init__(self):
        if len(self.sizes) < 2 or any(n < 2 for n in self.sizes):
            raise ValueError("need at least two basis sizes, each >= 2")
        if list(self.sizes) != sorted(set(self.sizes)):
            raise ValueError("basis sizes must be strictly increasing")
        if self.scales is not None and (not self.scales or any(s <= 0 for s in self.scales)):
            raise ValueError("scales must be positive")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")

    def kind_for(self, problem: str, k: int = 1) -> str:
        return self.basis_kind or _DEFAULT_KIND[problem][min(k, 1)]

    def scales_for(self, problem: str, k: int = 1) -> tuple[float, ...]:
        if self.scales is not None:
            return tuple(self.scales)
        return _DEFAULT_SCALES[self.kind_for(problem, k)]


@dataclass(frozen=True)
class RunRecord:
    n: int
    s: float
    value: float
    b_condition: float
    residual: float
    trusted: bool

    def as_dict(self):
        return {"n": self.n, "s": self.s, "value": self.value, "b_condition": self.b_condition,
                "residual": self.residual, "trusted": self.trusted}


@dataclass
class ModeConstant:
    N: int
    k: int
    problem: str
    value: float
    converged: bool
    convergence: list[RunRecord] = field(default_factory=list)
    gamma_target: float | None = None
    basis_kind: str = ""
    best_scale: float | None = None

    @property
    def A_k(self) -> float:
        return a_k(self.N, self.k)

    @property
    def B_kgamma(self) -> float | None:
        if self.gamma_target is None:
            return None
        return b_k_gamma(self.N, self.k, self.gamma_target)


@dataclass
class ConstantReport:
    name: str
    N: int
    computed: float
    target_kind: str  # point | interval | none
    target: float | tuple[float, float] | None
    per_mode: dict[int, float] = field(default_factory=dict)
    converged: bool = True
    basis: dict = field(default_factory=dict)
    convergence: list[dict] = field(default_factory=list)
    runtime: float = 0.0
    exploratory: bool = False
    argmin_mode: int | None = None
    point_tol: float = 1e-5

    @property
    def abs_err(self) -> float | None:
        if self.target_kind == "point":
            return abs(self.computed - self.target)
        if self.target_kind == "interval":
            lo, hi = self.target
            return max(lo - self.computed, self.computed - hi, 0.0)
        return None

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.computed):
            return False
        if self.target_kind == "point":
            return self.abs_err <= self.point_tol
        if self.target_kind == "interval":
            return self.abs_err <= 1e-6
        return self.computed > 0 if self.exploratory else True


# ---------------------------------------------------------------------------
# closed forms


def a_k(N: int, k: int) -> float:
    return N + 2 * k - 1


def b_k_gamma(N: int, k: int, gamma: float) -> float:
    return N + k + 0.5 * gamma


def t_polynomial(N: int, k: int, gamma: float) -> float:
    """T_k(gamma) = (N - 2 + k) k - (N/2) gamma - gamma^2 / 4."""
    return (N - 2 + k) * k - 0.5 * N * gamma - 0.25 * gamma * gamma


def gamma_k(N: int, k: int) -> float:
    """Positive root of T_k, the mode-k stability constant."""
    return math.sqrt((N + 2 * k) ** 2 - 8 * k) - N


def stability_target(N: int) -> float:
    return math.sqrt(N * N + 4 * N - 4) - N


def hydrogen_target(N: int):
    """(kind, value) of the known additive hydrogen constant."""
    if N >= 4:
        return "point", float(N + 1)
    if N == 3:
        return "interval", (3.5, 4.0 * math.sqrt(21.0) / 5.0)
    if N == 2:
        return "interval", ((3.0 + 6.0 * math.sqrt(2.0)) / 7.0, math.sqrt(3.0))
    raise ValueError("dimension must be at least 2")


# ---------------------------------------------------------------------------
# assembly and mode constants


def assemble(form: QuadraticFormSpec, basis: Basis, cfg: QuadratureConfig | None = None) -> np.ndarray:
    """Gram matrix of a form over a basis; exact rules when available."""
    rows = form.as_tuples()
    if basis.supports_exact(rows):
        return basis.gram(rows)
    return basis.gram_quad(rows, cfg)


def mode_forms(N: int, k: int, problem: str) -> tuple[QuadraticFormSpec, QuadraticFormSpec]:
    if problem == "hydrogen":
        return make_form("hydrogen_num", N, k), make_form("hydrogen_den", N, k)
    if problem == "stability":
        return make_form("I", N, k), make_form("Q", N, k)
    raise ValueError(f"unknown problem {problem!r}")


def mode_basis(N: int, k: int, kind: str, n: int, s: float, problem: str = "stability") -> Basis:
    """Orthogonal basis adapted to mode k: b0 matches the leading power of the
    denominator weight, and the algebraic envelope decays just fast enough for
    every term of the forms to be integrable."""
    m = N + 2 * k
    if kind == "laguerre_exp":
        return Basis(kind, n, s, b0=max(m - 2, 0), polys="orthogonal")
    if kind == "hermite_gauss":
        return Basis(kind, n, s, b0=m - 1, polys="orthogonal")
    if kind == "algebraic_map":
        if problem == "hydrogen":
            return Basis(kind, n, s, b0=m - 2, polys="orthogonal", power=0.5 * m)
        return Basis(kind, n, s, b0=m - 1, polys="orthogonal", power=0.5 * (m + 1))
    raise ValueError(f"unknown basis kind {kind!r}")


def _needs_flat_origin(N, k, problem):
    # the r^{-1} |v'|^2 term of the N = 2 radial mode is finite only if v'(0) = 0
    return problem == "hydrogen" and N == 2 and k == 0


def _solve_mode(N, k, problem, basis, num, den, shift=0.0, deflate=None):
    A = basis.gram(num.as_tuples())
    B = basis.gram(den.as_tuples())
    if shift:
        A = A - shift * B
    functionals = []
    if _needs_flat_origin(N, k, problem):
        functionals.append(basis.values_at_zero(1))
    if deflate is not None:
        functionals.append(deflate)
    if functionals:
        return gen_eig_deflated(A, B, functionals=functionals)
    return gen_eig_smallest(A, B)


def _protocol_runs(N, k, problem, protocol, shift=0.0, deflate_profile=None):
    kind = protocol.kind_for(problem, k)
    num, den = mode_forms(N, k, problem)
    records: list[RunRecord] = []
    per_n: list[tuple[float, float | None]] = []
    for n in protocol.sizes:
        best, best_s = math.inf, None
        for s in protocol.scales_for(problem, k):
            basis = mode_basis(N, k, kind, n, s, problem)
            deflate = None
            if deflate_profile is not None:
                deflate = basis.cross(den.as_tuples(), deflate_profile)
            try:
                res: GeneralizedEigenResult = _solve_mode(N, k, problem, basis, num, den, shift, deflate)
            except ConditioningError:
                records.append(RunRecord(n, s, math.nan, math.inf, math.nan, False))
                continue
            trusted = res.b_condition <= protocol.cond_cutoff and res.trusted
            records.append(RunRecord(n, s, res.lambda_min, res.b_condition, res.residual, trusted))
            if trusted and res.lambda_min < best:
                best, best_s = res.lambda_min, s
        per_n.append((best, best_s))
        if _agree(per_n, protocol.tol):
            break
    return kind, records, per_n


def _agree(per_n, tol):
    if len(per_n) < 2:
        return False
    (prev, _), (cur, _) = per_n[-2], per_n[-1]
    return math.isfinite(prev) and math.isfinite(cur) and abs(cur - prev) < tol


def _accept(per_n, tol):
    """(value, scale, converged) from the per-size best trusted values."""
    finite = [(v, s) for v, s in per_n if math.isfinite(v)]
    if not finite:
        return None, None, False
    value, s = finite[-1]
    return value, s, _agree(per_n, tol)


def mode_constant(N: int, k: int, problem: str, protocol: ConvergenceProtocol | None = None,
                  *, strict: bool = True) -> ModeConstant:
    """Smallest generalized eigenvalue for mode k, swept over basis sizes and scales.

    With ``strict`` a non-converged sweep raises ConvergenceError whose
    ``best`` attribute is the (unconverged) ModeConstant.
    """
    protocol = protocol or ConvergenceProtocol()
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if N < 2 or k < 0:
        raise ValueError("need N >= 2 and k >= 0")
    if problem == "stability" and k < 1:
        raise ValueError("radial stability has no eigenproblem form; use sampled_radial_stability")
    kind, records, per_n = _protocol_runs(N, k, problem, protocol)
    value, s, converged = _accept(per_n, protocol.tol)
    if value is None:
        raise ConditioningError(f"no trusted run for N={N}, k={k}, {problem}")
    gamma = gamma_k(N, k) if problem == "stability" else None
    result = ModeConstant(N, k, problem, float(value), converged, records, gamma, kind, s)
    if strict and not converged:
        raise ConvergenceError(
            f"{problem} mode constant N={N}, k={k} did not reach tol {protocol.tol}", best=result
        )
    return result


def _mode_or_best(N, k, problem, protocol):
    try:
        return mode_constant(N, k, problem, protocol)
    except ConvergenceError as exc:
        return exc.best


def _report_from_modes(name, N, modes, target_kind, target, protocol, problem, t0, **extra):
    per_mode = {m.k: m.value for m in modes}
    arg = min(per_mode, key=per_mode.get)
    conv = []
    for m in modes:
        for rec in m.convergence:
            row = rec.as_dict()
            row["mode"] = m.k
            conv.append(row)
    return ConstantReport(
        name=name,
        N=N,
        computed=per_mode[arg],
        target_kind=target_kind,
        target=target,
        per_mode=per_mode,
        converged=all(m.converged for m in modes),
        basis={"kinds": {m.k: m.basis_kind for m in modes}, "sizes": list(protocol.sizes),
               "scales": {m.k: list(protocol.scales_for(problem, m.k)) for m in modes},
               "tol": protocol.tol},
        convergence=conv,
        runtime=time.perf_counter() - t0,
        argmin_mode=arg,
        **extra,
    )


def hydrogen_constant(N: int, k_max: int = 4, protocol: ConvergenceProtocol | None = None) -> ConstantReport:
    """Additive hydrogen constant H_N^+ = min over modes; H_N is half of it."""
    if N < 2 or k_max < 2:
        raise ValueError("need N >= 2 and k_max >= 2")
    protocol = protocol or ConvergenceProtocol()
    t0 = time.perf_counter()
    modes = [_mode_or_best(N, k, "hydrogen", protocol) for k in range(k_max + 1)]
    kind, target = hydrogen_target(N)
    return _report_from_modes(f"hydrogen_H+_N{N}", N, modes, kind, target, protocol, "hydrogen", t0)


def stability_constant(N: int, k_max: int = 4, protocol: ConvergenceProtocol | None = None) -> ConstantReport:
    """Additive stability constant S_{0,+} = min over k >= 1 of C_{N,k}."""
    if N < 2 or k_max < 1:
        raise ValueError("need N >= 2 and k_max >= 1")
    protocol = protocol or ConvergenceProtocol()
    t0 = time.perf_counter()
    modes = [_mode_or_best(N, k, "stability", protocol) for k in range(1, k_max + 1)]
    return _report_from_modes(f"stability_S0+_N{N}", N, modes, "point", stability_target(N),
                              protocol, "stability", t0)


# ---------------------------------------------------------------------------
# extremals


def stability_extremal(N: int, k: int) -> RadialProfile:
    """The 1F1 profile solving r v'' + r^2 v' + A_k v' + B r v = 0 at gamma = gamma_k."""
    g = gamma_k(N, k)
    return psi_profile(KummerParams(0.5 * b_k_gamma(N, k, g), 0.5 * (a_k(N, k) + 1.0)))


HYDROGEN_EXTREMAL = exp_poly([1.0, 1.0], 1.0)


def extremal_check(N: int, k: int, problem: str, cfg: QuadratureConfig | None = None) -> float:
    """|numerator(v) - target * denominator(v)| / denominator(v) at the closed-form extremal."""
    cfg = cfg or DEFAULT_QUAD
    num, den = mode_forms(N, k, problem)
    if problem == "stability":
        if k < 1:
            raise ValueError("stability extremals exist for k >= 1")
        v, target = stability_extremal(N, k), gamma_k(N, k)
    elif problem == "hydrogen":
        if k != 0 or N < 4:
            raise ValueError("the hydrogen extremal is known for k = 0, N >= 4")
        v, target = HYDROGEN_EXTREMAL, float(N + 1)
    else:
        raise ValueError(f"unknown problem {problem!r}")
    d = eval_form(den, v, cfg)
    return abs(eval_form(num, v, cfg) - target * d) / d


# ---------------------------------------------------------------------------
# radial stability sampling


def radial_samples(trials: int, seed: int) -> list[RadialProfile]:
    """Radial test profiles: even polynomials times Gaussians, mixed.

    Even polynomials keep v'(0) = 0, so every sample is smooth at the origin.
    """
    rng = np.random.default_rng(seed)
    out: list[RadialProfile] = [poly_gauss([1.0], 0.5) + poly_gauss([0.0, 0.0, 0.1], 1.0)]
    while len(out) < trials:
        parts = []
        for _ in range(int(rng.integers(1, 4))):
            deg = int(rng.integers(0, 3))
            coeffs = np.zeros(2 * deg + 1)
            coeffs[::2] = rng.normal(size=deg + 1)
            parts.append(poly_gauss(coeffs, float(rng.uniform(0.2, 2.0))))
        prof = parts[0]
        for p in parts[1:]:
            prof = prof + p
        out.append(prof)
    return out[:trials]


@dataclass(frozen=True)
class RadialStabilitySample:
    min_ratio: float
    ratios: tuple[float, ...]
    skipped: int


def sampled_radial_stability(N: int, trials: int = 200, seed: int = 0,
                             cfg: QuadratureConfig | None = None, *, detail: bool = False):
    """min over sampled radial u of delta_2(u) / d_0(u, Sigma_0)^2.

    Samples lying in the Gaussian cone (zero distance) are skipped.
    """
    from .cone import gaussian_cone_distance

    if trials < 1:
        raise ValueError("need at least one trial")
    ratios = []
    skipped = 0
    for v in radial_samples(trials, seed):
        u = ModeExpansion.single(N, 0, v)
        d0, _, _ = gaussian_cone_distance(u, cfg)
        g = eval_form(make_form("Q", N, 0), v, cfg)
        if d0 * d0 <= 1e-12 * g:
            skipped += 1
            continue
        ratios.append(deficits(u, "delta2", cfg) / (d0 * d0))
    best = min(ratios) if ratios else math.nan
    if detail:
        return RadialStabilitySample(best, tuple(ratios), skipped)
    return best


# ---------------------------------------------------------------------------
# hydrogen stability exploration


def hydrogen_stability_explorer(N: int, k_max: int = 4, protocol: ConvergenceProtocol | None = None) -> ConstantReport:
    """Per-mode candidates for the hydrogen stability constant (no known target).

    For k >= 1 the deficit pencil is (num - (N+1) den, den); mode 0 is
    restricted to the den-orthogonal complement of (1 + r) e^{-r}.
    """
    if N < 4:
        raise ValueError("the hydrogen stability question is posed for N >= 4")
    protocol = protocol or ConvergenceProtocol()
    t0 = time.perf_counter()
    modes = []
    for k in range(k_max + 1):
        deflate = HYDROGEN_EXTREMAL if k == 0 else None
        kind, records, per_n = _protocol_runs(N, k, "hydrogen", protocol, shift=N + 1.0,
                                              deflate_profile=deflate)
        value, s, converged = _accept(per_n, protocol.tol)
        if value is None:
            raise ConditioningError(f"no trusted run for explorer mode {k}")
        modes.append(ModeConstant(N, k, "hydrogen", float(value), converged, records, None, kind, s))
    rep = _report_from_modes(f"hydrogen_stability_candidate_N{N}", N, modes, "none", None,
                             protocol, "hydrogen", t0, exploratory=True)
    return rep
