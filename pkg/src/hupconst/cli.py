"""Command-line driver: sharp constants, verification suites and reports.

Every command writes a report (JSON or CSV) even when a check fails; the exit
status is 0 only if every row passes.  Reports contain no timings, so equal
configurations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__
from .cone import random_cone, sphere_slice_distance, sphere_vs_cone_check
from .eigen import ConditioningError
from .forms import ModeExpansion, crosscheck_cases, crosscheck_radial_identity, deficits, fullspace
from .hardy import BoundaryError, deficit_identity_check, derive_weight, exp_pair, hamamoto_check, power_pair, shipped_pairs
from .linearize import equivalence_check, random_expansions
from .profiles import PolyExpGauss, exp_poly, gauss
from .quad import QuadratureConfig
from .rayleigh import (
    ConstantReport,
    ConvergenceProtocol,
    extremal_check,
    gamma_k,
    hydrogen_constant,
    hydrogen_stability_explorer,
    sampled_radial_stability,
    stability_constant,
)

CONFIG_ENV = "HUPCONST_CONFIG"

HYDROGEN_DIMS = (2, 3, 4, 5, 6, 7, 8)
STABILITY_DIMS = (2, 3, 4, 5, 6)

VERIFY_SUITES = ("hardy", "extremal", "cone-sphere", "radial-identity", "linearize", "stability-sample")
# names accepted for compatibility with the published suite list
SUITE_ALIASES = {"lemma14": "cone-sphere", "lemma21": "radial-identity"}


@dataclass
class RunConfig:
    dims: list[int] | None = None
    modes: int = 4
    tol: float = 1e-7
    basis_sizes: list[int] = field(default_factory=lambda: [10, 20, 40, 80])
    scales: list[float] | None = None
    seed: int = 0
    trials: int | None = None
    quad_rel_tol: float = 1e-10
    quad_abs_tol: float = 1e-14
    format: str = "json"
    out: str = "-"

    def __post_init__(self):
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")
        if self.modes < 1:
            raise ValueError("modes must be at least 1")

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**data)

    def protocol(self) -> ConvergenceProtocol:
        scales = tuple(self.scales) if self.scales else None
        return ConvergenceProtocol(sizes=tuple(self.basis_sizes), scales=scales, tol=self.tol)

    def quad(self) -> QuadratureConfig:
        return QuadratureConfig(rel_tol=self.quad_rel_tol, abs_tol=self.quad_abs_tol)

    def echo(self) -> dict:
        # the output location does not affect results and would break byte equality
        d = asdict(self)
        d.pop("out")
        return d


# ---------------------------------------------------------------------------
# rows


def _clean(x):
    """JSON-safe, deterministic representation."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def make_row(name, *, dim=None, mode=None, value, target_kind="none", target=None, tol=None,
             passed: bool, convergence=None, **detail) -> dict:
    if target_kind == "point" and value is not None and target is not None:
        abs_err = abs(value - target)
    elif target_kind == "interval" and value is not None:
        abs_err = max(target[0] - value, value - target[1], 0.0)
    else:
        abs_err = None
    row = {
        "name": name,
        "dim": dim,
        "mode": mode,
        "value": value,
        "target_kind": target_kind,
        "target": list(target) if isinstance(target, tuple) else target,
        "abs_err": abs_err,
        "tol": tol,
        "status": "pass" if passed else "fail",
        "convergence": convergence or [],
    }
    detail = {k: v for k, v in detail.items() if v is not None}
    if detail:
        row["detail"] = detail
    return _clean(row)


def error_row(name, exc: Exception, dim=None, mode=None) -> dict:
    return make_row(name, dim=dim, mode=mode, value=None, passed=False, error=f"{type(exc).__name__}: {exc}")


def _constant_rows(rep: ConstantReport, per_mode_target: Callable[[int], float] | None = None) -> list[dict]:
    rows = []
    conv_by_mode: dict[int, list] = {}
    for rec in rep.convergence:
        rec = dict(rec)
        conv_by_mode.setdefault(rec.pop("mode"), []).append(rec)
    for k, value in sorted(rep.per_mode.items()):
        conv = conv_by_mode.get(k, [])
        if per_mode_target is not None:
            t = per_mode_target(k)
            rows.append(make_row(f"{rep.name}_mode", dim=rep.N, mode=k, value=value, target_kind="point",
                                 target=t, tol=rep.point_tol, passed=abs(value - t) <= rep.point_tol,
                                 convergence=conv))
        else:
            ok = value > 0 if rep.exploratory else rep.converged
            rows.append(make_row(f"{rep.name}_mode", dim=rep.N, mode=k, value=value, passed=ok,
                                 convergence=conv, exploratory=rep.exploratory or None))
    detail = {"basis": rep.basis, "converged": rep.converged}
    if rep.exploratory:
        detail["exploratory"] = True
    if rep.target_kind == "interval":
        lo, hi = rep.target
        detail["bracket_width"] = hi - lo
        detail["position_in_bracket"] = (rep.computed - lo) / (hi - lo)
        detail["sharpened_width"] = _spread(conv_by_mode.get(rep.argmin_mode, []))
    tol = rep.point_tol if rep.target_kind == "point" else (1e-6 if rep.target_kind == "interval" else None)
    rows.append(make_row(rep.name, dim=rep.N, mode=rep.argmin_mode, value=rep.computed,
                         target_kind=rep.target_kind, target=rep.target, tol=tol,
                         passed=rep.passed and (rep.converged or rep.exploratory), **detail))
    return rows


def _spread(conv):
    """Change between the two largest trusted basis sizes, taking the best scale at each size."""
    trusted = [c for c in conv if c["trusted"]]
    if len(trusted) < 2:
        return None
    by_n: dict[int, float] = {}
    for c in trusted:
        by_n[c["n"]] = min(by_n.get(c["n"], math.inf), c["value"])
    ns = sorted(by_n)
    if len(ns) < 2:
        return None
    return abs(by_n[ns[-1]] - by_n[ns[-2]])


# ---------------------------------------------------------------------------
# commands


def cmd_constants(target: str, cfg: RunConfig) -> list[dict]:
    if target not in ("hydrogen", "stability"):
        raise ValueError(f"unknown target {target!r}")
    rows = []
    default_dims = HYDROGEN_DIMS if target == "hydrogen" else STABILITY_DIMS
    for N in cfg.dims or list(default_dims):
        if N < 2:
            rows.append(error_row(f"{target}_constant", ValueError("need N >= 2"), dim=N))
            continue
        try:
            if target == "hydrogen":
                rep = hydrogen_constant(N, max(cfg.modes, 2), cfg.protocol())
            else:
                rep = stability_constant(N, cfg.modes, cfg.protocol())
        except (ArithmeticError, ConditioningError) as exc:
            rows.append(error_row(f"{target}_constant", exc, dim=N))
            continue
        per_mode = (lambda k, N=N: gamma_k(N, k)) if target == "stability" else None
        rows.extend(_constant_rows(rep, per_mode))
    return rows


def cmd_explore(target: str, cfg: RunConfig) -> list[dict]:
    if target != "hydrogen-stability":
        raise ValueError(f"unknown exploration {target!r}")
    rows = []
    for N in cfg.dims or [4]:
        if N < 4:
            raise ValueError("hydrogen-stability exploration needs N >= 4")
        try:
            rep = hydrogen_stability_explorer(N, cfg.modes, cfg.protocol())
        except (ArithmeticError, ConditioningError) as exc:
            rows.append(error_row("hydrogen_stability_candidate", exc, dim=N))
            continue
        rows.extend(_constant_rows(rep))
    return rows


def _suite_hardy(cfg: RunConfig) -> list[dict]:
    rows = []
    q = cfg.quad()
    displayed = [
        ("hardy_weight_power_theta", power_pair(Fraction(7, 2)),
         [(Fraction(25, 16), Fraction(3, 2), 0)]),
        ("hardy_weight_exp_4_1", exp_pair(4, 1), [(-4, 3, 2), (1, 4, 2)]),
        ("hardy_weight_exp_3_1/3", exp_pair(3, Fraction(1, 3)), [(-1, 2, 2), (Fraction(5, 9), 3, 2)]),
    ]
    for name, pair, expected in displayed:
        got = [t.as_tuple() for t in derive_weight(pair)]
        ok = got == [tuple(Fraction(x) for x in e) for e in expected]
        rows.append(make_row(name, value=0.0 if ok else 1.0, target_kind="point", target=0.0, tol=0.0,
                             passed=ok, terms=[[str(x) for x in t] for t in got]))
    for theta in (2, 3, 4, 5):
        got = [t.as_tuple() for t in derive_weight(power_pair(theta))]
        ok = got == [(Fraction((theta - 1) ** 2, 4), Fraction(theta - 2), 0)]
        rows.append(make_row(f"hardy_weight_power_{theta}", value=0.0 if ok else 1.0, target_kind="point",
                             target=0.0, tol=0.0, passed=ok))

    n_profiles = cfg.trials or 100
    profiles = hardy_profiles(n_profiles, cfg.seed)
    for pair in shipped_pairs():
        worst, worst_ineq = 0.0, math.inf
        for v in profiles:
            lhs, rhs, deficit = deficit_identity_check(pair, v, q)
            worst = max(worst, abs(lhs - rhs - deficit) / (1.0 + abs(lhs)))
            worst_ineq = min(worst_ineq, lhs - rhs)
        rows.append(make_row(f"hardy_deficit[{pair.label()}]", value=worst, target_kind="point", target=0.0,
                             tol=1e-9, passed=worst <= 1e-9 and worst_ineq >= -1e-9,
                             profiles=n_profiles, min_lhs_minus_rhs=worst_ineq))
    for mu, eps, f, name in ((2.0, 1.0, exp_poly([1.0], 1.0), "e^-r"),
                             (2.0, 0.0, exp_poly([0.0, 1.0], 1.0), "r e^-r")):
        lhs, rhs, ok = hamamoto_check(mu, eps, f, q)
        rows.append(make_row(f"hamamoto[mu={mu},eps={eps},f={name}]", value=lhs - rhs, passed=ok,
                             lhs=lhs, rhs=rhs))
    try:
        hamamoto_check(2.0, 1.1, exp_poly([1.0], 1.0), q)
        rejected = False
    except ValueError:
        rejected = True
    rows.append(make_row("hamamoto_precondition[eps>mu^2/4]", value=None, passed=rejected))
    return rows


def hardy_profiles(count: int, seed: int) -> list[PolyExpGauss]:
    """Seeded r p(r) e^{-b r} profiles: v(0) = 0 so every shipped pair has vanishing boundary terms."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        deg = int(rng.integers(0, 4))
        coeffs = np.concatenate([[0.0], rng.uniform(-1.0, 1.0, deg + 1)])
        coeffs[1] = 1.0
        out.append(exp_poly(coeffs, float(rng.uniform(0.5, 2.5))))
    return out


def _suite_extremal(cfg: RunConfig) -> list[dict]:
    q = cfg.quad()
    rows = []
    for N in (4, 5, 6, 7, 8):
        r = extremal_check(N, 0, "hydrogen", q)
        rows.append(make_row("hydrogen_extremal_residual", dim=N, mode=0, value=r, target_kind="point",
                             target=0.0, tol=1e-9, passed=r <= 1e-9))
    for N in STABILITY_DIMS:
        r = extremal_check(N, 1, "stability", q)
        rows.append(make_row("stability_extremal_residual", dim=N, mode=1, value=r, target_kind="point",
                             target=0.0, tol=1e-7, passed=r <= 1e-7))
    for N in STABILITY_DIMS:
        u = ModeExpansion.single(N, 0, gauss(1.0, 0.5))
        r = abs(deficits(u, "delta2", q)) / fullspace(u, "grad_sq", q)
        rows.append(make_row("gaussian_delta2_residual", dim=N, mode=0, value=r, target_kind="point",
                             target=0.0, tol=1e-9, passed=r <= 1e-9))
    return rows


def _suite_cone_sphere(cfg: RunConfig) -> list[dict]:
    trials = cfg.trials or 10_000
    rng = np.random.default_rng(cfg.seed)
    worst = -math.inf
    failures = 0
    for _ in range(trials):
        d = int(rng.integers(2, 11))
        cone = random_cone(rng, d, int(rng.integers(1, 5)), 3)
        u = rng.standard_normal(d) * math.exp(rng.uniform(-3.0, 3.0))
        lhs, rhs, ok = sphere_vs_cone_check(u, cone)
        worst = max(worst, (lhs - rhs) / max(1.0, rhs))
        failures += not ok
    rows = [make_row("cone_sphere_inequality", value=worst, passed=failures == 0, trials=trials,
                     failures=failures)]
    # u orthogonal to every component: both sides equal sqrt(2) |u|
    worst_eq = 0.0
    for _ in range(200):
        d = int(rng.integers(3, 11))
        cone = random_cone(rng, d, int(rng.integers(1, 3)), 1)
        basis = np.vstack(cone.components)
        q, _ = np.linalg.qr(basis.T, mode="complete")
        free = q[:, basis.shape[0]:]
        if free.shape[1] == 0:
            continue
        u = free @ rng.standard_normal(free.shape[1])
        lhs, rhs, _ = sphere_vs_cone_check(u, cone)
        worst_eq = max(worst_eq, abs(lhs - rhs))
    rows.append(make_row("cone_sphere_equality_orthogonal", value=worst_eq, target_kind="point", target=0.0,
                         tol=1e-12, passed=worst_eq <= 1e-12))
    return rows


def _suite_radial_identity(cfg: RunConfig) -> list[dict]:
    rows = []
    for N, k, v, which, radius in crosscheck_cases():
        try:
            radial, direct = crosscheck_radial_identity(N, k, v, which, cfg.quad(), radius=radius)
        except (ArithmeticError, ConditioningError) as exc:
            rows.append(error_row(f"radial_identity[{which}]", exc, dim=N, mode=k))
            continue
        rel = abs(radial - direct) / abs(radial)
        rows.append(make_row(f"radial_identity[{which}]", dim=N, mode=k, value=rel, target_kind="point",
                             target=0.0, tol=1e-6, passed=rel <= 1e-6, radial=radial, direct=direct))
    return rows


def _suite_linearize(cfg: RunConfig) -> list[dict]:
    rows = []
    q = cfg.quad()
    expansions = random_expansions(cfg.trials or 50, cfg.seed)
    for problem in ("hydrogen", "hup0"):
        worst = max(equivalence_check(u, problem, q)["relative"] for u in expansions)
        rows.append(make_row(f"linearize_equivalence[{problem}]", value=worst, target_kind="point",
                             target=0.0, tol=1e-8, passed=worst <= 1e-8, expansions=len(expansions)))
    res = equivalence_check(ModeExpansion.single(5, 0, exp_poly([1.0, 1.0], 1.0)), "hydrogen", q)
    ratio = res["additive_min"] / res["P"]
    rows.append(make_row("linearize_hydrogen_extremal_ratio", dim=5, mode=0, value=ratio, target_kind="point",
                         target=6.0, tol=1e-9, passed=abs(ratio - 6.0) <= 1e-9 and res["relative"] <= 1e-9))
    return rows


def _suite_stability_sample(cfg: RunConfig) -> list[dict]:
    rows = []
    for N in cfg.dims or [2, 3]:
        s = sampled_radial_stability(N, cfg.trials or 200, cfg.seed, cfg.quad(), detail=True)
        rows.append(make_row("radial_stability_min_ratio", dim=N, mode=0, value=s.min_ratio,
                             target_kind="interval", target=(2.0, math.inf), tol=1e-6,
                             passed=s.min_ratio >= 2.0 - 1e-6, samples=len(s.ratios), skipped=s.skipped))
    # a pure mode-1 profile sits at the worst case of the sphere/cone comparison
    u = ModeExpansion.single(2, 1, gauss(1.0, 1.0))
    ratio = sphere_slice_distance(u, cfg.quad()) / math.sqrt(fullspace(u, "grad_sq", cfg.quad()))
    rows.append(make_row("sphere_slice_pure_mode1", dim=2, mode=1, value=ratio, target_kind="point",
                         target=math.sqrt(2.0), tol=1e-12, passed=abs(ratio - math.sqrt(2.0)) <= 1e-12))
    return rows


SUITES: dict[str, Callable[[RunConfig], list[dict]]] = {
    "hardy": _suite_hardy,
    "extremal": _suite_extremal,
    "cone-sphere": _suite_cone_sphere,
    "radial-identity": _suite_radial_identity,
    "linearize": _suite_linearize,
    "stability-sample": _suite_stability_sample,
}


def cmd_verify(suite: str, cfg: RunConfig) -> list[dict]:
    suite = SUITE_ALIASES.get(suite, suite)
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    try:
        return SUITES[suite](cfg)
    except (BoundaryError, ArithmeticError, ValueError) as exc:
        return [error_row(f"verify_{suite}", exc)]


def cmd_report(cfg: RunConfig) -> list[dict]:
    """Every constant and every verification suite with suite defaults for dims and trials."""
    base = replace(cfg, dims=None, trials=None)
    rows = cmd_constants("hydrogen", base) + cmd_constants("stability", base)
    for suite in VERIFY_SUITES:
        rows += cmd_verify(suite, base)
    rows += cmd_explore("hydrogen-stability", base)
    return rows


# ---------------------------------------------------------------------------
# output


def render(rows: list[dict], cfg: RunConfig) -> str:
    if cfg.format == "json":
        doc = {"tool_version": __version__, "config_echo": _clean(cfg.echo()), "rows": rows}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    cols = ["name", "dim", "mode", "value", "target_kind", "target", "abs_err", "tol", "status",
            "convergence", "detail"]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for row in rows:
        flat = {c: row.get(c) for c in cols}
        for c in ("target", "convergence", "detail"):
            if isinstance(flat[c], (list, dict)):
                flat[c] = json.dumps(flat[c], sort_keys=True, separators=(",", ":"))
        w.writerow(flat)
    return buf.getvalue()


def write_report(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# argument handling


def _int_list(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x.strip()]


def _float_list(s: str) -> list[float]:
    return [float(x) for x in s.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration (overrides the config file)")
    g.add_argument("--dim", dest="dims", type=_int_list, default=None, help="dimension(s), e.g. 4 or 2,3,4")
    g.add_argument("--modes", type=int, default=None, help="largest angular mode k")
    g.add_argument("--tol", type=float, default=None, help="basis-size agreement tolerance")
    g.add_argument("--basis-sizes", dest="basis_sizes", type=_int_list, default=None)
    g.add_argument("--scales", type=_float_list, default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--trials", type=int, default=None, help="sample count for randomized suites")
    g.add_argument("--format", choices=("json", "csv"), default=None)
    g.add_argument("--out", default=None, help="output path, '-' for stdout")
    g.add_argument("--config", default=None, help=f"JSON config file (default: ${CONFIG_ENV})")

    p = argparse.ArgumentParser(prog="hupconst", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("constants", parents=[common], help="sharp constants by Rayleigh-quotient minimization")
    c.add_argument("target", choices=("hydrogen", "stability"))
    v = sub.add_parser("verify", parents=[common], help="verification suites")
    v.add_argument("suite", choices=VERIFY_SUITES + tuple(SUITE_ALIASES))
    e = sub.add_parser("explore", parents=[common], help="exploratory computations without a known target")
    e.add_argument("target", choices=("hydrogen-stability",))
    sub.add_parser("report", parents=[common], help="all constants and all suites")
    return p


def load_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
    for name in ("dims", "modes", "tol", "basis_sizes", "scales", "seed", "trials", "format", "out"):
        val = getattr(args, name, None)
        if val is not None:
            data[name] = val
    return RunConfig.from_mapping(data)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
    except (OSError, ValueError, TypeError) as exc:
        parser.error(str(exc))
    try:
        if args.command == "constants":
            rows = cmd_constants(args.target, cfg)
        elif args.command == "verify":
            rows = cmd_verify(args.suite, cfg)
        elif args.command == "explore":
            rows = cmd_explore(args.target, cfg)
        else:
            rows = cmd_report(cfg)
    except ValueError as exc:
        rows = [error_row(f"{args.command}", exc)]
    write_report(render(rows, cfg), cfg.out)
    failed = [r for r in rows if r["status"] != "pass"]
    for r in failed:
        print(f"FAIL {r['name']} dim={r['dim']} mode={r['mode']}", file=sys.stderr)
    return 0 if not failed else 1


if __name__ == "__main__":
    sys.exit(main())
