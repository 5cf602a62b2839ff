"""Command-line front end.

Subcommands
-----------
verify      run verification suites and write a JSON report (exit 0 iff all pass)
compute     dump the monic sequence, eigenvalue matrices and recurrence data
deform      dump the deformed pair and its certificates
bench       time the construction strategies and write CSV
quadrature  dump a Gauss-Jacobi rule as CSV

Exit codes: 0 success, 1 a check failed, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__
from . import krawtchouk as kr
from .deform import (CONVENTIONS, DERIVED, DeformationError, conjugation_residual,
                     deformed_weight, intertwining_residual, scalar_weight_ode_residual)
from .engine import (INTERTWINED, STRATEGIES, DeformationChain, bench, commuting_E_check,
                     eigen_check, gamma_operator, gamma_pair, monic_mvops, a1_identification,
                     raising_check, rodrigues, scalar_shift_ops, shift_check, symmetry_check,
                     three_term)
from .families import (CORRECTED, FamilyError, c1_gamma_closed, make_family, su2_gamma2_closed,
                       su2_lambda)
from .linalg_poly import MatPoly
from .quadrature import gauss_jacobi_rule

SUITES = ("all", "deform", "ortho", "eigen", "recurrence", "symmetry", "gamma", "shift",
          "rodrigues", "raising", "commutator", "krawtchouk")

# default tolerances, all multiplied by --tolerance-scale
TOL_EXACT_FLOAT = 1e-10
TOL_INVERSE = 1e-9
TOL_RODRIGUES = 1e-8
TOL_STRUCTURAL = 1e-12


class ConfigError(ValueError):
    """Invalid command-line configuration (exit code 2)."""


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    family: str
    params: dict
    kappa: float = 0.0
    d_max: int = 8
    order: int | None = None
    tolerance_scale: float = 1.0
    seed: int = 0
    convention: str = DERIVED
    suite: str = "all"
    two_ell: int | None = None
    out: str | None = None

    def to_json(self) -> dict:
        params = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.params.items()}
        return {"family": self.family, "params": params, "kappa": self.kappa,
                "d_max": self.d_max, "order": self.order, "tolerance_scale": self.tolerance_scale,
                "seed": self.seed, "convention": self.convention, "suite": self.suite,
                "two_ell": self.two_ell}


def _parse_ell(text: str) -> Fraction:
    try:
        ell = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"--ell must be a half-integer such as 3/2, got {text!r}") from exc
    if ell < 0 or (2 * ell).denominator != 1:
        raise ConfigError(f"--ell must be a nonnegative half-integer, got {text!r}")
    return ell


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fam = ns.family
    if fam == "su2":
        if ns.ell is None:
            raise ConfigError("family su2 needs --ell")
        params = {"ell": _parse_ell(ns.ell)}
    elif fam == "a1":
        if None in (ns.n, ns.m, ns.i):
            raise ConfigError("family a1 needs --n, --m and --i")
        params = {"n": ns.n, "m": ns.m, "i": ns.i}
    elif fam == "c1":
        if ns.n is None:
            raise ConfigError("family c1 needs --n")
        params = {"n": ns.n}
    else:
        params = {"alpha": ns.alpha, "beta": ns.beta}
    if ns.kappa < 0:
        raise ConfigError(f"--kappa must be nonnegative, got {ns.kappa}")
    if ns.dmax < 0:
        raise ConfigError(f"--dmax must be nonnegative, got {ns.dmax}")
    if ns.tolerance_scale <= 0:
        raise ConfigError("--tolerance-scale must be positive")
    cfg = RunConfig(fam, params, float(ns.kappa), ns.dmax, ns.order, ns.tolerance_scale,
                    ns.seed, ns.convention, getattr(ns, "suite", "all"),
                    getattr(ns, "two_ell", None), getattr(ns, "out", None))
    try:
        make_family(fam, **params)
    except FamilyError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


# ---------------------------------------------------------------------------
# reports


@dataclass
class Check:
    id: str
    reference: str
    params: dict
    residual: float | str | None
    tolerance: float | None
    status: str
    kind: str = "float"
    reason: str | None = None

    def to_json(self) -> dict:
        out = {"id": self.id, "reference": self.reference, "params": self.params,
               "residual": self.residual, "tolerance": self.tolerance,
               "status": self.status, "kind": self.kind}
        if self.reason is not None:
            out["reason"] = self.reason
        return out


@dataclass
class Report:
    config: RunConfig
    checks: list[Check] = field(default_factory=list)

    def add(self, cid: str, ref: str, residual: float, tol: float, params: dict | None = None):
        tol = tol * self.config.tolerance_scale
        ok = residual is not None and not math.isnan(residual) and residual < tol
        self.checks.append(Check(cid, ref, params or {}, float(residual), tol,
                                 "pass" if ok else "fail"))

    def add_flag(self, cid: str, ref: str, ok: bool, params: dict | None = None):
        self.checks.append(Check(cid, ref, params or {}, None, None,
                                 "pass" if ok else "fail", kind="bool"))

    def add_exact(self, rep: kr.Report):
        residual = kr.fmt(Fraction(len(rep.failures)))
        self.checks.append(Check(f"krawtchouk.{rep.name}", "exact rational identity",
                                 {"two_ell": rep.two_ell, "checked": rep.checked}, residual,
                                 None, "pass" if rep.ok else "fail", kind="rational"))

    def skip(self, cid: str, ref: str, reason: str):
        self.checks.append(Check(cid, ref, {}, None, None, "skipped", reason=reason))

    def error(self, cid: str, ref: str, exc: Exception):
        self.checks.append(Check(cid, ref, {}, None, None, "fail",
                                 reason=f"{type(exc).__name__}: {exc}"))

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_json(self) -> dict:
        return {"version": __version__, "config": self.config.to_json(),
                "checks": [c.to_json() for c in self.checks]}


# ---------------------------------------------------------------------------
# suites


class Context:
    """Lazily built objects shared between suites."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.fam = make_family(cfg.family, **cfg.params)
        self.chain = DeformationChain(self.fam, cfg.kappa, cfg.convention)
        self._seqs: dict[int, object] = {}
        self._gamma = None

    def seq(self, j: int = 0):
        if j not in self._seqs:
            self._seqs[j] = monic_mvops(self.chain[j], self.cfg.d_max, self.cfg.order)
        return self._seqs[j]

    def gamma(self):
        if self._gamma is None:
            self._gamma = gamma_pair(self.chain[0], self.chain[1])
        return self._gamma


def suite_deform(ctx: Context, rep: Report):
    df = ctx.chain[0]
    k = ctx.cfg.kappa
    rep.add("deform.tsym", "diagonal weight constant commutes with the potential",
            df.certificates["tsym_residual"], TOL_INVERSE, {"kappa": k})
    rep.add_flag("deform.positivity", "weight constant positive definite",
                 bool(df.certificates["positivity"]), {"kappa": k})
    rep.add("deform.wpol_fit", "weight factor is polynomial", df.certificates["wpol_fit_residual"],
            TOL_EXACT_FLOAT, {"kappa": k})
    rep.add("deform.conjugation", "radial operator round trip",
            conjugation_residual(ctx.fam, k, ctx.cfg.convention), TOL_INVERSE, {"kappa": k})
    rep.add("deform.scalar_weight_ode", "scalar weight drift relation",
            scalar_weight_ode_residual(ctx.fam, k), TOL_STRUCTURAL, {"kappa": k})
    rng = np.random.default_rng(ctx.cfg.seed)
    worst = 0.0
    for _ in range(10):
        P = MatPoly(rng.standard_normal((ctx.cfg.d_max + 1, ctx.fam.N, ctx.fam.N)))
        worst = max(worst, max(intertwining_residual(P, ctx.fam, k, s) for s in (1, 2, 3)))
    rep.add("deform.intertwining", "derivative intertwines the deformed operators", worst,
            TOL_STRUCTURAL, {"kappa": k, "seed": ctx.cfg.seed})


def suite_ortho(ctx: Context, rep: Report):
    rep.add("ortho.cross_gram", "monic sequence orthogonality", ctx.seq().ortho_residual,
            TOL_INVERSE, {"d_max": ctx.cfg.d_max})


def suite_eigen(ctx: Context, rep: Report):
    seq = ctx.seq()
    eig = eigen_check(seq, ctx.chain[0].D)
    rep.add("eigen.hypergeometric", "monic polynomials are eigenfunctions", eig.residual,
            TOL_INVERSE, {"d_max": ctx.cfg.d_max})
    if ctx.cfg.family == "su2" and ctx.cfg.kappa == 0:
        ell = ctx.cfg.params["ell"]
        err = max(float(np.max(np.abs(lam - su2_lambda(ell, d)))) for d, lam in enumerate(eig.lambdas))
        rep.add("eigen.su2_closed_form", "closed-form su2 eigenvalues", err, TOL_EXACT_FLOAT)


def suite_recurrence(ctx: Context, rep: Report):
    if ctx.cfg.d_max < 2:
        rep.skip("recurrence.three_term", "three-term recurrence", "needs d_max >= 2")
        return
    rep.add("recurrence.three_term", "three-term recurrence", three_term(ctx.seq()).residual,
            TOL_INVERSE, {"d_max": ctx.cfg.d_max})


def suite_symmetry(ctx: Context, rep: Report):
    seq = ctx.seq()
    rep.add("symmetry.hypergeometric", "operator symmetric for the weight",
            symmetry_check(seq, ctx.chain[0].D), TOL_INVERSE)
    gp = ctx.gamma()
    rep.add("symmetry.gamma_operator", "second-order operator built from the shift pair",
            symmetry_check(seq, gamma_operator(gp.gamma2, gp.gamma1)), TOL_INVERSE)


def suite_gamma(ctx: Context, rep: Report):
    gp = ctx.gamma()
    k = ctx.cfg.kappa
    rep.add("gamma.degree_two_fit", "degree-two shift polynomial", gp.residual2, TOL_EXACT_FLOAT,
            {"kappa": k})
    rep.add("gamma.degree_one_fit", "degree-one shift polynomial", gp.residual1, TOL_EXACT_FLOAT,
            {"kappa": k})
    rep.add("gamma.weight_shift", "next weight equals weight times degree-two polynomial",
            gp.w_shift_residual, TOL_INVERSE, {"kappa": k})
    rep.add("gamma.weight_derivative", "derivative relation between the shift pair",
            gp.w_derivative_residual, TOL_INVERSE, {"kappa": k})
    if ctx.cfg.family == "c1":
        g2, g1 = c1_gamma_closed(ctx.cfg.params["n"], k)
        rep.add("gamma.c1_closed_form", "c1 closed-form shift pair",
                max(gp.gamma2.distance(g2), gp.gamma1.distance(g1)), TOL_EXACT_FLOAT)
    if ctx.cfg.family == "su2" and ctx.cfg.params["ell"] > 0:
        ys = np.linspace(0.05, 0.95, 19)
        closed = su2_gamma2_closed(ctx.cfg.params["ell"], k + 1, ys, CORRECTED)
        rep.add("gamma.su2_closed_form", "su2 banded degree-two polynomial (corrected prefactor)",
                float(np.max(np.abs(gp.gamma2(ys) - closed))), TOL_INVERSE)


def suite_shift(ctx: Context, rep: Report):
    res = shift_check(ctx.chain[0], ctx.chain[1], ctx.cfg.d_max, ctx.seq())
    rep.add("shift.derivative", "derivative maps the sequence to the next one", res, TOL_INVERSE,
            {"d_max": ctx.cfg.d_max})
    if ctx.cfg.family == "jacobi":
        p = ctx.cfg.params
        for name, r in scalar_shift_ops(p["alpha"], p["beta"], ctx.cfg.d_max).items():
            if math.isnan(r):
                rep.skip(f"shift.scalar_{name}", "scalar first-order shift",
                         "shifted exponent not integrable")
            else:
                rep.add(f"shift.scalar_{name}", "scalar first-order shift", r, TOL_EXACT_FLOAT)
    if ctx.cfg.family == "a1" and float(ctx.cfg.kappa).is_integer() and ctx.cfg.kappa > 0:
        p = ctx.cfg.params
        ident = a1_identification(p["n"], p["m"], p["i"], int(ctx.cfg.kappa), min(ctx.cfg.d_max, 6))
        rep.add("shift.a1_identification", "a1 parameter shift up to constant congruence",
                max(ident.weight_gauged, ident.polys_gauged), TOL_INVERSE)


def suite_rodrigues(ctx: Context, rep: Report):
    top = min(ctx.cfg.d_max, 5)
    worst, fit = 0.0, 0.0
    for d in range(top + 1):
        r = rodrigues(ctx.chain, d, 0, ctx.seq())
        worst, fit = max(worst, r.residual), max(fit, r.fit_residual)
    rep.add("rodrigues.vs_gram_schmidt", "Rodrigues formula", worst, TOL_RODRIGUES, {"d_max": top})
    rep.add("rodrigues.quotient_fit", "Rodrigues quotient is polynomial", fit, TOL_RODRIGUES,
            {"d_max": top})


def suite_raising(ctx: Context, rep: Report):
    top = min(ctx.cfg.d_max, 5)
    rr = raising_check(ctx.chain, top, seed=ctx.cfg.seed)
    rep.add("raising.adjoint", "derivative adjoint is the raising operator", rr.adjoint_residual,
            TOL_RODRIGUES, {"d_max": top, "seed": ctx.cfg.seed})
    rep.add("raising.relation", "raising operator on the next sequence", rr.relation_residual,
            TOL_RODRIGUES, {"d_max": top})
    rep.add("raising.gamma1", "degree-one polynomial from the monic sequence", rr.gamma1_residual,
            TOL_RODRIGUES)


def suite_commutator(ctx: Context, rep: Report):
    if ctx.cfg.family != "su2" or ctx.cfg.params["ell"] == 0:
        rep.skip("commutator.first_order", "commuting first-order operator",
                 "only defined for su2 with ell >= 1/2")
        return
    d = min(ctx.cfg.d_max, 6)
    cr = commuting_E_check(ctx.cfg.params["ell"], ctx.cfg.kappa, d, variant=INTERTWINED)
    p = {"nu": ctx.cfg.kappa, "variant": INTERTWINED}
    rep.add("commutator.vanishes", "first-order operator commutes", cr.commutator_residual,
            TOL_EXACT_FLOAT, p)
    rep.add("commutator.eigen", "monic polynomials are eigenfunctions", cr.eigen_residual,
            TOL_INVERSE, p)
    rep.add("commutator.eigenvalue", "closed-form eigenvalue", cr.eigenvalue_residual,
            TOL_INVERSE, p)
    rep.add("commutator.symmetry", "first-order operator symmetric", cr.symmetry_same,
            TOL_INVERSE, p)


def suite_krawtchouk(ctx: Context, rep: Report):
    if ctx.cfg.two_ell is not None:
        two_ells = [ctx.cfg.two_ell]
    elif ctx.cfg.family == "su2":
        two_ells = [int(2 * ctx.cfg.params["ell"])]
    else:
        rep.skip("krawtchouk", "exact rational identity", "needs su2 or --two-ell")
        return
    for N in two_ells:
        for r in kr.run_all(N):
            rep.add_exact(r)


SUITE_FUNCS: dict[str, Callable[[Context, Report], None]] = {
    "deform": suite_deform, "ortho": suite_ortho, "eigen": suite_eigen,
    "recurrence": suite_recurrence, "symmetry": suite_symmetry, "gamma": suite_gamma,
    "shift": suite_shift, "rodrigues": suite_rodrigues, "raising": suite_raising,
    "commutator": suite_commutator, "krawtchouk": suite_krawtchouk,
}


def run_verify(cfg: RunConfig) -> Report:
    rep = Report(cfg)
    ctx = Context(cfg)
    names = list(SUITE_FUNCS) if cfg.suite == "all" else [cfg.suite]
    for name in names:
        try:
            SUITE_FUNCS[name](ctx, rep)
        except (DeformationError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
            rep.error(name, "suite aborted", exc)
    return rep


# ---------------------------------------------------------------------------
# subcommands


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _mat(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def cmd_verify(cfg: RunConfig) -> int:
    rep = run_verify(cfg)
    _emit(json.dumps(rep.to_json(), indent=2) + "\n", cfg.out)
    return 0 if rep.ok else 1


def cmd_compute(cfg: RunConfig) -> int:
    ctx = Context(cfg)
    seq = ctx.seq()
    eig = eigen_check(seq, ctx.chain[0].D)
    out = {"version": __version__, "config": cfg.to_json(), "family": ctx.fam.label(),
           **seq.to_json(), "Lambda": [_mat(m) for m in eig.lambdas],
           "eigen_residual": eig.residual}
    if cfg.d_max >= 2:
        rec = three_term(seq)
        out["recurrence"] = {"B": [_mat(b) for b in rec.B], "C": [_mat(c) for c in rec.C],
                             "residual": rec.residual}
    _emit(json.dumps(out, indent=2) + "\n", cfg.out)
    return 0


def cmd_deform(cfg: RunConfig) -> int:
    fam = make_family(cfg.family, **cfg.params)
    df = deformed_weight(fam, cfg.kappa, cfg.convention)
    _emit(json.dumps(df.to_json(), indent=2) + "\n", cfg.out)
    return 0


def cmd_bench(cfg: RunConfig, strategies) -> int:
    fam = make_family(cfg.family, **cfg.params)
    rows = bench(deformed_weight(fam, cfg.kappa, cfg.convention), cfg.d_max, strategies)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["degree", "strategy", "wall_time_ms", "max_residual"],
                       lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _emit(buf.getvalue(), cfg.out)
    return 0


def cmd_quadrature(alpha: float, beta: float, order: int, out: str | None) -> int:
    _emit(gauss_jacobi_rule(alpha, beta, order).to_csv(), out)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _family_args(p: argparse.ArgumentParser):
    p.add_argument("--family", choices=["su2", "a1", "c1", "jacobi"], required=True)
    p.add_argument("--ell", help="half-integer spin for su2, e.g. 3/2")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--alpha", type=float, default=0.0, help="exponent of (1 - y) for jacobi")
    p.add_argument("--beta", type=float, default=0.0, help="exponent of y for jacobi")
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--dmax", type=int, default=8)
    p.add_argument("--order", type=int, default=None, help="quadrature order override")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance-scale", type=float, default=1.0)
    p.add_argument("--convention", choices=CONVENTIONS, default=DERIVED)
    p.add_argument("--out", default=None, help="output path (default stdout)")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mvop", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run verification suites")
    _family_args(v)
    v.add_argument("--suite", choices=SUITES, default="all")
    v.add_argument("--two-ell", type=int, default=None, help="size parameter for the exact suite")

    c = sub.add_parser("compute", help="dump the monic sequence")
    _family_args(c)

    d = sub.add_parser("deform", help="dump the deformed pair")
    _family_args(d)

    b = sub.add_parser("bench", help="time the construction strategies")
    _family_args(b)
    b.add_argument("--strategy", choices=STRATEGIES, action="append",
                   help="repeatable; default all strategies")

    q = sub.add_parser("quadrature", help="dump a Gauss-Jacobi rule")
    q.add_argument("--alpha", type=float, required=True, help="exponent of (1 - y)")
    q.add_argument("--beta", type=float, required=True, help="exponent of y")
    q.add_argument("--order", type=int, required=True)
    q.add_argument("--out", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        if ns.command == "quadrature":
            if ns.order < 1 or ns.alpha <= -1 or ns.beta <= -1:
                raise ConfigError("quadrature needs order >= 1 and exponents > -1")
            return cmd_quadrature(ns.alpha, ns.beta, ns.order, ns.out)
        cfg = config_from_args(ns)
        if ns.command == "verify":
            if cfg.two_ell is not None and cfg.two_ell < 0:
                raise ConfigError("--two-ell must be nonnegative")
            return cmd_verify(cfg)
        if ns.command == "compute":
            return cmd_compute(cfg)
        if ns.command == "deform":
            return cmd_deform(cfg)
        return cmd_bench(cfg, ns.strategy or list(STRATEGIES))
    except ConfigError as exc:
        print(f"mvop: configuration error: {exc}", file=sys.stderr)
        return 2
    except DeformationError as exc:
        print(f"mvop: deformation rejected: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
